"""Attack-simulation lab: vehicle dynamics, EKF + chi-square detection, attacker MDP, RL trainers."""

__version__ = "0.1.0"

from avlab.dynamics import AttackSignal, ControlInput, Measurement, NoiseModel, VehicleState
from avlab.environment import AttackEnv, AttackSchedule, EnvConfig, RewardWeights, StepOutcome
from avlab.estimation import BeliefState
from avlab.detection import DetectorConfig, DetectorVerdict
from avlab.metrics import EpisodeTrace, EvalReport

__all__ = [
    "AttackEnv",
    "AttackSchedule",
    "AttackSignal",
    "BeliefState",
    "ControlInput",
    "DetectorConfig",
    "DetectorVerdict",
    "EnvConfig",
    "EpisodeTrace",
    "EvalReport",
    "Measurement",
    "NoiseModel",
    "RewardWeights",
    "StepOutcome",
    "VehicleState",
]
