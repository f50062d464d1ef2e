"""The attacker's MDP: closed-loop vehicle, estimator, and detector behind a
reset/step interface.

Step order: the controller computes the command from the current belief, the
schedule gates the injected signal, the plant advances under command plus
injection, the landmark is measured, the filter predicts with the command
only and updates, the detector scores the residue, and the reward terms are
assembled. Tracking cost is charged on the true state against the reference;
energy and stealth terms accrue only on schedule-active steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from avlab import control, detection, dynamics, estimation
from avlab.control import ControllerGains, ReferencePoint
from avlab.detection import Chi2Detector, DetectorConfig, DetectorVerdict
from avlab.dynamics import (
    ActuatorLimits,
    AttackSignal,
    ControlInput,
    NoiseModel,
    VehicleState,
    ZERO_ATTACK,
)
from avlab.errors import ConfigError, DynamicsFault, UndefinedMetricError, UsageError
from avlab.estimation import BeliefState
from avlab.metrics import EpisodeTrace, TraceRecord

OBS_DIM = 10

# Fixed scale applied to the residue components of the observation so that
# typical values land at O(1).
RESIDUE_OBS_SCALE = 0.05

INITIAL_COV = 0.01


@dataclass(frozen=True)
class AttackSchedule:
    """Periodic attack windows: active_len steps active out of every period."""

    period: int
    active_len: int
    offset: int = 0

    def __post_init__(self):
        if self.period < 1 or not 0 < self.active_len <= self.period:
            raise ConfigError("schedule requires 0 < active_len <= period")

    def is_active(self, k: int) -> bool:
        return (k - self.offset) % self.period < self.active_len

    def phase(self, k: int) -> float:
        return ((k - self.offset) % self.period) / self.period


SCHEDULE_PRESETS = {
    "long": AttackSchedule(period=100, active_len=50),
    "short": AttackSchedule(period=50, active_len=10),
}


def _check_weight(name, m, dim):
    m = np.asarray(m, dtype=float)
    if m.shape != (dim, dim):
        raise ConfigError(f"{name} must be {dim}x{dim}")
    if np.max(np.abs(m - m.T)) > 1e-12 or np.linalg.eigvalsh(m).min() < -1e-12:
        raise ConfigError(f"{name} must be symmetric positive semidefinite")
    return m


@dataclass
class RewardWeights:
    """Quadratic weights of the per-step reward terms and the stealth scale."""

    Q_track: np.ndarray = field(default_factory=lambda: np.diag([1.0, 1.0, 0.1]))
    R_energy: np.ndarray = field(default_factory=lambda: 0.01 * np.eye(2))
    alpha: float = 10.0

    def __post_init__(self):
        self.Q_track = _check_weight("Q_track", self.Q_track, 3)
        self.R_energy = _check_weight("R_energy", self.R_energy, 2)
        if not self.alpha > 0.0:
            raise ConfigError("alpha must be positive")


@dataclass(frozen=True)
class StepOutcome:
    observation: np.ndarray
    reward: float
    reward_components: tuple[float, float, float]  # (j_t, j_e, j_s)
    done: bool
    verdict: DetectorVerdict
    truth: VehicleState


@dataclass
class EnvConfig:
    """Everything one closed-loop instance needs; defaults give the desk-scale lab."""

    dt: float = 0.1
    L: float = 1.0
    limits: ActuatorLimits = field(default_factory=ActuatorLimits)
    a_max: float = 1.0
    Q_proc: np.ndarray = field(default_factory=lambda: np.diag([1e-4, 1e-4, 1e-4]))
    R_meas: np.ndarray = field(default_factory=lambda: np.diag([1e-2, 2.5e-3]))
    seed: int = 0
    gains: ControllerGains = field(default_factory=ControllerGains)
    v_floor: float = 0.1
    radius: float = 5.0
    speed: float = 1.0
    center: tuple[float, float] = (0.0, 0.0)
    landmark: tuple[float, float] = (0.0, 0.0)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    schedule: Optional[AttackSchedule] = field(default_factory=lambda: SCHEDULE_PRESETS["long"])
    weights: RewardWeights = field(default_factory=RewardWeights)
    horizon: int = 500
    energy_on: str = "d"  # "d": injected signal; "u": literal commanded-input variant

    def __post_init__(self):
        if self.dt <= 0 or self.L <= 0:
            raise ConfigError("dt and L must be positive")
        if self.a_max <= 0:
            raise ConfigError("a_max must be positive")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if self.energy_on not in ("d", "u"):
            raise ConfigError("energy_on must be 'd' or 'u'")
        if self.v_floor <= 0:
            raise ConfigError("v_floor must be positive")


def reward_terms(
    state_error: np.ndarray,
    d: AttackSignal,
    u: ControlInput,
    detected: bool,
    active: bool,
    weights: RewardWeights,
    energy_on: str = "d",
) -> tuple[float, float, float, float]:
    """Per-step reward assembly: (j_t, j_e, j_s, reward) with reward = j_t - j_e + j_s."""
    e = np.asarray(state_error, dtype=float)
    j_t = float(e @ weights.Q_track @ e)
    if active:
        vec = d.as_array() if energy_on == "d" else np.array([u.v, u.phi])
        j_e = float(vec @ weights.R_energy @ vec)
        j_s = weights.alpha * (1.0 - float(detected))
    else:
        j_e = 0.0
        j_s = 0.0
    return j_t, j_e, j_s, j_t - j_e + j_s


def clamp_attack(action: AttackSignal, a_max: float) -> AttackSignal:
    return AttackSignal(
        min(max(action.v_d, -a_max), a_max),
        min(max(action.phi_d, -a_max), a_max),
    )


class AttackEnv:
    """Single-threaded environment instance; run several with distinct seeds for parallel rollouts."""

    def __init__(self, config: EnvConfig = EnvConfig()):
        self.config = config
        self._ready = False
        self._done = False

    # -- episode control ---------------------------------------------------

    def reset(self, seed: int | None = None) -> np.ndarray:
        cfg = self.config
        self._seed = cfg.seed if seed is None else int(seed)
        self.noise = NoiseModel(cfg.Q_proc, cfg.R_meas, seed=self._seed)
        ref0 = self._ref(0)
        self.truth = VehicleState(ref0.x_r, ref0.y_r, ref0.theta_r)
        self.belief = BeliefState(self.truth, INITIAL_COV * np.eye(3))
        self.detector = Chi2Detector(cfg.detector)
        self.trace = EpisodeTrace()
        self._k = 0
        self._ready = True
        self._done = False
        self._last_residue = np.zeros(3)
        self._last_detected = False
        return self._observation()

    def step(self, action: AttackSignal) -> StepOutcome:
        if not self._ready:
            raise UsageError("call reset() before step()")
        if self._done:
            raise UsageError("episode is done; call reset()")
        cfg = self.config
        k = self._k
        ref_now = self._ref(k)

        u = control.tracking_control(
            self.belief.mean, ref_now, cfg.gains, cfg.L, cfg.limits, cfg.v_floor
        )
        active = cfg.schedule.is_active(k) if cfg.schedule is not None else False
        d = clamp_attack(action, cfg.a_max) if active else ZERO_ATTACK

        self.truth = dynamics.step(self.truth, u, d, self.noise, cfg.dt, cfg.L, cfg.limits)
        z = dynamics.measure(self.truth, cfg.landmark, self.noise)

        prior = estimation.predict(self.belief, u, cfg.dt, cfg.L, cfg.Q_proc, cfg.limits)
        upd = estimation.update(prior, z, cfg.landmark, cfg.R_meas)
        r = estimation.residue(upd.belief.mean, prior.mean)
        verdict = self.detector.assess(detection.chi2_score(r, upd.residue_cov))
        self.belief = upd.belief

        ref_next = self._ref(k + 1)
        err = control.pose_error_world(self.truth, ref_next)
        j_t, j_e, j_s, reward = reward_terms(
            err, d, u, verdict.flagged, active, cfg.weights, cfg.energy_on
        )

        self._k += 1
        self._done = self._k >= cfg.horizon
        self._last_residue = r
        self._last_detected = verdict.flagged

        self.trace.append(
            TraceRecord(
                k=k,
                x=self.truth.x,
                y=self.truth.y,
                theta=self.truth.theta,
                x_ref=ref_next.x_r,
                y_ref=ref_next.y_r,
                theta_ref=ref_next.theta_r,
                bx=self.belief.mean.x,
                by=self.belief.mean.y,
                btheta=self.belief.mean.theta,
                v_cmd=u.v,
                phi_cmd=u.phi,
                v_d=d.v_d,
                phi_d=d.phi_d,
                attack_active=int(active),
                range=z.range,
                bearing=z.bearing,
                r1=r[0],
                r2=r[1],
                r3=r[2],
                chi2=verdict.score,
                threshold=verdict.threshold,
                detected=int(verdict.flagged),
                j_t=j_t,
                j_e=j_e,
                j_s=j_s,
                reward=reward,
            )
        )
        return StepOutcome(
            observation=self._observation(),
            reward=reward,
            reward_components=(j_t, j_e, j_s),
            done=self._done,
            verdict=verdict,
            truth=self.truth,
        )

    # -- helpers -----------------------------------------------------------

    def _ref(self, k: int) -> ReferencePoint:
        cfg = self.config
        return control.circle_reference(k, cfg.dt, cfg.radius, cfg.speed, cfg.center)

    def _observation(self) -> np.ndarray:
        cfg = self.config
        ref = self._ref(self._k)
        e = control.pose_error_vehicle(self.belief.mean, ref)
        phase = cfg.schedule.phase(self._k) if cfg.schedule is not None else 0.0
        obs = np.concatenate(
            [
                e,
                [ref.v_r / cfg.limits.v_max, ref.omega_r],
                self._last_residue / RESIDUE_OBS_SCALE,
                [float(self._last_detected), phase],
            ]
        )
        if obs.shape != (OBS_DIM,) or not np.all(np.isfinite(obs)):
            raise DynamicsFault("observation is malformed or non-finite")
        return obs


def objective(trace: EpisodeTrace) -> float:
    """Mean of (j_t - j_e + j_s) over the attacked steps of a trace."""
    attacked = [rec for rec in trace if rec.attack_active]
    if not attacked:
        raise UndefinedMetricError("objective is undefined without attacked steps")
    return float(np.mean([rec.j_t - rec.j_e + rec.j_s for rec in attacked]))
