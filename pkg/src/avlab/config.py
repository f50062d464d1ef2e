"""TOML run configuration: loading, exhaustive validation, and hashing.

Every field is checked against the owning module's preconditions at load
time and unknown keys are rejected. The config hash is the SHA-256 of the
raw config bytes, so it changes iff any byte of the file changes; commands
print it in all outputs.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from avlab.control import ControllerGains
from avlab.detection import DetectorConfig
from avlab.dynamics import ActuatorLimits
from avlab.environment import (
    AttackSchedule,
    EnvConfig,
    RewardWeights,
    SCHEDULE_PRESETS,
)
from avlab.errors import ConfigError
from avlab.rl.config import TrainerConfig

DEFAULT_TOML = """\
# avlab run configuration (defaults)

[vehicle]
dt = 0.1
L = 1.0
v_max = 2.0
phi_max = 0.7853981633974483
a_max = 1.0

[noise]
Q = [[1e-4, 0.0, 0.0], [0.0, 1e-4, 0.0], [0.0, 0.0, 1e-4]]
R = [[1e-2, 0.0], [0.0, 2.5e-3]]
seed = 0

[controller]
k_x = 1.0
k_y = 4.0
k_theta = 2.0
v_floor = 0.1

[controller.trajectory]
radius = 5.0
speed = 1.0
center = [0.0, 0.0]
landmark = [0.0, 0.0]

[detector]
false_alarm_rate = 0.05
window = 1
dof = 3

[schedule]
preset = "long"

[reward]
Q_track = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.1]]
R_energy = [[0.01, 0.0], [0.0, 0.01]]
alpha = 10.0
energy_on = "d"

[ppo]
learning_rate = 3e-4
gamma = 0.99
gae_lambda = 0.95
clip_epsilon = 0.2
epochs_per_batch = 10
batch_size = 1000
minibatch_size = 250
entropy_coef = 0.01
value_coef = 0.5
target_kl = 0.1
reward_scale = 0.01

[sac]
learning_rate = 3e-4
gamma = 0.99
tau = 0.005
entropy_alpha = 0.2
auto_entropy = true
target_entropy = -2.0
replay_capacity = 100000
batch_size = 256
warmup_steps = 1000
updates_per_step = 1
reward_scale = 0.01

[training]
episodes = 50
horizon = 500
seeds = [0, 1, 2]
"""

_SCHEMA = {
    "vehicle": {"dt", "L", "v_max", "phi_max", "a_max"},
    "noise": {"Q", "R", "seed"},
    "controller": {"k_x", "k_y", "k_theta", "v_floor", "trajectory"},
    "controller.trajectory": {"radius", "speed", "center", "landmark"},
    "detector": {"false_alarm_rate", "window", "dof"},
    "schedule": {"preset", "period", "active_len", "offset"},
    "reward": {"Q_track", "R_energy", "alpha", "energy_on"},
    "ppo": {
        "learning_rate",
        "gamma",
        "gae_lambda",
        "clip_epsilon",
        "epochs_per_batch",
        "batch_size",
        "minibatch_size",
        "entropy_coef",
        "value_coef",
        "target_kl",
        "reward_scale",
    },
    "sac": {
        "learning_rate",
        "gamma",
        "tau",
        "entropy_alpha",
        "auto_entropy",
        "target_entropy",
        "replay_capacity",
        "batch_size",
        "warmup_steps",
        "updates_per_step",
        "reward_scale",
    },
    "training": {"episodes", "horizon", "seeds"},
}


@dataclass
class RunConfig:
    """Validated run configuration plus the hash of its source bytes."""

    env: EnvConfig
    ppo: TrainerConfig
    sac: TrainerConfig
    seeds: tuple[int, ...]
    schedule_name: str | None
    config_hash: str


def config_hash(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def _reject_unknown(data: dict) -> None:
    for section, content in data.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(content, dict):
            raise ConfigError(f"section [{section}] must be a table")
        for key, value in content.items():
            qualified = f"{section}.{key}"
            if qualified in _SCHEMA:
                for sub in value:
                    if sub not in _SCHEMA[qualified]:
                        raise ConfigError(f"unknown config key {qualified}.{sub}")
            elif key not in _SCHEMA[section]:
                raise ConfigError(f"unknown config key {qualified}")


def _num(section: dict, key: str, default, *, positive=False, finite=True):
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number")
    value = float(value)
    if finite and not math.isfinite(value):
        raise ConfigError(f"{key} must be finite")
    if positive and value <= 0:
        raise ConfigError(f"{key} must be positive")
    return value


def _int(section: dict, key: str, default, *, minimum=None):
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key} must be >= {minimum}")
    return int(value)


def _matrix(section: dict, key: str, default: np.ndarray, dim: int) -> np.ndarray:
    value = section.get(key)
    if value is None:
        return default
    m = np.asarray(value, dtype=float)
    if m.shape != (dim, dim):
        raise ConfigError(f"{key} must be a {dim}x{dim} matrix")
    return m


def _pair(section: dict, key: str, default) -> tuple[float, float]:
    value = section.get(key)
    if value is None:
        return default
    if not (isinstance(value, list) and len(value) == 2):
        raise ConfigError(f"{key} must be a 2-element array")
    return (float(value[0]), float(value[1]))


def _build_schedule(section: dict) -> tuple[AttackSchedule | None, str | None]:
    preset = section.get("preset")
    explicit = {k for k in ("period", "active_len") if k in section}
    if preset is not None and explicit:
        raise ConfigError("schedule: give either a preset or explicit period/active_len, not both")
    if preset is not None:
        if preset not in SCHEDULE_PRESETS:
            raise ConfigError(
                f"unknown schedule preset {preset!r}; expected one of {sorted(SCHEDULE_PRESETS)}"
            )
        base = SCHEDULE_PRESETS[preset]
        offset = _int(section, "offset", base.offset, minimum=0)
        return AttackSchedule(base.period, base.active_len, offset), preset
    if explicit:
        period = _int(section, "period", None, minimum=1)
        active_len = _int(section, "active_len", None, minimum=1)
        offset = _int(section, "offset", 0, minimum=0)
        return AttackSchedule(period, active_len, offset), None
    return SCHEDULE_PRESETS["long"], "long"


def _trainer_from(section: dict, training: dict, algo: str) -> TrainerConfig:
    defaults = TrainerConfig()
    common = dict(
        gamma=_num(section, "gamma", defaults.gamma, positive=True),
        learning_rate=_num(section, "learning_rate", defaults.learning_rate, positive=True),
        reward_scale=_num(section, "reward_scale", defaults.reward_scale, positive=True),
        episodes=_int(training, "episodes", defaults.episodes, minimum=0),
    )
    if algo == "ppo":
        return TrainerConfig(
            **common,
            gae_lambda=_num(section, "gae_lambda", defaults.gae_lambda, positive=True),
            clip_epsilon=_num(section, "clip_epsilon", defaults.clip_epsilon, positive=True),
            epochs_per_batch=_int(section, "epochs_per_batch", defaults.epochs_per_batch, minimum=1),
            batch_size=_int(section, "batch_size", defaults.batch_size, minimum=1),
            minibatch_size=_int(section, "minibatch_size", defaults.minibatch_size, minimum=1),
            entropy_coef=_num(section, "entropy_coef", defaults.entropy_coef),
            value_coef=_num(section, "value_coef", defaults.value_coef),
            target_kl=_num(section, "target_kl", defaults.target_kl),
        )
    auto = section.get("auto_entropy", defaults.auto_entropy)
    if not isinstance(auto, bool):
        raise ConfigError("auto_entropy must be a boolean")
    return TrainerConfig(
        **common,
        tau=_num(section, "tau", defaults.tau, positive=True),
        entropy_alpha=_num(section, "entropy_alpha", defaults.entropy_alpha, positive=True),
        auto_entropy=auto,
        target_entropy=_num(section, "target_entropy", defaults.target_entropy),
        replay_capacity=_int(section, "replay_capacity", defaults.replay_capacity, minimum=1),
        sac_batch_size=_int(section, "batch_size", defaults.sac_batch_size, minimum=1),
        warmup_steps=_int(section, "warmup_steps", defaults.warmup_steps, minimum=0),
        updates_per_step=_int(section, "updates_per_step", defaults.updates_per_step, minimum=1),
    )


def parse_config(raw: bytes) -> RunConfig:
    try:
        data = tomllib.loads(raw.decode())
    except (UnicodeDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    _reject_unknown(data)

    vehicle = data.get("vehicle", {})
    noise = data.get("noise", {})
    controller = data.get("controller", {})
    trajectory = controller.get("trajectory", {})
    detector = data.get("detector", {})
    schedule_sec = data.get("schedule", {})
    reward = data.get("reward", {})
    training = data.get("training", {})

    env_defaults = EnvConfig()
    limits = ActuatorLimits(
        v_max=_num(vehicle, "v_max", env_defaults.limits.v_max, positive=True),
        phi_max=_num(vehicle, "phi_max", env_defaults.limits.phi_max, positive=True),
    )
    schedule, schedule_name = _build_schedule(schedule_sec)
    env = EnvConfig(
        dt=_num(vehicle, "dt", env_defaults.dt, positive=True),
        L=_num(vehicle, "L", env_defaults.L, positive=True),
        limits=limits,
        a_max=_num(vehicle, "a_max", env_defaults.a_max, positive=True),
        Q_proc=_matrix(noise, "Q", env_defaults.Q_proc, 3),
        R_meas=_matrix(noise, "R", env_defaults.R_meas, 2),
        seed=_int(noise, "seed", env_defaults.seed),
        gains=ControllerGains(
            k_x=_num(controller, "k_x", 1.0, positive=True),
            k_y=_num(controller, "k_y", 4.0, positive=True),
            k_theta=_num(controller, "k_theta", 2.0, positive=True),
        ),
        v_floor=_num(controller, "v_floor", env_defaults.v_floor, positive=True),
        radius=_num(trajectory, "radius", env_defaults.radius, positive=True),
        speed=_num(trajectory, "speed", env_defaults.speed, positive=True),
        center=_pair(trajectory, "center", env_defaults.center),
        landmark=_pair(trajectory, "landmark", env_defaults.landmark),
        detector=DetectorConfig(
            false_alarm_rate=_num(detector, "false_alarm_rate", 0.05, positive=True),
            window=_int(detector, "window", 1, minimum=1),
            dof=_int(detector, "dof", 3, minimum=1),
        ),
        schedule=schedule,
        weights=RewardWeights(
            Q_track=_matrix(reward, "Q_track", RewardWeights().Q_track, 3),
            R_energy=_matrix(reward, "R_energy", RewardWeights().R_energy, 2),
            alpha=_num(reward, "alpha", 10.0, positive=True),
        ),
        horizon=_int(training, "horizon", env_defaults.horizon, minimum=1),
        energy_on=str(reward.get("energy_on", "d")),
    )

    seeds = training.get("seeds", [0, 1, 2])
    if not (isinstance(seeds, list) and seeds and all(isinstance(s, int) for s in seeds)):
        raise ConfigError("training.seeds must be a non-empty list of integers")

    return RunConfig(
        env=env,
        ppo=_trainer_from(data.get("ppo", {}), training, "ppo"),
        sac=_trainer_from(data.get("sac", {}), training, "sac"),
        seeds=tuple(seeds),
        schedule_name=schedule_name,
        config_hash=config_hash(raw),
    )


def load_config(path: str | Path | None) -> RunConfig:
    """Parse and validate a TOML config; `None` loads the built-in defaults."""
    if path is None:
        return parse_config(DEFAULT_TOML.encode())
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config(p.read_bytes())


def with_scenario(run: RunConfig, scenario: str) -> RunConfig:
    """Run config with the schedule replaced by a named preset."""
    if scenario not in SCHEDULE_PRESETS:
        raise ConfigError(f"unknown scenario {scenario!r}; expected one of {sorted(SCHEDULE_PRESETS)}")
    env = replace(run.env, schedule=SCHEDULE_PRESETS[scenario])
    return replace(run, env=env, schedule_name=scenario)


def without_schedule(run: RunConfig) -> RunConfig:
    """Run config with the attack schedule disabled (baseline runs)."""
    return replace(run, env=replace(run.env, schedule=None), schedule_name=None)
