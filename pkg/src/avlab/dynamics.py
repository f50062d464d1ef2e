"""Kinematic bicycle model with an additive actuator false-data channel.

State is planar pose (x, y, theta). One simulation step forward-Euler
integrates the bicycle kinematics over dt with the *effective* command,
i.e. the commanded input plus the injected attack signal, saturated to
the physical actuator limits. The range-bearing measurement observes a
single fixed landmark.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from avlab.angles import wrap_angle
from avlab.errors import ConfigError, DegenerateGeometryError, DynamicsFault

EPSILON_RANGE = 1e-6


@dataclass(frozen=True)
class VehicleState:
    """Planar pose: position in meters, heading in radians, wrapped to (-pi, pi]."""

    x: float
    y: float
    theta: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta], dtype=float)

    @classmethod
    def from_array(cls, v) -> "VehicleState":
        return cls(float(v[0]), float(v[1]), float(wrap_angle(v[2])))


@dataclass(frozen=True)
class ControlInput:
    """Speed command (m/s) and steering angle command (rad)."""

    v: float
    phi: float


@dataclass(frozen=True)
class AttackSignal:
    """Additive injection on the actuator channel: (speed, steering)."""

    v_d: float
    phi_d: float

    def as_array(self) -> np.ndarray:
        return np.array([self.v_d, self.phi_d], dtype=float)


ZERO_ATTACK = AttackSignal(0.0, 0.0)


@dataclass(frozen=True)
class Measurement:
    """Range (m, >= 0) and bearing (rad in (-pi, pi]) to the landmark."""

    range: float
    bearing: float

    def as_array(self) -> np.ndarray:
        return np.array([self.range, self.bearing], dtype=float)


@dataclass(frozen=True)
class ActuatorLimits:
    """Physical saturation of the actuators; applied to commanded + injected input."""

    v_max: float = 2.0
    phi_max: float = math.pi / 4

    def clamp(self, v: float, phi: float) -> tuple[float, float]:
        v = min(max(v, 0.0), self.v_max)
        phi = min(max(phi, -self.phi_max), self.phi_max)
        return v, phi


def _check_covariance(name: str, m: np.ndarray, dim: int, positive_definite: bool) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (dim, dim):
        raise ConfigError(f"{name} must be {dim}x{dim}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ConfigError(f"{name} has non-finite entries")
    if np.max(np.abs(m - m.T)) > 1e-12:
        raise ConfigError(f"{name} is not symmetric within 1e-12")
    eig = np.linalg.eigvalsh(m)
    if positive_definite:
        # Zero covariance is tolerated so that exactly-noise-free runs are expressible.
        if eig.min() < 0.0:
            raise ConfigError(f"{name} must be positive semidefinite, min eigenvalue {eig.min():g}")
    elif eig.min() < -1e-12:
        raise ConfigError(f"{name} must be positive semidefinite, min eigenvalue {eig.min():g}")
    return m


def _sqrt_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return v @ np.diag(np.sqrt(np.clip(w, 0.0, None)))


@dataclass
class NoiseModel:
    """Gaussian process / measurement noise with an owned, seeded generator.

    One instance per environment; the generator is not shared across threads.
    """

    Q_proc: np.ndarray
    R_meas: np.ndarray
    seed: int = 0
    _rng: np.random.Generator = field(init=False, repr=False)
    _sqrt_q: np.ndarray = field(init=False, repr=False)
    _sqrt_r: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.Q_proc = _check_covariance("Q_proc", self.Q_proc, 3, positive_definite=False)
        self.R_meas = _check_covariance("R_meas", self.R_meas, 2, positive_definite=True)
        self._sqrt_q = _sqrt_psd(self.Q_proc)
        self._sqrt_r = _sqrt_psd(self.R_meas)
        self._rng = np.random.default_rng(self.seed)

    def sample_process(self) -> np.ndarray:
        return self._sqrt_q @ self._rng.standard_normal(3)

    def sample_measurement(self) -> np.ndarray:
        return self._sqrt_r @ self._rng.standard_normal(2)

    @classmethod
    def zero(cls, seed: int = 0) -> "NoiseModel":
        return cls(np.zeros((3, 3)), np.zeros((2, 2)), seed=seed)


def effective_control(u: ControlInput, d: AttackSignal, limits: ActuatorLimits) -> ControlInput:
    """Commanded plus injected input, saturated to the actuator limits."""
    v, phi = limits.clamp(u.v + d.v_d, u.phi + d.phi_d)
    return ControlInput(v, phi)


def step(
    state: VehicleState,
    u: ControlInput,
    d: AttackSignal = ZERO_ATTACK,
    noise: NoiseModel | None = None,
    dt: float = 0.1,
    L: float = 1.0,
    limits: ActuatorLimits = ActuatorLimits(),
) -> VehicleState:
    """One forward-Euler step of the bicycle kinematics under the effective command.

    `noise=None` means an exactly noise-free step.
    """
    if dt <= 0.0:
        raise ConfigError(f"dt must be positive, got {dt}")
    if L <= 0.0:
        raise ConfigError(f"wheelbase must be positive, got {L}")
    sv = state.as_array()
    if not np.all(np.isfinite(sv)) or not all(
        math.isfinite(c) for c in (u.v, u.phi, d.v_d, d.phi_d)
    ):
        raise DynamicsFault("non-finite state or command")
    eff = effective_control(u, d, limits)
    w = noise.sample_process() if noise is not None else np.zeros(3)
    x = state.x + dt * eff.v * math.cos(state.theta) + w[0]
    y = state.y + dt * eff.v * math.sin(state.theta) + w[1]
    theta = wrap_angle(state.theta + dt * (eff.v / L) * math.tan(eff.phi) + w[2])
    return VehicleState(x, y, float(theta))


def measure(
    state: VehicleState,
    landmark,
    noise: NoiseModel | None = None,
) -> Measurement:
    """Range and bearing from the vehicle to the landmark, with additive noise."""
    px, py = float(landmark[0]), float(landmark[1])
    dx = px - state.x
    dy = py - state.y
    rng = math.hypot(dx, dy)
    if rng <= EPSILON_RANGE:
        raise DegenerateGeometryError(
            f"vehicle at ({state.x:g}, {state.y:g}) coincides with landmark ({px:g}, {py:g})"
        )
    q = noise.sample_measurement() if noise is not None else np.zeros(2)
    bearing = wrap_angle(math.atan2(dy, dx) - state.theta + q[1])
    return Measurement(max(rng + q[0], 0.0), float(bearing))


def jacobian_f_state(state: VehicleState, u_effective: ControlInput, dt: float, L: float) -> np.ndarray:
    """d(step)/d(state) of the noise-free Euler step at the given effective command."""
    v = u_effective.v
    return np.array(
        [
            [1.0, 0.0, -dt * v * math.sin(state.theta)],
            [0.0, 1.0, dt * v * math.cos(state.theta)],
            [0.0, 0.0, 1.0],
        ]
    )


def jacobian_g_state(state: VehicleState, landmark) -> np.ndarray:
    """d(measure)/d(state): rows are range and bearing."""
    px, py = float(landmark[0]), float(landmark[1])
    dx = px - state.x
    dy = py - state.y
    q = dx * dx + dy * dy
    r = math.sqrt(q)
    if r <= EPSILON_RANGE:
        raise DegenerateGeometryError("landmark coincides with vehicle position")
    return np.array(
        [
            [-dx / r, -dy / r, 0.0],
            [dy / q, -dx / q, -1.0],
        ]
    )
