"""Circular reference trajectory and the nominal tracking controller.

The controller is a standard kinematic tracking law: the pose error is
rotated into the vehicle frame, speed feeds forward plus a longitudinal
correction, yaw rate feeds forward plus lateral/heading corrections, and
the yaw-rate command is mapped to a steering angle through the bicycle
relation omega = (v / L) tan(phi). It consumes the estimator mean, never
ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from avlab.angles import wrap_angle
from avlab.dynamics import ActuatorLimits, ControlInput, VehicleState
from avlab.errors import ConfigError


@dataclass(frozen=True)
class ReferencePoint:
    x_r: float
    y_r: float
    theta_r: float
    v_r: float
    omega_r: float


@dataclass(frozen=True)
class ControllerGains:
    """Positive tracking gains: longitudinal, lateral, heading."""

    k_x: float = 1.0
    k_y: float = 4.0
    k_theta: float = 2.0

    def __post_init__(self):
        if min(self.k_x, self.k_y, self.k_theta) <= 0.0:
            raise ConfigError("controller gains must be positive")


def circle_reference(k: int, dt: float, radius: float, speed: float, center=(0.0, 0.0)) -> ReferencePoint:
    """Reference point after k steps along a circle traversed at constant speed.

    The path starts at angle 0 (east of the center) heading counterclockwise.
    """
    if not (math.isfinite(radius) and math.isfinite(speed)) or radius <= 0.0 or speed <= 0.0:
        raise ConfigError("circle radius and speed must be finite and positive")
    if dt <= 0.0:
        raise ConfigError("dt must be positive")
    a = speed * k * dt / radius
    return ReferencePoint(
        x_r=center[0] + radius * math.cos(a),
        y_r=center[1] + radius * math.sin(a),
        theta_r=float(wrap_angle(a + math.pi / 2)),
        v_r=speed,
        omega_r=speed / radius,
    )


def pose_error_vehicle(state: VehicleState, ref: ReferencePoint) -> np.ndarray:
    """Reference-minus-state error rotated into the vehicle frame: (e_x, e_y, e_theta)."""
    dx = ref.x_r - state.x
    dy = ref.y_r - state.y
    c, s = math.cos(state.theta), math.sin(state.theta)
    return np.array([c * dx + s * dy, -s * dx + c * dy, wrap_angle(ref.theta_r - state.theta)])


def pose_error_world(state: VehicleState, ref: ReferencePoint) -> np.ndarray:
    """State-minus-reference error in world coordinates with wrapped heading."""
    return np.array(
        [state.x - ref.x_r, state.y - ref.y_r, wrap_angle(state.theta - ref.theta_r)]
    )


def tracking_control(
    belief_mean: VehicleState,
    ref: ReferencePoint,
    gains: ControllerGains = ControllerGains(),
    L: float = 1.0,
    limits: ActuatorLimits = ActuatorLimits(),
    v_floor: float = 0.1,
) -> ControlInput:
    """Tracking command from the estimated pose; output respects actuator limits.

    v_floor guards the steering map phi = atan(L * omega / v) against the
    v -> 0 singularity.
    """
    e_x, e_y, e_theta = pose_error_vehicle(belief_mean, ref)
    v = ref.v_r * math.cos(e_theta) + gains.k_x * e_x
    omega = ref.omega_r + ref.v_r * (gains.k_y * e_y + gains.k_theta * math.sin(e_theta))
    phi = math.atan2(L * omega, max(v, v_floor))
    v, phi = limits.clamp(v, phi)
    return ControlInput(v, phi)
