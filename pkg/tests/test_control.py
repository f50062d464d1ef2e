import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avlab import control, dynamics
from avlab.control import ControllerGains, circle_reference, pose_error_world, tracking_control
from avlab.dynamics import ActuatorLimits, VehicleState
from avlab.errors import ConfigError


def test_circle_reference_start():
    ref = circle_reference(0, 0.1, radius=5.0, speed=1.0, center=(0.0, 0.0))
    assert (ref.x_r, ref.y_r) == (5.0, 0.0)
    assert ref.theta_r == pytest.approx(math.pi / 2)
    assert ref.v_r == 1.0
    assert ref.omega_r == pytest.approx(0.2)


def test_circle_reference_half_lap():
    # k chosen so the arc angle is exactly pi
    k = 100
    ref = circle_reference(k, 0.1, radius=5.0, speed=math.pi / 2, center=(0.0, 0.0))
    assert ref.x_r == pytest.approx(-5.0)
    assert ref.y_r == pytest.approx(0.0, abs=1e-12)
    assert ref.theta_r == pytest.approx(-math.pi / 2)


def test_circle_reference_preconditions():
    with pytest.raises(ConfigError):
        circle_reference(0, 0.1, radius=0.0, speed=1.0)
    with pytest.raises(ConfigError):
        circle_reference(0, 0.1, radius=math.inf, speed=1.0)
    with pytest.raises(ConfigError):
        circle_reference(0, 0.1, radius=5.0, speed=-1.0)


def test_gains_must_be_positive():
    with pytest.raises(ConfigError):
        ControllerGains(k_x=0.0)


def test_pure_feedforward_when_on_reference():
    ref = circle_reference(17, 0.1, 5.0, 1.0)
    state = VehicleState(ref.x_r, ref.y_r, ref.theta_r)
    u = tracking_control(state, ref, L=1.0)
    assert u.v == pytest.approx(ref.v_r)
    assert u.phi == pytest.approx(math.atan2(1.0 * ref.omega_r, ref.v_r))


def test_positive_longitudinal_error_speeds_up():
    ref = circle_reference(0, 0.1, 5.0, 1.0)
    # move the vehicle straight behind the reference along its heading
    back = VehicleState(
        ref.x_r - 0.5 * math.cos(ref.theta_r),
        ref.y_r - 0.5 * math.sin(ref.theta_r),
        ref.theta_r,
    )
    u = tracking_control(back, ref, L=1.0)
    assert u.v > ref.v_r


def test_rest_reference():
    ref = control.ReferencePoint(1.0, 2.0, 0.5, 0.0, 0.0)
    u = tracking_control(VehicleState(1.0, 2.0, 0.5), ref, L=1.0)
    assert u.v == 0.0
    assert u.phi == 0.0


@settings(max_examples=200)
@given(
    x=st.floats(-10, 10),
    y=st.floats(-10, 10),
    theta=st.floats(-3.14, 3.14),
    k=st.integers(0, 400),
)
def test_output_respects_limits(x, y, theta, k):
    limits = ActuatorLimits()
    ref = circle_reference(k, 0.1, 5.0, 1.0)
    u = tracking_control(VehicleState(x, y, theta), ref, limits=limits)
    assert 0.0 <= u.v <= limits.v_max
    assert abs(u.phi) <= limits.phi_max


def test_noise_free_lap_tracking_cost():
    """Closed loop without attack or noise: mean J_t (Q = I) over one lap
    stays below 1e-2 after a 50-step transient."""
    dt, radius, speed, L = 0.1, 5.0, 1.0, 1.0
    state = VehicleState(5.0, 0.0, math.pi / 2)
    lap = int(round(2 * math.pi * radius / (speed * dt)))
    costs = []
    for k in range(50 + lap):
        ref = circle_reference(k, dt, radius, speed)
        u = tracking_control(state, ref, L=L)
        state = dynamics.step(state, u, dt=dt, L=L)
        if k >= 50:
            err = pose_error_world(state, circle_reference(k + 1, dt, radius, speed))
            costs.append(float(err @ err))
    assert np.mean(costs) < 1e-2
