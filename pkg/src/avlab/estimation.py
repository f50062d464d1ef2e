"""Extended Kalman filter over the vehicle pose.

The filter propagates the *commanded* input only; any injected attack is
unknown to the defender and shows up in the innovation. The detection
signal is the posterior-minus-prior state difference ("residue"), whose
induced covariance K S K^T is exported for whitening by the detector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from avlab.angles import wrap_angle
from avlab.dynamics import (
    ActuatorLimits,
    ControlInput,
    Measurement,
    VehicleState,
    effective_control,
    jacobian_f_state,
    jacobian_g_state,
    measure,
    step,
    ZERO_ATTACK,
)
from avlab.errors import FilterDivergenceError

# Floor added to the innovation covariance before inversion. Keeps exactly
# noise-free runs (R = 0, collapsing P) usable without masking genuine
# divergence, which still trips the condition-number check.
S_INV_FLOOR = 1e-12

COND_LIMIT = 1e12


@dataclass
class BeliefState:
    """Gaussian belief over the pose: mean and 3x3 covariance."""

    mean: VehicleState
    cov: np.ndarray

    def __post_init__(self):
        self.cov = np.asarray(self.cov, dtype=float)


@dataclass
class EkfUpdate:
    """Posterior belief plus the induced covariance of the state-space residue."""

    belief: BeliefState
    residue_cov: np.ndarray


def predict(
    belief: BeliefState,
    u_commanded: ControlInput,
    dt: float,
    L: float,
    Q_proc: np.ndarray,
    limits: ActuatorLimits = ActuatorLimits(),
) -> BeliefState:
    """Time update: noise-free propagation of the mean, F P F^T + Q on the covariance."""
    u_eff = effective_control(u_commanded, ZERO_ATTACK, limits)
    mean = step(belief.mean, u_commanded, ZERO_ATTACK, None, dt, L, limits)
    F = jacobian_f_state(belief.mean, u_eff, dt, L)
    cov = F @ belief.cov @ F.T + np.asarray(Q_proc, dtype=float)
    return BeliefState(mean, cov)


def update(
    belief_pred: BeliefState,
    z: Measurement,
    landmark,
    R_meas: np.ndarray,
) -> EkfUpdate:
    """Measurement update with wrapped bearing innovation.

    Raises FilterDivergenceError when the innovation covariance is numerically
    unusable (condition number above 1e12 after flooring).
    """
    P = belief_pred.cov
    H = jacobian_g_state(belief_pred.mean, landmark)
    z_pred = measure(belief_pred.mean, landmark, None)
    S = H @ P @ H.T + np.asarray(R_meas, dtype=float) + S_INV_FLOOR * np.eye(2)
    if np.linalg.cond(S) > COND_LIMIT:
        raise FilterDivergenceError(
            f"innovation covariance condition number {np.linalg.cond(S):.3e} exceeds {COND_LIMIT:g}"
        )
    K = P @ H.T @ np.linalg.inv(S)
    nu = np.array([z.range - z_pred.range, wrap_angle(z.bearing - z_pred.bearing)])
    delta = K @ nu
    mean = VehicleState(
        belief_pred.mean.x + delta[0],
        belief_pred.mean.y + delta[1],
        float(wrap_angle(belief_pred.mean.theta + delta[2])),
    )
    cov = (np.eye(3) - K @ H) @ P
    cov = 0.5 * (cov + cov.T)
    return EkfUpdate(belief=BeliefState(mean, cov), residue_cov=K @ S @ K.T)


def residue(posterior_mean: VehicleState, prior_mean: VehicleState) -> np.ndarray:
    """Posterior-minus-prior state difference; heading component wrapped."""
    return np.array(
        [
            posterior_mean.x - prior_mean.x,
            posterior_mean.y - prior_mean.y,
            wrap_angle(posterior_mean.theta - prior_mean.theta),
        ]
    )
