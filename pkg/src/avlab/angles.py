"""Angle wrapping helpers. All headings in this package live in (-pi, pi]."""

import numpy as np

TAU = 2.0 * np.pi


def wrap_angle(theta):
    """Wrap an angle (scalar or array) to (-pi, pi]; in-range values pass through exactly."""
    theta = np.asarray(theta)
    wrapped = np.pi - np.remainder(np.pi - theta, TAU)
    result = np.where((theta > -np.pi) & (theta <= np.pi), theta, wrapped)
    return result if result.ndim else float(result)


def angle_diff(a, b):
    """Shortest signed difference a - b, wrapped to (-pi, pi]."""
    return wrap_angle(np.asarray(a) - np.asarray(b))
