"""Chi-square detector over the whitened EKF residue.

Dynamic in the sense that the whitening covariance is the filter's own
per-step residue covariance; the comparison threshold in score space is a
chi-square quantile at the configured false-alarm rate. An optional moving
window averages the last few scores, with the threshold rescaled for the
distribution of that mean.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammainc

from avlab.errors import ConfigError, DynamicsFault

SCORE_REGULARIZER = 1e-9


@dataclass(frozen=True)
class DetectorVerdict:
    """Windowed score, the threshold it was compared against, and the binary flag."""

    score: float
    threshold: float
    flagged: bool


@dataclass(frozen=True)
class DetectorConfig:
    false_alarm_rate: float = 0.05
    window: int = 1
    dof: int = 3

    def __post_init__(self):
        if not 0.0 < self.false_alarm_rate < 1.0:
            raise ConfigError("false_alarm_rate must lie in (0, 1)")
        if self.window < 1:
            raise ConfigError("window must be a positive step count")
        if self.dof < 1:
            raise ConfigError("dof must be >= 1")


def chi2_score(r: np.ndarray, S_r: np.ndarray) -> float:
    """Quadratic form r^T (S_r + eps I)^-1 r of the residue under its covariance."""
    r = np.asarray(r, dtype=float)
    S = np.asarray(S_r, dtype=float) + SCORE_REGULARIZER * np.eye(len(r))
    score = float(r @ np.linalg.solve(S, r))
    if not np.isfinite(score):
        raise DynamicsFault("non-finite detector score")
    return score


def _chi2_cdf(x: float, dof: int) -> float:
    # Regularized lower incomplete gamma P(dof/2, x/2).
    return float(gammainc(dof / 2.0, x / 2.0))


@lru_cache(maxsize=None)
def chi2_quantile(p: float, dof: int) -> float:
    """Inverse chi-square CDF by bisection on the regularized lower incomplete gamma.

    Absolute error below 1e-6.
    """
    if not 0.0 < p < 1.0:
        raise ConfigError(f"quantile probability must lie in (0, 1), got {p}")
    if dof < 1:
        raise ConfigError("dof must be >= 1")
    lo, hi = 0.0, 1.0
    while _chi2_cdf(hi, dof) < p:
        hi *= 2.0
        if hi > 1e9:
            raise ConfigError(f"quantile bracket failed for p={p}, dof={dof}")
    while hi - lo > 1e-8:
        mid = 0.5 * (lo + hi)
        if _chi2_cdf(mid, dof) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def window_threshold(config: DetectorConfig, n_scores: int) -> float:
    """Threshold for the mean of n_scores independent chi-square scores.

    The mean of w chi-square(dof) variables is chi-square(w * dof) / w, so the
    per-step false-alarm rate is preserved by quantile(1 - far, w * dof) / w.
    """
    w = min(n_scores, config.window)
    return chi2_quantile(1.0 - config.false_alarm_rate, w * config.dof) / w


def verdict(scores, config: DetectorConfig) -> DetectorVerdict:
    """Flag decision over the most recent `window` scores (at least one required)."""
    scores = list(scores)[-config.window :]
    if not scores:
        raise ConfigError("verdict requires at least one score")
    mean_score = float(np.mean(scores))
    threshold = window_threshold(config, len(scores))
    return DetectorVerdict(score=mean_score, threshold=threshold, flagged=mean_score > threshold)


class Chi2Detector:
    """Stateful wrapper holding the score window for one environment instance."""

    def __init__(self, config: DetectorConfig = DetectorConfig()):
        self.config = config
        self._scores: deque[float] = deque(maxlen=config.window)

    def assess(self, score: float) -> DetectorVerdict:
        self._scores.append(float(score))
        return verdict(self._scores, self.config)

    def reset(self) -> None:
        self._scores.clear()
