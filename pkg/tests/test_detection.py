import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from avlab.detection import (
    Chi2Detector,
    DetectorConfig,
    DetectorVerdict,
    chi2_quantile,
    chi2_score,
    verdict,
    window_threshold,
)
from avlab.errors import ConfigError, DynamicsFault


def test_chi2_score_examples():
    assert chi2_score(np.zeros(3), np.eye(3)) == 0.0
    assert chi2_score(np.array([1.0, 0, 0]), np.eye(3)) == pytest.approx(1.0, abs=1e-6)
    assert chi2_score(np.array([1.0, 2.0, 0.0]), np.diag([1.0, 4.0, 1.0])) == pytest.approx(
        2.0, abs=1e-6
    )


def test_chi2_score_nonfinite_fault():
    with pytest.raises(DynamicsFault):
        chi2_score(np.array([np.nan, 0, 0]), np.eye(3))


def test_chi2_quantile_table_values():
    # standard chi-square table values
    assert chi2_quantile(0.95, 3) == pytest.approx(7.8147, abs=1e-3)
    assert chi2_quantile(0.95, 2) == pytest.approx(5.9915, abs=1e-3)


def test_chi2_quantile_against_scipy_oracle():
    for p in (0.01, 0.1, 0.5, 0.9, 0.95, 0.999):
        for dof in (1, 2, 3, 6, 10):
            assert chi2_quantile(p, dof) == pytest.approx(
                scipy.stats.chi2.ppf(p, dof), abs=2e-6
            )


def test_chi2_quantile_monotone_to_zero():
    qs = [chi2_quantile(p, 3) for p in (0.2, 0.05, 0.01, 1e-4, 1e-8)]
    assert all(a > b for a, b in zip(qs, qs[1:]))
    assert qs[-1] < 1e-2


def test_chi2_quantile_range_errors():
    with pytest.raises(ConfigError):
        chi2_quantile(0.0, 3)
    with pytest.raises(ConfigError):
        chi2_quantile(1.0, 3)
    with pytest.raises(ConfigError):
        chi2_quantile(0.5, 0)


def test_verdict_examples():
    cfg = DetectorConfig()
    assert not verdict([0.0], cfg).flagged
    assert verdict([8.0], cfg).flagged  # 8.0 > 7.8147
    assert not verdict([7.8], cfg).flagged
    with pytest.raises(ConfigError):
        verdict([], cfg)


def test_verdict_is_deterministic():
    cfg = DetectorConfig()
    a, b = verdict([3.0, 9.0], cfg), verdict([3.0, 9.0], cfg)
    assert a == b


def test_flag_consistency_invariant():
    cfg = DetectorConfig()
    for s in (0.0, 5.0, 7.9, 30.0):
        v = verdict([s], cfg)
        assert v.flagged == (v.score > v.threshold)


def test_windowed_threshold_scaling():
    cfg = DetectorConfig(window=3)
    assert window_threshold(cfg, 3) == pytest.approx(chi2_quantile(0.95, 9) / 3, abs=1e-9)
    v = verdict([1.0, 2.0, 9.0], cfg)
    assert v.score == pytest.approx(4.0)
    assert v.flagged == (4.0 > chi2_quantile(0.95, 9) / 3)


def test_stateful_detector_window():
    det = Chi2Detector(DetectorConfig(window=2))
    det.assess(1.0)
    v = det.assess(9.0)
    assert v.score == pytest.approx(5.0)
    det.reset()
    with pytest.raises(ConfigError):
        verdict([], det.config)


@settings(max_examples=100)
@given(
    c=st.floats(1.0, 50.0),
    r1=st.floats(-3, 3),
    r2=st.floats(-3, 3),
    r3=st.floats(-3, 3),
)
def test_scaling_never_unflags(c, r1, r2, r3):
    cfg = DetectorConfig()
    S = np.diag([0.5, 1.0, 2.0])
    r = np.array([r1, r2, r3])
    before = verdict([chi2_score(r, S)], cfg)
    after = verdict([chi2_score(c * r, S)], cfg)
    if before.flagged:
        assert after.flagged


def test_detector_config_validation():
    with pytest.raises(ConfigError):
        DetectorConfig(false_alarm_rate=0.0)
    with pytest.raises(ConfigError):
        DetectorConfig(false_alarm_rate=1.5)
    with pytest.raises(ConfigError):
        DetectorConfig(window=0)
    with pytest.raises(ConfigError):
        DetectorConfig(dof=0)
