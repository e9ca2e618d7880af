import math

import numpy as np
import pytest

from fieldscan import (
    AnomalySpec,
    Box,
    CalibrationConfig,
    CubicWindows,
    DomainError,
    FieldDims,
    ScanSpace,
    SimConfig,
    empirical_critical_value,
    empirical_rates,
    resolve_threads,
)
from fieldscan.calibrate import _quantile_rank


def _small_config(reps=50, alpha=0.05, sigma=1.0):
    dims = FieldDims((10, 10), 1)
    sim = SimConfig(dims, m=2, sigma=sigma)
    space = ScanSpace(dims, CubicWindows(4))
    return CalibrationConfig(sim, space, alpha=alpha, reps=reps)


def test_quantile_rank_table():
    assert _quantile_rank(0.05, 500) == 475
    assert _quantile_rank(0.05, 100) == 95
    assert _quantile_rank(0.5, 10) == 5
    assert _quantile_rank(0.999, 10) == 1
    assert _quantile_rank(0.001, 10) == 10
    # 0.9 * 10 must not drift to rank 10 through floating point
    assert _quantile_rank(0.1, 10) == 9


def test_quantile_monotone_in_alpha():
    config = _small_config(reps=40)
    result = empirical_critical_value(config, 1)
    previous = -math.inf
    for alpha in (0.5, 0.2, 0.1, 0.05):
        rank = _quantile_rank(alpha, 40)
        value = result.sample[rank - 1]
        assert value >= previous
        previous = value


def test_thread_count_does_not_change_result():
    config = _small_config(reps=24)
    serial = empirical_critical_value(config, 9, threads=1)
    parallel = empirical_critical_value(config, 9, threads=4)
    np.testing.assert_array_equal(serial.sample, parallel.sample)
    assert serial.y_hat == parallel.y_hat
    assert serial.rank == parallel.rank


def test_result_is_sorted_sample_order_statistic():
    config = _small_config(reps=50)
    result = empirical_critical_value(config, 3)
    assert (np.diff(result.sample) >= 0).all()
    assert result.sample.shape == (50,)
    assert result.rank == 48
    assert result.y_hat == result.sample[47]
    assert not result.at_sample_max
    assert (result.sample > 0).all()


def test_at_sample_max_flags_undersized_runs():
    config = _small_config(reps=10, alpha=0.001)
    result = empirical_critical_value(config, 4)
    assert result.rank == 10
    assert result.at_sample_max
    assert result.y_hat == result.sample[-1]


def test_tiny_sigma_gives_tiny_critical_value():
    config = _small_config(reps=10, sigma=1e-300)
    result = empirical_critical_value(config, 5)
    assert 0 <= result.y_hat < 1e-280


def test_config_validation():
    dims = FieldDims((10, 10), 1)
    space = ScanSpace(dims, CubicWindows(4))
    anomalous = SimConfig(dims, m=2, sigma=1.0, anomaly=AnomalySpec(Box((0, 0), (3, 3)), (1.0,)))
    with pytest.raises(DomainError):
        CalibrationConfig(anomalous, space)
    sim = SimConfig(dims, m=2, sigma=1.0)
    with pytest.raises(DomainError):
        CalibrationConfig(sim, space, reps=1)
    with pytest.raises(DomainError):
        CalibrationConfig(sim, space, alpha=0.0)
    other_space = ScanSpace(FieldDims((8, 8), 1), CubicWindows(4))
    with pytest.raises(DomainError):
        CalibrationConfig(sim, other_space)


def test_rates_threshold_zero_rejects_always():
    dims = FieldDims((10, 10), 1)
    sim = SimConfig(dims, m=2, sigma=1.0)
    space = ScanSpace(dims, CubicWindows(4))
    estimate = empirical_rates(sim, space, 0.0, 20, 7)
    assert estimate.rate == 1.0
    assert estimate.rejections == 20
    assert estimate.reps == 20


def test_rates_at_calibrated_threshold_match_sample():
    config = _small_config(reps=50, alpha=0.1)
    result = empirical_critical_value(config, 21)
    estimate = empirical_rates(config.sim, config.space, result.y_hat, 50, 21)
    # same seed, same sample: rejections are the order statistics >= y_hat
    assert estimate.rejections == np.count_nonzero(result.sample >= result.y_hat)
    # strict exceedances of the rank-r order statistic are capped at alpha
    strict = np.count_nonzero(result.sample > result.y_hat)
    assert strict <= 0.1 * 50


def test_rates_validation():
    dims = FieldDims((10, 10), 1)
    sim = SimConfig(dims, m=2, sigma=1.0)
    space = ScanSpace(dims, CubicWindows(4))
    with pytest.raises(DomainError):
        empirical_rates(sim, space, math.inf, 5, 0)
    with pytest.raises(DomainError):
        empirical_rates(sim, space, math.nan, 5, 0)
    with pytest.raises(DomainError):
        empirical_rates(sim, space, 1.0, 0, 0)


def test_resolve_threads_env_fallback(monkeypatch):
    monkeypatch.setenv("FIELDSCAN_THREADS", "3")
    assert resolve_threads(None) == 3
    assert resolve_threads(2) == 2
    monkeypatch.delenv("FIELDSCAN_THREADS")
    assert resolve_threads(None) >= 1
    with pytest.raises(DomainError):
        resolve_threads(0)
    monkeypatch.setenv("FIELDSCAN_THREADS", "0")
    with pytest.raises(DomainError):
        resolve_threads(None)
