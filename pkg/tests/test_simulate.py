import itertools

import numpy as np
import pytest

from fieldscan import (
    AnomalySpec,
    Box,
    DomainError,
    FieldDims,
    MultiField,
    SimConfig,
    covariance_diagnostic,
    derive_rep_seed,
    generate,
    splitmix64,
)


def test_splitmix64_reference_vectors():
    assert splitmix64(0) == 16294208416658607535
    assert splitmix64(1234567) == 6457827717110365317


def test_derive_rep_seed_is_deterministic_and_spread():
    seeds = [derive_rep_seed(42, rep) for rep in range(2000)]
    assert seeds == [derive_rep_seed(42, rep) for rep in range(2000)]
    assert len(set(seeds)) == 2000
    assert derive_rep_seed(42, 0) != derive_rep_seed(43, 0)
    with pytest.raises(DomainError):
        derive_rep_seed(42, -1)


def test_generate_is_pure_function_of_config_and_seed():
    sim = SimConfig(FieldDims((20, 15), 3), m=4, sigma=1.3)
    a = generate(sim, 7)
    b = generate(sim, 7)
    np.testing.assert_array_equal(a.values, b.values)
    c = generate(sim, 8)
    assert (a.values != c.values).any()


def test_block_equality_exhaustive_small():
    sim = SimConfig(FieldDims((7, 5), 2), m=3, sigma=1.0)
    arr = generate(sim, 11).as_ndarray()
    sites = list(itertools.product(range(7), range(5)))
    for u in sites:
        for v in sites:
            same_block = all(ui // 3 == vi // 3 for ui, vi in zip(u, v))
            if same_block:
                np.testing.assert_array_equal(arr[u], arr[v])


def test_block_equality_vectorized_large():
    sim = SimConfig(FieldDims((50, 50, 50), 3), m=5, sigma=1.0)
    arr = generate(sim, 12).as_ndarray()
    anchors = arr[
        np.ix_(
            (np.arange(50) // 5) * 5,
            (np.arange(50) // 5) * 5,
            (np.arange(50) // 5) * 5,
        )
    ]
    np.testing.assert_array_equal(arr, anchors)


def test_boundary_blocks_are_truncated_but_drawn():
    sim = SimConfig(FieldDims((7,), 1), m=3, sigma=1.0)
    arr = generate(sim, 13).as_ndarray().ravel()
    assert arr[0] == arr[1] == arr[2]
    assert arr[3] == arr[4] == arr[5]
    assert arr[6] != arr[5]
    assert arr[6] != arr[0]


def test_distinct_blocks_uncorrelated():
    sim = SimConfig(FieldDims((8, 8), 1), m=4, sigma=1.0)
    a = np.empty(500)
    b = np.empty(500)
    for rep in range(500):
        arr = generate(sim, derive_rep_seed(100, rep)).as_ndarray()
        a[rep] = arr[0, 0, 0]
        b[rep] = arr[0, 7, 0]
    corr = np.corrcoef(a, b)[0, 1]
    assert abs(corr) <= 0.1


def test_ensemble_centering():
    sim = SimConfig(FieldDims((12, 12), 1), m=4, sigma=1.0)
    n_blocks = 9
    reps = 500
    means = [generate(sim, derive_rep_seed(200, rep)).values.mean() for rep in range(reps)]
    tol = 3.0 / np.sqrt(n_blocks * reps)
    assert abs(np.mean(means)) <= tol


def test_generate_applies_anomaly():
    dims = FieldDims((10, 10), 2)
    box = Box((2, 3), (4, 4))
    shift = (2.0, -1.0)
    base = SimConfig(dims, m=3, sigma=1.0)
    with_anom = SimConfig(dims, m=3, sigma=1.0, anomaly=AnomalySpec(box, shift))
    null = generate(base, 5).as_ndarray()
    obs = generate(with_anom, 5).as_ndarray()
    diff = obs - null
    np.testing.assert_allclose(diff[box.slices()], np.broadcast_to(shift, (4, 4, 2)))
    outside = np.ones((10, 10), dtype=bool)
    outside[box.slices()] = False
    assert not diff[outside].any()


def test_sim_config_validation():
    dims = FieldDims((10,), 1)
    with pytest.raises(DomainError):
        SimConfig(dims, m=0, sigma=1.0)
    with pytest.raises(DomainError):
        SimConfig(dims, m=2, sigma=0.0)
    bad_box = AnomalySpec(Box((8,), (4,)), (1.0,))
    with pytest.raises(Exception):
        SimConfig(dims, m=2, sigma=1.0, anomaly=bad_box)


def test_covariance_iid_field_vanishes_beyond_lag_zero():
    sim = SimConfig(FieldDims((40, 40), 2), m=1, sigma=1.0)
    reps = 30
    samples = np.empty((reps, 2, 6))
    for rep in range(reps):
        diag = covariance_diagnostic(generate(sim, derive_rep_seed(300, rep)), 5)
        samples[rep] = diag.cov
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / np.sqrt(reps)
    assert mean[:, 0] == pytest.approx(1.0, abs=0.05)
    for axis in range(2):
        for lag in range(1, 6):
            assert abs(mean[axis, lag]) <= 4 * se[axis, lag]


def test_covariance_block_field_structure():
    sim = SimConfig(FieldDims((50, 50), 2), m=5, sigma=1.0)
    reps = 30
    lag1 = np.empty((reps, 2))
    lag5 = np.empty((reps, 2))
    for rep in range(reps):
        diag = covariance_diagnostic(generate(sim, derive_rep_seed(400, rep)), 6)
        lag1[rep] = diag.cov[:, 1]
        lag5[rep] = diag.cov[:, 5]
    # 40 of the 49 neighbor pairs per row share a block
    assert lag1.mean(axis=0) == pytest.approx(40 / 49, abs=0.06)
    se5 = lag5.std(axis=0, ddof=1) / np.sqrt(reps)
    assert (np.abs(lag5.mean(axis=0)) <= 4 * se5).all()


def test_covariance_constant_field_flagged_degenerate():
    field = MultiField(FieldDims((6, 6), 2), np.full(72, 2.5))
    diag = covariance_diagnostic(field, 3)
    assert diag.degenerate
    assert not diag.cov.any()
    assert np.isfinite(diag.cov).all()


def test_covariance_lag_beyond_extent_is_empty():
    rng = np.random.default_rng(0)
    field = MultiField.from_ndarray(rng.normal(size=(4, 1)), 1)
    diag = covariance_diagnostic(field, 6)
    assert not diag.degenerate
    assert diag.counts[0, 4:].tolist() == [0, 0, 0]
    assert not diag.cov[0, 4:].any()
    with pytest.raises(DomainError):
        covariance_diagnostic(field, -1)
