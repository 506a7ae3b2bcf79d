import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spherediff import metrics


def test_identical_samples_give_zero():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((200, 6))
    res = metrics.sliced_wasserstein(
        a, a.copy(), n_proj=64, seed=1, keep_per_projection=True
    )
    assert res.value == 0.0
    assert res.se == 0.0
    assert res.per_projection.shape == (64,)


def test_argument_order_symmetry():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((150, 4))
    b = rng.standard_normal((150, 4)) + 0.3
    r1 = metrics.sliced_wasserstein(a, b, n_proj=32, seed=7)
    r2 = metrics.sliced_wasserstein(b, a, n_proj=32, seed=7)
    np.testing.assert_allclose(r1.value, r2.value, rtol=1e-12)


def test_one_dimensional_point_masses():
    # W_p between point masses at 0 and c is exactly |c|
    a = np.zeros((5, 1))
    b = np.full((5, 1), 3.0)
    for p in (1.0, 2.0):
        res = metrics.sliced_wasserstein(a, b, n_proj=16, p=p, seed=2)
        # each projection contributes |<e,3>| = 3|u| for unit u in 1-D => u = +-1
        np.testing.assert_allclose(res.value, 3.0, rtol=1e-12)


def test_wasserstein_1d_equal_counts_closed_form():
    a = np.array([0.0, 1.0, 2.0])
    b = np.array([0.5, 1.5, 2.5])
    np.testing.assert_allclose(metrics.wasserstein_1d(a, b, p=1.0), 0.5)
    np.testing.assert_allclose(metrics.wasserstein_1d(a, b, p=2.0), 0.5)


def test_wasserstein_1d_unequal_counts_matches_order_statistic_grid():
    # exact value via common refinement onto the m*n order-statistic grid
    rng = np.random.default_rng(3)
    for n, m in [(3, 5), (7, 4), (10, 9), (2, 11)]:
        a = np.sort(rng.standard_normal(n))
        b = np.sort(rng.standard_normal(m))
        lcm_grid_a = np.repeat(a, m)  # quantile function sampled on k/(n*m)
        lcm_grid_b = np.repeat(b, n)
        for p in (1.0, 2.0, 3.0):
            exact = (np.mean(np.abs(lcm_grid_a - lcm_grid_b) ** p)) ** (1.0 / p)
            got = metrics.wasserstein_1d(a, b, p=p)
            np.testing.assert_allclose(got, exact, rtol=1e-10)


def test_wasserstein_1d_shift_invariance_of_mass():
    rng = np.random.default_rng(4)
    a = rng.standard_normal(40)
    np.testing.assert_allclose(metrics.wasserstein_1d(a, a + 2.0, p=1.0), 2.0, rtol=1e-12)


def test_gaussian_shift_oracle_small():
    # SW_2 between N(mu1, I) and N(mu2, I) in d dims: projections give 1-D
    # Gaussians with equal variance, so W_2 per direction ~ |<u, dmu>| plus
    # sampling noise; the analytic mean over the sphere is E|<u, dmu>|.
    rng = np.random.default_rng(5)
    d, n = 8, 4000
    dmu = np.zeros(d)
    dmu[0] = 1.0
    a = rng.standard_normal((n, d))
    b = rng.standard_normal((n, d)) + dmu
    res = metrics.sliced_wasserstein(a, b, n_proj=600, p=2.0, seed=6)
    # E|u_1| for a uniform unit vector in R^d
    expected = math.gamma(d / 2) / (math.sqrt(math.pi) * math.gamma((d + 1) / 2))
    assert abs(res.value - expected) / expected < 0.15
    assert res.se < 0.05 * res.value


def test_result_confidence_interval_field():
    rng = np.random.default_rng(8)
    a = rng.standard_normal((100, 3))
    b = rng.standard_normal((100, 3)) + 1.0
    res = metrics.sliced_wasserstein(a, b, n_proj=50, seed=9)
    lo, hi = res.ci2se
    np.testing.assert_allclose(hi - lo, 4.0 * res.se)
    np.testing.assert_allclose(0.5 * (hi + lo), res.value)
    assert res.n_proj == 50 and res.p == 2.0
    assert res.per_projection is None


def test_validation_errors():
    a = np.zeros((10, 3))
    b = np.zeros((10, 4))
    with pytest.raises(ValueError):
        metrics.sliced_wasserstein(a, b)
    with pytest.raises(ValueError):
        metrics.sliced_wasserstein(np.zeros((0, 3)), np.zeros((5, 3)))
    with pytest.raises(ValueError):
        metrics.sliced_wasserstein(np.zeros((5, 3)), np.zeros((5, 3)), p=0.5)
    with pytest.raises(ValueError):
        metrics.sliced_wasserstein(np.zeros((5, 3)), np.zeros((5, 3)), n_proj=0)
    bad = np.zeros((5, 3))
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        metrics.sliced_wasserstein(bad, np.zeros((5, 3)))
    with pytest.raises(ValueError):
        metrics.wasserstein_1d(np.array([]), np.array([1.0]))


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    n=st.integers(2, 30),
    m=st.integers(2, 30),
    p=st.sampled_from([1.0, 2.0]),
)
def test_wasserstein_1d_properties(seed, n, m, p):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(n)
    b = rng.standard_normal(m)
    val = metrics.wasserstein_1d(a, b, p=p)
    assert val >= 0.0
    np.testing.assert_allclose(val, metrics.wasserstein_1d(b, a, p=p), rtol=1e-12)
    assert metrics.wasserstein_1d(a, a, p=p) == 0.0
