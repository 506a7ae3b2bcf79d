import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import BAND_LIMITS, random_symmetric_coeffs
from spherediff import chart, transform
from spherediff.transform import ConstraintViolation


@settings(max_examples=60, deadline=None)
@given(
    L=st.integers(min_value=1, max_value=6),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_to_chart_after_from_chart_is_bitwise_identity(L, seed):
    z = np.random.default_rng(seed).standard_normal(L * L)
    assert np.array_equal(chart.to_chart(chart.from_chart(z, L), L), z)


@pytest.mark.parametrize("L", BAND_LIMITS)
def test_from_chart_after_to_chart_on_constrained_vectors(L):
    rng = np.random.default_rng(L + 100)
    for _ in range(50):
        a = random_symmetric_coeffs(L, rng)
        back = chart.from_chart(chart.to_chart(a, L), L)
        assert np.max(np.abs(back - a)) < 1e-12


def test_from_chart_output_exactly_symmetric():
    z = np.random.default_rng(0).standard_normal(16)
    assert transform.mirror_residual(chart.from_chart(z, 4), 4) == 0.0


def test_to_chart_rejects_asymmetric_input():
    a = np.zeros(4, dtype=complex)
    a[1] = 1.0  # (1,0) fine
    a[2] = 1.0  # (1,1) with no mirrored (1,-1) partner
    with pytest.raises(ConstraintViolation):
        chart.to_chart(a, 2)


def test_chart_layout_slots():
    # z = [Re a00 | Re a10, Re a11, Im a11, ...] per the ell^2-offset layout
    a = chart.from_chart(np.arange(1.0, 10.0), 3)
    assert a[0] == 1.0  # (0,0)
    assert a[1] == 2.0  # (1,0)
    assert a[2] == complex(3.0, 4.0)  # (1,1)
    assert a[3] == -complex(3.0, -4.0)  # (1,-1) = -conj((1,1))


@pytest.mark.parametrize("L", BAND_LIMITS)
def test_linear_maps_agree_with_function_forms(L, ops_cache):
    ops = ops_cache[L]
    T = chart.chart_linear_map(ops)
    M = chart.synthesis_matrix(ops)
    rng = np.random.default_rng(L)
    x = rng.standard_normal(ops.d_spatial)
    np.testing.assert_allclose(
        T @ x, chart.to_chart(transform.analysis(ops, x), L), atol=1e-12
    )
    z = rng.standard_normal(L * L)
    np.testing.assert_allclose(
        M @ z, transform.synthesis(ops, chart.from_chart(z, L)), atol=1e-12
    )
    assert np.max(np.abs(T @ M - np.eye(L * L))) < 1e-12


def test_chart_weights_norm_identity():
    L = 5
    rng = np.random.default_rng(9)
    z = rng.standard_normal(L * L)
    a = chart.from_chart(z, L)
    w = chart.chart_weights(L)
    np.testing.assert_allclose(np.sum(w * z * z), np.vdot(a, a).real, rtol=1e-14)


def test_dimension_validation():
    with pytest.raises(ValueError):
        chart.from_chart(np.zeros(5), 2)
    with pytest.raises(ValueError):
        chart.to_chart(np.zeros(5, dtype=complex), 2)
