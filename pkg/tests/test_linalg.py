import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gausspersist import (
    CovMatrix,
    IndexSet,
    NumericalError,
    build_sigma,
    eigen_extremes,
    fourier_coefficients,
    invert_and_logdet,
    make_builtin,
    sigma_for,
)
from gausspersist.linalg import SingularMatrixError, cholesky


def _cov(a):
    a = np.asarray(a, dtype=float)
    return CovMatrix(IndexSet.segment(a.shape[0]), a, "general", float(a[0, 0]))


def test_identity_extremes():
    ext = eigen_extremes(_cov(np.eye(5)))
    assert (ext.sigma_min, ext.sigma_max) == pytest.approx((1.0, 1.0))
    assert ext.residual_min < 1e-14


@pytest.mark.parametrize("N", [2, 3, 10, 40])
def test_one_minus_cos_sigma_min(N):
    ext = eigen_extremes(sigma_for(make_builtin("one_minus_cos"), IndexSet.segment(N)))
    assert ext.sigma_min == pytest.approx(2 - 2 * math.cos(math.pi / (N + 1)), abs=1e-12)
    assert ext.sigma_max == pytest.approx(2 - 2 * math.cos(N * math.pi / (N + 1)), abs=1e-12)


def test_one_minus_cos_three():
    ext = eigen_extremes(sigma_for(make_builtin("one_minus_cos"), IndexSet.segment(3)))
    assert ext.sigma_min == pytest.approx(2 - math.sqrt(2), abs=1e-14)
    assert ext.sigma_min == pytest.approx(0.5857864, abs=1e-7)


def test_band_spectrum_within_density_range():
    kernel = fourier_coefficients(make_builtin("band_indicator"), 24)
    for N in (4, 12, 24):
        ext = eigen_extremes(build_sigma(kernel, IndexSet.segment(N), dps=50))
        assert 0 <= ext.sigma_min and ext.sigma_max <= 1


def test_identity_inverse():
    inv = invert_and_logdet(_cov(np.eye(4)))
    np.testing.assert_allclose(inv.inverse, np.eye(4))
    assert inv.logdet == pytest.approx(0.0, abs=1e-15)


def test_two_by_two_inverse():
    inv = invert_and_logdet(_cov([[2, -1], [-1, 2]]))
    np.testing.assert_allclose(inv.inverse, np.array([[2, 1], [1, 2]]) / 3, atol=1e-15)
    assert inv.logdet == pytest.approx(math.log(3), abs=1e-15)


def test_band_four_inverse_positive():
    inv = invert_and_logdet(sigma_for(make_builtin("band_indicator"), IndexSet.segment(4)))
    assert inv.inverse.shape == (4, 4)
    assert np.all(inv.inverse > 0)
    # oracle: exact inverse in 40-digit arithmetic
    with mpmath.workdps(40):
        a = 1 / mpmath.pi
        S = mpmath.matrix([[0.5, -a, 0, a / 3], [-a, 0.5, -a, 0], [0, -a, 0.5, -a], [a / 3, 0, -a, 0.5]])
        ref = np.array((S**-1).tolist(), dtype=float)
    np.testing.assert_allclose(inv.inverse, ref, rtol=1e-12)


def test_band_twenty_four_needs_extended_precision():
    kernel = fourier_coefficients(make_builtin("band_indicator"), 24)
    with pytest.raises(SingularMatrixError) as info:
        invert_and_logdet(build_sigma(kernel, IndexSet.segment(24)))
    assert info.value.sigma_min < 1e-13
    inv = invert_and_logdet(build_sigma(kernel, IndexSet.segment(24), dps=50))
    assert inv.dps == 50 and inv.all_entries_positive()
    assert inv.residual < 1e-20


def test_cholesky_hand_case():
    np.testing.assert_allclose(cholesky(np.array([[4.0, 2.0], [2.0, 5.0]])), [[2, 0], [1, 2]])
    np.testing.assert_array_equal(cholesky(np.eye(3)), np.eye(3))


def test_cholesky_reconstructs():
    M = sigma_for(make_builtin("one_minus_cos"), IndexSet.segment(3))
    L = cholesky(M)
    np.testing.assert_allclose(L @ L.T, M.matrix, atol=1e-12)
    assert np.allclose(L, np.tril(L))


def test_cholesky_not_positive_definite():
    with pytest.raises(NumericalError):
        cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.floats(-1, 1, allow_nan=False), min_size=2, max_size=9).filter(lambda c: abs(c[0]) > 0.1),
    st.integers(1, 48),
)
def test_sandwich_and_determinant(coef, N):
    density = make_builtin("moving_average", {"coefficients": coef})
    values = density(np.linspace(-np.pi, np.pi, 2**13, endpoint=False))
    kernel = fourier_coefficients(density, N)
    M = build_sigma(kernel, IndexSet.segment(N))
    ext = eigen_extremes(M)
    assert values.min() - 1e-8 <= ext.sigma_min <= ext.sigma_max <= values.max() + 1e-8
    sign, logdet = np.linalg.slogdet(M.matrix)
    assert logdet <= N * math.log(kernel.variance) + 1e-8
