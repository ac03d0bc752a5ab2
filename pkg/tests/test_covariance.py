import math

import mpmath
import numpy as np
import pytest

from gausspersist import InputError, IndexSet, build_sigma, fourier_coefficients, make_builtin, sigma_for
from gausspersist.covariance import quadratic_form_spectral
from gausspersist.spectral import custom_density


def test_white_noise_identity():
    M = sigma_for(make_builtin("white_noise"), IndexSet.segment(6))
    np.testing.assert_array_equal(M.matrix, np.eye(6))
    assert M.structure_tag == "toeplitz"


def test_one_minus_cos_tridiagonal():
    M = sigma_for(make_builtin("one_minus_cos"), IndexSet.segment(3))
    np.testing.assert_array_equal(M.matrix, [[2, -1, 0], [-1, 2, -1], [0, -1, 2]])


def test_band_indicator_three_by_three():
    M = sigma_for(make_builtin("band_indicator"), IndexSet.segment(3))
    a = 1 / math.pi
    np.testing.assert_allclose(M.matrix, [[0.5, -a, 0], [-a, 0.5, -a], [0, -a, 0.5]], atol=1e-16)


def test_stationarity_under_translation():
    density = make_builtin("band_indicator")
    A = IndexSet(np.array([[1], [4], [5], [9]]))
    np.testing.assert_array_equal(sigma_for(density, A).matrix, sigma_for(density, A.translate(-17)).matrix)
    assert A.structure() == "general"


def test_extended_precision_copy_matches():
    kernel = fourier_coefficients(make_builtin("band_indicator"), 10)
    M = build_sigma(kernel, IndexSet.segment(10), dps=40)
    assert M.dps == 40
    ext = np.array(M.exact.tolist(), dtype=float)
    np.testing.assert_allclose(ext, M.matrix, atol=1e-16)
    with mpmath.workdps(40):
        assert M.exact[0, 2] == 0
        assert abs(M.exact[0, 1] + 1 / mpmath.pi) < mpmath.mpf(10) ** -39


def test_cube_block_toeplitz():
    A = IndexSet.cube((2, 3))
    assert len(A) == 6 and A.structure() == "block_toeplitz"
    t = np.linspace(-np.pi, np.pi, 256, endpoint=False)
    grid = (2 + np.cos(t))[:, None] * np.ones(256)[None, :]
    d = make_builtin("grid_sampled", {"grid": grid.tolist()}, dimension=2)
    M = sigma_for(d, A)
    # separable in the first axis only: K(m1, m2) = 2 [m1 = 0] [m2 = 0] + 0.5 [|m1| = 1] [m2 = 0]
    for i, p in enumerate(A.points):
        for j, q in enumerate(A.points):
            m1, m2 = p - q
            expected = (2.0 if m1 == 0 else 0.5 if abs(m1) == 1 else 0.0) * (m2 == 0)
            assert M.matrix[i, j] == pytest.approx(expected, abs=1e-13)


def test_csv_dump(tmp_path):
    M = sigma_for(make_builtin("one_minus_cos"), IndexSet.segment(2))
    text = M.to_csv(tmp_path / "s.csv")
    assert text == "2.0,-1.0\n-1.0,2.0\n"
    assert (tmp_path / "s.csv").read_text() == text


def test_quadratic_form_white_noise(rng):
    A = IndexSet.segment(7)
    u = rng.normal(size=7)
    lhs, rhs = quadratic_form_spectral(make_builtin("white_noise"), A, u)
    assert lhs == pytest.approx(u @ u, rel=1e-14)
    assert rhs == pytest.approx(u @ u, rel=1e-12)


def test_quadratic_form_one_minus_cos():
    lhs, rhs = quadratic_form_spectral(make_builtin("one_minus_cos"), IndexSet.segment(2), [1.0, 1.0])
    assert lhs == 2.0
    assert rhs == pytest.approx(2.0, abs=1e-12)


def test_quadratic_form_band(rng):
    u = rng.normal(size=5)
    lhs, rhs = quadratic_form_spectral(make_builtin("band_indicator"), IndexSet.segment(5), u)
    assert abs(lhs - rhs) <= 1e-6 * (u @ u)


def test_index_set_validation():
    with pytest.raises(InputError):
        IndexSet(np.array([[1], [1]]))
    with pytest.raises(InputError):
        IndexSet.segment(0)
    with pytest.raises(InputError):
        IndexSet.cube((2, 0))


def test_dimension_mismatch():
    kernel = fourier_coefficients(make_builtin("white_noise"), 2)
    with pytest.raises(InputError):
        build_sigma(kernel, IndexSet.cube((2, 2)))


def test_quadratic_form_length_check():
    with pytest.raises(InputError):
        quadratic_form_spectral(custom_density(lambda t: 1 + 0 * t), IndexSet.segment(3), [1.0])
