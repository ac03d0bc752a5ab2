import numpy as np
import pytest

from gausspersist import InputError, quadratic_least_squares


def test_exact_parabola_recovered():
    x = np.arange(1, 25)
    fit = quadratic_least_squares(np.column_stack([x, 3.1 - 0.8 * x + 0.57 * x**2]))
    np.testing.assert_allclose(fit.coefficients, (3.1, -0.8, 0.57), rtol=1e-12)
    assert fit.rms < 1e-12
    assert fit(2.0) == pytest.approx(3.1 - 1.6 + 2.28)


def test_matches_polyfit(rng):
    x = rng.uniform(-5, 5, 40)
    y = np.exp(x / 3) + rng.normal(scale=0.1, size=40)
    fit = quadratic_least_squares(list(zip(x, y)))
    ref = np.polynomial.polynomial.polyfit(x, y, 2)
    np.testing.assert_allclose(fit.coefficients, ref, rtol=1e-10)
    assert fit.rms == pytest.approx(np.sqrt(np.mean((np.polynomial.polynomial.polyval(x, ref) - y) ** 2)))


def test_ill_conditioned_abscissae():
    x = 1e4 + np.arange(10.0)
    fit = quadratic_least_squares(np.column_stack([x, (x - 1e4) ** 2]))
    assert fit(x) == pytest.approx((x - 1e4) ** 2, abs=1e-5)


@pytest.mark.parametrize("pts", [[(1, 1), (1, 2), (2, 3)], [(1, 2, 3)], [1, 2, 3]])
def test_invalid(pts):
    with pytest.raises(InputError):
        quadratic_least_squares(pts)


def test_to_dict():
    fit = quadratic_least_squares([(0, 0), (1, 1), (2, 4)])
    d = fit.to_dict()
    assert d["coefficients"] == pytest.approx([0, 0, 1], abs=1e-12)
