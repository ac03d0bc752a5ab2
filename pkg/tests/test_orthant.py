import math

import mpmath
import numpy as np
import pytest

from gausspersist import (
    IndexSet,
    InputError,
    NumericalError,
    build_sigma,
    estimate_plain_mc,
    estimate_qmc,
    fourier_coefficients,
    make_builtin,
    orthant_closed_form,
    sigma_for,
)
from gausspersist.orthant import inverse_normal_cdf, tilting


def _omc(n):
    return sigma_for(make_builtin("one_minus_cos"), IndexSet.segment(n))


# ---------------------------------------------------------------------------
# closed forms


def test_closed_form_single_variable():
    assert orthant_closed_form([[3.0]]).estimate == 0.5


def test_closed_form_one_minus_cos():
    assert orthant_closed_form(_omc(2)).estimate == pytest.approx(1 / 6, rel=1e-15)
    assert orthant_closed_form(_omc(3)).estimate == pytest.approx(1 / 24, rel=1e-15)


def test_closed_form_independent():
    assert orthant_closed_form(np.eye(3)).estimate == pytest.approx(1 / 8)


def test_closed_form_permutation_invariant(rng):
    A = rng.normal(size=(3, 3))
    S = A @ A.T + 0.1 * np.eye(3)
    perm = [2, 0, 1]
    p = orthant_closed_form(S).estimate
    assert orthant_closed_form(S[np.ix_(perm, perm)]).estimate == pytest.approx(p, rel=1e-14)


def test_closed_form_rejects_large_n():
    with pytest.raises(InputError):
        orthant_closed_form(np.eye(4))


def test_not_positive_definite():
    with pytest.raises(NumericalError):
        orthant_closed_form([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(NumericalError):
        estimate_qmc([[1.0, 2.0], [2.0, 1.0]], 2**10, 8)


def test_non_square_rejected():
    with pytest.raises(InputError):
        estimate_qmc(np.ones((2, 3)), 2**10, 8)


# ---------------------------------------------------------------------------
# randomized QMC


def test_qmc_identity_ten():
    est = estimate_qmc(np.eye(10), 2**12, 8)
    # independent coordinates: the integrand is constant
    assert est.estimate == pytest.approx(2.0**-10, rel=1e-12)
    assert est.stderr <= 1e-15


@pytest.mark.parametrize("n", [4, 5, 7])
def test_qmc_one_minus_cos_factorial(n):
    est = estimate_qmc(_omc(n), 2**14, 16, seed=3)
    exact = 1 / math.factorial(n + 1)
    assert abs(est.estimate - exact) <= 4 * est.stderr + 1e-15
    assert est.method == "qmc_sequential" and est.randomizations == 16


def test_qmc_matches_closed_form_three(rng):
    A = rng.normal(size=(3, 3))
    S = A @ A.T + 0.2 * np.eye(3)
    est = estimate_qmc(S, 2**14, 16, seed=1)
    assert abs(est.z_score(orthant_closed_form(S).estimate)) <= 4


def test_qmc_band_twelve_between_bounds():
    kernel = fourier_coefficients(make_builtin("band_indicator"), 12)
    est = estimate_qmc(build_sigma(kernel, IndexSet.segment(12), dps=50), 2**14, 16)
    assert est.tilted
    assert 0 < est.estimate < 1e-10
    assert est.stderr < 0.2 * est.estimate


def test_qmc_deterministic_across_workers():
    S = _omc(6)
    a = estimate_qmc(S, 2**12, 8, seed=11, workers=1)
    b = estimate_qmc(S, 2**12, 8, seed=11, workers=4)
    assert (a.estimate, a.stderr) == (b.estimate, b.stderr)
    c = estimate_qmc(S, 2**12, 8, seed=12)
    assert c.estimate != a.estimate


def test_qmc_points_rounded_to_power_of_two():
    est = estimate_qmc(_omc(3), 1500, 8)
    assert est.samples == 2048 * 8


@pytest.mark.parametrize("kwargs", [{"points": 512}, {"randomizations": 4}, {"tilt": "yes"}])
def test_qmc_validation(kwargs):
    args = {"points": 2**10, "randomizations": 8, **kwargs}
    with pytest.raises(InputError):
        estimate_qmc(_omc(3), **args)


def test_tilt_modes_agree():
    S = _omc(6)
    exact = 1 / math.factorial(7)
    for mode in (True, False, "auto"):
        est = estimate_qmc(S, 2**14, 16, seed=5, tilt=mode)
        assert abs(est.z_score(exact)) <= 4, mode
    assert not estimate_qmc(S, 2**10, 8, tilt=False).tilted


def test_tilting_saddle_bounds_probability():
    # exp(psi) is an upper bound for the orthant probability
    L = np.linalg.cholesky(_omc(5).matrix)
    t = tilting(L)
    assert t.converged
    assert math.exp(t.psi) >= 1 / math.factorial(6)


def test_monotone_in_correlation():
    ps = []
    for r in (-0.4, 0.0, 0.5):
        S = np.array([[1.0, r, r], [r, 1.0, r], [r, r, 1.0]])
        ps.append(estimate_qmc(S, 2**12, 8).estimate)
    assert ps[0] < ps[1] < ps[2]


# ---------------------------------------------------------------------------
# plain Monte Carlo


def test_plain_mc_identity():
    est = estimate_plain_mc(np.eye(3), 10**6, seed=2)
    assert abs(est.estimate - 1 / 8) <= 4 * est.stderr


def test_plain_mc_one_minus_cos():
    est = estimate_plain_mc(_omc(4), 10**7, seed=9)
    assert abs(est.estimate - 1 / 120) <= 4 * est.stderr


def test_plain_mc_validation():
    with pytest.raises(InputError):
        estimate_plain_mc(np.eye(2), 0)


# ---------------------------------------------------------------------------
# normal quantile


def test_inverse_normal_cdf_values():
    assert inverse_normal_cdf(0.5) == 0.0
    with mpmath.workdps(30):
        ref = float(mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf("0.975") - 1))
    assert inverse_normal_cdf(0.975) == pytest.approx(ref, abs=1e-12)
    assert ref == pytest.approx(1.959964, abs=1e-6)


def test_inverse_normal_cdf_round_trip():
    from scipy.special import ndtr

    u = np.concatenate([np.logspace(-300, -2.1, 200), np.linspace(0.01, 0.99, 99)])
    x = inverse_normal_cdf(u)
    mid = (u > 1e-6) & (u < 1 - 1e-6)
    assert np.max(np.abs(ndtr(x[mid]) - u[mid])) <= 1e-9
    assert np.all(np.diff(x) > 0)


@pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_inverse_normal_cdf_domain(u):
    with pytest.raises(InputError):
        inverse_normal_cdf(u)


def test_to_dict_fields():
    d = estimate_qmc(_omc(2), 2**10, 8).to_dict()
    assert {"estimate", "stderr", "method", "samples", "seed", "log10_estimate", "backend"} <= set(d)
