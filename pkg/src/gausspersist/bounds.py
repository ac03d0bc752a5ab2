"""Lower and upper bounds on persistence probabilities.

All bounds are stored in log space as ``neg_log_bound = -log(bound)``.
Lower bounds come from the smallest eigenvalue of Sigma_A, either computed
directly, certified through a Slepian-comparable surrogate density whose
spectrum is bounded below, or floored through a Turan-type inequality with a
user-supplied constant ``B``.  The upper bound drops the off-diagonal part of
Sigma_N^{-1} and is valid when that part is entrywise nonnegative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .covariance import CovMatrix, IndexSet
from .errors import HypothesisError, InputError, NumericalError
from .linalg import eigen_extremes, invert_and_logdet
from .spectral import (
    CovarianceKernel,
    SpectralDensity,
    _default_grid,
    fourier_coefficients,
    grid_nodes,
    grid_values,
)

LOWER_KINDS = ("lemma31_lower", "theorem1_lower", "theorem2_generic_lower", "theorem2_plaw_lower")
UPPER_KINDS = ("section6_upper",)
SLEPIAN_TOL = 1e-10
ROUNDING = 1e-12  # absolute slack for measures compared in floating point


@dataclass
class BoundReport:
    kind: str
    neg_log_bound: float
    params: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    degenerate: bool = False
    conditional: bool = False

    @property
    def is_lower(self) -> bool:
        return self.kind in LOWER_KINDS

    @property
    def log_bound(self) -> float:
        return -self.neg_log_bound

    @property
    def bound(self) -> float:
        return math.exp(self.log_bound)

    @property
    def log10_bound(self) -> float:
        return self.log_bound / math.log(10)

    def to_dict(self) -> dict:
        finite = math.isfinite(self.neg_log_bound)
        return {
            "kind": self.kind,
            "neg_log_bound": self.neg_log_bound if finite else None,
            "bound": self.bound if finite else 0.0,
            "log10_bound": self.log10_bound if finite else None,
            "params": {k: _jsonable(v) for k, v in self.params.items()},
            "notes": list(self.notes),
            "degenerate": self.degenerate,
            "conditional": self.conditional,
            "singular_part": "assumed zero",
        }


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _smallest_eig_log_bound(n: int, sigma: float, mu0: float) -> float:
    """-log of (sigma / (4 mu0))^(n/2)."""
    return -0.5 * n * math.log(sigma / (4.0 * mu0))


# ---------------------------------------------------------------------------
# smallest-eigenvalue bound


def lemma31_lower_bound(M: CovMatrix, mu0: float | None = None, sigma_min: float | None = None) -> BoundReport:
    """H_X(A) >= (sigma_A / (4 K(0)))^{|A|/2}."""
    mu0 = M.variance if mu0 is None else mu0
    if sigma_min is None:
        sigma_min = eigen_extremes(M).sigma_min
    params = {"sigma_A": sigma_min, "mu0": mu0, "n": M.n}
    if sigma_min <= 0:
        return BoundReport(
            "lemma31_lower", math.inf, params,
            ["smallest eigenvalue is not positive; bound is zero"], degenerate=True,
        )
    return BoundReport("lemma31_lower", _smallest_eig_log_bound(M.n, sigma_min, mu0), params)


# ---------------------------------------------------------------------------
# the h function


@dataclass(frozen=True)
class HFunction:
    """Normalized h with nonnegative Fourier coefficients, hat h(0) = 0 and sup h = h(0).

    ``eps_prime`` is the scale as a fraction of the torus.  Outside the box
    ||t||_inf > 2 pi eps_prime, h <= ``plateau`` <= -``beta``.

    Convolution form: f = (1 + eta) g - eta with g the indicator of the box of
    side eps' (so f has mean zero) and h = f * f divided by
    ``h_peak`` = (1 + eta)^2 eps'^d.  With that scale h is constant beyond the
    box, equal to -eps'^d = -beta, and h(0) = 1 - eps'^d.
    Geometric form: ``h_peak`` = lam / (1 - lam) = h(0), so h(0) = 1.
    """

    dimension: int
    eps_prime: float
    construction: str
    eta: float
    beta: float
    plateau: float
    h_peak: float
    lam: float | None = None

    @property
    def plateau_radius(self) -> float:
        return 2.0 * math.pi * self.eps_prime

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        t = np.mod(t + np.pi, 2 * np.pi) - np.pi
        if self.construction == "geometric":
            lam = self.lam
            num = lam * np.cos(t) - lam * lam
            den = 1.0 - 2.0 * lam * np.cos(t) + lam * lam
            return num / den / self.h_peak
        e = self.eps_prime
        if self.dimension == 1:
            tri = np.maximum(e - np.abs(t) / (2 * np.pi), 0.0)
        else:
            tri = np.prod(np.maximum(e - np.abs(t) / (2 * np.pi), 0.0), axis=-1)
        return ((1 + self.eta) ** 2 * tri - self.eta**2) / self.h_peak

    def fourier(self, m) -> np.ndarray:
        """hat h(m) in closed form (convolution: hat f(m)^2; geometric: lam^|m| / 2)."""
        m = np.asarray(m, dtype=np.int64)
        if self.construction == "geometric":
            a = np.abs(m)
            lam = self.lam
            return np.where(a == 0, 0.0, 0.5 * lam ** a.astype(float)) / self.h_peak
        e = self.eps_prime
        if self.dimension == 1:
            m = m[..., None]
        a = np.abs(m).astype(float)
        safe = np.where(a == 0, 1.0, a)
        ghat = np.where(a == 0, e, np.sin(np.pi * e * safe) / (np.pi * safe))
        fhat = (1 + self.eta) * np.prod(ghat, axis=-1) - self.eta * np.all(m == 0, axis=-1)
        return fhat**2 / self.h_peak

    def fourier_quadrature(self, max_lag: int, grid_size: int) -> np.ndarray:
        """hat h(m), |m| <= max_lag per axis, by the trapezoid rule (cross-check)."""
        t = grid_nodes(grid_size)
        if self.dimension == 1:
            vals = self(t)
            c = np.fft.ifft(vals)
            m = np.arange(-max_lag, max_lag + 1)
            return (c[m % grid_size] * np.where(m % 2 == 0, 1.0, -1.0)).real
        t1, t2 = np.meshgrid(t, t, indexing="ij")
        vals = self(np.stack([t1, t2], axis=-1))
        c = np.fft.ifft2(vals)
        r = np.arange(-max_lag, max_lag + 1)
        sign = np.where(r % 2 == 0, 1.0, -1.0)
        return (c[np.ix_(r % grid_size, r % grid_size)] * np.outer(sign, sign)).real


def build_h(d: int, eps_prime: float, construction: str = "convolution", lam: float | None = None) -> HFunction:
    if not 0 < eps_prime < 0.25:
        raise InputError(f"eps_prime must lie in (0, 1/4), got {eps_prime}")
    if construction == "convolution":
        if d not in (1, 2):
            raise InputError("dimension must be 1 or 2")
        vol = eps_prime**d
        eta = vol / (1 - vol)
        scale = (1 + eta) ** 2 * vol
        # plateau -eta^2 / scale = -vol because (1 + eta) vol = eta
        return HFunction(d, eps_prime, construction, eta, vol, -(eta**2) / scale, scale)
    if construction == "geometric":
        if d != 1:
            raise InputError("the geometric construction is one-dimensional")
        lo = math.cos(math.pi * eps_prime)
        if lam is None:
            lam = 0.5 * (lo + 1.0)
        if not lo < lam < 1:
            raise InputError(f"lam must lie in (cos(pi eps'), 1) = ({lo:.6f}, 1)")
        peak = lam / (1 - lam)
        # h increases with cos t, so its sup beyond radius a is attained at |t| = a
        c = math.cos(2 * math.pi * eps_prime)
        edge = (lam * c - lam * lam) / (1 - 2 * lam * c + lam * lam) / peak
        return HFunction(1, eps_prime, construction, 0.0, -edge, edge, peak, lam)
    raise InputError(f"unknown construction {construction!r}")


# ---------------------------------------------------------------------------
# Slepian surrogate


def _box_mask(density: SpectralDensity, G: int, radius: float) -> np.ndarray:
    t = grid_nodes(G)
    if density.dimension == 1:
        return np.abs(t) <= radius
    t1, t2 = np.meshgrid(t, t, indexing="ij")
    return np.maximum(np.abs(t1), np.abs(t2)) <= radius


def _lag_grid(d: int, max_lag: int) -> np.ndarray:
    r = np.arange(-max_lag, max_lag + 1)
    if d == 1:
        return r
    m1, m2 = np.meshgrid(r, r, indexing="ij")
    return np.stack([m1, m2], axis=-1).reshape(-1, 2)


@dataclass(frozen=True)
class Surrogate:
    density: SpectralDensity
    kernel: CovarianceKernel
    h: HFunction
    floor: float


def theorem1_lower_bound(
    density: SpectralDensity,
    delta: float,
    eps: float,
    A: IndexSet,
    construction: str = "convolution",
    lam: float | None = None,
    grid_size: int | None = None,
    check_lags: int = 128,
) -> tuple[BoundReport, Surrogate]:
    """Exponential lower bound through the surrogate b - (delta/2) h.

    Requires b >= delta on the grid nodes of [-eps, eps]^d (``eps`` in
    radians).  h is built at eps' = eps / (2 pi), so its plateau covers every
    t outside the hypothesis box, and the surrogate is bounded below by
    (delta/2) beta.  The surrogate has the same variance and entrywise smaller
    covariances, so H_X(A) >= H_surrogate(A) >= (floor / (4 K(0)))^{|A|/2}.
    """
    if delta <= 0:
        raise InputError("delta must be positive")
    d = density.dimension
    if A.dimension != d:
        raise InputError("index set dimension does not match the density")
    eps_prime = eps / (2 * math.pi)
    if not 0 < eps_prime < 0.25:
        raise InputError(f"eps must lie in (0, pi/2) radians, got {eps}")

    G = grid_size or _default_grid(density)
    values = grid_values(density, G)
    inside = _box_mask(density, G, eps)
    worst = float(values[inside].min())
    if worst < delta:
        raise HypothesisError(
            f"b >= delta fails on [-eps, eps]^{d}: min b = {worst:.6g} < delta = {delta:.6g}"
        )

    h = build_h(d, eps_prime, construction, lam)
    half = 0.5 * delta
    floor = half * h.beta

    L = max(check_lags, A.max_abs_lag())
    base = fourier_coefficients(density, L, grid_size)

    def surrogate_kernel(m):
        return base(m) - half * h.fourier(m)

    def surrogate_eval(t):
        return density(t) - half * h(t)

    sur_density = SpectralDensity(
        d, surrogate_eval, "custom",
        {"base": density.family, "delta": delta, "eps": eps, "construction": construction},
        analytic_kernel=surrogate_kernel,
    )
    sur_kernel = fourier_coefficients(sur_density, L)

    lags = _lag_grid(d, check_lags)
    gap = base(lags) - sur_kernel(lags)
    zero = lags == 0 if d == 1 else np.all(lags == 0, axis=-1)
    violation = float(max(0.0, -gap.min()))
    if violation > SLEPIAN_TOL or abs(gap[zero][0]) > 1e-12:
        raise NumericalError(
            f"Slepian comparability failed: max violation {violation:.3e}, "
            f"variance gap {gap[zero][0]:.3e}"
        )

    mu0 = base.variance
    gamma = -0.5 * math.log(floor / (4 * mu0))
    sur_grid_min = float((values - half * _h_on_grid(h, d, G)).min())
    report = BoundReport(
        "theorem1_lower",
        gamma * len(A),
        {
            "delta": delta,
            "eps": eps,
            "eps_prime": eps_prime,
            "construction": construction,
            "lam": h.lam,
            "beta": h.beta,
            "plateau": h.plateau,
            "surrogate_floor": floor,
            "stated_floor_min_half_delta_beta": min(half, h.beta),
            "surrogate_grid_min": sur_grid_min,
            "gamma": gamma,
            "mu0": mu0,
            "n": len(A),
            "slepian_max_violation": violation,
            "slepian_checked_lags": check_lags,
        },
        ["h built at half scale so its plateau covers the complement of the hypothesis box"],
    )
    return report, Surrogate(sur_density, sur_kernel, h, floor)


def _h_on_grid(h: HFunction, d: int, G: int) -> np.ndarray:
    t = grid_nodes(G)
    if d == 1:
        return h(t)
    t1, t2 = np.meshgrid(t, t, indexing="ij")
    return h(np.stack([t1, t2], axis=-1))


# ---------------------------------------------------------------------------
# Turan / Nazarov floors


def _sorted_grid(density: SpectralDensity, grid_size: int | None) -> np.ndarray:
    if density.dimension != 1:
        raise InputError("these bounds are one-dimensional")
    return np.sort(grid_values(density, grid_size or _default_grid(density)))


def _sub_measure(sorted_vals: np.ndarray, delta) -> np.ndarray:
    """lambda{b <= delta} by node counting."""
    return np.searchsorted(sorted_vals, delta, side="right") / sorted_vals.size


def _super_measure(sorted_vals: np.ndarray, delta) -> np.ndarray:
    """lambda{b >= delta} by node counting."""
    return 1.0 - np.searchsorted(sorted_vals, delta, side="left") / sorted_vals.size


def theorem2_generic_bound(
    density: SpectralDensity,
    N: int,
    B: float = 1.0,
    grid_size: int | None = None,
) -> BoundReport:
    """Eigenvalue floor delta * exp(-B (1 - lambda(E_delta)) (N - 1)), E_delta = {b >= delta}.

    delta maximizes the floor subject to lambda(E_delta) >= max(delta, 1/3).
    With node counting lambda(E_delta) only changes at grid values of b, so
    the maximum sits at a grid value or where lambda(E_delta) = delta, and the
    search over those candidates is exact.  ``B`` stands in for the unknown
    absolute constant of the Turan-Nazarov inequality.
    """
    if N < 1 or B <= 0:
        raise InputError("need N >= 1 and B > 0")
    vals = _sorted_grid(density, grid_size)
    if vals[-1] <= 0:
        raise HypothesisError("density vanishes on the grid")
    levels = np.unique(vals[vals > 0])
    deltas = np.unique(np.concatenate([levels, _super_measure(vals, levels)]))
    mE = _super_measure(vals, deltas)
    ok = mE >= np.maximum(deltas, 1.0 / 3.0)
    if not np.any(ok):
        raise HypothesisError("no delta with lambda{b >= delta} >= max(delta, 1/3)")
    floors = np.where(ok, deltas * np.exp(-B * (1.0 - mE) * (N - 1)), -np.inf)
    k = int(np.argmax(floors))
    floor = float(floors[k])
    mu0 = fourier_coefficients(density, 0).variance
    return BoundReport(
        "theorem2_generic_lower",
        _smallest_eig_log_bound(N, floor, mu0),
        {"N": N, "B": B, "delta": float(deltas[k]), "measure_E_delta": float(mE[k]),
         "eigenvalue_floor": floor, "mu0": mu0, "grid_size": vals.size},
        ["parametric in B"],
    )


def fit_sublevel_power(density: SpectralDensity, grid_size: int | None = None, n_deltas: int = 256) -> tuple[float, float]:
    """Admissible (C, p) with lambda{b <= delta} <= C delta^p on (0, pi].

    p is the log-log slope of the sublevel measure where it is resolved by the
    grid and below 1/4; C is the smallest constant making the inequality hold
    on the delta grid, allowing the 1/G counting resolution.
    """
    vals = _sorted_grid(density, grid_size)
    res = 1.0 / vals.size
    deltas = np.geomspace(1e-8, math.pi, n_deltas)
    meas = _sub_measure(vals, deltas)
    if meas[0] > 2 * res:
        raise HypothesisError(
            f"lambda{{b <= {deltas[0]:.1e}}} = {meas[0]:.3g}: the sublevel sets do not shrink"
        )
    use = (meas >= 10 * res) & (meas <= 0.25)
    if np.count_nonzero(use) >= 3:
        p = float(np.polyfit(np.log(deltas[use]), np.log(meas[use]), 1)[0])
    else:
        p = 1.0
    if p <= 0:
        raise HypothesisError(f"fitted exponent p = {p:.3g} is not positive")
    C = float(np.max(np.maximum(meas - res, 0.0) / deltas**p))
    return max(C, res), p


def check_sublevel_power(density: SpectralDensity, C: float, p: float, grid_size: int | None = None, n_deltas: int = 256) -> tuple[bool, float, float]:
    """(holds, worst delta, worst excess) for lambda{b <= delta} - 1/G <= C delta^p."""
    vals = _sorted_grid(density, grid_size)
    deltas = np.geomspace(1e-8, math.pi, n_deltas)
    excess = _sub_measure(vals, deltas) - 1.0 / vals.size - C * deltas**p
    k = int(np.argmax(excess))
    return bool(excess[k] <= ROUNDING), float(deltas[k]), float(excess[k])


def theorem2_plaw_bound(
    density: SpectralDensity,
    N: int,
    B: float = 1.0,
    C: float | None = None,
    p: float | None = None,
    grid_size: int | None = None,
) -> BoundReport:
    """Eigenvalue floor N^{-1/p} exp(-B C) under lambda{b <= delta} <= C delta^p."""
    if N < 1 or B <= 0:
        raise InputError("need N >= 1 and B > 0")
    fitted = C is None or p is None
    if fitted:
        C, p = fit_sublevel_power(density, grid_size)
    if C <= 0 or p <= 0:
        raise InputError("C and p must be positive")
    holds, worst_delta, excess = check_sublevel_power(density, C, p, grid_size)
    if not holds:
        raise HypothesisError(
            f"lambda{{b <= delta}} <= C delta^p fails: worst delta = {worst_delta:.4g} "
            f"(excess {excess:.3g})"
        )
    delta_N = N ** (-1.0 / p)
    vals = _sorted_grid(density, grid_size)
    mE = float(_super_measure(vals, delta_N))
    if mE < 1.0 / 3.0:
        raise HypothesisError(f"lambda(E_delta) = {mE:.3g} < 1/3 at delta = N^(-1/p)")
    floor = delta_N * math.exp(-B * C)
    mu0 = fourier_coefficients(density, 0).variance
    return BoundReport(
        "theorem2_plaw_lower",
        _smallest_eig_log_bound(N, floor, mu0),
        {"N": N, "B": B, "C": C, "p": p, "fitted": fitted, "delta": delta_N,
         "eigenvalue_floor": floor, "mu0": mu0, "grid_size": vals.size},
        ["parametric in B"],
    )


# ---------------------------------------------------------------------------
# upper bound


def section6_upper_bound(M: CovMatrix) -> BoundReport:
    """H(N) <= 1 / (2^N sqrt(det Sigma) prod_k sqrt((Sigma^-1)_kk)).

    Valid when Sigma^{-1} has nonnegative off-diagonal entries; otherwise the
    report is marked conditional.
    """
    inv = invert_and_logdet(M)
    diag = inv.diagonal
    if not np.all(diag > 0):
        raise NumericalError("inverse has a nonpositive diagonal entry")
    off = inv.inverse[~np.eye(M.n, dtype=bool)]
    min_off = float(off.min()) if off.size else math.inf
    n = M.n
    neg_log = n * math.log(2.0) + 0.5 * inv.logdet + 0.5 * float(np.sum(np.log(diag)))
    report = BoundReport(
        "section6_upper",
        neg_log,
        {"n": n, "logdet": inv.logdet, "min_inverse_entry": inv.min_entry,
         "min_offdiag_inverse_entry": min_off, "condition": inv.condition, "dps": inv.dps},
    )
    if min_off < 0:
        report.conditional = True
        report.notes.append("Sigma^-1 has negative off-diagonal entries; bound is conditional")
    return report
