"""Spectral densities on the torus T^d = [-pi, pi]^d and their covariance kernels.

Lebesgue measure on the torus is normalized to total mass one, so the
covariance kernel of a density ``b`` is

    K(m) = integral of b(t) exp(i <m, t>) d lambda(t),

and ``K(0)`` is the variance of every coordinate of the process.  Only
absolutely continuous spectral measures are represented; every density
carries ``singular_part_assumed_zero = True``.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Mapping

import mpmath
import numpy as np

from .errors import AccuracyError, InputError

FAMILIES = (
    "white_noise",
    "one_minus_cos",
    "band_indicator",
    "moving_average",
    "grid_sampled",
    "custom",
)

DEFAULT_GRID = {1: 2**14, 2: 2**9}
SYMMETRY_TOL = 1e-12  # relative to max(1, sup b)
IMAG_TOL = 1e-10


@dataclass(frozen=True)
class SpectralDensity:
    """A symmetric nonnegative density ``b`` on T^d.

    ``evaluator`` takes points of shape ``(...,)`` when d = 1 and ``(..., d)``
    otherwise.  ``analytic_kernel`` (if present) maps integer lags of the same
    layout to float covariances; ``exact_kernel`` maps a lag tuple to an
    ``mpmath.mpf`` and is only set where the closed form can be evaluated at
    arbitrary precision.
    """

    dimension: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    family: str = "custom"
    params: Mapping[str, Any] = field(default_factory=dict)
    analytic_kernel: Callable[[np.ndarray], np.ndarray] | None = None
    exact_kernel: Callable[[tuple[int, ...]], Any] | None = None
    grid: np.ndarray | None = None
    singular_part_assumed_zero: bool = True

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise InputError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.family not in FAMILIES:
            raise InputError(f"unknown family {self.family!r}")

    def __call__(self, t) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(t, dtype=float)), dtype=float)

    def describe(self) -> dict:
        params = dict(self.params)
        if "grid" in params:
            params["grid"] = f"<{np.size(params['grid'])} values>"
        return {
            "dimension": self.dimension,
            "family": self.family,
            "params": params,
            "singular_part": "assumed zero",
        }


# ---------------------------------------------------------------------------
# quadrature grid helpers


def grid_nodes(grid_size: int) -> np.ndarray:
    """Uniform periodic nodes -pi + 2 pi k / G, k = 0..G-1."""
    return -np.pi + 2.0 * np.pi * np.arange(grid_size) / grid_size


def grid_values(density: SpectralDensity, grid_size: int) -> np.ndarray:
    """``b`` on the tensor grid; shape ``(G,)`` or ``(G, G)``."""
    if density.grid is not None and density.grid.shape[0] == grid_size:
        return np.array(density.grid, dtype=float)
    t = grid_nodes(grid_size)
    if density.dimension == 1:
        return density(t)
    t1, t2 = np.meshgrid(t, t, indexing="ij")
    return density(np.stack([t1, t2], axis=-1))


def _negated(values: np.ndarray) -> np.ndarray:
    # node k holds t_k = -pi + 2 pi k/G; -t_k sits at index (G - k) mod G
    out = values
    for axis in range(values.ndim):
        out = np.roll(np.flip(out, axis=axis), 1, axis=axis)
    return out


def check_density_values(values: np.ndarray) -> None:
    """Raise InputError unless ``values`` are nonnegative and symmetric."""
    if not np.all(np.isfinite(values)):
        raise InputError("density has non-finite values on the quadrature grid")
    if np.any(values < 0):
        raise InputError(f"density is negative on the grid (min {values.min():.3e})")
    asym = np.max(np.abs(values - _negated(values)))
    if asym > SYMMETRY_TOL * max(1.0, float(np.max(values))):
        raise InputError(f"density is not symmetric: max |b(t) - b(-t)| = {asym:.3e}")


def ess_bounds(density: SpectralDensity, grid_size: int | None = None) -> tuple[float, float]:
    """Grid estimates of (ess-inf b, ess-sup b)."""
    values = grid_values(density, grid_size or _default_grid(density))
    return float(values.min()), float(values.max())


def _default_grid(density: SpectralDensity) -> int:
    if density.grid is not None:
        return density.grid.shape[0]
    return DEFAULT_GRID[density.dimension]


# ---------------------------------------------------------------------------
# covariance kernel


class CovarianceKernel:
    """Covariances K(m) = K(-m) of a stationary process, tabulated up to ``max_lag``.

    Lags beyond the table are served by the analytic closed form when one is
    available; otherwise they raise :class:`AccuracyError`.
    """

    def __init__(
        self,
        dimension: int,
        table: np.ndarray,
        max_lag: int,
        source: str,
        grid_size: int | None = None,
        analytic: Callable[[np.ndarray], np.ndarray] | None = None,
        exact: Callable[[tuple[int, ...]], Any] | None = None,
    ):
        self.dimension = dimension
        self.max_lag = int(max_lag)
        self.source = source
        self.grid_size = grid_size
        self._analytic = analytic
        self._exact = exact
        self._lock = threading.Lock()
        self._exact_cache: dict[tuple[int, ...], Any] = {}

        table = np.array(table, dtype=float)
        if dimension == 2:
            # K(m) = K(-m): average the table with its point reflection
            table = 0.5 * (table + table[::-1, ::-1])
        table.setflags(write=False)
        self._table = table

        var = self.variance
        if not var > 0:
            raise InputError(f"degenerate process: K(0) = {var!r}")
        if np.max(np.abs(table)) > var * (1 + 1e-12) + 1e-15:
            raise AccuracyError("|K(m)| exceeds K(0); the kernel is not positive definite")

    @property
    def variance(self) -> float:
        if self.dimension == 1:
            return float(self._table[0])
        return float(self._table[self.max_lag, self.max_lag])

    @property
    def has_exact(self) -> bool:
        return self._exact is not None

    @property
    def table(self) -> np.ndarray:
        return self._table

    def __call__(self, lags) -> np.ndarray:
        lags = np.asarray(lags, dtype=np.int64)
        if self.dimension == 1:
            a = np.abs(lags)
            inside = a <= self.max_lag
            out = np.empty(a.shape, dtype=float)
            out[inside] = self._table[a[inside]]
        else:
            if lags.shape[-1] != 2:
                raise InputError("2-d lags need a trailing axis of length 2")
            inside = np.all(np.abs(lags) <= self.max_lag, axis=-1)
            out = np.empty(lags.shape[:-1], dtype=float)
            idx = lags[inside] + self.max_lag
            out[inside] = self._table[idx[:, 0], idx[:, 1]]
        if not np.all(inside):
            if self._analytic is None:
                raise AccuracyError(
                    f"lag outside computed range |m| <= {self.max_lag} and no closed form"
                )
            outside = lags[~inside]
            if self.dimension == 1:
                outside = np.abs(outside)
            out[~inside] = self._analytic(outside)
        return out

    def exact(self, lag) -> Any:
        """Covariance at ``lag`` as an mpmath number at the current precision."""
        if self._exact is None:
            raise InputError("no closed-form kernel available for extended precision")
        key = (abs(int(lag)),) if self.dimension == 1 else tuple(int(x) for x in lag)
        if self.dimension == 2 and key < tuple(-x for x in key):
            key = tuple(-x for x in key)
        key = key + (mpmath.mp.prec,)
        with self._lock:
            if key not in self._exact_cache:
                self._exact_cache[key] = self._exact(key[:-1])
            return self._exact_cache[key]

    def as_rows(self) -> list[tuple]:
        if self.dimension == 1:
            return [(m, float(v)) for m, v in enumerate(self._table)]
        L = self.max_lag
        return [
            (i - L, j - L, float(self._table[i, j]))
            for i in range(2 * L + 1)
            for j in range(2 * L + 1)
        ]


def _lag_table(fn: Callable[[np.ndarray], np.ndarray], dimension: int, max_lag: int) -> np.ndarray:
    if dimension == 1:
        return fn(np.arange(max_lag + 1))
    r = np.arange(-max_lag, max_lag + 1)
    m1, m2 = np.meshgrid(r, r, indexing="ij")
    return fn(np.stack([m1, m2], axis=-1))


def _quadrature_table(values: np.ndarray, max_lag: int) -> tuple[np.ndarray, float]:
    """Trapezoid-rule Fourier coefficients from grid values; returns (table, max imag)."""
    G = values.shape[0]
    if values.ndim == 1:
        # (1/G) sum_k b(t_k) e^{i m t_k} = (-1)^m ifft(b)[m]
        c = np.fft.ifft(values)
        m = np.arange(max_lag + 1)
        coef = c[m % G] * np.where(m % 2 == 0, 1.0, -1.0)
    else:
        c = np.fft.ifft2(values)
        r = np.arange(-max_lag, max_lag + 1)
        sign = np.where(r % 2 == 0, 1.0, -1.0)
        coef = c[np.ix_(r % G, r % G)] * np.outer(sign, sign)
    return coef.real, float(np.max(np.abs(coef.imag)))


def fourier_coefficients(
    density: SpectralDensity,
    max_lag: int,
    grid_size: int | None = None,
    *,
    force_quadrature: bool = False,
    rtol: float = 1e-8,
) -> CovarianceKernel:
    """Covariance kernel of ``density`` for lags |m| <= ``max_lag`` (per axis).

    Closed forms are used when the density has one, unless ``force_quadrature``
    is set.  Otherwise the uniform-grid trapezoid rule is applied and certified
    by grid doubling: if the doubled grid moves any coefficient by more than
    ``rtol * K(0)`` an :class:`AccuracyError` is raised.  ``grid_sampled``
    densities have a fixed grid and skip the doubling check.
    """
    max_lag = int(max_lag)
    if max_lag < 0:
        raise InputError("max_lag must be nonnegative")
    d = density.dimension

    if density.analytic_kernel is not None and not force_quadrature:
        table = _lag_table(density.analytic_kernel, d, max_lag)
        return CovarianceKernel(
            d, table, max_lag, "analytic",
            analytic=density.analytic_kernel, exact=density.exact_kernel,
        )

    fixed = density.grid is not None
    if fixed:
        G = density.grid.shape[0]
        if grid_size is not None and grid_size != G:
            raise InputError(f"grid_sampled density has a fixed grid of size {G}")
    else:
        G = int(DEFAULT_GRID[d] if grid_size is None else grid_size)
    if G <= 0:
        raise InputError("grid_size must be positive")
    if G < 4 * max_lag:
        raise InputError(f"grid_size {G} < 4 * max_lag = {4 * max_lag}")

    values = grid_values(density, G)
    check_density_values(values)
    table, imag = _quadrature_table(values, max_lag)
    var = table[0] if d == 1 else table[max_lag, max_lag]
    if imag > IMAG_TOL * abs(var):
        raise AccuracyError(f"imaginary part {imag:.3e} exceeds {IMAG_TOL:g} * K(0)")

    if not fixed:
        fine, _ = _quadrature_table(grid_values(density, 2 * G), max_lag)
        change = float(np.max(np.abs(fine - table)))
        if change > rtol * abs(var):
            raise AccuracyError(
                f"quadrature not converged at grid {G}: doubling moved a coefficient by "
                f"{change:.3e} > {rtol:g} * K(0)"
            )
    return CovarianceKernel(d, table, max_lag, "quadrature", grid_size=G)


def sublevel_measure(density: SpectralDensity, delta: float, grid_size: int | None = None) -> float:
    """Normalized measure of {t : b(t) <= delta} by node counting (d = 1).

    Resolution is 1 / grid_size.
    """
    if density.dimension != 1:
        raise InputError("sublevel_measure is defined for d = 1 only")
    if delta < 0:
        raise InputError("delta must be nonnegative")
    values = grid_values(density, grid_size or _default_grid(density))
    return float(np.count_nonzero(values <= delta)) / values.size


# ---------------------------------------------------------------------------
# built-in families


def _sinpi(x: np.ndarray) -> np.ndarray:
    # exact zeros and unit values where x is a half-integer
    x = np.asarray(x, dtype=float)
    r = np.mod(x, 2.0)
    out = np.sin(np.pi * r)
    out[r == 0.0] = 0.0
    out[r == 1.0] = 0.0
    out[r == 0.5] = 1.0
    out[r == 1.5] = -1.0
    return out


def _white_noise(dimension: int) -> SpectralDensity:
    def evaluator(t):
        shape = t.shape if dimension == 1 else t.shape[:-1]
        return np.ones(shape)

    def kernel(m):
        m = np.asarray(m)
        zero = m == 0 if dimension == 1 else np.all(m == 0, axis=-1)
        return zero.astype(float)

    def exact(m):
        return mpmath.mpf(1) if all(x == 0 for x in m) else mpmath.mpf(0)

    return SpectralDensity(dimension, evaluator, "white_noise", {}, kernel, exact)


def _one_minus_cos() -> SpectralDensity:
    def kernel(m):
        a = np.abs(np.asarray(m))
        return np.where(a == 0, 2.0, np.where(a == 1, -1.0, 0.0))

    def exact(m):
        return mpmath.mpf({0: 2, 1: -1}.get(abs(m[0]), 0))

    return SpectralDensity(
        1, lambda t: 2.0 - 2.0 * np.cos(t), "one_minus_cos", {}, kernel, exact
    )


def _band_indicator(cutoff_fraction: float = 0.5) -> SpectralDensity:
    """b = 1 on cutoff <= |t| <= pi, 0 inside; cutoff = cutoff_fraction * pi."""
    c = float(cutoff_fraction)
    if not 0 < c < 1:
        raise InputError("band_indicator cutoff_fraction must lie in (0, 1)")
    cutoff = c * np.pi

    def evaluator(t):
        a = np.abs(np.mod(t + np.pi, 2 * np.pi) - np.pi)
        # the half value at the jump keeps the trapezoid rule second order
        return np.where(a > cutoff, 1.0, np.where(a < cutoff, 0.0, 0.5))

    def kernel(m):
        a = np.abs(np.asarray(m))
        safe = np.where(a == 0, 1, a)
        return np.where(a == 0, 1.0 - c, -_sinpi(safe * c) / (np.pi * safe))

    c_exact = mpmath.mpf(Fraction(c).limit_denominator(10**12).numerator) / Fraction(
        c
    ).limit_denominator(10**12).denominator

    def exact(m):
        a = abs(m[0])
        if a == 0:
            return 1 - c_exact
        return -mpmath.sinpi(a * c_exact) / (mpmath.pi * a)

    return SpectralDensity(
        1, evaluator, "band_indicator", {"cutoff_fraction": c}, kernel, exact
    )


def _moving_average(coefficients) -> SpectralDensity:
    a = np.asarray(coefficients, dtype=float)
    if a.ndim != 1 or a.size == 0 or not np.all(np.isfinite(a)):
        raise InputError("moving_average needs a nonempty list of real coefficients")
    if not np.any(a != 0):
        raise InputError("moving_average coefficients are all zero")
    r = a.size - 1
    acov = np.array([np.dot(a[: a.size - k], a[k:]) for k in range(r + 1)])
    a_exact = [mpmath.mpf(repr(float(x))) for x in a]

    def evaluator(t):
        z = np.exp(1j * np.asarray(t)[..., None] * np.arange(r + 1))
        return np.abs(z @ a) ** 2

    def kernel(m):
        k = np.abs(np.asarray(m))
        out = np.zeros(k.shape)
        inside = k <= r
        out[inside] = acov[k[inside]]
        return out

    def exact(m):
        k = abs(m[0])
        if k > r:
            return mpmath.mpf(0)
        return mpmath.fsum(a_exact[j] * a_exact[j + k] for j in range(r + 1 - k))

    return SpectralDensity(
        1, evaluator, "moving_average", {"coefficients": a.tolist()}, kernel, exact
    )


def _grid_sampled(grid, dimension: int) -> SpectralDensity:
    values = np.asarray(grid, dtype=float)
    if values.ndim != dimension or values.size == 0:
        raise InputError(f"grid must be a {dimension}-d array of density values")
    if dimension == 2 and values.shape[0] != values.shape[1]:
        raise InputError("2-d grid must be square")
    G = values.shape[0]
    if G < 4 or G % 2:
        raise InputError("grid size must be an even number >= 4")
    check_density_values(values)
    step = 2 * np.pi / G

    def evaluator(t):
        # nearest node on the periodic grid
        idx = np.rint((np.asarray(t) + np.pi) / step).astype(np.int64) % G
        if dimension == 1:
            return values[idx]
        return values[idx[..., 0], idx[..., 1]]

    frozen = values.copy()
    frozen.setflags(write=False)
    return SpectralDensity(
        dimension, evaluator, "grid_sampled", {"grid": values.tolist()}, grid=frozen
    )


def make_builtin(family_tag: str, params: Mapping[str, Any] | None = None, dimension: int = 1) -> SpectralDensity:
    """Construct one of the built-in spectral densities."""
    params = dict(params or {})
    if family_tag == "white_noise":
        return _white_noise(dimension)
    if dimension != 1 and family_tag != "grid_sampled":
        raise InputError(f"{family_tag} is only defined for d = 1")
    if family_tag == "one_minus_cos":
        return _one_minus_cos()
    if family_tag == "band_indicator":
        return _band_indicator(params.get("cutoff_fraction", 0.5))
    if family_tag == "moving_average":
        if "coefficients" not in params:
            raise InputError("moving_average requires params.coefficients")
        return _moving_average(params["coefficients"])
    if family_tag == "grid_sampled":
        if "grid" not in params:
            raise InputError("grid_sampled requires params.grid")
        return _grid_sampled(params["grid"], dimension)
    if family_tag == "custom":
        raise InputError("custom densities are built in Python with custom_density()")
    raise InputError(f"unknown family {family_tag!r}; expected one of {FAMILIES}")


def custom_density(
    evaluator: Callable[[np.ndarray], np.ndarray],
    dimension: int = 1,
    analytic_kernel: Callable[[np.ndarray], np.ndarray] | None = None,
    **params,
) -> SpectralDensity:
    return SpectralDensity(dimension, evaluator, "custom", params, analytic_kernel)


def load_descriptor(source: str | Path | Mapping[str, Any]) -> SpectralDensity:
    """Build a density from a JSON process descriptor (path, JSON text or dict).

    ``{"dimension": d, "family": "...", "params": {...}}``; ``grid_sampled``
    may put ``"grid"`` either in ``params`` or at top level.
    """
    if isinstance(source, Mapping):
        desc = dict(source)
    else:
        text = str(source)
        path = Path(text)
        if not text.lstrip().startswith("{") and path.exists():
            text = path.read_text()
        try:
            desc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid process descriptor: {exc}") from None
    if "family" not in desc:
        raise InputError("process descriptor needs a 'family' field")
    dimension = desc.get("dimension", 1)
    if not isinstance(dimension, int) or isinstance(dimension, bool):
        raise InputError("dimension must be an integer")
    params = dict(desc.get("params") or {})
    if "grid" in desc and "grid" not in params:
        params["grid"] = desc["grid"]
    return make_builtin(desc["family"], params, dimension)

