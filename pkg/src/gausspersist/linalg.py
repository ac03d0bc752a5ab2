"""Dense symmetric linear algebra: extreme eigenvalues, inverse, log-determinant, Cholesky.

Double precision goes through LAPACK.  A :class:`CovMatrix` built with an
extended-precision copy (``dps``) is handled with mpmath instead, which is
what the band-limited examples need once Sigma_N is beyond 1e16 in condition.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np
import scipy.linalg

from .covariance import CovMatrix
from .errors import NumericalError

SINGULAR_RTOL = 1e-13


class SingularMatrixError(NumericalError):
    def __init__(self, message: str, sigma_min: float):
        super().__init__(message)
        self.sigma_min = sigma_min


@dataclass(frozen=True)
class EigenExtremes:
    sigma_min: float
    sigma_max: float
    residual_min: float
    residual_max: float


@dataclass(frozen=True)
class InverseReport:
    inverse: np.ndarray
    logdet: float
    condition: float
    residual: float
    dps: int | None = None

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.inverse)

    @property
    def min_entry(self) -> float:
        return float(self.inverse.min())

    def all_entries_positive(self, threshold: float = 1e-10) -> bool:
        return bool(np.all(self.inverse > threshold))


def _as_array(m) -> np.ndarray:
    return np.array(m.tolist(), dtype=float)


def eigen_extremes(M: CovMatrix) -> EigenExtremes:
    """Smallest and largest eigenvalue with residual norms ||S v - s v||."""
    if M.exact is not None:
        with mpmath.workdps(M.dps):
            S = M.exact
            evals, evecs = mpmath.eigsy(S)
            lo = min(range(M.n), key=lambda i: evals[i])
            hi = max(range(M.n), key=lambda i: evals[i])
            res = []
            for i in (lo, hi):
                v = evecs[:, i]
                res.append(float(mpmath.norm(S * v - evals[i] * v)))
            return EigenExtremes(float(evals[lo]), float(evals[hi]), res[0], res[1])

    S = M.matrix
    try:
        evals, evecs = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigensolver did not converge: {exc}") from exc
    res = [float(np.linalg.norm(S @ evecs[:, i] - evals[i] * evecs[:, i])) for i in (0, -1)]
    return EigenExtremes(float(evals[0]), float(evals[-1]), res[0], res[1])


def cholesky(M: CovMatrix | np.ndarray) -> np.ndarray:
    """Lower-triangular L with L L^T = Sigma."""
    S = M.matrix if isinstance(M, CovMatrix) else np.asarray(M, dtype=float)
    try:
        L = scipy.linalg.cholesky(S, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"matrix is numerically not positive definite: {exc}") from exc
    if not np.all(np.isfinite(L)):
        raise NumericalError("Cholesky factor has non-finite entries")
    return L


def invert_and_logdet(M: CovMatrix) -> InverseReport:
    """Full inverse and log det(Sigma) through a Cholesky factorization."""
    if M.exact is not None:
        return _invert_exact(M)

    ext = eigen_extremes(M)
    if not ext.sigma_min > SINGULAR_RTOL * ext.sigma_max:
        raise SingularMatrixError(
            f"matrix is numerically singular (sigma_min = {ext.sigma_min:.3e}, "
            f"sigma_max = {ext.sigma_max:.3e}); rebuild it with extended precision",
            ext.sigma_min,
        )
    L = cholesky(M)
    inverse = scipy.linalg.cho_solve((L, True), np.eye(M.n))
    inverse = 0.5 * (inverse + inverse.T)
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    cond = ext.sigma_max / ext.sigma_min
    residual = float(np.max(np.abs(M.matrix @ inverse - np.eye(M.n))))
    if residual > 1e-8 * cond:
        raise NumericalError(f"inverse check failed: max |S S^-1 - I| = {residual:.3e}")
    return InverseReport(inverse, logdet, cond, residual)


def _invert_exact(M: CovMatrix) -> InverseReport:
    with mpmath.workdps(M.dps):
        S = M.exact
        n = M.n
        try:
            L = mpmath.cholesky(S)
        except ValueError as exc:
            raise NumericalError(f"extended-precision Cholesky failed: {exc}") from exc
        logdet = 2 * mpmath.fsum(mpmath.log(L[i, i]) for i in range(n))
        inverse = S**-1
        residual = mpmath.mnorm(S * inverse - mpmath.eye(n), "inf")
        cond = mpmath.mnorm(S, 1) * mpmath.mnorm(inverse, 1)
        if residual > mpmath.mpf(10) ** (-(M.dps // 2)) * cond:
            raise NumericalError(f"extended-precision inverse check failed ({residual})")
        out = _as_array(inverse)
        out = 0.5 * (out + out.T)
        return InverseReport(out, float(logdet), float(cond), float(residual), M.dps)

