"""Covariance matrices Sigma_A = (K(j - k))_{j,k in A} for finite index sets."""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

from .errors import InputError
from .spectral import CovarianceKernel, SpectralDensity, fourier_coefficients, grid_nodes, grid_values


@dataclass(frozen=True)
class IndexSet:
    """Distinct points of Z^d, stored as an ``(n, d)`` integer array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=np.int64))
        if pts.size == 0:
            raise InputError("index set must be nonempty")
        if len({tuple(p) for p in pts}) != len(pts):
            raise InputError("index set points must be distinct")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def segment(cls, N: int, start: int = 1) -> "IndexSet":
        """{start, ..., start + N - 1} in Z."""
        if N < 1:
            raise InputError("segment length must be >= 1")
        return cls(np.arange(start, start + N)[:, None])

    @classmethod
    def cube(cls, N: Sequence[int]) -> "IndexSet":
        """Q_N = {m : 1 <= m_k <= N_k}."""
        if any(n < 1 for n in N):
            raise InputError("cube side lengths must be >= 1")
        pts = list(itertools.product(*(range(1, n + 1) for n in N)))
        return cls(np.array(pts))

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def translate(self, shift) -> "IndexSet":
        return IndexSet(self.points + np.asarray(shift, dtype=np.int64))

    def lags(self) -> np.ndarray:
        diff = self.points[:, None, :] - self.points[None, :, :]
        return diff[..., 0] if self.dimension == 1 else diff

    def max_abs_lag(self) -> int:
        return int(np.max(np.abs(self.lags())))

    def structure(self) -> str:
        p = self.points
        if self.dimension == 1 and np.all(np.diff(p[:, 0]) == 1):
            return "toeplitz"
        if self.dimension > 1:
            sides = [np.unique(p[:, k]) for k in range(self.dimension)]
            full = np.prod([len(s) for s in sides]) == len(self)
            if full and all(np.all(np.diff(s) == 1) for s in sides):
                return "block_toeplitz"
        return "general"


@dataclass(frozen=True)
class CovMatrix:
    """Dense covariance matrix of (X_m)_{m in A}.

    ``exact`` holds the same matrix as an ``mpmath.matrix`` at ``dps`` digits
    when it was built in extended precision.
    """

    index_set: IndexSet
    matrix: np.ndarray
    structure_tag: str
    variance: float
    exact: object = None
    dps: int | None = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def to_csv(self, target=None) -> str:
        """Row-major dump of the full symmetric matrix."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in self.matrix:
            writer.writerow([repr(float(x)) for x in row])
        text = buf.getvalue()
        if target is not None:
            with open(target, "w") as fh:
                fh.write(text)
        return text


def build_sigma(kernel: CovarianceKernel, A: IndexSet, dps: int | None = None) -> CovMatrix:
    if kernel.dimension != A.dimension:
        raise InputError(f"kernel is {kernel.dimension}-d but index set is {A.dimension}-d")
    lags = A.lags()
    matrix = kernel(lags)
    matrix = 0.5 * (matrix + matrix.T)
    np.fill_diagonal(matrix, kernel.variance)
    matrix.setflags(write=False)

    exact = None
    if dps is not None:
        n = len(A)
        with mpmath.workdps(dps):
            exact = mpmath.matrix(n, n)
            for i in range(n):
                for j in range(i, n):
                    lag = lags[i, j] if A.dimension == 1 else tuple(lags[i, j])
                    exact[i, j] = exact[j, i] = kernel.exact(lag)
    return CovMatrix(A, matrix, A.structure(), kernel.variance, exact, dps)


def sigma_for(density: SpectralDensity, A: IndexSet, grid_size: int | None = None, dps: int | None = None) -> CovMatrix:
    """Convenience: kernel for the lags of ``A`` followed by :func:`build_sigma`."""
    kernel = fourier_coefficients(density, A.max_abs_lag(), grid_size)
    return build_sigma(kernel, A, dps)


def quadratic_form_spectral(
    density: SpectralDensity,
    A: IndexSet,
    u,
    kernel: CovarianceKernel | None = None,
    grid_size: int | None = None,
) -> tuple[float, float]:
    """u^T Sigma_A u computed from the matrix and as the integral of |U|^2 b.

    U(t) = sum_k u_k exp(i <k, t>).  The second value uses the trapezoid rule on
    the uniform grid, so the pair is a self-test of the kernel.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (len(A),):
        raise InputError(f"u must have length |A| = {len(A)}")
    if kernel is None:
        kernel = fourier_coefficients(density, A.max_abs_lag(), None)
    lhs = float(u @ build_sigma(kernel, A).matrix @ u)

    d = density.dimension
    G = grid_size or (2**14 if d == 1 else 2**8)
    if density.grid is not None:
        G = density.grid.shape[0]
    b = grid_values(density, G)
    t = grid_nodes(G)
    if d == 1:
        U = np.exp(1j * np.outer(t, A.points[:, 0])) @ u
    else:
        e1 = np.exp(1j * np.outer(t, A.points[:, 0]))
        e2 = np.exp(1j * np.outer(t, A.points[:, 1]))
        U = np.einsum("ak,bk,k->ab", e1, e2, u)
    rhs = float(np.mean(np.abs(U) ** 2 * b))
    return lhs, rhs
