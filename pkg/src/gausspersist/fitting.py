"""Ordinary least-squares quadratic fit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class QuadraticFit:
    coefficients: tuple[float, float, float]  # c0 + c1 x + c2 x^2
    rms: float

    def __call__(self, x):
        c0, c1, c2 = self.coefficients
        x = np.asarray(x, dtype=float)
        return c0 + c1 * x + c2 * x * x

    def to_dict(self) -> dict:
        return {"coefficients": list(self.coefficients), "rms": self.rms}


def quadratic_least_squares(points) -> QuadraticFit:
    """Fit y = c0 + c1 x + c2 x^2 by OLS on the monomial basis (QR solve)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InputError("points must be a sequence of (x, y) pairs")
    x, y = pts[:, 0], pts[:, 1]
    if np.unique(x).size < 3:
        raise InputError("need at least 3 distinct x values")
    V = np.vander(x, 3, increasing=True)
    Q, R = np.linalg.qr(V)
    coef = np.linalg.solve(R, Q.T @ y)
    rms = float(np.sqrt(np.mean((V @ coef - y) ** 2)))
    return QuadraticFit(tuple(float(c) for c in coef), rms)
