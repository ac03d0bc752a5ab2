"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Both modules expose the same functions; :mod:`gausspersist._backend`
picks one at import time.
"""

import numpy as np
from scipy.special import log_ndtr
from scipy.special import ndtri_exp as _sp_ndtri_exp

TINY = 1e-300
LOG_P_MIN = -690.0
LOG_SQRT2PI = 0.9189385332046728
# (1 - Phi(t)) / phi(t) = (1/t) sum_k (-1)^k (2k-1)!! / t^{2k}, highest power of 1/t^2 first
MILLS_ASYM = (-135135.0, 10395.0, -945.0, 105.0, -15.0, 3.0, -1.0, 1.0)

# Wichura's AS241 rational approximations, highest power first (relative error ~1e-16)
_CENTRAL_NUM = (2.5090809287301226727e+3, 3.3430575583588128105e+4, 6.7265770927008700853e+4,
                4.5921953931549871457e+4, 1.3731693765509461125e+4, 1.9715909503065514427e+3,
                1.3314166789178437745e+2, 3.3871328727963666080e+0)
_CENTRAL_DEN = (5.2264952788528545610e+3, 2.8729085735721942674e+4, 3.9307895800092710610e+4,
                2.1213794301586595867e+4, 5.3941960214247511077e+3, 6.8718700749205790830e+2,
                4.2313330701600911252e+1, 1.0)
_NEAR_NUM = (7.7454501427834140764e-4, 2.2723844989269184583e-2, 2.4178072517745061177e-1,
             1.2704582524523683826e+0, 3.6478483247632046050e+0, 5.7694972214606914055e+0,
             4.6303378461565452959e+0, 1.4234371107496835773e+0)
_NEAR_DEN = (1.0507500716444168432e-9, 5.4759380849953449460e-4, 1.5198666563616457197e-2,
             1.4810397642748007459e-1, 6.8976733498510000455e-1, 1.6763848301838038494e+0,
             2.0531916266377588219e+0, 1.0)
_FAR_NUM = (2.0103343992922881327e-7, 2.7115555687434875782e-5, 1.2426609473880784386e-3,
            2.6532189526576123093e-2, 2.9656057182850489123e-1, 1.7848265399172913358e+0,
            5.4637849111641143699e+0, 6.6579046435011037772e+0)
_FAR_DEN = (2.0442631033899397856e-15, 1.4215117583164458887e-7, 1.8463183175100546818e-5,
            7.8686913114561325910e-4, 1.4875361290850614852e-2, 1.3692988092273580531e-1,
            5.9983220655588793769e-1, 1.0)


def _ratio(num, den, r):
    return np.polyval(num, r) / np.polyval(den, r)


def ndtri(u):
    """Normal quantile for a float64 array with entries in (0, 1)."""
    p = np.asarray(u, dtype=np.float64)
    q = p - 0.5
    central = np.abs(q) <= 0.425
    r2 = 0.180625 - q * q
    small = np.maximum(np.where(q < 0, p, 1.0 - p), TINY)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.sqrt(-np.log(small))
    tail = np.where(r <= 5.0, _ratio(_NEAR_NUM, _NEAR_DEN, r - 1.6), _ratio(_FAR_NUM, _FAR_DEN, r - 5.0))
    return np.where(central, q * _ratio(_CENTRAL_NUM, _CENTRAL_DEN, r2), np.where(q < 0, -tail, tail))


def ndtri_exp(y):
    """Phi^{-1}(exp(y)) for y <= 0.

    Below the double range of exp(y) scipy's value is polished by one Newton
    step on log Phi with the asymptotic Mills ratio, as in the compiled kernel.
    """
    y = np.asarray(y, dtype=np.float64)
    x = np.array(_sp_ndtri_exp(y), dtype=np.float64, ndmin=1)
    yf = np.atleast_1d(y)
    far = yf < LOG_P_MIN
    if far.any():
        xf = x[far]
        v = -1.0 / xf
        R = np.polyval(MILLS_ASYM, v * v) * v
        x[far] = xf - (-0.5 * xf * xf - LOG_SQRT2PI + np.log(R) - yf[far]) * R
    return x.reshape(y.shape) if y.ndim else float(x[0])


__all__ = ["ndtri", "log_ndtr", "ndtri_exp", "genz_orthant_mean"]


def genz_orthant_mean(L, W, mu, offset):
    """Mean over the rows of ``W`` of exp(log-integrand - offset).

    ``L`` is the lower Cholesky factor (n x n); ``W`` holds points of the unit
    cube with n - 1 columns; ``mu`` is the mean shift (last entry unused).
    With y_j the truncated normals drawn so far, s_i = sum_{j<i} L_ij y_j and
    a_i = -s_i / L_ii - mu_i, the log-integrand is
    sum_i log P(Z > a_i) + mu_i^2 / 2 - mu_i y_i.  Zero shift gives the plain
    sequential-conditioning integrand.  Everything stays in log space so
    probabilities far below 1e-300 per factor do not underflow.
    """
    n = L.shape[0]
    npts = W.shape[0]
    y = np.empty((npts, n))
    lw = np.full(npts, -float(offset))
    for i in range(n):
        s = y[:, :i] @ L[i, :i]
        a = -s / L[i, i] - mu[i]
        lq = log_ndtr(-a)
        lw += lq + 0.5 * mu[i] * mu[i]
        if i < n - 1:
            y[:, i] = mu[i] - ndtri_exp(np.log1p(-W[:, i]) + lq)
            lw -= mu[i] * y[:, i]
    return float(np.mean(np.exp(lw)))
