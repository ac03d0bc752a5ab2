# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: normal quantile and the tilted sequential-conditioning orthant integrand.

Mirrors ``_kernels_py``.  The quantiles here are Wichura's AS241 in both the
p and the log p form, with an asymptotic-series Newton step below p = e^-690;
log Phi comes from scipy's C implementation.  Per-point results agree with the
numpy backend to about 1e-13 relative, amplified by |mu| when the tilt is large.
"""

import numpy as np
from libc.math cimport exp, expm1, fabs, log, log1p, sqrt
from libc.stdlib cimport free, malloc
from scipy.special.cython_special cimport log_ndtr as _sp_log_ndtr

cdef double LOG_SQRT2PI = 0.9189385332046728
cdef double TINY = 1e-300
cdef double LOG_P_LO = -2.5902671654458267   # log 0.075
cdef double LOG_P_HI = -0.07796154146971186  # log 0.925
cdef double LOG_P_MIN = -690.0
cdef Py_ssize_t BLOCK = 256


# Wichura's AS241 rational approximations, highest power first (relative error ~1e-16)
cdef double[8] CENTRAL_NUM = [2.5090809287301226727e+3, 3.3430575583588128105e+4, 6.7265770927008700853e+4, 4.5921953931549871457e+4, 1.3731693765509461125e+4, 1.9715909503065514427e+3, 1.3314166789178437745e+2, 3.3871328727963666080e+0]
cdef double[8] CENTRAL_DEN = [5.2264952788528545610e+3, 2.8729085735721942674e+4, 3.9307895800092710610e+4, 2.1213794301586595867e+4, 5.3941960214247511077e+3, 6.8718700749205790830e+2, 4.2313330701600911252e+1, 1.0]
cdef double[8] NEAR_NUM = [7.7454501427834140764e-4, 2.2723844989269184583e-2, 2.4178072517745061177e-1, 1.2704582524523683826e+0, 3.6478483247632046050e+0, 5.7694972214606914055e+0, 4.6303378461565452959e+0, 1.4234371107496835773e+0]
cdef double[8] NEAR_DEN = [1.0507500716444168432e-9, 5.4759380849953449460e-4, 1.5198666563616457197e-2, 1.4810397642748007459e-1, 6.8976733498510000455e-1, 1.6763848301838038494e+0, 2.0531916266377588219e+0, 1.0]
cdef double[8] FAR_NUM = [2.0103343992922881327e-7, 2.7115555687434875782e-5, 1.2426609473880784386e-3, 2.6532189526576123093e-2, 2.9656057182850489123e-1, 1.7848265399172913358e+0, 5.4637849111641143699e+0, 6.6579046435011037772e+0]
cdef double[8] MILLS_ASYM = [-135135.0, 10395.0, -945.0, 105.0, -15.0, 3.0, -1.0, 1.0]
cdef double[8] FAR_DEN = [2.0442631033899397856e-15, 1.4215117583164458887e-7, 1.8463183175100546818e-5, 7.8686913114561325910e-4, 1.4875361290850614852e-2, 1.3692988092273580531e-1, 5.9983220655588793769e-1, 1.0]


cdef inline double _horner(const double *c, double r) noexcept nogil:
    cdef double v = c[0]
    cdef int k
    for k in range(1, 8):
        v = v * r + c[k]
    return v


cdef inline double _as241_central(double q) noexcept nogil:
    cdef double r = 0.180625 - q * q
    return q * _horner(CENTRAL_NUM, r) / _horner(CENTRAL_DEN, r)


cdef inline double _as241_tail(double r) noexcept nogil:
    # r = sqrt(-log p) for the smaller tail mass p; returns -Phi^{-1}(p) > 0
    if r <= 5.0:
        return _horner(NEAR_NUM, r - 1.6) / _horner(NEAR_DEN, r - 1.6)
    return _horner(FAR_NUM, r - 5.0) / _horner(FAR_DEN, r - 5.0)


cdef inline double _ndtri(double p) noexcept nogil:
    cdef double q = p - 0.5
    if fabs(q) <= 0.425:
        return _as241_central(q)
    if q < 0:
        return -_as241_tail(sqrt(-log(p if p > TINY else TINY)))
    p = 1.0 - p
    return _as241_tail(sqrt(-log(p if p > TINY else TINY)))


cdef inline double _mills_tail(double t) noexcept nogil:
    # (1 - Phi(t)) / phi(t) for t >= 37 from the asymptotic series in 1/t^2;
    # eight terms leave a relative error below 2e-19
    cdef double v = 1.0 / t
    return _horner(MILLS_ASYM, v * v) * v


cdef inline double _log_ndtr(double x) noexcept nogil:
    return _sp_log_ndtr(x)


cdef inline double _ndtri_exp(double y) noexcept nogil:
    # Phi^{-1}(exp(y)) for y <= 0
    cdef double x, R, t
    if y > LOG_P_HI:
        return _as241_tail(sqrt(-log(-expm1(y))))
    if y > LOG_P_LO:
        return _as241_central(exp(y) - 0.5)
    if y > LOG_P_MIN:
        return -_as241_tail(sqrt(-y))
    # below the double range of p: one Newton step on log Phi from a start
    # with relative error under 1e-8 (extrapolated AS241, then the asymptotic)
    if y > -1e4:
        x = -_as241_tail(sqrt(-y))
    else:
        t = -2.0 * y
        x = -sqrt(t - log(2 * 3.141592653589793 * t))
    R = _mills_tail(-x)
    x = x - (-0.5 * x * x - LOG_SQRT2PI + log(R) - y) * R
    return x


def ndtri(u):
    """Normal quantile for a float64 array with entries in (0, 1)."""
    arr = np.ascontiguousarray(u, dtype=np.float64)
    out = np.empty_like(arr)
    cdef const double[::1] src = arr.reshape(-1)
    cdef double[::1] dst = out.reshape(-1)
    cdef Py_ssize_t k, m = src.shape[0]
    with nogil:
        for k in range(m):
            dst[k] = _ndtri(src[k])
    return out


def log_ndtr(x):
    """log Phi(x) for a float64 array."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty_like(arr)
    cdef const double[::1] src = arr.reshape(-1)
    cdef double[::1] dst = out.reshape(-1)
    cdef Py_ssize_t k, m = src.shape[0]
    with nogil:
        for k in range(m):
            dst[k] = _log_ndtr(src[k])
    return out


def ndtri_exp(y):
    """Phi^{-1}(exp(y)) for a float64 array with entries <= 0."""
    arr = np.ascontiguousarray(y, dtype=np.float64)
    out = np.empty_like(arr)
    cdef const double[::1] src = arr.reshape(-1)
    cdef double[::1] dst = out.reshape(-1)
    cdef Py_ssize_t k, m = src.shape[0]
    with nogil:
        for k in range(m):
            dst[k] = _ndtri_exp(src[k])
    return out


def genz_orthant_mean(const double[:, ::1] L, const double[:, ::1] W,
                      const double[::1] mu, double offset):
    """Mean over the rows of ``W`` of exp(log-integrand - offset)."""
    cdef Py_ssize_t n = L.shape[0]
    cdef Py_ssize_t npts = W.shape[0]
    cdef Py_ssize_t start, stop, p, b, i, j
    cdef double s, a, lq, total = 0.0
    # points are processed a block at a time, coordinate-major, so consecutive
    # iterations are independent and the quantile latencies overlap
    cdef Py_ssize_t B = BLOCK
    cdef double *y = <double *> malloc(B * n * sizeof(double))
    cdef double *lw = <double *> malloc(B * sizeof(double))
    if y == NULL or lw == NULL:
        free(y)
        free(lw)
        raise MemoryError()
    try:
        with nogil:
            start = 0
            while start < npts:
                stop = min(start + B, npts)
                for b in range(stop - start):
                    lw[b] = -offset
                for i in range(n):
                    for b in range(stop - start):
                        s = 0.0
                        for j in range(i):
                            s = s + L[i, j] * y[b * n + j]
                        a = -s / L[i, i] - mu[i]
                        lq = _log_ndtr(-a)
                        lw[b] = lw[b] + lq + 0.5 * mu[i] * mu[i]
                        if i < n - 1:
                            y[b * n + i] = mu[i] - _ndtri_exp(log1p(-W[start + b, i]) + lq)
                            lw[b] = lw[b] - mu[i] * y[b * n + i]
                for b in range(stop - start):
                    total = total + exp(lw[b])
                start = stop
    finally:
        free(y)
        free(lw)
    return total / npts
