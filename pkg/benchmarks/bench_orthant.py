"""Compiled kernels versus the numpy fallback.

    python3 benchmarks/bench_orthant.py [--points 65536] [--repeat 5]

Times the orthant integrand on the tilted band-limited and 2 - 2 cos t
matrices, the inverse normal CDF, and one full QMC estimate per backend, and
prints the best-of-repeat wall time, the speedup, and the largest relative
disagreement between the two backends.
"""

import argparse
import importlib
import os
import subprocess
import sys
import time

import numpy as np
from scipy.stats import qmc

from gausspersist import IndexSet, build_sigma, fourier_coefficients, make_builtin
from gausspersist import _kernels_py
from gausspersist.orthant import _lower_factor, estimate_qmc, tilting


def _compiled():
    try:
        return importlib.import_module("gausspersist._kernels")
    except ImportError:
        return None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def integrand_case(family, N, dps, points):
    density = make_builtin(family)
    A = IndexSet.segment(N)
    M = build_sigma(fourier_coefficients(density, N), A, dps)
    L = _lower_factor(np.asarray(M.matrix, dtype=float))
    tilt = tilting(L)
    W = np.ascontiguousarray(qmc.Sobol(N - 1, scramble=True, rng=np.random.default_rng(0)).random(points))
    return L, W, tilt


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=2**16)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    fast = _compiled()
    backends = [("python", _kernels_py)] + ([("cython", fast)] if fast else [])
    if fast is None:
        print("compiled extension not built; timing the fallback only")

    print(f"{'case':<28}{'python s':>12}{'cython s':>12}{'speedup':>10}{'max rel diff':>15}")
    cases = [
        ("integrand band N=8", ("band_indicator", 8, 50)),
        ("integrand band N=14", ("band_indicator", 14, 50)),
        ("integrand 2-2cos N=7", ("one_minus_cos", 7, None)),
        ("integrand 2-2cos N=14", ("one_minus_cos", 14, None)),
    ]
    for label, (family, N, dps) in cases:
        L, W, tilt = integrand_case(family, N, dps, args.points)
        res = {name: best_of(lambda k=k: k.genz_orthant_mean(L, W, tilt.mu, tilt.psi), args.repeat)
               for name, k in backends}
        _row(label, res)

    u = np.random.default_rng(1).random(10**6)
    res = {name: best_of(lambda k=k: k.ndtri(u), args.repeat) for name, k in backends}
    _row("ndtri 1e6", res)

    y = -np.geomspace(1e-3, 1e6, 10**6)
    res = {name: best_of(lambda k=k: k.ndtri_exp(y), args.repeat) for name, k in backends}
    _row("ndtri_exp 1e6", res)

    # end to end, through the import-time switch
    for name, _ in backends:
        env = dict(os.environ, GAUSSPERSIST_PURE_PYTHON="1" if name == "python" else "0")
        code = (
            "import time;from gausspersist import *;"
            "M=build_sigma(fourier_coefficients(make_builtin('band_indicator'),12),IndexSet.segment(12),50);"
            "t=time.perf_counter();e=estimate_qmc(M,2**16,16);"
            "print(f'{e.backend:>8} estimate_qmc band N=12: {time.perf_counter()-t:.3f} s, H = {e.estimate:.6e} +- {e.stderr:.1e}')"
        )
        sys.stdout.flush()
        subprocess.run([sys.executable, "-c", code], env=env, check=True)


def _row(label, res):
    tp, op = res["python"]
    if "cython" in res:
        tc, oc = res["cython"]
        diff = float(np.max(np.abs(np.asarray(oc) - np.asarray(op)) / np.maximum(np.abs(np.asarray(op)), 1e-300)))
        print(f"{label:<28}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.2f}{diff:>15.2e}")
    else:
        print(f"{label:<28}{tp:>12.4f}{'-':>12}{'-':>10}{'-':>15}")


if __name__ == "__main__":
    main()
