"""Select the compiled kernels when built, else the numpy fallback.

Set ``GAUSSPERSIST_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("GAUSSPERSIST_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        from . import _kernels_py as kernels

BACKEND = "cython" if kernels.__name__.endswith("._kernels") else "python"

ndtri = kernels.ndtri
genz_orthant_mean = kernels.genz_orthant_mean
log_ndtr = kernels.log_ndtr
ndtri_exp = kernels.ndtri_exp
