"""Persistence probabilities of stationary Gaussian processes on Z^d.

Spectral densities and their covariance kernels, covariance matrices over
finite index sets, lower and upper bounds on the persistence probability
P(X_j > 0 for all j in A), and orthant-probability estimators.
"""

from ._backend import BACKEND
from .bounds import (
    BoundReport,
    HFunction,
    build_h,
    lemma31_lower_bound,
    section6_upper_bound,
    theorem1_lower_bound,
    theorem2_generic_bound,
    theorem2_plaw_bound,
)
from .covariance import CovMatrix, IndexSet, build_sigma, sigma_for
from .errors import AccuracyError, HypothesisError, InputError, NumericalError, PersistenceError
from .experiments import ExperimentResult, run_example41, run_section6
from .fitting import QuadraticFit, quadratic_least_squares
from .linalg import eigen_extremes, invert_and_logdet
from .orthant import OrthantEstimate, estimate_plain_mc, estimate_qmc, orthant_closed_form
from .spectral import (
    CovarianceKernel,
    SpectralDensity,
    custom_density,
    fourier_coefficients,
    load_descriptor,
    make_builtin,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AccuracyError",
    "BoundReport",
    "CovMatrix",
    "CovarianceKernel",
    "ExperimentResult",
    "HFunction",
    "HypothesisError",
    "IndexSet",
    "InputError",
    "NumericalError",
    "OrthantEstimate",
    "PersistenceError",
    "QuadraticFit",
    "SpectralDensity",
    "build_h",
    "build_sigma",
    "custom_density",
    "eigen_extremes",
    "estimate_plain_mc",
    "estimate_qmc",
    "fourier_coefficients",
    "invert_and_logdet",
    "lemma31_lower_bound",
    "load_descriptor",
    "make_builtin",
    "orthant_closed_form",
    "quadratic_least_squares",
    "run_example41",
    "run_section6",
    "section6_upper_bound",
    "sigma_for",
    "theorem1_lower_bound",
    "theorem2_generic_bound",
    "theorem2_plaw_bound",
]
