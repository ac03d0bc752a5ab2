"""Exception hierarchy. The CLI maps these onto exit codes."""


class PersistenceError(Exception):
    exit_code = 3


class InputError(PersistenceError, ValueError):
    """Malformed process descriptor or parameters."""

    exit_code = 2


class HypothesisError(PersistenceError):
    """A bound's hypothesis does not hold on the verification grid."""

    exit_code = 2


class NumericalError(PersistenceError, ArithmeticError):
    """Singular matrices, failed factorizations, non-convergence."""

    exit_code = 3


class AccuracyError(NumericalError):
    """Quadrature did not reach the requested accuracy."""
