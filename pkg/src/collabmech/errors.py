"""Exception types shared across the package."""


class CollabMechError(Exception):
    """Base class for all package errors."""


class DomainError(CollabMechError):
    """Invalid inputs: violated preconditions, malformed parameters, guards."""


class NumericalError(CollabMechError):
    """Numerical failure: broken root bracket, non-convergence, KKT residual."""
