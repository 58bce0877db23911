"""Kernel backend selection and the shared log-binomial-coefficient cache.

Set ``COLLABMECH_BACKEND=numpy`` to force the vectorized fallback kernels;
``COLLABMECH_BACKEND=numba`` insists on the jit kernels (import error if
numba is unavailable). Default: numba when importable, numpy otherwise.
"""
import functools
import os

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

_ENV_VAR = "COLLABMECH_BACKEND"


def get_kernels(name: str | None = None):
    """Return the kernel module for `name` ('numba' | 'numpy')."""
    if name is None:
        name = os.environ.get(_ENV_VAR, "").strip().lower() or "auto"
    if name == "numpy":
        from . import _kernels_numpy
        return _kernels_numpy
    if name == "numba":
        from . import _kernels_numba
        return _kernels_numba
    if name == "auto":
        try:
            from . import _kernels_numba
            return _kernels_numba
        except ImportError:
            from . import _kernels_numpy
            return _kernels_numpy
    raise DomainError(f"unknown kernel backend {name!r} (use 'numba' or 'numpy')")


kernels = get_kernels()


def active_backend() -> str:
    return kernels.NAME


@functools.lru_cache(maxsize=512)
def log_binom_coeffs(trials: int) -> np.ndarray:
    """log C(trials, k) for k = 0..trials, via log-gamma (overflow-safe)."""
    if trials < 0:
        raise DomainError("trials must be nonnegative")
    k = np.arange(trials + 1)
    out = gammaln(trials + 1) - gammaln(k + 1) - gammaln(trials - k + 1)
    out.setflags(write=False)
    return out
