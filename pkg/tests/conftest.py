import numpy as np
import pytest

from collabmech.backend import get_kernels, log_binom_coeffs


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger jit compilation once so timed tests measure steady state."""
    k = get_kernels()
    logc = log_binom_coeffs(99)
    k.binom_pmf_vec(99, 0.5, logc)
    k.share_and_tail(100.0, 99, 40, 0.5, logc)
    k.binom_tail_k(99, 0.5, 40, logc)
    k.expected_marginal_utility(99, 0.5, 5.0, 0.1, logc)
    k.expected_log_utility(99, 0.5, 0.1, logc)
    k.stable_dot(np.ones(4), np.ones(4))
