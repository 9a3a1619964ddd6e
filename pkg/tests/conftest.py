from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from crossdiff.steady import ModelParams, SteadyX

settings.register_profile("ci", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def params_at(d="0.01"):
    return ModelParams.with_d(d)


def perturbed_state(d="0.01", m=12, amp=1e-2, seed=0, nu=1.06):
    """Homogeneous state plus a small, decaying random perturbation (not a zero of F)."""
    g = np.random.default_rng(seed)
    X = SteadyX.homogeneous(params_at(d), m, nu)
    decay = 0.5 ** np.arange(m)
    for name in "vwps":
        arr = getattr(X, name)
        arr += amp * decay * g.standard_normal(m)
    X.s[0] = 0.0
    return X


def frac_norm(seq, nu: Fraction) -> Fraction:
    """Exact weighted l1 norm with omega_0 = 1, omega_k = 2 nu^k."""
    return abs(Fraction(seq[0])) + sum(2 * abs(Fraction(c)) * nu**k for k, c in enumerate(seq) if k > 0)
