from fractions import Fraction

import numpy as np
import pytest

from crossdiff.interval import Interval
from crossdiff.seqspace import norm_up
from crossdiff.steady import (DF_hat, F_hat, ModelParams, SteadyX, homogeneous_state, inf_lower,
                              steady_eval_F, u_enclosure, validate_steady)

from conftest import params_at, perturbed_state


def _cos(c, x):
    k = np.arange(len(c))
    return c[0] + 2 * (np.cos(np.pi * np.outer(x, k[1:])) @ c[1:])


def _sin(c, x):
    k = np.arange(len(c))
    return 2 * (np.sin(np.pi * np.outer(x, k[1:])) @ c[1:])


def test_equilibrium_values():
    u, v = homogeneous_state(params_at())
    assert (u, v) == (Fraction(13, 8), Fraction(1, 8))


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams.from_strings({"r1": "5"})
    bad = dict(params_at().as_dict(), d1="0")
    with pytest.raises(ValueError):
        ModelParams.from_strings(bad)
    assert params_at("0.005").iv("d1").contains(0.005)


def test_map_vanishes_at_equilibrium():
    X = SteadyX.homogeneous(params_at(), 20)
    assert np.max(np.abs(F_hat(X))) < 1e-14
    for f in steady_eval_F(X):
        assert np.all(f.coeffs.contains(0.0) | (np.abs(f.coeffs.mid()) < 1e-14))


def test_map_matches_pointwise_equations():
    X = perturbed_state(m=10, amp=3e-2, seed=3)
    P = X.params
    r1, r2, a1, a2, b1, b2, d12, d1, d2 = (P.fl(k) for k in ("r1", "r2", "a1", "a2", "b1", "b2", "d12", "d1", "d2"))
    Fv, Fw, Fp, Fs = (f.coeffs.mid() for f in steady_eval_F(X))
    x = np.linspace(0, 1, 41)
    k = np.arange(X.m)
    v, w, p, s = _cos(X.v, x), _cos(X.w, x), _cos(X.p, x), _sin(X.s, x)
    u = p * w
    dv = _sin(-np.pi * k * X.v, x)               # v' of a cosine series
    w2 = _cos(-(np.pi * k) ** 2 * X.w, x)
    dp = _sin(-np.pi * k * X.p, x)
    ds = _cos(np.pi * k * X.s, x)                # s' of a sine series
    assert np.allclose(_sin(Fv, x), dv - s, atol=1e-12)
    assert np.allclose(_cos(Fw, x), w2 + u * (r1 - a1 * u - b1 * v), atol=1e-11)
    assert np.allclose(_sin(Fp, x), dp + d12 * p * p * s, atol=1e-12)
    assert np.allclose(_cos(Fs, x), d2 * ds + v * (r2 - a2 * v - b2 * u), atol=1e-11)
    constraint = _cos(X.p, np.array([0.0]))[0] * (d1 + d12 * _cos(X.v, np.array([0.0]))[0]) - 1
    assert Fp[0] == pytest.approx(constraint, abs=1e-14)


@pytest.mark.parametrize("seed", range(3))
def test_jacobian_against_finite_differences(seed):
    X = perturbed_state(m=8, amp=2e-2, seed=seed)
    J = DF_hat(X)
    x0 = X.to_vector()
    h = 1e-6
    FD = np.empty_like(J)
    for j in range(len(x0)):
        e = np.zeros_like(x0)
        e[j] = h
        fp = F_hat(SteadyX.from_vector(x0 + e, X.params, X.nu))
        fm = F_hat(SteadyX.from_vector(x0 - e, X.params, X.nu))
        FD[:, j] = (fp - fm) / (2 * h)
    # s_0 is not an unknown of the sine component
    m = X.m
    keep = np.ones(len(x0), bool)
    keep[3 * m] = False
    err = np.linalg.norm(J[:, keep] - FD[:, keep]) / np.linalg.norm(FD[:, keep])
    assert err <= 1e-6


def test_rigorous_map_encloses_float_map():
    X = perturbed_state(m=12, seed=5)
    F = steady_eval_F(X)
    m = X.m
    fl = F_hat(X)
    for i, f in enumerate(F):
        assert np.all(f.coeffs[:m].contains(fl[i * m:(i + 1) * m]))


def test_homogeneous_state_validates():
    X = SteadyX.homogeneous(params_at("0.01"), 50)
    cert = validate_steady(X)
    assert cert.valid and not cert.tainted
    assert cert.r_min <= 1e-8
    assert cert.Z0 + cert.Z1 < 1
    assert all(mg > 0.1 for mg in cert.positivity_margins)


def test_literal_constraint_row_is_too_coarse_at_small_m():
    X = SteadyX.homogeneous(params_at("0.01"), 50)
    cert = validate_steady(X, literal_constraint=True)
    assert not cert.valid and cert.Z1 >= 1


def test_perturbed_candidate_gets_larger_radius_or_fails():
    X = SteadyX.homogeneous(params_at("0.01"), 50)
    X.v[3] += 1e-7
    cert = validate_steady(X)
    assert cert.valid
    assert cert.r_min >= 1e-7 * 2 * 1.06**3 * 0.5


def test_inf_lower_against_dense_grid(rng):
    c = rng.standard_normal(15) * 0.6 ** np.arange(15)
    c[0] = 3.0
    lower = inf_lower(c)
    dense = _cos(c, np.linspace(0, 1, 200001)).min()
    assert lower <= dense
    assert dense - lower < 1e-3


def test_u_enclosure_formula():
    X = SteadyX.homogeneous(params_at(), 5)
    r = 1e-6
    expected = (norm_up(X.w, X.nu) + norm_up(X.p, X.nu)) * r + r * r / 4
    assert u_enclosure(X, r) >= expected
    assert u_enclosure(X, r) <= expected * (1 + 1e-12)
