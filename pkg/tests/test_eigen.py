import numpy as np
import pytest

from crossdiff.eigen import (DF_hat_eigen, EigenX, F_hat_eigen, NoUnstableCandidate, cj_enclose, cj_float,
                             eigen_matrices, prove_instability, unstable_candidate)
from crossdiff.interval import CInterval, Interval
from crossdiff.numerics import eigen_guess, solution_from_bifurcation
from crossdiff.seqspace import COS, WeightOrder, mult_matrix
from crossdiff.steady import SteadyX, validate_steady

from conftest import params_at


def mode_eigenvalues(params, kmax=40):
    """Closed-form eigenvalues of the linearization at the equilibrium, mode by mode."""
    u, v = (float(x) for x in __import__("crossdiff.steady", fromlist=["x"]).homogeneous_state(params))
    f = params.fl
    J = np.array([[-f("a1") * u, -f("b1") * u], [-f("b2") * v, -f("a2") * v]])
    D = np.array([[f("d1") + f("d12") * v, f("d12") * u], [0.0, f("d2")]])
    out = []
    for k in range(kmax):
        M = -(np.pi * k) ** 2 * D + J
        tr, det = np.trace(M), np.linalg.det(M)
        disc = np.sqrt(complex(tr * tr - 4 * det))
        out += [(tr + disc) / 2, (tr - disc) / 2]
    return np.array(out)


def direct_spectrum(X: SteadyX, n: int):
    """Galerkin matrix of the linearization written in the original unknowns (u, v)."""
    f = X.params.fl
    c = lambda a: np.asarray(a, float)  # noqa: E731
    from crossdiff.seqspace import conv_float

    u = conv_float(c(X.p), c(X.w), "ast")
    v = c(X.v)
    pad = lambda a: np.concatenate([a, np.zeros(max(0, 3 * n - len(a)))])  # noqa: E731
    M = lambda g: mult_matrix(pad(g), COS, COS, n, n)  # noqa: E731
    one = np.zeros(1)
    one = np.array([1.0])
    D2 = np.diag((np.pi * np.arange(n)) ** 2)
    add = lambda *ts: sum(pad(t) for t in ts)  # noqa: E731
    Luu = -D2 @ M(add(f("d1") * one, f("d12") * v)) + M(add(f("r1") * one, -2 * f("a1") * u, -f("b1") * v))
    Luv = -D2 @ M(f("d12") * u) - M(f("b1") * u)
    Lvu = -M(f("b2") * v)
    Lvv = -f("d2") * D2 + M(add(f("r2") * one, -f("b2") * u, -2 * f("a2") * v))
    return np.linalg.eigvals(np.block([[Luu, Luv], [Lvu, Lvv]]))


@pytest.fixture(scope="module")
def equilibrium_005():
    X = SteadyX.homogeneous(params_at("0.005"), 50)
    cert = validate_steady(X)
    assert cert.valid
    return X, cert.r_min


@pytest.mark.parametrize("target", [None, 0.2743])
def test_validated_eigenvalue_matches_constant_coefficient_oracle(equilibrium_005, target):
    X, r_nu = equilibrium_005
    cert, Xe = prove_instability(X, r_nu, 64, 1.0001, target=target)
    assert cert.valid
    mu = mode_eigenvalues(X.params)
    dist = np.min(np.abs(mu - cert.lam))
    assert dist <= cert.r_min
    assert cert.re_margin > 0
    if target is not None:
        assert round(cert.lambda_re, 4) == 0.2743


def test_transformed_problem_has_the_spectrum_of_the_original_linearization():
    X = solution_from_bifurcation("0.02", 1, 1, m=48)
    direct = direct_spectrum(X, 96)
    top = sorted(direct, key=lambda z: -z.real)[:3]
    guesses = [lam for _, _, lam, _ in eigen_guess(X, 96, count=3)]
    for z in top:
        assert min(abs(z - g) for g in guesses) < 1e-7


@pytest.mark.parametrize("seed", range(2))
def test_eigen_jacobian_against_finite_differences(seed):
    g = np.random.default_rng(seed)
    X = solution_from_bifurcation("0.02", 1, 1, m=24)
    cb = cj_float(X)
    n = 10
    Xe = EigenX(g.standard_normal(n) + 1j * g.standard_normal(n), g.standard_normal(n), 0.3 + 0.1j, 1)
    J = DF_hat_eigen(Xe, cb)
    x0 = Xe.to_vector()
    h = 1e-6
    FD = np.empty_like(J)
    for j in range(len(x0)):
        e = np.zeros_like(x0)
        e[j] = h
        fp = F_hat_eigen(EigenX.from_vector(x0 + e, 1), cb)
        fm = F_hat_eigen(EigenX.from_vector(x0 - e, 1), cb)
        FD[:, j] = (fp - fm) / (2 * h)
    assert np.linalg.norm(J - FD) / np.linalg.norm(FD) <= 1e-6


def test_rigorous_jacobian_encloses_float_jacobian():
    X = solution_from_bifurcation("0.02", 1, 1, m=24)
    cj = cj_enclose(X, 1e-12, 1.0001, 1.03)
    Xe = EigenX(np.linspace(1, 0, 12) + 0j, np.linspace(0.5, 0, 12) + 0j, 0.2, 0)
    Jr = DF_hat_eigen(Xe, cj.cbar)
    Jf = DF_hat_eigen(Xe, cj_float(X))
    assert isinstance(Jr, CInterval)
    assert np.all(Jr.contains(Jf) | (np.abs(Jr.mid() - Jf) < 1e-13))


def test_linear_pencil_reproduces_map():
    X = solution_from_bifurcation("0.02", 1, 1, m=24)
    cb = cj_float(X)
    n = 30
    L, M = eigen_matrices(cb, n)
    g = np.random.default_rng(1)
    xi, eta = g.standard_normal(n) * 0.5 ** np.arange(n), g.standard_normal(n) * 0.5 ** np.arange(n)
    lam = 0.4 - 0.2j
    F = F_hat_eigen(EigenX(xi, eta, lam, 0), cb)
    z = np.concatenate([xi, eta])
    assert np.allclose((L + lam * M) @ z, F[:2 * n], atol=1e-9)


def test_error_bounds_grow_with_steady_radius():
    X = SteadyX.homogeneous(params_at("0.005"), 20)
    e0 = cj_enclose(X, 0.0, 1.0001, 1.03).eps(1.0001)
    e1 = cj_enclose(X, 1e-10, 1.0001, 1.03).eps(1.0001)
    e2 = cj_enclose(X, 1e-8, 1.0001, 1.03).eps(1.0001)
    assert np.all(e0 == 0)
    assert np.all(e1 <= e2) and np.all(e2[:8] > 0)
    assert e2[8] == 0  # c9 = -1/d2 carries no steady-state error


def test_weight_order_rejected():
    X = SteadyX.homogeneous(params_at("0.005"), 10)
    with pytest.raises(WeightOrder):
        cj_enclose(X, 1e-12, 1.05, 1.04)
    with pytest.raises(WeightOrder):
        cj_enclose(X, 1e-12, 1.01, 1.07)


def test_stable_equilibrium_has_no_unstable_candidate():
    X = SteadyX.homogeneous(params_at("0.06"), 20)
    with pytest.raises(NoUnstableCandidate) as info:
        unstable_candidate(X, 40)
    assert info.value.lam.real < 0


def test_eigen_guess_residual_is_small(equilibrium_005):
    X, _ = equilibrium_005
    cb = cj_float(X)
    for xi, eta, lam, k0 in eigen_guess(X, 40, count=4):
        F = F_hat_eigen(EigenX(xi, eta, lam, k0), cb)
        scale = np.linalg.norm(np.concatenate([xi, eta]))
        assert np.linalg.norm(F) / scale <= 1e-8
