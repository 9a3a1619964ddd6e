"""Floating-point front end: Newton, natural continuation in d, eigen guesses."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.optimize

from .seqspace import norm_up
from .steady import DF_hat, F_hat, ModelParams, SingularJacobian, SteadyX, homogeneous_state

log = logging.getLogger(__name__)


class NoConvergence(RuntimeError):
    pass


class StallAtStep(RuntimeError):
    def __init__(self, msg, points=None, halvings=0):
        super().__init__(msg)
        self.points = points or []
        self.halvings = halvings


class EigensolverFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class NewtonConfig:
    max_iter: int = 30
    residual_tol: float = 1e-12
    damping: Tuple[float, ...] = (1.0, 0.5, 0.25, 0.125)
    m: Optional[int] = None

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")


@dataclass
class BranchPoint:
    d: str
    candidate: SteadyX
    residual: float
    cond: float = float("nan")
    iterations: int = 0


def _step_norm(dx: np.ndarray, m: int, nu: float) -> float:
    return sum(norm_up(dx[i * m:(i + 1) * m], nu) for i in range(4))


def newton_steady(guess: SteadyX, cfg: NewtonConfig = NewtonConfig()) -> SteadyX:
    """Newton on the truncated map; the residual is the weighted Newton step.

    The raw residual is dominated by rounding in the high modes once they are
    weighted by nu^k, so the stopping test uses ||DF^{-1} F||, the quantity
    that Y measures.
    """
    X = guess.padded(cfg.m) if cfg.m is not None and cfg.m != guess.m else guess.padded(guess.m)
    m, nu = X.m, X.nu
    x = X.to_vector()
    last = np.inf
    for it in range(cfg.max_iter):
        Xc = SteadyX.from_vector(x, X.params, nu)
        F = F_hat(Xc)
        J = DF_hat(Xc)
        try:
            lu = scipy.linalg.lu_factor(J, check_finite=True)
            dx = scipy.linalg.lu_solve(lu, F)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(dx)):
            raise SingularJacobian("non-finite Newton step")
        res = _step_norm(dx, m, nu)
        if res <= cfg.residual_tol or (it > 3 and res >= last and res < 1e3 * cfg.residual_tol):
            x = x - dx
            out = SteadyX.from_vector(x, X.params, nu)
            out._newton_residual = res  # type: ignore[attr-defined]
            out._newton_iterations = it + 1  # type: ignore[attr-defined]
            return out
        for lam in cfg.damping:
            xn = x - lam * dx
            if lam == 1.0 or _step_norm(
                scipy.linalg.lu_solve(lu, F_hat(SteadyX.from_vector(xn, X.params, nu))), m, nu
            ) < res:
                break
        x = xn
        last = res
        if not np.all(np.isfinite(x)) or res > 1e6:
            break
    raise NoConvergence(f"Newton did not converge (last step norm {last:.3e})")


def with_d(X: SteadyX, d: str) -> SteadyX:
    base = X.params.as_dict()
    base["d1"] = base["d2"] = str(d)
    return replace(X, params=ModelParams.from_strings(base))


# -- bifurcations from the homogeneous state ---------------------------------------------


def homogeneous_bifurcation_d(params: ModelParams, k: int) -> List[float]:
    """Values of d = d1 = d2 where mode k loses stability at the equilibrium."""
    u, v = (float(x) for x in homogeneous_state(params))
    P = {n: params.fl(n) for n in ("r1", "r2", "a1", "a2", "b1", "b2", "d12")}
    J = np.array([[-P["a1"] * u, -P["b1"] * u], [-P["b2"] * v, -P["a2"] * v]])
    q = (np.pi * k) ** 2

    def det(d):
        M1 = np.array([[d + P["d12"] * v, P["d12"] * u], [0.0, d]])
        return np.linalg.det(-q * M1 + J)

    # det is quadratic in d
    ds = np.linspace(1e-6, 1.0, 4001)
    vals = np.array([det(d) for d in ds])
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]:
        roots.append(scipy.optimize.brentq(det, ds[i], ds[i + 1], xtol=1e-15))
    return roots


def bifurcation_seed(params: ModelParams, k: int, m: int, amplitude: float, nu: float = 1.06) -> SteadyX:
    """Equilibrium plus amplitude * (kernel vector) on mode k, in (v, w, p, s) form."""
    u, v = (float(x) for x in homogeneous_state(params))
    d1, d2, d12 = params.fl("d1"), params.fl("d2"), params.fl("d12")
    P = {n: params.fl(n) for n in ("a1", "a2", "b1", "b2")}
    J = np.array([[-P["a1"] * u, -P["b1"] * u], [-P["b2"] * v, -P["a2"] * v]])
    q = (np.pi * k) ** 2
    M1 = np.array([[d1 + d12 * v, d12 * u], [0.0, d2]])
    L = -q * M1 + J
    _, _, vh = np.linalg.svd(L)
    phi, psi = vh[-1]
    if psi < 0:
        phi, psi = -phi, -psi
    X = SteadyX.homogeneous(params, m, nu)
    pbar = X.p[0]
    X.v[k] += amplitude * psi
    X.w[k] += amplitude * ((d1 + d12 * v) * phi + d12 * u * psi)
    X.p[k] += -amplitude * d12 * pbar**2 * psi
    X.s[k] = -np.pi * k * X.v[k]
    return X


# -- continuation ------------------------------------------------------------------------------


def continuation_branch(seed: BranchPoint, d_range: Sequence[float], step: float,
                        cfg: NewtonConfig = NewtonConfig(residual_tol=1e-11),
                        min_step: float = 1e-7, max_step: Optional[float] = None) -> List[BranchPoint]:
    """Natural continuation in d from seed towards d_range[1] with a secant predictor."""
    d_start, d_end = float(seed.d), float(d_range[1])
    direction = np.sign(d_end - d_start)
    h = abs(step)
    max_step = max_step or 4 * h
    pts = [seed]
    prev = None
    halvings = 0
    d = d_start
    while direction * (d_end - d) > 1e-15:
        dn = d + direction * min(h, abs(d_end - d))
        cur = pts[-1].candidate
        x = cur.to_vector()
        if prev is not None:
            x = x + (x - prev[1]) * (dn - d) / (d - prev[0])
        guess = with_d(SteadyX.from_vector(x, cur.params, cur.nu), repr(float(dn)))
        try:
            X = newton_steady(guess, cfg)
            if prev is not None and _step_norm(X.to_vector() - cur.to_vector(), cur.m, 1.0) > 50 * abs(dn - d) / h * max(
                    1e-3, _step_norm(cur.to_vector() - prev[1], cur.m, 1.0)):
                raise NoConvergence("branch jump")
        except (NoConvergence, SingularJacobian):
            h /= 2
            halvings += 1
            if h < min_step:
                raise StallAtStep(f"step underflow near d={d:.6g}", pts, halvings)
            continue
        prev = (d, cur.to_vector())
        d = dn
        pts.append(BranchPoint(repr(float(dn)), X, getattr(X, "_newton_residual", np.nan),
                               iterations=getattr(X, "_newton_iterations", 0)))
        h = min(h * 1.5, max_step)
    return pts


# -- eigen guesses ----------------------------------------------------------------------------------


def eigen_guess(steady: SteadyX, n: int, count: int = 5):
    """Leading eigenpairs of the truncated generalized eigenproblem.

    Returns (xi, eta, lambda, k0) tuples sorted by decreasing real part, with
    xi normalized so xi[k0] = 1 at its largest-magnitude coefficient.
    """
    from .eigen import cj_float, eigen_matrices

    cj = cj_float(steady)
    Lm, Mm = eigen_matrices(cj, n)
    try:
        w, V = scipy.linalg.eig(Lm, -Mm)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverFailure(str(exc)) from exc
    ok = np.isfinite(w)
    w, V = w[ok], V[:, ok]
    order = np.argsort(-w.real)
    out = []
    for idx in order[:count]:
        vec = V[:, idx]
        xi, eta = vec[:n], vec[n:]
        k0 = int(np.argmax(np.abs(xi)))
        scale = xi[k0]
        if scale == 0:
            continue
        out.append((xi / scale, eta / scale, complex(w[idx]), k0))
    if not out:
        raise EigensolverFailure("no finite eigenvalues")
    return out


# -- nonhomogeneous solutions at a target d ----------------------------------------------------------


def reflect(X: SteadyX) -> SteadyX:
    """The solution composed with x -> 1 - x."""
    sg = (-1.0) ** np.arange(X.m)
    return SteadyX(X.v * sg, X.w * sg, X.p * sg, X.s * sg, X.params, X.nu)


def solution_from_bifurcation(d: str, k: int, sign: int = 1, m: int = 500, nu: float = 1.06,
                              reflected: bool = False, m_cont: int = 128,
                              base: Optional[dict] = None, steps: int = 200) -> SteadyX:
    """Follow the branch born from mode k at the homogeneous state down (or up) to d.

    The seed sits just below the bifurcation value, on the side given by sign.
    Continuation runs at m_cont modes; the end point is refined by Newton at m.
    """
    target = ModelParams.with_d(str(d), base)
    dk = homogeneous_bifurcation_d(target, k)
    if not dk:
        raise NoConvergence(f"mode {k} never bifurcates from the homogeneous state")
    d_seed = 0.995 * dk[0]
    cfg = NewtonConfig(residual_tol=1e-11, max_iter=60)
    seed = None
    for amp in (0.03, 0.02, 0.05, 0.01, 0.04):
        X = bifurcation_seed(ModelParams.with_d(repr(d_seed), base), k, m_cont, sign * amp, nu)
        try:
            Y = newton_steady(X, cfg)
        except (NoConvergence, SingularJacobian):
            continue
        if abs(Y.v[k]) > 1e-4:
            seed = Y
            break
    if seed is None:
        raise NoConvergence(f"no nonhomogeneous seed on mode {k}")
    d_end = float(Fraction(str(d)))
    pts = continuation_branch(BranchPoint(repr(d_seed), seed, 0.0), (d_seed, d_end),
                              step=abs(d_seed - d_end) / steps, min_step=1e-9)
    X = with_d(pts[-1].candidate, str(d))
    if reflected:
        X = reflect(X)
    return newton_steady(X.padded(m), NewtonConfig(residual_tol=1e-13, max_iter=40))
