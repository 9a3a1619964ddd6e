"""Instability proofs: an unstable eigenpair of the linearization at a proved steady state.

The linearized problem is multiplied by the inverse of the leading matrix so
that its second-order part is diagonal in Fourier space.  Its nine
coefficient functions c_1..c_9 are known as finite sequences c̄_j plus a
rigorous error eps_j(g) in the g-weighted norm.

Convolution convention: ``bullet`` is the signed sum with sgn(k1) sgn(k2),
which is *minus* the product of two sine series.  The first-order terms
c_1 xi' therefore enter as ``+ c_1 bullet K xi``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from . import seqspace as ss
from .interval import PI, CInterval, Interval, cmatmul, matmul_up, mul_up, sum_up, up, down
from .ops import FloatOps, IntervalOps
from .radii import NoNegativeRadius, find_radius, p_upper
from .seqspace import COS, SIN, BlockTailOp, TailRule, WeightOrder, norm_up
from .steady import SingularJacobian, SteadyX

PARITIES = (SIN, SIN, COS, COS, COS, COS, COS, COS, COS)


class NonpositiveRealPart(Exception):
    """The eigenvalue ball is not contained in the right half plane."""


class NoUnstableCandidate(Exception):
    """No numerical eigenvalue with positive real part."""

    def __init__(self, msg, lam=None):
        super().__init__(msg)
        self.lam = lam


def default_gamma_tilde(gamma: float, nu: float) -> float:
    return float(np.sqrt(gamma * nu))


def check_weights(gamma: float, gamma_tilde: float, nu: float):
    if not 1.0 < gamma < gamma_tilde < nu:
        raise WeightOrder(f"need 1 < gamma < gamma_tilde < nu, got {gamma}, {gamma_tilde}, {nu}")


# -- coefficient enclosures -----------------------------------------------------------------


def _pad(x, L):
    if isinstance(x, CInterval):
        return CInterval(_pad(x.re, L), _pad(x.im, L))
    if isinstance(x, Interval):
        if len(x) >= L:
            return x[:L]
        z = np.zeros(L - len(x))
        return Interval(np.concatenate([x.lo, z]), np.concatenate([x.hi, z]))
    x = np.asarray(x)
    if len(x) >= L:
        return x[:L]
    return np.concatenate([x, np.zeros(L - len(x), dtype=x.dtype)])


def _add(*terms):
    L = max(len(t) for t in terms)
    out = _pad(terms[0], L)
    for t in terms[1:]:
        out = out + _pad(t, L)
    return out


class _T:
    """A finite sequence with an error bound in the current weight.

    ``base`` marks steady-state quantities whose error is known in the
    nu-norm, the only ones that may be differentiated.
    """

    def __init__(self, bar, err, ctx, base=False):
        self.bar, self.err, self.ctx, self.base = bar, float(err), ctx, base

    def norm(self):
        return self.ctx.norm(self.bar)

    def __add__(self, o):
        return _T(_add(self.bar, o.bar), self.ctx.up(self.err + o.err), self.ctx)

    def __sub__(self, o):
        return _T(_add(self.bar, -o.bar), self.ctx.up(self.err + o.err), self.ctx)

    def scale(self, c):
        return _T(self.bar * c, self.ctx.mul(self.ctx.absup(c), self.err), self.ctx)

    def conv(self, o, kind):
        c = self.ctx
        err = c.up(c.up(c.mul(self.norm(), o.err) + c.mul(self.err, o.norm())) + c.mul(self.err, o.err))
        return _T(c.ops.conv(self.bar, o.bar, kind), err, c)

    def K(self, power=1):
        if not self.base:
            raise ValueError("derivative of a derived quantity")
        c = self.ctx
        bar = c.ops.pik(len(self.bar), power) * self.bar
        return _T(bar, c.mul(c.kloss(power), self.err), c)


class _Ctx:
    def __init__(self, ops, g, nu):
        self.ops, self.g, self.nu = ops, g, nu
        self._ups = {}

    def norm(self, x):
        return norm_up(x, self.g) if self.g is not None else 0.0

    @staticmethod
    def up(x):
        return float(up(x))

    @staticmethod
    def mul(a, b):
        return float(mul_up(float(a), float(b)))

    @staticmethod
    def absup(c):
        return float(c.mag()) if isinstance(c, Interval) else abs(float(c))

    def kloss(self, power):
        """pi^p times the Upsilon constant: ||K^p z||_g <= kloss * ||z||_nu."""
        if self.g is None:
            return 0.0
        if power not in self._ups:
            self._ups[power] = float((PI ** power * ss.upsilon(power, self.g, self.nu)).hi)
        return self._ups[power]


def _coefficients(X: SteadyX, r: float, ops, g: Optional[float]):
    """(c̄_j, eps_j(g)) for j = 1..9; g=None skips the error bookkeeping."""
    ctx = _Ctx(ops, g, X.nu)
    P = X.params.values(ops)
    cv = lambda a: a if ops.rigorous else np.asarray(a, float)  # noqa: E731
    if ops.rigorous:
        v, w, p, s = (Interval(np.asarray(getattr(X, k), float)) for k in "vwps")
    else:
        v, w, p, s = (cv(getattr(X, k)) for k in "vwps")
    nw, np_ = norm_up(X.w, X.nu), norm_up(X.p, X.nu)
    R = Interval(float(r))
    eps_u = float(((Interval(nw) + Interval(np_)) * R + R * R / 4).hi) if r else 0.0
    T = lambda bar, e, base=False: _T(bar, e, ctx, base)  # noqa: E731
    V, W, Pp, S = T(v, r, True), T(w, r, True), T(p, r, True), T(s, r, True)
    U = T(ops.conv(p, w, "ast"), eps_u, True)

    def const(c):
        if ops.rigorous:
            return T(Interval(np.atleast_1d(c.lo), np.atleast_1d(c.hi)), 0.0)
        return T(np.array([float(c)]), 0.0)

    r1, r2, a1, a2, b1, b2, d12, d2 = (P[k] for k in ("r1", "r2", "a1", "a2", "b1", "b2", "d12", "d2"))
    inv_d2 = 1 / d2 if not ops.rigorous else Interval(1.0) / d2

    c1 = V.K().conv(Pp, "star").scale(-2 * d12)
    c2 = U.K().conv(Pp, "star").scale(-2 * d12)
    g3 = const(r1) - U.scale(2 * a1) - V.scale(b1) + S.K().scale(d12)
    up_ = U.conv(Pp, "ast")
    c3 = g3.conv(Pp, "ast") + U.conv(V, "ast").conv(Pp, "ast").scale(d12 * b2 * inv_d2)
    h = const(r2) - U.scale(b2) - V.scale(2 * a2)
    c4 = (U.K(2).scale(-d12) - U.scale(b1)).conv(Pp, "ast") - up_.conv(h, "ast").scale(d12 * inv_d2)
    c5 = Pp.scale(-1.0)
    c6 = up_.scale(d12 * inv_d2)
    c7 = V.scale(-b2 * inv_d2)
    c8 = h.scale(inv_d2)
    c9 = const(-inv_d2)
    return [c1, c2, c3, c4, c5, c6, c7, c8, c9], eps_u


@dataclass
class CjEnclosure:
    cbar: List[Interval]
    steady: SteadyX
    r_nu: float
    eps_u: float
    parities: Tuple[str, ...] = PARITIES
    _eps: Dict[float, np.ndarray] = field(default_factory=dict, repr=False)

    def eps(self, g: float) -> np.ndarray:
        g = float(g)
        if g not in self._eps:
            if not 1.0 < g < self.steady.nu:
                raise WeightOrder(f"weight {g} outside (1, {self.steady.nu})")
            if self.r_nu == 0:
                self._eps[g] = np.zeros(9)
            else:
                cs, _ = _coefficients(self.steady, self.r_nu, IntervalOps, g)
                self._eps[g] = np.array([c.err for c in cs])
        return self._eps[g]

    def norms(self, g: float) -> np.ndarray:
        return np.array([norm_up(c, g) for c in self.cbar])


def cj_enclose(steady: SteadyX, r_nu: float, gamma: float, gamma_tilde: float) -> CjEnclosure:
    check_weights(gamma, gamma_tilde, steady.nu)
    if r_nu < 0:
        raise ValueError("negative steady radius")
    cs, eps_u = _coefficients(steady, r_nu, IntervalOps, gamma)
    out = CjEnclosure([c.bar for c in cs], steady, float(r_nu), eps_u)
    out._eps[float(gamma)] = np.array([c.err for c in cs]) if r_nu else np.zeros(9)
    out.eps(gamma_tilde)
    return out


def cj_float(steady: SteadyX) -> List[np.ndarray]:
    cs, _ = _coefficients(steady, 0.0, FloatOps, None)
    return [np.asarray(c.bar, float) for c in cs]


# -- the map and its derivative -----------------------------------------------------------------


@dataclass
class EigenX:
    xi: np.ndarray
    eta: np.ndarray
    lam: complex
    k0: int

    @property
    def n(self) -> int:
        return len(self.xi)

    def __post_init__(self):
        self.xi = np.asarray(self.xi, complex)
        self.eta = np.asarray(self.eta, complex)
        self.lam = complex(self.lam)
        if len(self.eta) != len(self.xi):
            raise ValueError("xi and eta must have equal length")
        if not 0 <= self.k0 < len(self.xi):
            raise ValueError("need n > k0")

    def to_vector(self):
        return np.concatenate([self.xi, self.eta, [self.lam]])

    @classmethod
    def from_vector(cls, x, k0):
        n = (len(x) - 1) // 2
        return cls(x[:n], x[n:2 * n], x[-1], k0)

    def conj(self) -> "EigenX":
        return EigenX(self.xi.conj(), self.eta.conj(), self.lam.conjugate(), self.k0)


def _ops_for(cbar):
    return IntervalOps if isinstance(cbar[0], Interval) else FloatOps


def _ktimes(x, ops, power=1):
    if ops.rigorous:
        return ss.k_times(x, power)
    return (np.pi * np.arange(len(x))) ** power * x


def _cscale(x, lam, ops):
    if ops.rigorous:
        if isinstance(x, Interval):
            x = CInterval(x)
        return x * CInterval.point(lam)
    return lam * x


def eigen_eval_Fbar(X: EigenX, cbar: Sequence) -> Tuple[object, object, object]:
    """Full (untruncated) F̄ at a finitely supported X."""
    ops = _ops_for(cbar)
    c1, c2, c3, c4, c5, c6, c7, c8, c9 = cbar
    xi, eta, lam = X.xi, X.eta, X.lam
    conv = ops.conv
    Kxi, Keta = _ktimes(xi, ops), _ktimes(eta, ops)
    fx = _add(-_ktimes(xi, ops, 2), conv(c1, Kxi, "bullet"), conv(c2, Keta, "bullet"),
              conv(c3, xi, "ast"), conv(c4, eta, "ast"),
              _cscale(_add(conv(c5, xi, "ast"), conv(c6, eta, "ast")), lam, ops))
    fe = _add(-_ktimes(eta, ops, 2), conv(c7, xi, "ast"), conv(c8, eta, "ast"),
              _cscale(conv(c9, eta, "ast"), lam, ops))
    fl = xi[X.k0] - 1.0
    return fx, fe, fl


def _lin_blocks(cbar, n, ops):
    c1, c2, c3, c4, c5, c6, c7, c8, c9 = cbar
    mult = ops.mult
    pk = ops.pik(n, 1)
    D2 = ops.diag(ops.pik(n, 2))
    Lxx = mult(c1, SIN, SIN, n, n) * pk[None, :] + mult(c3, COS, COS, n, n) - D2
    Lxe = mult(c2, SIN, SIN, n, n) * pk[None, :] + mult(c4, COS, COS, n, n)
    Lex = mult(c7, COS, COS, n, n)
    Lee = mult(c8, COS, COS, n, n) - D2
    Mxx = mult(c5, COS, COS, n, n)
    Mxe = mult(c6, COS, COS, n, n)
    Mee = mult(c9, COS, COS, n, n)
    return Lxx, Lxe, Lex, Lee, Mxx, Mxe, Mee


def eigen_matrices(cbar, n: int):
    """Float (L, M) with F̄ = (L + lambda M) (xi, eta) on n modes per component."""
    cbar = [np.asarray(c.mid() if isinstance(c, Interval) else c, float) for c in cbar]
    Lxx, Lxe, Lex, Lee, Mxx, Mxe, Mee = _lin_blocks(cbar, n, FloatOps)
    L = np.block([[Lxx, Lxe], [Lex, Lee]])
    M = np.block([[Mxx, Mxe], [np.zeros((n, n)), Mee]])
    return L, M


def F_hat_eigen(X: EigenX, cbar) -> np.ndarray:
    fx, fe, fl = eigen_eval_Fbar(X, cbar)
    n = X.n
    return np.concatenate([_pad(fx, n), _pad(fe, n), [fl]])


def DF_hat_eigen(X: EigenX, cbar):
    """Jacobian of the truncated map; CInterval for interval coefficients."""
    ops = _ops_for(cbar)
    n, lam = X.n, X.lam
    Lxx, Lxe, Lex, Lee, Mxx, Mxe, Mee = _lin_blocks(cbar, n, ops)
    c5, c6, c9 = cbar[4], cbar[5], cbar[8]
    col_x = _pad(_add(ops.conv(c5, X.xi, "ast"), ops.conv(c6, X.eta, "ast")), n)
    col_e = _pad(ops.conv(c9, X.eta, "ast"), n)
    row = np.zeros((1, n))
    row[0, X.k0] = 1.0
    if not ops.rigorous:
        return np.block([[Lxx + lam * Mxx, Lxe + lam * Mxe, col_x[:, None]],
                         [Lex, Lee + lam * Mee, col_e[:, None]],
                         [row, np.zeros((1, n)), np.zeros((1, 1))]])
    lr, li = Interval(lam.real), Interval(lam.imag)
    re = IntervalOps.block([[Lxx + Mxx * lr, Lxe + Mxe * lr, col_x.re.reshape(n, 1)],
                            [Lex, Lee + Mee * lr, col_e.re.reshape(n, 1)],
                            [row, None, np.zeros((1, 1))]])
    im = IntervalOps.block([[Mxx * li, Mxe * li, col_x.im.reshape(n, 1)],
                            [np.zeros((n, n)), Mee * li, col_e.im.reshape(n, 1)],
                            [np.zeros((1, n)), np.zeros((1, n)), np.zeros((1, 1))]])
    return CInterval(re, im)


def newton_eigen(X: EigenX, cbar, iters: int = 6, tol: float = 1e-14) -> EigenX:
    """Refine a numerical eigenpair of the truncated map; keeps xi[k0] = 1."""
    cbar = [np.asarray(c.mid() if isinstance(c, Interval) else c, float) for c in cbar]
    x = X.to_vector()
    for _ in range(iters):
        Xc = EigenX.from_vector(x, X.k0)
        F = F_hat_eigen(Xc, cbar)
        try:
            dx = scipy.linalg.solve(DF_hat_eigen(Xc, cbar), F)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SingularJacobian(str(exc)) from exc
        x = x - dx
        if np.max(np.abs(dx)) <= tol * max(1.0, np.max(np.abs(x))):
            break
    out = EigenX.from_vector(x, X.k0)
    out.xi[X.k0] = 1.0
    return out


# -- operators and bounds -----------------------------------------------------------------------


def eigen_build_operators(Xbar: EigenX, cj: CjEnclosure):
    n = Xbar.n
    DF = DF_hat_eigen(Xbar, cj.cbar)
    try:
        Ahat = scipy.linalg.inv(DF.mid(), check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularJacobian(str(exc)) from exc
    if not np.all(np.isfinite(Ahat)):
        raise SingularJacobian("non-finite inverse")
    one = Interval(1.0)
    sizes = (n, n, 1)
    A = BlockTailOp(Ahat, sizes, (TailRule(-one, -2), TailRule(-one, -2), None))
    Adag = BlockTailOp(DF, sizes, (TailRule(-one, 2), TailRule(-one, 2), None))
    return A, Adag


def _comp_norms(vec, sizes, g):
    out, o = [], 0
    for s in sizes:
        out.append(norm_up(vec[o:o + s], g))
        o += s
    return out


def theta(A: BlockTailOp, gamma: float) -> np.ndarray:
    return ss.op_norm(A, ss.Weight(gamma))


def bound_Y_eigen(Xbar: EigenX, A: BlockTailOp, cj: CjEnclosure, gamma: float,
                  theta_A: Optional[np.ndarray] = None) -> float:
    n = Xbar.n
    fx, fe, fl = eigen_eval_Fbar(Xbar, cj.cbar)
    head = CInterval(
        Interval(np.concatenate([_pad(fx.re, n).lo, _pad(fe.re, n).lo, [fl.real]]),
                 np.concatenate([_pad(fx.re, n).hi, _pad(fe.re, n).hi, [fl.real]])),
        Interval(np.concatenate([_pad(fx.im, n).lo, _pad(fe.im, n).lo, [fl.imag]]),
                 np.concatenate([_pad(fx.im, n).hi, _pad(fe.im, n).hi, [fl.imag]])),
    )
    AF = cmatmul(A.mat, head)
    total = sum(_comp_norms(AF, (n, n, 1), gamma))
    for f in (fx, fe):
        if len(f) > n:
            k2 = (Interval(np.arange(n, len(f), dtype=float)) * PI) ** 2
            t = f[n:]
            tail = CInterval(t.re / k2, t.im / k2)
            _, whi = ss.weights(gamma, len(f))
            total = float(up(total + float(sum_up(mul_up(tail.mag(), whi[n:])))))
    if theta_A is None:
        theta_A = theta(A, gamma)
    Tx, Te, _ = theta_A
    e = cj.eps(gamma)
    lam = abs(Xbar.lam) * (1 + 2**-50)
    nKx = norm_up(ss.k_times(Xbar.xi), gamma)
    nKe = norm_up(ss.k_times(Xbar.eta), gamma)
    nx, ne = norm_up(Xbar.xi, gamma), norm_up(Xbar.eta, gamma)
    ex = nKx * e[0] + nKe * e[1] + nx * (e[2] + lam * e[4]) + ne * (e[3] + lam * e[5])
    ee = nx * e[6] + ne * (e[7] + lam * e[8])
    extra = Tx * ex + Te * ee
    return float(up(up(total + extra) * (1 + 2**-48)))


def bound_Z0_eigen(A: BlockTailOp, Adag: BlockTailOp, gamma: float) -> float:
    N = A.mat.shape[0]
    prod = cmatmul(A.mat, Adag.mat)
    B = CInterval(Interval(np.eye(N)) - prod.re, -prod.im)
    return float(np.max(ss.op_norm(BlockTailOp(B, A.sizes), ss.Weight(gamma))))


def _alpha(Xbar: EigenX, cj: CjEnclosure, gamma: float):
    n, lam = Xbar.n, Xbar.lam
    c1, c2, c3, c4, c5, c6, c7, c8, c9 = cj.cbar
    L = CInterval.point(lam)
    comb_x = _add(CInterval(c5) * L, c3, -ss.k_times(c1))
    comb_e = _add(CInterval(c6) * L, c4, -ss.k_times(c2))
    comb_ee = _add(CInterval(c9) * L, c8)
    phi = lambda c: ss.phi_up(c, n, gamma, n)  # noqa: E731
    pk = (Interval(np.arange(n, dtype=float)) * PI).hi
    ax = np.concatenate([up(mul_up(pk, phi(c1)) + phi(comb_x)), phi(c7), [0.0]])
    ae = np.concatenate([up(mul_up(pk, phi(c2)) + phi(comb_e)), phi(comb_ee), [0.0]])
    return ax, ae, (comb_x, comb_e, comb_ee)


def theta_AK(A: BlockTailOp, gamma: float) -> float:
    """Column norm (xi column) of A composed with K on the xi component."""
    n = A.sizes[0]
    M = ss.mag(A.mat[:, :n])
    pk = (Interval(np.arange(n, dtype=float)) * PI).hi
    total = 0.0
    for i, (a, b) in enumerate(((0, n), (n, 2 * n), (2 * n, 2 * n + 1))):
        cols = mul_up(ss.column_norms_up(M[a:b], gamma), pk)
        val = float(np.max(cols))
        if i == 0:
            val = max(val, float((Interval(1.0) / (PI * float(n))).hi))
        total = float(up(total + val))
    return total


def bound_Z1_eigen(Xbar: EigenX, A: BlockTailOp, cj: CjEnclosure, gamma: float, gamma_tilde: float,
                   theta_A: Optional[np.ndarray] = None) -> float:
    check_weights(gamma, gamma_tilde, cj.steady.nu)
    n = Xbar.n
    ax, ae, (comb_x, comb_e, comb_ee) = _alpha(Xbar, cj, gamma)
    absA = ss.mag(A.mat)
    part1 = max(sum(_comp_norms(matmul_up(absA, a), (n, n, 1), gamma)) for a in (ax, ae))

    N = lambda c: norm_up(c, gamma)  # noqa: E731
    c1, c2, c3, c4, c5, c6, c7, c8, c9 = cj.cbar
    pin = (PI * float(n)).lo
    pin2 = float(down(pin * pin))
    lam = abs(Xbar.lam) * (1 + 2**-50)
    part2 = max(
        N(c1) / pin + (N(comb_x) + N(c7)) / pin2,
        N(c2) / pin + (N(comb_e) + N(comb_ee)) / pin2,
        (N(IntervalOps.conv(c5, Xbar.xi, "ast")) + N(IntervalOps.conv(c6, Xbar.eta, "ast"))
         + N(IntervalOps.conv(c9, Xbar.eta, "ast"))) / pin2,
    ) * (1 + 2**-48)

    if theta_A is None:
        theta_A = theta(A, gamma)
    Tx, Te, _ = theta_A
    e, et = cj.eps(gamma), cj.eps(gamma_tilde)
    ups = float((PI * ss.upsilon(1, gamma, gamma_tilde)).hi)
    nx, ne = N(Xbar.xi), N(Xbar.eta)
    part3 = max(
        Tx * (ups * et[0] + e[2] + lam * e[4]) + Te * e[6],
        Tx * (ups * et[1] + e[3] + lam * e[5]) + Te * (e[7] + lam * e[8]),
        Tx * (nx * e[4] + ne * e[5]) + Te * ne * e[8],
    ) * (1 + 2**-48)
    part4 = theta_AK(A, gamma) * max(e[0], e[1]) * (1 + 2**-50)
    return float(up(up(up(part1 + part2) + part3) + part4))


def bound_Z2_eigen(A: BlockTailOp, cj: CjEnclosure, gamma: float, theta_A: Optional[np.ndarray] = None) -> float:
    if theta_A is None:
        theta_A = theta(A, gamma)
    Tx, Te, _ = theta_A
    nc = cj.norms(gamma)
    e = cj.eps(gamma)
    val = max(Tx * (nc[4] + e[4]), Tx * (nc[5] + e[5]) + Te * (nc[8] + e[8]))
    return float(up(val * (1 + 2**-48)))


# -- the certificate ------------------------------------------------------------------------------


@dataclass
class EigenCertificate:
    n: int
    k0: int
    gamma: float
    gamma_tilde: float
    lambda_re: float
    lambda_im: float
    Y: float
    Z0: float
    Z1: float
    Z2: float
    r_min: Optional[float]
    r_max: Optional[float]
    re_margin: Optional[float]
    tainted: bool
    steady_radius: float
    failure: Optional[str] = None

    @property
    def valid(self) -> bool:
        if self.tainted or self.r_min is None or self.re_margin is None:
            return False
        if p_upper(self.Y, self.Z0, self.Z1, (self.Z2,), self.r_min) >= 0:
            return False
        return self.re_margin > 0

    @property
    def radius(self) -> Optional[float]:
        return self.r_min

    @property
    def lam(self) -> complex:
        return complex(self.lambda_re, self.lambda_im)


def re_margin(lambda_re: float, r: float) -> float:
    """Lower bound of Re(lambda) - r."""
    return float((Interval(float(lambda_re)) - Interval(float(r))).lo)


def instability_check(Y: float, Z0: float, Z1: float, Z2: float, lam: complex):
    """(RadiiResult, margin); raises on either kind of proof failure."""
    res = find_radius(Y, Z0, Z1, (Z2,))
    margin = re_margin(complex(lam).real, res.r_min)
    if margin <= 0:
        raise NonpositiveRealPart(f"Re(lambda)={complex(lam).real:.3e} does not exceed r={res.r_min:.3e}")
    return res, margin


def validate_eigen(Xbar: EigenX, cj: CjEnclosure, gamma: float, gamma_tilde: float) -> EigenCertificate:
    check_weights(gamma, gamma_tilde, cj.steady.nu)
    if Xbar.xi[Xbar.k0] != 1.0:
        raise ValueError("candidate must satisfy xi[k0] = 1")
    A, Adag = eigen_build_operators(Xbar, cj)
    Z0 = bound_Z0_eigen(A, Adag, gamma)
    del Adag
    th = theta(A, gamma)
    Y = bound_Y_eigen(Xbar, A, cj, gamma, th)
    Z1 = bound_Z1_eigen(Xbar, A, cj, gamma, gamma_tilde, th)
    Z2 = bound_Z2_eigen(A, cj, gamma, th)
    tainted = not np.all(np.isfinite([Y, Z0, Z1, Z2]))
    cert = EigenCertificate(
        n=Xbar.n, k0=Xbar.k0, gamma=gamma, gamma_tilde=gamma_tilde, lambda_re=Xbar.lam.real,
        lambda_im=Xbar.lam.imag, Y=Y, Z0=Z0, Z1=Z1, Z2=Z2, r_min=None, r_max=None,
        re_margin=None, tainted=tainted, steady_radius=cj.r_nu,
    )
    if tainted:
        cert.failure = "overflow in bounds"
        return cert
    try:
        res, margin = instability_check(Y, Z0, Z1, Z2, Xbar.lam)
    except NoNegativeRadius as exc:
        cert.failure = str(exc)
        return cert
    except NonpositiveRealPart as exc:
        res = find_radius(Y, Z0, Z1, (Z2,))
        cert.r_min, cert.r_max = res.r_min, res.r_max
        cert.re_margin = re_margin(Xbar.lam.real, res.r_min)
        cert.failure = str(exc)
        return cert
    cert.r_min, cert.r_max, cert.re_margin = res.r_min, res.r_max, margin
    return cert


def unstable_candidate(steady: SteadyX, n: int, count: int = 8, target: Optional[complex] = None) -> EigenX:
    """Numerical eigenpair with the largest real part (or nearest to target), refined by Newton."""
    from .numerics import eigen_guess

    cb = cj_float(steady)
    guesses = eigen_guess(steady, n, count)
    if target is not None:
        guesses = sorted(guesses, key=lambda t: abs(t[2] - complex(target)))
    xi, eta, lam, k0 = guesses[0]
    if not lam.real > 0:
        raise NoUnstableCandidate(f"selected eigenvalue has real part {lam.real:.3e} <= 0", lam)
    X = EigenX(xi, eta, lam, k0)
    X.xi[k0] = 1.0
    return newton_eigen(X, cb)


def prove_instability(steady: SteadyX, r_nu: float, n: int, gamma: float,
                      gamma_tilde: Optional[float] = None,
                      target: Optional[complex] = None) -> Tuple[EigenCertificate, EigenX]:
    gamma_tilde = default_gamma_tilde(gamma, steady.nu) if gamma_tilde is None else gamma_tilde
    check_weights(gamma, gamma_tilde, steady.nu)
    X = unstable_candidate(steady, n, target=target)
    cj = cj_enclose(steady, r_nu, gamma, gamma_tilde)
    return validate_eigen(X, cj, gamma, gamma_tilde), X
