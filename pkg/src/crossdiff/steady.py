"""Existence proofs for steady states.

Unknowns are the cosine sequences v, w = (d1 + d12 v) u, p = 1/(d1 + d12 v)
and the sine sequence s = v'.  The zero-finding map F, its truncated
Jacobian, the operators A and A-dagger, and the bounds Y, Z0, Z1, Z2 live
here.  Component order is always (v, w, p, s).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Tuple

import numpy as np
import scipy.linalg

from . import seqspace as ss
from .interval import PI, Interval, div_up, imatmul, matmul_up, mul_up, sum_up, up
from .ops import FloatOps, IntervalOps, add_padded
from .radii import NoNegativeRadius, find_radius, p_upper
from .seqspace import COS, SIN, BlockTailOp, TailRule, norm_up

PARAM_NAMES = ("r1", "r2", "a1", "a2", "b1", "b2", "d12", "d1", "d2")

DEFAULT_PARAMS = {"r1": "5", "r2": "2", "a1": "3", "a2": "3", "b1": "1", "b2": "1", "d12": "3"}


class SingularJacobian(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelParams:
    """Model coefficients, kept both as exact decimals and as enclosures."""

    decimals: Tuple[Tuple[str, str], ...]

    @classmethod
    def from_strings(cls, values: Dict[str, object]) -> "ModelParams":
        missing = [k for k in PARAM_NAMES if k not in values]
        if missing:
            raise ValueError(f"missing parameters: {missing}")
        dec = []
        for k in PARAM_NAMES:
            q = Fraction(str(values[k]))
            if q < 0:
                raise ValueError(f"parameter {k} must be nonnegative")
            dec.append((k, str(values[k])))
        if Fraction(dict(dec)["d1"]) <= 0 or Fraction(dict(dec)["d2"]) <= 0:
            raise ValueError("d1 and d2 must be positive")
        return cls(tuple(dec))

    @classmethod
    def with_d(cls, d: str, base: Optional[Dict[str, object]] = None) -> "ModelParams":
        vals = dict(DEFAULT_PARAMS if base is None else base)
        vals.setdefault("d1", d)
        vals.setdefault("d2", d)
        if base is None or "d1" not in base:
            vals["d1"] = d
        if base is None or "d2" not in base:
            vals["d2"] = d
        return cls.from_strings(vals)

    def as_dict(self) -> Dict[str, str]:
        return dict(self.decimals)

    def iv(self, name: str) -> Interval:
        return Interval.from_decimal(self.as_dict()[name])

    def fl(self, name: str) -> float:
        return float(Fraction(self.as_dict()[name]))

    def exact(self, name: str) -> Fraction:
        return Fraction(self.as_dict()[name])

    def values(self, ops):
        return {k: (self.iv(k) if ops.rigorous else self.fl(k)) for k in PARAM_NAMES}


@dataclass
class SteadyX:
    v: np.ndarray
    w: np.ndarray
    p: np.ndarray
    s: np.ndarray
    params: ModelParams
    nu: float = 1.06

    @property
    def m(self) -> int:
        return len(self.v)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.v, self.w, self.p, self.s])

    @classmethod
    def from_vector(cls, x, params, nu=1.06) -> "SteadyX":
        m = len(x) // 4
        x = np.asarray(x, dtype=float)
        return cls(x[:m].copy(), x[m:2 * m].copy(), x[2 * m:3 * m].copy(), x[3 * m:].copy(), params, nu)

    def padded(self, m: int) -> "SteadyX":
        """Zero-pad (or truncate) every component to length m."""
        f = lambda a: FloatOps.pad(a, m).copy()  # noqa: E731
        return SteadyX(f(self.v), f(self.w), f(self.p), f(self.s), self.params, self.nu)

    def v0(self) -> float:
        """v(0) = v_0 + 2 sum v_k."""
        return float(self.v[0] + 2 * np.sum(self.v[1:]))

    @classmethod
    def homogeneous(cls, params: ModelParams, m: int, nu: float = 1.06) -> "SteadyX":
        u, v = homogeneous_state(params)
        d1, d12 = params.exact("d1"), params.exact("d12")
        vs = np.zeros(m)
        ws = np.zeros(m)
        ps = np.zeros(m)
        vs[0] = float(v)
        ws[0] = float((d1 + d12 * v) * u)
        ps[0] = float(1 / (d1 + d12 * v))
        return cls(vs, ws, ps, np.zeros(m), params, nu)


def homogeneous_state(params: ModelParams) -> Tuple[Fraction, Fraction]:
    """Positive coexistence equilibrium (u, v) in exact arithmetic."""
    r1, r2, a1, a2, b1, b2 = (params.exact(k) for k in ("r1", "r2", "a1", "a2", "b1", "b2"))
    det = a1 * a2 - b1 * b2
    if det == 0:
        raise ValueError("degenerate kinetics")
    u = (r1 * a2 - b1 * r2) / det
    v = (a1 * r2 - b2 * r1) / det
    return u, v


# -- the map F ----------------------------------------------------------------------


def _components(X: SteadyX, ops):
    if ops.rigorous:
        return tuple(Interval(np.asarray(a, dtype=float)) for a in (X.v, X.w, X.p, X.s))
    return X.v, X.w, X.p, X.s


def eval_F(v, w, p, s, P, ops):
    """All nonzero coefficients of F(v, w, p, s); lengths m, 4m-3, 3m-2, 3m-2."""
    m = len(v)
    cv = ops.conv
    pw = cv(p, w, "ast")
    pv = cv(p, v, "ast")
    pvw = cv(pv, w, "ast")
    ppww = cv(pw, pw, "ast")
    pp = cv(p, p, "ast")
    spp = cv(s, pp, "star")
    vv = cv(v, v, "ast")

    Fv = -(ops.pik(m) * v) - s
    Fw = add_padded(ops, -(ops.pik(m, 2) * w), P["r1"] * pw, -(P["a1"] * ppww), -(P["b1"] * pvw))
    Fp = add_padded(ops, -(ops.pik(m) * p), P["d12"] * spp)
    Fs = add_padded(ops, P["d2"] * (ops.pik(m) * s), P["r2"] * v, -(P["a2"] * vv), -(P["b2"] * pvw))
    # k = 0 of the p equation is the scalar constraint p(0)(d1 + d12 v(0)) = 1
    psum = ops.sum(p[0:1]) + 2 * ops.sum(p[1:]) if m > 1 else ops.sum(p[0:1])
    vsum = ops.sum(v[0:1]) + 2 * ops.sum(v[1:]) if m > 1 else ops.sum(v[0:1])
    c0 = psum * (P["d1"] + P["d12"] * vsum) - 1
    Fp = _set_first(Fp, c0, ops)
    return Fv, Fw, Fp, Fs


def _set_first(x, val, ops):
    if ops.rigorous:
        lo = x.lo.copy()
        hi = x.hi.copy()
        val = val if isinstance(val, Interval) else Interval(float(val))
        lo[0] = val.lo
        hi[0] = val.hi
        return Interval(lo, hi)
    x = np.array(x, dtype=float)
    x[0] = val
    return x


def steady_eval_F(X: SteadyX, rigorous: bool = True):
    """F(X) as a 4-tuple of Seq (interval coefficients by default)."""
    ops = IntervalOps if rigorous else FloatOps
    F = eval_F(*_components(X, ops), X.params.values(ops), ops)
    return tuple(ss.Seq(c, par) for c, par in zip(F, (COS, COS, COS, SIN)))


def F_hat(X: SteadyX) -> np.ndarray:
    """Floating truncated map on R^{4m}."""
    m = X.m
    F = eval_F(X.v, X.w, X.p, X.s, X.params.values(FloatOps), FloatOps)
    return np.concatenate([FloatOps.pad(f, m) for f in F])


# -- the Jacobian -----------------------------------------------------------------------


def jacobian_coeffs(v, w, p, s, P, ops):
    """Multiplier sequences of the derivative's convolution blocks."""
    cv = ops.conv
    pw = cv(p, w, "ast")
    pv = cv(p, v, "ast")
    vw = cv(v, w, "ast")
    pp = cv(p, p, "ast")
    ppw = cv(pp, w, "ast")
    pww = cv(pw, w, "ast")
    sp = cv(s, p, "star")
    return {
        "wv": -(P["b1"] * pw),
        "ww": add_padded(ops, P["r1"] * p, -(2 * P["a1"] * ppw), -(P["b1"] * pv)),
        "wp": add_padded(ops, P["r1"] * w, -(2 * P["a1"] * pww), -(P["b1"] * vw)),
        "pp": 2 * P["d12"] * sp,
        "ps": P["d12"] * pp,
        "sv": add_padded(ops, -(2 * P["a2"] * v), -(P["b2"] * pw)),
        "sw": -(P["b2"] * pv),
        "sp": -(P["b2"] * vw),
        # helpers reused by the bounds
        "pw": pw, "pv": pv, "vw": vw,
    }


def assemble_DF(v, w, p, s, P, ops):
    m = len(v)
    C = jacobian_coeffs(v, w, p, s, P, ops)
    M = lambda c, pc=COS, px=COS: ops.mult(c, pc, px, m, m)  # noqa: E731
    pik = ops.pik(m)
    eye = np.eye(m)
    r2 = P["r2"]

    vv = ops.diag(-pik)
    vs = -eye
    wv = M(C["wv"])
    ww = ops.diag(-ops.pik(m, 2)) + M(C["ww"])
    wp = M(C["wp"])
    pp = ops.diag(-pik) + M(C["pp"], SIN, COS)
    ps = M(C["ps"], COS, SIN)
    sv = ops.diag(r2 * np.ones(m)) + M(C["sv"])
    sw = M(C["sw"])
    sp = M(C["sp"])
    ss_ = ops.diag(P["d2"] * pik)

    # constraint row: d/dp_j and d/dv_j of (sum' p)(d1 + d12 sum' v)
    cw = np.full(m, 2.0)
    cw[0] = 1.0
    psum = ops.sum(p[0:1]) + 2 * ops.sum(p[1:])
    vsum = ops.sum(v[0:1]) + 2 * ops.sum(v[1:])
    row_p = (P["d1"] + P["d12"] * vsum) * cw
    row_v = (P["d12"] * psum) * cw
    pv = _zero_rows_like(pp, ops, m)
    pp = _replace_row0(pp, row_p, ops)
    ps = _replace_row0(ps, np.zeros(m), ops)
    pv = _replace_row0(pv, row_v, ops)

    return ops.block([
        [vv, None, None, vs],
        [wv, ww, wp, None],
        [pv, None, pp, ps],
        [sv, sw, sp, ss_],
    ])


def _zero_rows_like(template, ops, m):
    return Interval.zeros((m, m)) if ops.rigorous else np.zeros((m, m))


def _replace_row0(M, row, ops):
    if ops.rigorous:
        row = row if isinstance(row, Interval) else Interval(np.asarray(row, float))
        lo = M.lo.copy()
        hi = M.hi.copy()
        lo[0] = row.lo
        hi[0] = row.hi
        return Interval(lo, hi)
    M = np.array(M, dtype=float)
    M[0] = row
    return M


def steady_assemble_DF_block(Xbar: SteadyX, rigorous: bool = True):
    """Jacobian of the truncated map at Xbar (4m x 4m)."""
    ops = IntervalOps if rigorous else FloatOps
    return assemble_DF(*_components(Xbar, ops), Xbar.params.values(ops), ops)


def DF_hat(X: SteadyX) -> np.ndarray:
    return assemble_DF(X.v, X.w, X.p, X.s, X.params.values(FloatOps), FloatOps)


# -- operators A and A-dagger ---------------------------------------------------------------


def tail_rules_A(params: ModelParams):
    d2 = params.iv("d2")
    one = Interval(1.0)
    return (TailRule(-one, -1), TailRule(-one, -2), TailRule(-one, -1), TailRule(one / d2, -1))


def tail_rules_Adag(params: ModelParams):
    """Growing rules; stored for completeness, never normed."""
    d2 = params.iv("d2")
    one = Interval(1.0)
    return (TailRule(-one, 1), TailRule(-one, 2), TailRule(-one, 1), TailRule(d2, 1))


def steady_build_operators(Xbar: SteadyX, DF: Optional[Interval] = None):
    """(A, A-dagger) as block operators; A's block is a floating inverse."""
    m = Xbar.m
    if DF is None:
        DF = steady_assemble_DF_block(Xbar)
    mid = DF.mid()
    try:
        Ahat = scipy.linalg.inv(mid, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularJacobian(str(exc)) from exc
    if not np.all(np.isfinite(Ahat)):
        raise SingularJacobian("non-finite inverse")
    sizes = (m, m, m, m)
    A = BlockTailOp(Ahat, sizes, tail_rules_A(Xbar.params))
    Adag = BlockTailOp(DF, sizes, tail_rules_Adag(Xbar.params))
    return A, Adag


@dataclass
class ConstraintCoupling:
    """Tail part of the scalar constraint row, absorbed into A-dagger.

    The constraint depends on every coefficient of v and p, so its row has
    entries ``a_v = 2 d12 p(0)`` and ``a_p = 2 (d1 + d12 v(0))`` on the tail
    modes.  Keeping them in A-dagger and using the exact block inverse adds
    to A the rank-one block ``t -> g * sum_{k>=m} (a_v t_v,k + a_p t_p,k)/(pi k)``
    with g the constraint column of the finite inverse.
    """

    g: np.ndarray
    a_v: Interval
    a_p: Interval
    m: int
    nu: float

    def scale(self) -> Interval:
        """1 / (2 pi m nu^m): bounds sum_{k>=m} |x_k|/(pi k) by scale * ||x||."""
        nu_m = Interval(float(ss.powers(self.nu, self.m + 1)[0][self.m]))
        return (Interval(2.0) * PI * float(self.m) * nu_m).reciprocal()

    def g_norms(self) -> np.ndarray:
        return np.array(_comp_norms_up(self.g, (self.m,) * 4, self.nu))

    def apply_tail(self, tail_v: Interval, tail_p: Interval) -> Interval:
        """g * sum (a_v t_v + a_p t_p)/(pi k) for explicit tail vectors (k = m, m+1, ...)."""
        acc = Interval(0.0)
        for t, a in ((tail_v, self.a_v), (tail_p, self.a_p)):
            if t is not None and len(t):
                k = Interval(np.arange(self.m, self.m + len(t), dtype=float)) * PI
                acc = acc + (t / k).sum() * a
        return Interval(self.g) * acc


def constraint_coupling(Xbar: SteadyX, A: BlockTailOp) -> ConstraintCoupling:
    m = Xbar.m
    P = Xbar.params.values(IntervalOps)
    v, _, p, _ = _components(Xbar, IntervalOps)
    psum = p[0:1].sum() + 2 * p[1:].sum()
    vsum = v[0:1].sum() + 2 * v[1:].sum()
    g = np.ascontiguousarray(A.mat[:, 2 * m])
    return ConstraintCoupling(g, 2 * P["d12"] * psum, 2 * (P["d1"] + P["d12"] * vsum), m, Xbar.nu)


# -- bounds ---------------------------------------------------------------------------------------


def _comp_norms_up(vec, sizes, nu):
    out = []
    o = 0
    for n in sizes:
        out.append(norm_up(vec[o:o + n], nu))
        o += n
    return out


def bound_Y_steady(Xbar: SteadyX, A: BlockTailOp, coupling: Optional[ConstraintCoupling] = None) -> float:
    m, nu = Xbar.m, Xbar.nu
    Fv, Fw, Fp, Fs = (f.coeffs for f in steady_eval_F(Xbar))
    head = IntervalOps.concat([Fv[:m], Fw[:m], Fp[:m], Fs[:m]])
    AF = imatmul(A.mat, head)
    if coupling is not None:
        AF = AF + coupling.apply_tail(Fv[m:] if len(Fv) > m else None, Fp[m:] if len(Fp) > m else None)
    norms = []
    tails = A.tails
    for i, f in enumerate((Fv, Fw, Fp, Fs)):
        finite = AF[i * m:(i + 1) * m]
        if len(f) > m:
            k = Interval(np.arange(m, len(f), dtype=float)) * PI
            t = tails[i]
            tail = f[m:] * t.coef * (k ** (-t.power)).reciprocal()
            wlo, whi = ss.weights(nu, len(f))
            tail_norm = float(sum_up(mul_up(tail.mag(), whi[m:])))
        else:
            tail_norm = 0.0
        norms.append(float(up(norm_up(finite, nu) + tail_norm)))
    return float(sum_up(np.array(norms)))


def bound_Z0_steady(A: BlockTailOp, Adag: BlockTailOp, nu: float) -> float:
    n = A.mat.shape[0]
    prod = imatmul(A.mat, Adag.mat)
    B = Interval(np.eye(n)) - prod
    theta = ss.op_norm(BlockTailOp(B, A.sizes), ss.Weight(nu))
    return float(np.max(theta))


def _phi(c, m, nu):
    return ss.phi_up(c, m, nu, m)


def alpha_vectors(Xbar: SteadyX, literal: bool = False):
    """The four alpha-hat vectors (length 4m each) and the tail max term.

    With ``literal`` the constraint row carries the tail-coupling entries
    2|.|/nu^m; otherwise that coupling is absorbed (see ConstraintCoupling)
    and those entries vanish.
    """
    m, nu = Xbar.m, Xbar.nu
    P = Xbar.params.values(IntervalOps)
    v, w, p, s = _components(Xbar, IntervalOps)
    C = jacobian_coeffs(v, w, p, s, P, IntervalOps)
    cv = IntervalOps.conv

    sv_full = add_padded(IntervalOps, P["r2"] * Interval(np.array([1.0])), C["sv"])
    psum = (p[0:1].sum() + 2 * p[1:].sum()) if m > 1 else p[0:1].sum()
    vsum = (v[0:1].sum() + 2 * v[1:].sum()) if m > 1 else v[0:1].sum()
    nu_m = float(ss.powers(nu, m + 1)[0][m])
    pcons_v = float(div_up(mul_up(2.0, (P["d12"] * psum).mag()), nu_m))
    pcons_p = float(div_up(mul_up(2.0, (P["d1"] + P["d12"] * vsum).mag()), nu_m))

    z = np.zeros(m)
    phi = lambda c: _phi(c, m, nu)  # noqa: E731
    av = np.concatenate([z, phi(C["wv"]), z, phi(C["sv"])])
    aw = np.concatenate([z, phi(C["ww"]), z, phi(C["sw"])])
    pp_row = phi(C["pp"])
    pp_row[0] = pcons_p if literal else 0.0
    ap = np.concatenate([z, phi(C["wp"]), pp_row, phi(C["sp"])])
    as_ = np.concatenate([z, z, phi(C["ps"]), z])
    av[2 * m] = pcons_v if literal else 0.0
    as_[2 * m] = 0.0  # row 0 of the p block is the constraint, which has no s dependence

    pim = PI * float(m)
    pim2 = pim * pim
    d2pim = P["d2"] * pim
    N = lambda c: Interval(norm_up(c, nu))  # noqa: E731
    tv = N(C["wv"]) / pim2 + N(sv_full) / d2pim
    tw = N(C["ww"]) / pim2 + N(C["sw"]) / d2pim
    tp = N(C["wp"]) / pim2 + N(C["pp"]) / pim + N(C["sp"]) / d2pim
    ts = Interval(1.0) / pim + N(C["ps"]) / pim
    tail = max(float(t.hi) for t in (tv, tw, tp, ts))
    del cv
    return (av, aw, ap, as_), tail


def coupling_Z1_terms(Xbar: SteadyX, coupling: ConstraintCoupling) -> float:
    """Column-wise bound of the rank-one block of A acting on the tail of U."""
    nu = Xbar.nu
    P = Xbar.params.values(IntervalOps)
    v, w, p, s = _components(Xbar, IntervalOps)
    N = lambda c: Interval(norm_up(c, nu))  # noqa: E731
    gn = Interval(float(sum_up(coupling.g_norms())))
    sc = coupling.scale()
    av, ap = Interval(coupling.a_v.mag()), Interval(coupling.a_p.mag())
    # tail of U: v-row is -s, p-row is d12 (p*p) star s + 2 d12 (s star p) * p
    col_s = av + ap * N(P["d12"] * IntervalOps.conv(p, p, "ast"))
    col_p = ap * N(2 * P["d12"] * IntervalOps.conv(s, p, "star"))
    return float((gn * sc * Interval(max(float(col_s.hi), float(col_p.hi)))).hi)


def bound_Z1_steady(Xbar: SteadyX, A: BlockTailOp, coupling: Optional[ConstraintCoupling] = None) -> float:
    nu = Xbar.nu
    alphas, tail = alpha_vectors(Xbar, literal=coupling is None)
    absA = np.abs(A.mat)
    vals = []
    for a in alphas:
        y = matmul_up(absA, a)
        vals.append(float(sum_up(np.array(_comp_norms_up(y, A.sizes, nu)))))
    extra = coupling_Z1_terms(Xbar, coupling) if coupling is not None else 0.0
    return float(up(up(max(vals) + tail) + extra))


def theta_A(A: BlockTailOp, nu: float, coupling: Optional[ConstraintCoupling] = None) -> np.ndarray:
    N = ss.block_norms(A, nu)
    if coupling is not None:
        gn = coupling.g_norms()
        sc = coupling.scale()
        for j, a in ((0, coupling.a_v), (2, coupling.a_p)):
            f = float((Interval(a.mag()) * sc).hi)
            N[:, j] = up(N[:, j] + mul_up(gn, f))
    return sum_up(N, axis=0)


def bound_Z2_steady(Xbar: SteadyX, A: BlockTailOp, theta: Optional[np.ndarray] = None,
                    coupling: Optional[ConstraintCoupling] = None):
    """(c0, c1, c2) with Z2(r) = c0 + c1 r + c2 r^2 (upper bounds)."""
    nu = Xbar.nu
    if theta is None:
        theta = theta_A(A, nu, coupling)
    Tv, Tw, Tp, Ts = (Interval(float(t)) for t in theta)
    del Tv
    P = Xbar.params.values(IntervalOps)
    v, w, p, s = _components(Xbar, IntervalOps)
    cv = IntervalOps.conv
    N = lambda c: Interval(norm_up(c, nu))  # noqa: E731
    nv, nw, np_, ns = N(v), N(w), N(p), N(s)
    a1, a2, b1, b2, d12, r1 = P["a1"], P["a2"], P["b1"], P["b2"], P["d12"], P["r1"]
    wp = cv(w, p, "ast")
    quad = [
        2 * a2 * Ts,
        2 * a1 * N(cv(p, p, "ast")) * Tw,
        2 * a1 * N(cv(w, w, "ast")) * Tw + 2 * d12 * ns * Tp,
        b1 * np_ * Tw + b2 * np_ * Ts,
        b1 * nw * Tw + d12 * Tp + b2 * nw * Ts,
        N(add_padded(IntervalOps, r1 * Interval(np.array([1.0])), -(4 * a1 * wp), -(b1 * v))) * Tw + b2 * nv * Ts,
        2 * d12 * np_ * Tp,
    ]
    cubic = [b1 * Tw + b2 * Ts, 4 * a1 * np_ * Tw, 4 * a1 * nw * Tw, 2 * d12 * Tp]
    c0 = max(float(q.hi) for q in quad)
    c1 = float((Interval(max(float(q.hi) for q in cubic)) / 2).hi)
    c2 = float((4 * a1 * Tw / 6).hi)
    return (c0, c1, c2)


# -- function-space checks -------------------------------------------------------------------------


def _cos_eval_lower(c: np.ndarray, N: int):
    """Lower bound of inf over [0,1] of c0 + 2 sum c_k cos(pi k x).

    Values on the grid x_i = i/N carry an a-priori error bound covering
    argument reduction and libm cos (assumed accurate to a few ulp); between
    grid points the curvature bound sup|f''| h^2/8 is subtracted.
    """
    c = np.asarray(c, dtype=float)
    m = len(c)
    k = np.arange(m)
    x = np.arange(N + 1) / N
    coef = c.copy()
    coef[1:] *= 2
    # chunk to bound memory
    vals = np.empty(N + 1)
    step = max(1, 4_000_000 // max(m, 1))
    for a in range(0, N + 1, step):
        xs = x[a:a + step]
        vals[a:a + step] = np.cos(np.pi * np.outer(xs, k)) @ coef
    eps = 2.0**-52
    abscoef = np.abs(coef)
    # argument error ~ (pi k)(3 eps) plus 4 eps for cos itself, then summation
    eval_err = float(sum_up(mul_up(abscoef, (3.0 * np.pi * k + 4.0) * eps)))
    eval_err = float(up(eval_err + 2 * (m + 2) * eps * float(sum_up(abscoef))))
    M2 = float(sum_up(mul_up(abscoef, up((np.pi * k) ** 2 * (1 + 4 * eps)))))
    h = 1.0 / N
    curv = float(up(M2 * h * h / 8.0 * (1 + 8 * eps)))
    lo = float(np.min(np.minimum(vals[:-1], vals[1:])))
    return float(np.nextafter(lo - eval_err - curv, -np.inf)), curv


def inf_lower(c: np.ndarray, N0: int = 1024, Nmax: int = 1 << 17, target: float = 0.0) -> float:
    """Lower bound of the infimum, refining the grid until it exceeds target."""
    N = N0
    best = -np.inf
    while True:
        val, curv = _cos_eval_lower(c, N)
        best = max(best, val)
        if best > target or N >= Nmax or curv < 1e-15:
            return best
        N *= 2


def positivity_check(Xbar: SteadyX, r: float) -> Tuple[float, float]:
    """Lower bounds of inf v - r and inf w - r on [0, 1]."""
    mv = inf_lower(Xbar.v, target=r)
    mw = inf_lower(Xbar.w, target=r)
    return float(np.nextafter(mv - r, -np.inf)), float(np.nextafter(mw - r, -np.inf))


def u_enclosure(Xbar: SteadyX, r: float) -> float:
    """Upper bound of sup |u - u_bar| given the radius r."""
    nw = norm_up(Xbar.w, Xbar.nu)
    np_ = norm_up(Xbar.p, Xbar.nu)
    R = Interval(float(r))
    return float(((Interval(nw) + Interval(np_)) * R + R * R / 4).hi)


# -- the certificate --------------------------------------------------------------------------------


@dataclass
class SteadyCertificate:
    params: Dict[str, str]
    m: int
    nu: float
    Y: float
    Z0: float
    Z1: float
    Z2_coeffs: Tuple[float, float, float]
    r_min: Optional[float]
    r_max: Optional[float]
    positivity_margins: Optional[Tuple[float, float]]
    u_error_bound: Optional[float]
    tainted: bool
    candidate: Dict[str, list] = field(default_factory=dict)
    failure: Optional[str] = None
    v0: Optional[float] = None

    @property
    def valid(self) -> bool:
        if self.tainted or self.r_min is None or self.positivity_margins is None:
            return False
        if p_upper(self.Y, self.Z0, self.Z1, _poly_coeffs(self.Z2_coeffs), self.r_min) >= 0:
            return False
        return all(mg > 0 for mg in self.positivity_margins)

    @property
    def radius(self) -> Optional[float]:
        return self.r_min


def _poly_coeffs(z2):
    # P(r) = Y - (1-Z0-Z1) r + Z2(r) r^2: the Z2 coefficients multiply r^2, r^3, r^4
    return tuple(z2)


def radii_check_steady(Y, Z0, Z1, Z2_coeffs):
    return find_radius(Y, Z0, Z1, _poly_coeffs(Z2_coeffs))


def validate_steady(Xbar: SteadyX, literal_constraint: bool = False) -> SteadyCertificate:
    """Run the whole existence proof for a floating candidate."""
    nu = Xbar.nu
    DF = steady_assemble_DF_block(Xbar)
    A, Adag = steady_build_operators(Xbar, DF)
    coupling = None if literal_constraint else constraint_coupling(Xbar, A)
    Y = bound_Y_steady(Xbar, A, coupling)
    Z0 = bound_Z0_steady(A, Adag, nu)
    del Adag, DF
    Z1 = bound_Z1_steady(Xbar, A, coupling)
    Z2 = bound_Z2_steady(Xbar, A, coupling=coupling)
    tainted = not np.all(np.isfinite([Y, Z0, Z1, *Z2]))
    cert = SteadyCertificate(
        params=Xbar.params.as_dict(), m=Xbar.m, nu=nu, Y=Y, Z0=Z0, Z1=Z1, Z2_coeffs=tuple(Z2),
        r_min=None, r_max=None, positivity_margins=None, u_error_bound=None, tainted=tainted,
        candidate={k: getattr(Xbar, k).tolist() for k in "vwps"}, v0=Xbar.v0(),
    )
    if tainted:
        cert.failure = "overflow in bounds"
        return cert
    try:
        res = radii_check_steady(Y, Z0, Z1, Z2)
    except NoNegativeRadius as exc:
        cert.failure = str(exc)
        return cert
    cert.r_min, cert.r_max = res.r_min, res.r_max
    cert.positivity_margins = positivity_check(Xbar, res.r_min)
    cert.u_error_bound = u_enclosure(Xbar, res.r_min)
    if not all(mg > 0 for mg in cert.positivity_margins):
        cert.failure = "positivity check failed"
    return cert
