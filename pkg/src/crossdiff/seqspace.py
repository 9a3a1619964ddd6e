"""Weighted l1 sequence spaces of Fourier coefficients.

A sequence ``u = (u_k)_{k>=0}`` stands for the function
``u0 + 2 sum u_k cos(pi k x)`` (cosine parity) or ``2 sum u_k sin(pi k x)``
(sine parity).  Its nu-norm is ``|u0| + 2 sum |u_k| nu^k``, i.e. the weights
are ``omega_0 = 1`` and ``omega_k = 2 nu^k``.

Coefficient arrays may be plain float/complex ndarrays (taken as exact),
:class:`Interval` or :class:`CInterval`.  Norm-type quantities are returned
as certified float upper bounds.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import mpmath
import numpy as np

from .interval import (
    E_INV,
    ETA,
    UNIT_ROUNDOFF,
    PI,
    CInterval,
    Interval,
    div_up,
    down,
    gamma,
    matmul_up,
    mul_up,
    sum_up,
    up,
)

COS = "cos"
SIN = "sin"


class ParityMismatch(ValueError):
    pass


class UnboundedSupport(ValueError):
    pass


class WeightOrder(ValueError):
    pass


class UnboundedTail(ValueError):
    pass


@dataclass(frozen=True)
class Weight:
    nu: float

    def __post_init__(self):
        if not self.nu > 1.0:
            raise WeightOrder(f"weight must exceed 1, got {self.nu}")


@dataclass
class Seq:
    coeffs: object
    parity: str = COS
    tail_norm_bound: Optional[float] = None

    def __post_init__(self):
        if self.parity not in (COS, SIN):
            raise ValueError(f"unknown parity {self.parity!r}")
        if self.tail_norm_bound is not None and self.tail_norm_bound < 0:
            raise ValueError("negative tail bound")

    def __len__(self):
        return len(self.coeffs)


# -- weights -------------------------------------------------------------------


@lru_cache(maxsize=64)
def _powers(nu: float, length: int):
    lo = np.empty(length)
    hi = np.empty(length)
    lo[0] = hi[0] = 1.0
    a = b = 1.0
    for k in range(1, length):
        a = float(down(a * nu))
        b = float(up(b * nu))
        lo[k] = a
        hi[k] = b
    lo.flags.writeable = False
    hi.flags.writeable = False
    return lo, hi


def powers(nu: float, length: int):
    """(lower, upper) float bounds for nu**k, k < length."""
    return _powers(float(nu), int(length))


def weights(nu: float, length: int):
    """(lower, upper) bounds for omega_k; doubling is exact."""
    lo, hi = powers(nu, length)
    wlo = 2.0 * lo
    whi = 2.0 * hi
    wlo[0] = whi[0] = 1.0
    return wlo, whi


# -- magnitudes -----------------------------------------------------------------


def mag(x) -> np.ndarray:
    """Upper bound of |x| entrywise."""
    if isinstance(x, (Interval, CInterval)):
        return x.mag()
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return up(up(np.abs(x)))
    return np.abs(x.astype(float, copy=False))


def norm_up(x, nu: float) -> float:
    """Certified upper bound of the nu-norm of a coefficient array."""
    a = mag(x)
    if a.size == 0:
        return 0.0
    _, whi = weights(nu, a.shape[0])
    return float(sum_up(mul_up(a, whi)))


def seq_norm(u: Seq, w: Weight) -> Interval:
    a = mag(u.coeffs)
    hi = norm_up(u.coeffs, w.nu)
    if isinstance(u.coeffs, (Interval, CInterval)):
        lo_mag = (u.coeffs.re if isinstance(u.coeffs, CInterval) else u.coeffs).mig()
    else:
        lo_mag = down(a)
    wlo, _ = weights(w.nu, max(len(a), 1))
    lo = float(down(np.sum(down(lo_mag * wlo[: len(a)])) * (1 - 2 * gamma(len(a))))) if len(a) else 0.0
    lo = max(lo, 0.0)
    if u.tail_norm_bound:
        hi = float(up(hi + u.tail_norm_bound))
    return Interval(min(lo, hi), hi)


# -- convolutions --------------------------------------------------------------

_KIND_PARITY = {
    "ast": ((COS, COS), COS),
    "star": ((SIN, COS), SIN),
    "bullet": ((SIN, SIN), COS),
}


def _sign_ext(length: int, parity: str) -> np.ndarray:
    """Signs for the extension to indices -(L-1)..(L-1)."""
    k = np.arange(-(length - 1), length)
    if parity == COS:
        return np.ones(2 * length - 1)
    return np.sign(k).astype(float)


def _extend(a: np.ndarray, parity: str) -> np.ndarray:
    L = a.shape[0]
    full = np.concatenate([a[:0:-1], a])
    return full * _sign_ext(L, parity)


def _conv_float(a, pa, b, pb):
    L1, L2 = len(a), len(b)
    c = np.convolve(_extend(a, pa), _extend(b, pb))
    return c[L1 + L2 - 2 :]


def _conv_mag_up(a, b, pa, pb):
    """Upper bound for the convolution of |a|, |b| (signs dropped)."""
    L1, L2 = len(a), len(b)
    c = np.convolve(_extend(a, COS), _extend(b, COS))[L1 + L2 - 2 :]
    n = 2 * min(L1, L2)
    return up(c * (1.0 + 2.0 * gamma(n)))


_SPLIT = 134217729.0  # 2**27 + 1


def _two_prod(a, b):
    """Error-free product (Dekker): a*b = p + e exactly, barring underflow."""
    p = a * b
    t = _SPLIT * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLIT * b
    bh = t - (t - b)
    bl = b - bh
    e = al * bl - (((p - ah * bh) - al * bh) - ah * bl)
    return p, e


def _two_sum(a, b):
    s = a + b
    z = s - a
    return s, (a - (s - z)) + (b - z)


def _conv_compensated(a, pa, b, pb):
    """Nonnegative-index part of the extended convolution, computed as if in
    doubled precision (cascaded TwoProduct/TwoSum).

    Returns (result, error bound).  With n terms per coefficient the error is
    at most u|exact| + gamma(n)^2 (|a|*|b|)_k plus an underflow allowance.
    """
    L1, L2 = len(a), len(b)
    x, y = _extend(a, pa), _extend(b, pb)
    if len(x) > len(y):
        x, y = y, x
    nx, ny = len(x), len(y)
    off = L1 + L2 - 2
    nout = nx + ny - 1 - off
    s = np.zeros(nout)
    c = np.zeros(nout)
    for i in range(nx):
        xi = x[i]
        if xi == 0.0:
            continue
        j0 = max(off - i, 0)
        if j0 >= ny:
            continue
        o0 = i + j0 - off
        yj = y[j0:]
        p, e = _two_prod(xi, yj)
        seg = slice(o0, o0 + len(yj))
        s[seg], q = _two_sum(s[seg], p)
        c[seg] += q + e
    res = s + c
    n = nx
    g = gamma(n)
    mag = _conv_mag_up(np.abs(a), np.abs(b), pa, pb)
    err = up(up(UNIT_ROUNDOFF * np.abs(res)) + up(up(g * g) * mag))
    err = up(up(err * (1.0 + 4.0 * UNIT_ROUNDOFF)) + 16.0 * (n + 1) * ETA)
    return res, err


def _conv_real(a, pa, b, pb):
    """Convolution of real coefficient arrays (ndarray or Interval)."""
    am, ar = (a.mid(), a.rad()) if isinstance(a, Interval) else (np.asarray(a, float), np.zeros(len(a)))
    bm, br = (b.mid(), b.rad()) if isinstance(b, Interval) else (np.asarray(b, float), np.zeros(len(b)))
    cm, rad = _conv_compensated(am, pa, bm, pb)
    aam, abm = np.abs(am), np.abs(bm)
    if np.any(br):
        rad = rad + _conv_mag_up(aam, br, pa, pb)
    if np.any(ar):
        rad = rad + _conv_mag_up(ar, abm + br, pa, pb)
    rad = up(rad * (1.0 + 4.0 * gamma(4)))
    return Interval(down(cm - rad), up(cm + rad))


def conv(a, b, kind: str):
    """Rigorous enclosure of ``a o b``; ``a`` carries the first slot's parity.

    Output has length len(a)+len(b)-1 and is an Interval (or CInterval when
    either input is complex).
    """
    (pa, pb), pout = _KIND_PARITY[kind]
    if _is_complex(a) or _is_complex(b):
        ar, ai = _re_im(a)
        br, bi = _re_im(b)
        re = _conv_real(ar, pa, br, pb)
        im = None
        if ai is not None and bi is not None:
            re = re - _conv_real(ai, pa, bi, pb)
        if bi is not None:
            im = _conv_real(ar, pa, bi, pb)
        if ai is not None:
            t = _conv_real(ai, pa, br, pb)
            im = t if im is None else im + t
        if im is None:
            im = Interval.zeros(re.shape)
        out = CInterval(re, im)
        if pout == SIN:
            out = CInterval(_zero_first(out.re), _zero_first(out.im))
        return out
    out = _conv_real(a, pa, b, pb)
    if pout == SIN:
        out = _zero_first(out)
    return out


def conv_float(a, b, kind: str) -> np.ndarray:
    """Plain floating convolution (no enclosure), for the Newton front end."""
    (pa, pb), pout = _KIND_PARITY[kind]
    if np.iscomplexobj(a) or np.iscomplexobj(b):
        a = np.asarray(a, complex)
        b = np.asarray(b, complex)
        c = _conv_float(a.real, pa, b.real, pb) - _conv_float(a.imag, pa, b.imag, pb)
        c = c + 1j * (_conv_float(a.real, pa, b.imag, pb) + _conv_float(a.imag, pa, b.real, pb))
    else:
        c = _conv_float(np.asarray(a, float), pa, np.asarray(b, float), pb)
    if pout == SIN:
        c[0] = 0
    return c


def _zero_first(x: Interval) -> Interval:
    lo = x.lo.copy()
    hi = x.hi.copy()
    lo[0] = hi[0] = 0.0
    return Interval(lo, hi)


def _is_complex(x) -> bool:
    return isinstance(x, CInterval) or (isinstance(x, np.ndarray) and np.iscomplexobj(x))


def _re_im(x):
    if isinstance(x, CInterval):
        return x.re, x.im
    if isinstance(x, Interval):
        return x, None
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return x.real.copy(), x.imag.copy()
    return x, None


def seq_conv(kind: str, u: Seq, v: Seq) -> Seq:
    (pa, pb), pout = _KIND_PARITY[kind]
    if (u.parity, v.parity) != (pa, pb):
        raise ParityMismatch(f"{kind} needs ({pa}, {pb}), got ({u.parity}, {v.parity})")
    return Seq(conv(u.coeffs, v.coeffs, kind), pout)


def brute_conv(u, v, pu: str, pv: str):
    """Direct double sum over k1+k2=k; exact for integer/Fraction inputs."""
    sgn = lambda p, k: 1 if p == COS else (k > 0) - (k < 0)  # noqa: E731
    L1, L2 = len(u), len(v)
    out = []
    for k in range(L1 + L2 - 1):
        s = 0
        for k1 in range(-(L1 - 1), L1):
            k2 = k - k1
            if abs(k2) < L2:
                s += sgn(pu, k1) * sgn(pv, k2) * u[abs(k1)] * v[abs(k2)]
        out.append(s)
    return out


# -- multiplication operators ---------------------------------------------------


def mult_matrix(c, c_parity: str, x_parity: str, rows: int, cols: int):
    """Matrix M with (c o x)_k = sum_j M[k, j] x_j for 0<=k<rows, 0<=j<cols.

    Entry (k, j), j>=1, collects the two lattice points +j and -j:
    ``s_c(k-j) c_|k-j| s_x(j) + s_c(k+j) c_{k+j} s_x(-j)`` with s the parity sign.
    Works on ndarrays (float or complex) and on Interval/CInterval.
    """
    if isinstance(c, CInterval):
        return CInterval(
            mult_matrix(c.re, c_parity, x_parity, rows, cols),
            mult_matrix(c.im, c_parity, x_parity, rows, cols),
        )
    if isinstance(c, Interval):
        # entries are sums of at most two signed coefficients: do it in midrad
        mid = mult_matrix(c.mid(), c_parity, x_parity, rows, cols)
        rad = mult_matrix(c.rad(), COS, COS, rows, cols)
        rad = up(rad + np.abs(mid) * 2.0**-52)
        return Interval(down(mid - rad), up(mid + rad))
    c = np.asarray(c)
    L = c.shape[0]
    K = np.arange(rows)[:, None]
    J = np.arange(cols)[None, :]
    cpad = np.concatenate([c, np.zeros(rows + cols + 1, dtype=c.dtype)])
    d = K - J
    s_cm = np.ones_like(d) if c_parity == COS else np.sign(d)
    s_cp = np.ones_like(d) if c_parity == COS else np.sign(K + J)
    s_xp = np.ones_like(J) if x_parity == COS else np.sign(J)
    s_xm = np.ones_like(J) if x_parity == COS else -np.sign(J)
    ia = np.abs(d)
    ia = np.where(ia < L, ia, L)  # cpad[L] == 0
    ib = np.where(K + J < L, K + J, L)
    M = s_cm * s_xp * cpad[ia] + s_cp * s_xm * cpad[ib]
    M[:, 0] = (s_cm[:, 0] * s_xp[0, 0]) * cpad[ia[:, 0]]
    return M


def conv_kind(c_parity: str, x_parity: str) -> str:
    pair = {(COS, COS): "ast", (SIN, COS): "star", (COS, SIN): "star", (SIN, SIN): "bullet"}
    return pair[(c_parity, x_parity)]


# -- tail convolution bound ------------------------------------------------------


def phi_up(u, m: int, nu: float, kmax: int) -> np.ndarray:
    """Upper bounds for Phi^m_k(u, nu) = sup_{|l|>=m} |u_{|l-k|}| / nu^|l|, k<kmax."""
    if m < 1:
        raise ValueError("m must be at least 1")
    a = mag(u)
    L = a.shape[0]
    N = max(L, kmax) + 1
    plo, phi_ = powers(nu, N)
    scaled = div_up(a, plo[:L])                     # |u_i| / nu^i
    grown = mul_up(a, phi_[:L])                     # |u_i| nu^i
    S = np.zeros(L + 1)
    S[:L] = np.maximum.accumulate(scaled[::-1])[::-1]
    P = np.maximum.accumulate(grown)                # prefix max
    k = np.arange(kmax)
    inv_hi = div_up(1.0, plo[:kmax])
    # l >= max(m, k):  i = l - k >= max(m - k, 0)
    t1 = mul_up(inv_hi, S[np.minimum(np.maximum(m - k, 0), L)])
    # l <= -m:  i = k + |l| >= m + k
    t3 = mul_up(phi_[:kmax], S[np.minimum(m + k, L)])
    # m <= l < k:  i = k - l in [1, k - m]
    hi_idx = np.minimum(k - m, L - 1)
    t2 = np.where(hi_idx >= 1, mul_up(inv_hi, P[np.maximum(hi_idx, 0)] if L else 0.0), 0.0)
    return np.maximum(np.maximum(t1, t2), t3)


def seq_phi(u: Seq, m: int, k: int, w: Weight) -> Interval:
    if u.tail_norm_bound:
        raise UnboundedSupport("Phi needs a finitely supported sequence")
    val = float(phi_up(u.coeffs, m, w.nu, k + 1)[k])
    return Interval(0.0, val)


# -- derivative operator K and its loss constants -----------------------------------


def k_times(u, power: int = 1):
    """Enclosure of (pi k)^power * u_k."""
    n = len(u)
    pk = Interval(np.arange(n, dtype=float)) * PI
    f = pk ** power
    if isinstance(u, CInterval):
        return CInterval(u.re * f, u.im * f)
    if isinstance(u, Interval):
        return u * f
    u = np.asarray(u)
    if np.iscomplexobj(u):
        return CInterval(Interval(u.real.copy()) * f, Interval(u.imag.copy()) * f)
    return Interval(u.astype(float)) * f


def seq_derivative(u: Seq) -> Seq:
    """K u with parity flip; sign convention: the derivative of a cosine
    series is ``-K`` of it, the derivative of a sine series is ``+K``."""
    return Seq(k_times(u.coeffs), SIN if u.parity == COS else COS)


def upsilon(order: int, gamma_: float, nu: float) -> Interval:
    """Enclosure of the bound on sup_{k>=1} k^order (gamma/nu)^k.

    Callers bounding ``K^order`` must multiply by ``pi^order``.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if not 1.0 < gamma_ < nu:
        raise WeightOrder(f"need 1 < gamma < nu, got gamma={gamma_}, nu={nu}")
    iv = mpmath.iv
    g = iv.mpf(gamma_)
    n = iv.mpf(nu)
    q = g / n
    threshold = iv.exp(-order)
    if q.b < threshold.a:
        val = q
    else:
        val = (order * iv.exp(-1) / iv.log(n / g)) ** order
    return Interval.from_mpi(val)


# -- diagonal tails and block operators ----------------------------------------------


@dataclass(frozen=True)
class TailRule:
    """Diagonal entries ``coef * (pi k)**power`` for k >= m."""

    coef: Interval
    power: int

    def sup_abs(self, m: int) -> float:
        if self.power > 0:
            raise UnboundedTail("growing tail rule has no finite operator norm")
        c = self.coef if isinstance(self.coef, Interval) else Interval(self.coef)
        base = (PI * float(m)) ** (-self.power)
        return float((Interval(c.mag()) / base).hi)


@dataclass
class BlockTailOp:
    """Operator on a product of sequence components.

    ``mat`` is the dense finite part over the concatenated truncated
    components with sizes ``sizes``; ``tails[i]`` is the diagonal rule beyond
    ``sizes[i]`` for diagonal block i (None means zero tail, e.g. scalars).
    """

    mat: object
    sizes: Sequence[int]
    tails: Sequence[Optional[TailRule]] = field(default_factory=tuple)

    def __post_init__(self):
        n = sum(self.sizes)
        if tuple(self.mat.shape) != (n, n):
            raise ValueError(f"matrix shape {self.mat.shape} does not match sizes {self.sizes}")
        if not self.tails:
            self.tails = (None,) * len(self.sizes)

    @property
    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.sizes)]).astype(int)

    def block(self, i: int, j: int):
        o = self.offsets
        return self.mat[o[i] : o[i + 1], o[j] : o[j + 1]]


def column_norms_up(mag_mat: np.ndarray, nu: float) -> np.ndarray:
    """omega_j^{-1} sum_k omega_k |B(k,j)| for a nonnegative matrix."""
    rows, cols = mag_mat.shape
    _, whi_r = weights(nu, max(rows, 1))
    wlo_c, _ = weights(nu, max(cols, 1))
    s = matmul_up(whi_r[:rows], mag_mat)
    return div_up(s, wlo_c[:cols])


def block_norms(B: BlockTailOp, nu: float) -> np.ndarray:
    """Upper bounds for the operator norms of every block (incl. diagonal tails)."""
    nc = len(B.sizes)
    A = mag(B.mat)
    o = B.offsets
    out = np.zeros((nc, nc))
    for i in range(nc):
        for j in range(nc):
            # weights are indexed within each component, not globally
            c = column_norms_up(A[o[i] : o[i + 1], o[j] : o[j + 1]], nu)
            out[i, j] = float(np.max(c)) if c.size else 0.0
        t = B.tails[i]
        if t is not None:
            out[i, i] = max(out[i, i], t.sup_abs(B.sizes[i]))
    return out


def op_norm(B: BlockTailOp, w: Weight) -> np.ndarray:
    """Theta_B^(j) = sum_i |||B^(i,j)||| for each column component j (upper bounds)."""
    N = block_norms(B, w.nu)
    return sum_up(N, axis=0)
