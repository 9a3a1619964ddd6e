"""Outward-rounded interval arithmetic on numpy arrays.

Every operation is evaluated in round-to-nearest and the endpoints are then
pushed one ulp outwards with ``nextafter``.  A correctly rounded operation is
off by at most half an ulp, so the widened result always encloses the exact
one.  Nothing here touches the process-wide rounding mode.

Dense products and convolutions use midpoint-radius form with the classical
a priori bound ``|fl(a.b) - a.b| <= gamma_n |a|.|b| + n*eta``, which holds
for any summation order (BLAS, pairwise, FMA).

Scalars are 0-d instances of the same classes, so one code path serves
numbers, vectors and matrices.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

import mpmath
import numpy as np

UNIT_ROUNDOFF = 2.0**-53
ETA = 2.0**-1074  # smallest positive subnormal

ArrayLike = Union[float, int, np.ndarray]


class DivisionByZeroInterval(ZeroDivisionError):
    pass


class DimensionMismatch(ValueError):
    pass


def down(x):
    return np.nextafter(x, -np.inf)


def up(x):
    return np.nextafter(x, np.inf)


def gamma(n: int) -> float:
    """Upper bound for n*u/(1-n*u), generous enough to absorb its own rounding."""
    n = max(int(n), 1)
    if n * UNIT_ROUNDOFF > 1e-3:
        raise ValueError("dimension too large for the a priori error bound")
    return 1.01 * (n + 2) * UNIT_ROUNDOFF


# -- upper-bound arithmetic on nonnegative floats -----------------------------
# These are the workhorses of every norm bound: once magnitudes are taken,
# only certified upper bounds are needed.


def add_up(a, b):
    return up(np.add(a, b))


def mul_up(a, b):
    # an exact zero factor gives an exact zero product
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.where((a == 0) | (b == 0), 0.0, up(np.multiply(a, b)))


def div_up(a, b):
    a = np.asarray(a, dtype=float)
    return np.where(a == 0, 0.0, up(np.divide(a, b)))


def sum_up(a, axis=None):
    """Upper bound of a sum of nonnegative floats."""
    a = np.asarray(a, dtype=float)
    n = a.size if axis is None else a.shape[axis]
    s = np.sum(a, axis=axis)
    return np.where(s == 0, 0.0, up(up(s * (1.0 + 2.0 * gamma(n)))))


def matmul_up(a, b):
    """Upper bound of a @ b for entrywise nonnegative a, b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.shape[-1]
    s = a @ b
    return up(up(s * (1.0 + 2.0 * gamma(n))) + (n + 2) * ETA)


def max_up(a, axis=None):
    return np.max(a, axis=axis)


# -- conversions ---------------------------------------------------------------


def _float_down(q: Fraction) -> float:
    f = float(q)
    if Fraction(f) > q:
        f = math.nextafter(f, -math.inf)
    return f


def _float_up(q: Fraction) -> float:
    f = float(q)
    if Fraction(f) < q:
        f = math.nextafter(f, math.inf)
    return f


def _mpf_down(x) -> float:
    f = float(x)
    if mpmath.mpf(f) > x:
        f = math.nextafter(f, -math.inf)
    return f


def _mpf_up(x) -> float:
    f = float(x)
    if mpmath.mpf(f) < x:
        f = math.nextafter(f, math.inf)
    return f


class Interval:
    """Array of closed real intervals ``[lo, hi]``.

    Immutable by convention: no operation writes into ``lo`` or ``hi``.
    """

    __slots__ = ("lo", "hi")
    __array_ufunc__ = None  # make ndarray <op> Interval defer to our reflected ops

    def __init__(self, lo: ArrayLike, hi: ArrayLike | None = None):
        lo = np.asarray(lo, dtype=float)
        hi = lo if hi is None else np.asarray(hi, dtype=float)
        if lo.shape != hi.shape:
            lo, hi = np.broadcast_arrays(lo, hi)
        if np.any(lo > hi):
            raise ValueError("interval with lo > hi")
        self.lo = lo
        self.hi = hi

    # construction ---------------------------------------------------------
    @classmethod
    def from_decimal(cls, text: str | int | Fraction) -> "Interval":
        """Tightest enclosure of an exact decimal such as ``"0.005"``."""
        q = Fraction(text) if not isinstance(text, Fraction) else text
        return cls(_float_down(q), _float_up(q))

    @classmethod
    def from_mpi(cls, x) -> "Interval":
        return cls(_mpf_down(x.a), _mpf_up(x.b))

    @classmethod
    def zeros(cls, shape) -> "Interval":
        z = np.zeros(shape)
        return cls(z, z)

    @classmethod
    def from_midrad(cls, mid, rad) -> "Interval":
        mid = np.asarray(mid, dtype=float)
        return cls(down(mid - rad), up(mid + rad))

    @classmethod
    def hull(cls, a: "Interval", b: "Interval") -> "Interval":
        return cls(np.minimum(a.lo, b.lo), np.maximum(a.hi, b.hi))

    # array protocol ---------------------------------------------------------
    @property
    def shape(self):
        return self.lo.shape

    @property
    def ndim(self):
        return self.lo.ndim

    @property
    def size(self):
        return self.lo.size

    def __len__(self):
        return len(self.lo)

    def __getitem__(self, idx) -> "Interval":
        return Interval(self.lo[idx], self.hi[idx])

    @property
    def T(self) -> "Interval":
        return Interval(self.lo.T, self.hi.T)

    def reshape(self, *shape) -> "Interval":
        return Interval(self.lo.reshape(*shape), self.hi.reshape(*shape))

    def __repr__(self):
        if self.ndim == 0:
            return f"Interval([{float(self.lo)!r}, {float(self.hi)!r}])"
        return f"Interval(shape={self.shape})"

    # queries ----------------------------------------------------------------
    def mid(self) -> np.ndarray:
        m = 0.5 * self.lo + 0.5 * self.hi
        return np.where(np.isfinite(m), m, np.clip(m, -np.finfo(float).max, np.finfo(float).max))

    def rad(self) -> np.ndarray:
        """Upper bound for the radius about ``mid()``."""
        m = self.mid()
        return up(np.maximum(up(self.hi - m), up(m - self.lo)))

    def midrad(self):
        return self.mid(), self.rad()

    def mag(self) -> np.ndarray:
        """max |x| over the interval (exact: endpoints are floats)."""
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def mig(self) -> np.ndarray:
        return np.where((self.lo <= 0) & (self.hi >= 0), 0.0, np.minimum(np.abs(self.lo), np.abs(self.hi)))

    def width(self) -> np.ndarray:
        return up(self.hi - self.lo)

    def contains(self, x) -> np.ndarray:
        if isinstance(x, Interval):
            return (self.lo <= x.lo) & (x.hi <= self.hi)
        x = np.asarray(x)
        return (self.lo <= x) & (x <= self.hi)

    def contains_zero(self) -> np.ndarray:
        return (self.lo <= 0) & (self.hi >= 0)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi)))

    def __float__(self):
        return float(self.mid())

    # arithmetic ---------------------------------------------------------------
    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __pos__(self):
        return self

    def __add__(self, other) -> "Interval":
        o = as_interval(other)
        if o is NotImplemented:
            return NotImplemented
        return Interval(down(self.lo + o.lo), up(self.hi + o.hi))

    __radd__ = __add__

    def __sub__(self, other) -> "Interval":
        o = as_interval(other)
        if o is NotImplemented:
            return NotImplemented
        return Interval(down(self.lo - o.hi), up(self.hi - o.lo))

    def __rsub__(self, other) -> "Interval":
        o = as_interval(other)
        if o is NotImplemented:
            return NotImplemented
        return o - self

    def __mul__(self, other) -> "Interval":
        if isinstance(other, CInterval) or np.iscomplexobj(other):
            return NotImplemented
        o = as_interval(other)
        if o is NotImplemented:
            return NotImplemented
        if o.lo is o.hi or np.array_equal(o.lo, o.hi):
            # point factor: two products suffice
            p1 = self.lo * o.lo
            p2 = self.hi * o.lo
            lo = np.minimum(p1, p2)
            hi = np.maximum(p1, p2)
        else:
            p = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
            lo = np.minimum(np.minimum(p[0], p[1]), np.minimum(p[2], p[3]))
            hi = np.maximum(np.maximum(p[0], p[1]), np.maximum(p[2], p[3]))
        # 0 * inf: the reals in the operand give 0
        lo = np.where(np.isnan(lo), 0.0, lo)
        hi = np.where(np.isnan(hi), 0.0, hi)
        return Interval(down(lo), up(hi))

    __rmul__ = __mul__

    def reciprocal(self) -> "Interval":
        if np.any(self.contains_zero()):
            raise DivisionByZeroInterval("divisor interval contains 0")
        return Interval(down(1.0 / self.hi), up(1.0 / self.lo))

    def __truediv__(self, other) -> "Interval":
        o = as_interval(other)
        if o is NotImplemented:
            return NotImplemented
        if np.any(o.contains_zero()):
            raise DivisionByZeroInterval("divisor interval contains 0")
        p = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        lo = np.minimum(np.minimum(p[0], p[1]), np.minimum(p[2], p[3]))
        hi = np.maximum(np.maximum(p[0], p[1]), np.maximum(p[2], p[3]))
        return Interval(down(lo), up(hi))

    def __rtruediv__(self, other) -> "Interval":
        o = as_interval(other)
        if o is NotImplemented:
            return NotImplemented
        return o / self

    def __pow__(self, n: int) -> "Interval":
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise TypeError("only nonnegative integer powers")
        if n == 0:
            return Interval(np.ones(self.shape))
        if n % 2 == 0:
            a = abs(self)
            out = a
            for _ in range(n - 1):
                out = out * a
            return Interval(np.maximum(out.lo, 0.0), out.hi)
        out = self
        for _ in range(n - 1):
            out = out * self
        return out

    def __abs__(self) -> "Interval":
        return Interval(self.mig(), self.mag())

    def sqrt(self) -> "Interval":
        if np.any(self.lo < 0):
            raise ValueError("sqrt of negative interval")
        return Interval(np.maximum(down(np.sqrt(self.lo)), 0.0), up(np.sqrt(self.hi)))

    def sum(self, axis=None) -> "Interval":
        n = self.size if axis is None else self.shape[axis]
        g = 2.0 * gamma(n)
        slo = np.sum(self.lo, axis=axis)
        shi = np.sum(self.hi, axis=axis)
        elo = up(np.sum(np.abs(self.lo), axis=axis) * g)
        ehi = up(np.sum(np.abs(self.hi), axis=axis) * g)
        return Interval(down(slo - elo), up(shi + ehi))

    def __matmul__(self, other):
        return imatmul(self, other)

    def __rmatmul__(self, other):
        return imatmul(other, self)


def as_interval(x):
    if isinstance(x, Interval):
        return x
    if isinstance(x, CInterval):
        return NotImplemented
    if isinstance(x, (int, float, np.integer, np.floating)):
        return Interval(float(x))
    if isinstance(x, np.ndarray) and not np.iscomplexobj(x):
        return Interval(x)
    return NotImplemented


def point_or_interval_midrad(x):
    """(mid, rad) with rad=None for plain arrays."""
    if isinstance(x, Interval):
        return x.mid(), x.rad()
    return np.asarray(x, dtype=float), None


def imatmul(a, b) -> Interval:
    """Enclosure of a @ b for point or interval real matrices/vectors."""
    am, ar = point_or_interval_midrad(a)
    bm, br = point_or_interval_midrad(b)
    if am.shape[-1] != bm.shape[0]:
        raise DimensionMismatch(f"cannot multiply {am.shape} by {bm.shape}")
    n = am.shape[-1]
    g = gamma(n)
    cm = am @ bm
    abm = np.abs(bm)
    inner = g * abm if br is None else br + g * abm
    rad = np.abs(am) @ inner
    if ar is not None:
        rad = rad + ar @ (abm if br is None else abm + br)
    rad = up(up(rad * (1.0 + 2.0 * g)) + (n + 2) * ETA)
    return Interval(down(cm - rad), up(cm + rad))


def ia_binary(op: str, a, b) -> Interval:
    a = as_interval(a)
    b = as_interval(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def ia_enclose_matvec(M, x):
    if isinstance(M, CInterval) or isinstance(x, CInterval) or np.iscomplexobj(M) or np.iscomplexobj(x):
        return cmatmul(M, x)
    mshape = M.shape
    xshape = x.shape
    if len(mshape) != 2 or mshape[1] != xshape[0]:
        raise DimensionMismatch(f"matrix {mshape} and vector {xshape}")
    return imatmul(M, x)


def ia_midpoint(a: Interval) -> float:
    if not a.is_finite():
        raise ValueError("midpoint of unbounded interval")
    return float(a.mid())


# -- transcendental constants (mpmath interval arithmetic, then outward) ------

mpmath.iv.prec = 80

PI = Interval.from_mpi(mpmath.iv.pi)
E_INV = Interval.from_mpi(mpmath.iv.exp(-1))


def ilog(x: Interval) -> Interval:
    """Enclosure of log for a scalar interval."""
    lo = mpmath.iv.log(mpmath.iv.mpf(float(x.lo)))
    hi = mpmath.iv.log(mpmath.iv.mpf(float(x.hi)))
    return Interval(_mpf_down(lo.a), _mpf_up(hi.b))


# -- complex rectangles ---------------------------------------------------------


class CInterval:
    """Axis-aligned complex rectangles ``re + i*im``."""

    __slots__ = ("re", "im")
    __array_ufunc__ = None

    def __init__(self, re, im=None):
        self.re = re if isinstance(re, Interval) else Interval(np.asarray(re, dtype=float))
        if im is None:
            im = Interval.zeros(self.re.shape)
        self.im = im if isinstance(im, Interval) else Interval(np.asarray(im, dtype=float))

    @classmethod
    def point(cls, z) -> "CInterval":
        z = np.asarray(z, dtype=complex)
        return cls(Interval(z.real.copy()), Interval(z.imag.copy()))

    @classmethod
    def zeros(cls, shape) -> "CInterval":
        return cls(Interval.zeros(shape), Interval.zeros(shape))

    @property
    def shape(self):
        return self.re.shape

    @property
    def ndim(self):
        return self.re.ndim

    @property
    def size(self):
        return self.re.size

    def __len__(self):
        return len(self.re)

    def __getitem__(self, idx):
        return CInterval(self.re[idx], self.im[idx])

    @property
    def T(self):
        return CInterval(self.re.T, self.im.T)

    def __repr__(self):
        if self.ndim == 0:
            return f"CInterval({self.re!r}, {self.im!r})"
        return f"CInterval(shape={self.shape})"

    def mid(self) -> np.ndarray:
        return self.re.mid() + 1j * self.im.mid()

    def mag(self) -> np.ndarray:
        """Upper bound of |z| over the rectangle."""
        a = self.re.mag()
        b = self.im.mag()
        return up(np.sqrt(up(up(a * a) + up(b * b))))

    def contains(self, z) -> np.ndarray:
        if isinstance(z, CInterval):
            return self.re.contains(z.re) & self.im.contains(z.im)
        z = np.asarray(z, dtype=complex)
        return self.re.contains(z.real) & self.im.contains(z.imag)

    def is_finite(self) -> bool:
        return self.re.is_finite() and self.im.is_finite()

    def conj(self) -> "CInterval":
        return CInterval(self.re, -self.im)

    def __neg__(self):
        return CInterval(-self.re, -self.im)

    def __add__(self, other):
        o = as_cinterval(other)
        if o is NotImplemented:
            return NotImplemented
        return CInterval(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = as_cinterval(other)
        if o is NotImplemented:
            return NotImplemented
        return CInterval(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = as_cinterval(other)
        if o is NotImplemented:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, Interval) or (
            isinstance(other, (int, float, np.integer, np.floating))
        ) or (isinstance(other, np.ndarray) and not np.iscomplexobj(other)):
            return CInterval(self.re * other, self.im * other)
        o = as_cinterval(other)
        if o is NotImplemented:
            return NotImplemented
        return CInterval(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def sum(self, axis=None):
        return CInterval(self.re.sum(axis), self.im.sum(axis))

    def __matmul__(self, other):
        return cmatmul(self, other)

    def __rmatmul__(self, other):
        return cmatmul(other, self)


def as_cinterval(x):
    if isinstance(x, CInterval):
        return x
    if isinstance(x, Interval):
        return CInterval(x, Interval.zeros(x.shape))
    if isinstance(x, (int, float, complex, np.number)) or isinstance(x, np.ndarray):
        return CInterval.point(x)
    return NotImplemented


def _split_complex(x):
    """Real and imaginary parts as plain arrays or Intervals."""
    if isinstance(x, CInterval):
        return x.re, x.im
    if isinstance(x, Interval):
        return x, None
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return np.ascontiguousarray(x.real), np.ascontiguousarray(x.imag)
    return x, None


def cmatmul(a, b) -> CInterval:
    """Enclosure of a @ b where either factor may be complex (point or rectangle)."""
    ar, ai = _split_complex(a)
    br, bi = _split_complex(b)
    re = imatmul(ar, br)
    im = None
    if ai is not None and bi is not None:
        re = re - imatmul(ai, bi)
    if bi is not None:
        im = imatmul(ar, bi)
    if ai is not None:
        t = imatmul(ai, br)
        im = t if im is None else im + t
    if im is None:
        im = Interval.zeros(re.shape)
    return CInterval(re, im)


def stack_blocks(rows) -> Interval:
    """np.block for Intervals (entries may be Interval, ndarray or None for zero)."""
    shapes_r = []
    for row in rows:
        h = next(b.shape[0] for b in row if b is not None)
        shapes_r.append(h)
    widths = []
    for j in range(len(rows[0])):
        w = next(row[j].shape[1] for row in rows if row[j] is not None)
        widths.append(w)

    def part(b, h, w, attr):
        if b is None:
            return np.zeros((h, w))
        if isinstance(b, Interval):
            return getattr(b, attr)
        return np.asarray(b, dtype=float)

    lo = np.block([[part(b, shapes_r[i], widths[j], "lo") for j, b in enumerate(row)] for i, row in enumerate(rows)])
    hi = np.block([[part(b, shapes_r[i], widths[j], "hi") for j, b in enumerate(row)] for i, row in enumerate(rows)])
    return Interval(lo, hi)


def concatenate(parts) -> Interval:
    parts = [as_interval(p) for p in parts]
    return Interval(np.concatenate([p.lo for p in parts]), np.concatenate([p.hi for p in parts]))
