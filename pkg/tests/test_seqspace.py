from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crossdiff import seqspace as ss
from crossdiff.interval import Interval
from crossdiff.seqspace import COS, SIN, BlockTailOp, TailRule, Weight, WeightOrder

from conftest import frac_norm

KINDS = {"ast": (COS, COS), "star": (SIN, COS), "bullet": (SIN, SIN)}
NU_Q = Fraction(53, 50)


def _sine(a):
    a = list(a)
    a[0] = 0
    return a


def _prep(a, parity):
    return _sine(a) if parity == SIN else list(a)


coeff_lists = st.lists(st.integers(-2, 2), min_size=1, max_size=5)
real_lists = st.lists(st.floats(-10, 10, allow_nan=False, allow_infinity=False), min_size=1, max_size=8)


@pytest.mark.parametrize("kind", sorted(KINDS))
@settings(max_examples=1000)
@given(a=real_lists, b=real_lists)
def test_banach_algebra_inequality(kind, a, b):
    pa, pb = KINDS[kind]
    a, b = _prep(a, pa), _prep(b, pb)
    fa = [Fraction(x) for x in a]
    fb = [Fraction(x) for x in b]
    c = ss.brute_conv(fa, fb, pa, pb)
    assert frac_norm(c, NU_Q) <= frac_norm(fa, NU_Q) * frac_norm(fb, NU_Q)


@pytest.mark.parametrize("kind", sorted(KINDS))
@settings(max_examples=1000)
@given(a=coeff_lists, b=coeff_lists)
def test_convolution_matches_brute_force(kind, a, b):
    pa, pb = KINDS[kind]
    a, b = _prep(a, pa), _prep(b, pb)
    exact = ss.brute_conv(a, b, pa, pb)
    if kind == "star":
        exact[0] = 0
    fl = ss.conv_float(np.array(a, float), np.array(b, float), kind)
    assert fl.tolist() == [float(x) for x in exact]
    enc = ss.conv(np.array(a, float), np.array(b, float), kind)
    assert np.all(enc.contains(np.array(exact, float)))
    # the multiplication-operator matrix reproduces the same product
    M = ss.mult_matrix(np.array(a, float), pa, pb, len(exact), len(b))
    assert np.allclose(M @ np.array(b, float), np.array(exact, float), atol=0)


def _cos_eval(c, x):
    k = np.arange(len(c))
    return c[0] + 2 * np.sum(c[1:, None] * np.cos(np.pi * k[1:, None] * x[None, :]), axis=0)


def _sin_eval(c, x):
    k = np.arange(len(c))
    return 2 * np.sum(c[1:, None] * np.sin(np.pi * k[1:, None] * x[None, :]), axis=0)


def test_product_conventions_pointwise(rng):
    x = np.linspace(0, 1, 37)
    a = rng.standard_normal(6)
    b = rng.standard_normal(5)
    a_s, b_s = a.copy(), b.copy()
    a_s[0] = b_s[0] = 0.0
    assert np.allclose(_cos_eval(ss.conv_float(a, b, "ast"), x), _cos_eval(a, x) * _cos_eval(b, x))
    assert np.allclose(_sin_eval(ss.conv_float(a_s, b, "star"), x), _sin_eval(a_s, x) * _cos_eval(b, x))
    # the signed (sin, sin) convolution is minus the product of the two sine series
    assert np.allclose(_cos_eval(ss.conv_float(a_s, b_s, "bullet"), x), -_sin_eval(a_s, x) * _sin_eval(b_s, x))


def test_compensated_convolution_is_tight(rng):
    a = rng.standard_normal(300) * 0.9 ** np.arange(300)
    b = rng.standard_normal(200) * 0.8 ** np.arange(200)
    enc = ss.conv(a, b, "ast")
    fa, fb = [Fraction(x) for x in a[:40]], [Fraction(x) for x in b[:40]]
    exact = ss.brute_conv([Fraction(x) for x in a], [Fraction(x) for x in b], COS, COS)[:25]
    for k in range(25):
        assert Fraction(float(enc.lo[k])) <= exact[k] <= Fraction(float(enc.hi[k]))
    assert float(np.max(enc.hi - enc.lo)) < 1e-28 + 1e-15 * float(np.max(np.abs(enc.mid())))
    assert fa and fb


@settings(max_examples=1000)
@given(
    u=st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=12),
    m=st.integers(1, 15),
    k=st.integers(0, 30),
    nu=st.floats(1.001, 1.5),
)
def test_phi_bound_soundness(u, m, k, nu):
    bound = ss.phi_up(np.array(u), m, nu, k + 1)[k]
    L = len(u)
    nu_q = Fraction(nu)
    best = Fraction(0)
    for l in range(-(L + k + m + 2), L + k + m + 3):
        if abs(l) < m:
            continue
        idx = abs(l - k)
        if idx < L:
            best = max(best, abs(Fraction(u[idx])) / nu_q ** abs(l))
    assert best <= Fraction(float(bound))


@pytest.mark.parametrize("order", [1, 2])
@pytest.mark.parametrize("gamma,nu", [(1.0001, 1.06), (1.03, 1.06), (1.01, 1.03), (1.2, 4.0), (1.001, 1.002)])
def test_upsilon_soundness(order, gamma, nu):
    bound = ss.upsilon(order, gamma, nu)
    ks = np.unique(np.concatenate([np.arange(1, 2000), np.geomspace(1, 1e6, 4000).astype(int)]))
    with mpmath.workprec(120):
        q = mpmath.mpf(gamma) / mpmath.mpf(nu)
        worst = max(mpmath.mpf(int(k)) ** order * q ** int(k) for k in ks)
        assert worst <= mpmath.mpf(float(bound.hi))


def test_upsilon_rejects_bad_order():
    with pytest.raises(WeightOrder):
        ss.upsilon(1, 1.1, 1.05)
    with pytest.raises(WeightOrder):
        Weight(1.0)


def _apply_block_tail(B: BlockTailOp, x_parts, nu):
    """B x for finitely supported x whose components may extend past the finite sizes."""
    o = B.offsets
    head = np.concatenate([p[:s] for p, s in zip(x_parts, B.sizes)])
    y_head = B.mat @ head
    out = []
    for i, s in enumerate(B.sizes):
        yi = y_head[o[i]:o[i + 1]]
        t = B.tails[i]
        if t is not None and len(x_parts[i]) > s:
            k = np.arange(s, len(x_parts[i]), dtype=float)
            c = float(t.coef.mid()) if isinstance(t.coef, Interval) else float(t.coef)
            yi = np.concatenate([yi, c * (np.pi * k) ** t.power * x_parts[i][s:]])
        out.append(yi)
    return out


def _fnorm(x, nu):
    w = np.concatenate([[1.0], 2 * nu ** np.arange(1, len(x))])
    return float(np.sum(np.abs(x) * w))


@pytest.mark.parametrize("seed", range(5))
def test_op_norm_soundness(seed):
    g = np.random.default_rng(seed)
    nu = float(g.uniform(1.01, 1.2))
    sizes = tuple(int(s) for s in g.integers(2, 9, size=3))
    N = sum(sizes)
    mat = g.standard_normal((N, N)) * (0.7 ** np.arange(N))[None, :]
    tails = (TailRule(Interval(-1.0), -1), TailRule(Interval(0.5), -2), None)
    B = BlockTailOp(mat, sizes, tails)
    theta = ss.op_norm(B, Weight(nu))
    bound = float(np.max(theta))
    for _ in range(100):
        parts = []
        for i, s in enumerate(sizes):
            extra = 6 if tails[i] is not None else 0
            parts.append(g.standard_normal(s + extra) * g.uniform(0, 1))
        total = sum(_fnorm(p, nu) for p in parts)
        parts = [p / total for p in parts]
        y = _apply_block_tail(B, parts, nu)
        assert sum(_fnorm(p, nu) for p in y) <= bound * (1 + 1e-12)
        # columns of the finite part attain their own bounds (per-column check)
    for j in range(len(sizes)):
        o = B.offsets
        for col in range(o[j], o[j + 1]):
            e = np.zeros(N)
            k = col - o[j]
            e[col] = 1.0 / (1.0 if k == 0 else 2 * nu**k)
            y = B.mat @ e
            val = sum(_fnorm(y[o[i]:o[i + 1]], nu) for i in range(len(sizes)))
            assert val <= theta[j] * (1 + 1e-12)


def test_weights_and_norm():
    lo, hi = ss.weights(1.06, 5)
    assert lo[0] == hi[0] == 1.0
    assert np.all(lo[1:] <= 2 * 1.06 ** np.arange(1, 5)) and np.all(2 * 1.06 ** np.arange(1, 5) <= hi[1:])
    x = [1, -1, 2]
    assert Fraction(ss.norm_up(np.array(x, float), 1.06)) >= frac_norm(x, Fraction(1.06))


def test_parity_mismatch():
    with pytest.raises(ss.ParityMismatch):
        ss.seq_conv("star", ss.Seq(np.ones(3), COS), ss.Seq(np.ones(3), COS))


def test_derivative_flips_parity():
    u = ss.Seq(np.array([1.0, 2.0, 3.0]), COS)
    d = ss.seq_derivative(u)
    assert d.parity == SIN
    assert np.all(d.coeffs.contains(np.pi * np.arange(3) * u.coeffs))


def test_growing_tail_has_no_norm():
    with pytest.raises(ss.UnboundedTail):
        TailRule(Interval(1.0), 2).sup_abs(4)
