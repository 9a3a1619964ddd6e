"""Arithmetic back ends shared by the floating front end and the proofs.

Model formulas are written once against this small interface; the float
back end feeds Newton and eigen solvers, the interval back end the bounds.
"""
from __future__ import annotations

import numpy as np

from . import seqspace as ss
from .interval import PI, CInterval, Interval, concatenate, stack_blocks


class FloatOps:
    rigorous = False
    pi = np.pi

    @staticmethod
    def scalar(x):
        if isinstance(x, Interval):
            return float(x.mid())
        return float(x)

    @staticmethod
    def conv(a, b, kind):
        return ss.conv_float(a, b, kind)

    @staticmethod
    def pik(n, power=1):
        return (np.pi * np.arange(n, dtype=float)) ** power

    @staticmethod
    def mult(c, pc, px, rows, cols):
        return ss.mult_matrix(np.asarray(c), pc, px, rows, cols)

    @staticmethod
    def pad(x, n):
        x = np.asarray(x)
        if len(x) >= n:
            return x[:n]
        return np.concatenate([x, np.zeros(n - len(x), dtype=x.dtype)])

    @staticmethod
    def block(rows):
        return np.block([[np.zeros(_shape(rows, i, j)) if b is None else b for j, b in enumerate(r)]
                         for i, r in enumerate(rows)])

    @staticmethod
    def concat(parts):
        return np.concatenate([np.atleast_1d(np.asarray(p)) for p in parts])

    @staticmethod
    def diag(d):
        return np.diag(np.asarray(d))

    @staticmethod
    def sum(x):
        return np.sum(x)


class IntervalOps:
    rigorous = True
    pi = PI

    @staticmethod
    def scalar(x):
        return x if isinstance(x, Interval) else Interval(float(x))

    @staticmethod
    def conv(a, b, kind):
        return ss.conv(a, b, kind)

    @staticmethod
    def pik(n, power=1):
        return (Interval(np.arange(n, dtype=float)) * PI) ** power

    @staticmethod
    def mult(c, pc, px, rows, cols):
        if not isinstance(c, (Interval, CInterval)):
            c = Interval(np.asarray(c, dtype=float))
        return ss.mult_matrix(c, pc, px, rows, cols)

    @staticmethod
    def pad(x, n):
        if not isinstance(x, Interval):
            return FloatOps.pad(x, n)
        if len(x) >= n:
            return x[:n]
        z = np.zeros(n - len(x))
        return Interval(np.concatenate([x.lo, z]), np.concatenate([x.hi, z]))

    @staticmethod
    def block(rows):
        return stack_blocks(rows)

    @staticmethod
    def concat(parts):
        return concatenate([p if isinstance(p, Interval) else Interval(np.atleast_1d(np.asarray(p, float)))
                            for p in parts])

    @staticmethod
    def diag(d):
        d = d if isinstance(d, Interval) else Interval(np.asarray(d, float))
        return Interval(np.diag(d.lo), np.diag(d.hi))

    @staticmethod
    def sum(x):
        return x.sum() if isinstance(x, Interval) else Interval(float(np.sum(x)))


def _shape(rows, i, j):
    h = next(b.shape[0] for b in rows[i] if b is not None)
    w = next(r[j].shape[1] for r in rows if r[j] is not None)
    return (h, w)


def add_padded(ops, *terms):
    """Sum of sequences of different lengths (zero padding)."""
    n = max(len(t) for t in terms)
    out = ops.pad(terms[0], n)
    for t in terms[1:]:
        out = out + ops.pad(t, n)
    return out
