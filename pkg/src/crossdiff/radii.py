"""Radii polynomial P(r) = Y - (1 - Z0 - Z1) r + c0 r^2 + c1 r^3 + c2 r^4.

All inputs are certified upper bounds.  With c_i >= 0 the polynomial is
convex on r > 0, so rigorous negativity at two radii implies negativity on
the whole segment between them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .interval import Interval


class NoNegativeRadius(Exception):
    """Validation failed: no r > 0 with P(r) < 0 was found."""


@dataclass(frozen=True)
class RadiiResult:
    r_min: float
    r_max: float
    p_at_r_min: float  # upper bound of P(r_min)
    p_at_r_max: float


def p_upper(Y: float, Z0: float, Z1: float, z2: Sequence[float], r: float) -> float:
    """Certified upper bound of P(r)."""
    R = Interval(float(r))
    acc = Interval(float(Y)) - (Interval(1.0) - Interval(float(Z0)) - Interval(float(Z1))) * R
    rp = R * R
    for c in z2:
        acc = acc + Interval(float(c)) * rp
        rp = rp * R
    return float(acc.hi)


def find_radius(Y: float, Z0: float, Z1: float, z2: Sequence[float], n_grid: int = 64,
                r_upper: float = 1.0, refine: int = 60) -> RadiiResult:
    """Locate the verified interval [r_min, r_max] on which P < 0."""
    z2 = tuple(float(c) for c in z2)
    if any(c < 0 for c in z2) or Y < 0:
        raise ValueError("bounds must be nonnegative")
    if not all(np.isfinite([Y, Z0, Z1, *z2])):
        raise NoNegativeRadius("non-finite bound")
    slack = float((Interval(1.0) - Interval(float(Z0)) - Interval(float(Z1))).lo)
    if slack <= 0:
        raise NoNegativeRadius(f"Z0 + Z1 >= 1 (Z0={Z0:.3e}, Z1={Z1:.3e})")

    P = lambda r: p_upper(Y, Z0, Z1, z2, r)  # noqa: E731
    lo = max(Y, 1e-300)
    if lo >= r_upper:
        raise NoNegativeRadius(f"Y={Y:.3e} exceeds the search range")
    grid = list(np.geomspace(lo, r_upper, n_grid))
    base = Y / slack
    grid += [base * t for t in (1 + 2**-20, 1 + 2**-10, 1.01, 1.1, 1.5, 2.0, 4.0) if lo <= base * t <= r_upper]
    grid = sorted(set(grid))
    vals = [P(r) for r in grid]
    neg = [i for i, v in enumerate(vals) if v < 0]
    if not neg:
        raise NoNegativeRadius(f"P(r) >= 0 on the search grid (Y={Y:.3e}, Z0+Z1={Z0 + Z1:.3e})")
    i0, i1 = neg[0], neg[-1]

    # r_min: shrink towards the last nonnegative point below
    good, bad = grid[i0], (grid[i0 - 1] if i0 > 0 else 0.0)
    for _ in range(refine):
        mid = 0.5 * (good + bad) if bad == 0.0 else float(np.sqrt(good * bad))
        if mid <= bad or mid >= good:
            break
        if P(mid) < 0:
            good = mid
        else:
            bad = mid
    r_min = good
    good, bad = grid[i1], (grid[i1 + 1] if i1 + 1 < len(grid) else None)
    if bad is not None:
        for _ in range(refine):
            mid = float(np.sqrt(good * bad))
            if mid <= good or mid >= bad:
                break
            if P(mid) < 0:
                good = mid
            else:
                bad = mid
    r_max = good
    return RadiiResult(r_min, r_max, P(r_min), P(r_max))
