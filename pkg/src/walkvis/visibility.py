"""Visibility of lattice points along power curves.

Two routes to the same predicate: a fast arithmetic criterion built on the
generalized gcd, and a brute-force oracle that scans the defining curve with
exact integer arithmetic.  Watchpoint sets are validated here against the
pairwise-visibility condition and the 2**(b1+b2) cardinality bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .numtheory import BExponent, PrimeTables, as_bexp, factorize_distinct, _pow_divides


class LatticePoint(NamedTuple):
    x: int
    y: int


def _has_common_curve_divisor(b: BExponent, a: int, c: int, tables: PrimeTables | None) -> bool:
    # a, c >= 1; is there a prime p with p**b1 | a and p**b2 | c?
    # Factor whichever side is smaller; a contributing prime divides both.
    if a <= c:
        for p, k in factorize_distinct(a, tables):
            if k >= b.b1 and _pow_divides(p, b.b2, c):
                return True
    else:
        for p, k in factorize_distinct(c, tables):
            if k >= b.b2 and _pow_divides(p, b.b1, a):
                return True
    return False


def is_b_visible(b, p, q, tables: PrimeTables | None = None) -> bool:
    """Whether the distinct lattice points p and q see each other for this b.

    Off-axis pairs are visible exactly when gcd_b of the displacement is 1;
    pairs sharing a coordinate (degenerate vertical/horizontal curve) are
    visible exactly when the other coordinates differ by 1.
    """
    bb = as_bexp(b)
    dx = p[0] - q[0]
    dy = p[1] - q[1]
    if dx == 0 and dy == 0:
        raise ValueError("visibility of a point from itself is undefined")
    if dx == 0:
        return abs(dy) == 1
    if dy == 0:
        return abs(dx) == 1
    return not _has_common_curve_divisor(bb, abs(dx), abs(dy), tables)


def curve_oracle_visible(b, p, q) -> bool:
    """Visibility checked directly on the defining curve, independent of gcd_b.

    Fits a1*(y - q2)**b1 = a2*(x - q1)**b2 through both points with
    a1 = (p1-q1)**b2, a2 = (p2-q2)**b1 and scans every interior lattice point
    of the bounding box in exact integer arithmetic.  Supports only
    displacements in the open positive quadrant (p strictly up-and-right
    of q); sign conventions for mixed-sign displacements with even exponents
    are deliberately not guessed at.
    """
    bb = as_bexp(b)
    dx = p[0] - q[0]
    dy = p[1] - q[1]
    if dx == 0 and dy == 0:
        raise ValueError("visibility of a point from itself is undefined")
    if dx <= 0 or dy <= 0:
        raise ValueError(
            f"curve oracle supports only positive-quadrant displacements, got ({dx}, {dy})"
        )
    a1 = dx**bb.b2
    a2 = dy**bb.b1
    for rx in range(1, dx):
        rxp = a2 * rx**bb.b2
        for ry in range(1, dy):
            if a1 * ry**bb.b1 == rxp:
                return False
    return True


@dataclass(frozen=True)
class WatchpointSet:
    """Watchpoints validated for condition (*): pairwise mutually visible."""

    b: BExponent
    points: tuple[LatticePoint, ...]

    @property
    def size(self) -> int:
        return len(self.points)

    def max_offset(self) -> int:
        return max(max(abs(pt.x), abs(pt.y)) for pt in self.points)


class WatchpointValidationError(ValueError):
    """Rejection of a candidate watchpoint set.

    Carries the first offending pair (mutual-visibility or duplicate
    failures) or the cardinality that overflowed the 2**(b1+b2) bound.
    """

    def __init__(self, message: str, *, pair=None, cardinality: int | None = None):
        super().__init__(message)
        self.pair = pair
        self.cardinality = cardinality


def validate_watchpoint_set(b, points: Sequence, tables: PrimeTables | None = None) -> WatchpointSet:
    """Validate a nonempty point list as a watchpoint set for this b."""
    bb = as_bexp(b)
    pts = [LatticePoint(int(pt[0]), int(pt[1])) for pt in points]
    if not pts:
        raise ValueError("watchpoint set must be nonempty")
    cap = 2 ** (bb.b1 + bb.b2)
    if len(pts) > cap:
        raise WatchpointValidationError(
            f"{len(pts)} watchpoints exceed the cardinality bound 2**(b1+b2) = {cap}",
            cardinality=len(pts),
        )
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if pts[i] == pts[j]:
                raise WatchpointValidationError(
                    f"duplicate watchpoint {tuple(pts[i])}", pair=(pts[i], pts[j])
                )
            if not is_b_visible(bb, pts[i], pts[j], tables):
                raise WatchpointValidationError(
                    f"watchpoints {tuple(pts[i])} and {tuple(pts[j])} are not mutually visible",
                    pair=(pts[i], pts[j]),
                )
    return WatchpointSet(bb, tuple(pts))


def visible_mask(b, dx, dy, primes: np.ndarray) -> np.ndarray:
    """Vectorized is_b_visible over displacement arrays.

    Matches the scalar predicate exactly, shared-coordinate rule included;
    the all-zero displacement maps to False (a walker standing on a
    watchpoint does not count as visible).  ``primes`` must extend past
    min(max|dx|**(1/b1), max|dy|**(1/b2)).
    """
    bb = as_bexp(b)
    a = np.abs(dx)
    c = np.abs(dy)
    if bb.b1 == 1 and bb.b2 == 1:
        bad = np.gcd(a, c) != 1
    else:
        bad = np.zeros(a.shape, dtype=bool)
        max_a = int(a.max(initial=0))
        max_c = int(c.max(initial=0))
        exhausted = True
        for p in primes:
            p = int(p)
            pb1 = p**bb.b1
            pb2 = p**bb.b2
            if pb1 > max_a or pb2 > max_c:
                exhausted = False
                break
            bad |= (a % pb1 == 0) & (c % pb2 == 0)
        if exhausted:
            raise ValueError("prime table too short for these displacements")
    vis = ~bad
    zx = a == 0
    zy = c == 0
    vis[zx] = c[zx] == 1
    vis[zy] = a[zy] == 1
    return vis
