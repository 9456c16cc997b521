"""Conditional essential supremum/infimum, conditional supports and hull tests.

On a finite space the conditional esssup given F_t is the atom-wise maximum
and the conditional support is the set of values attained on each atom.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .lp import LinearProgram, LpOutcome, solve_lp, verify_outcome
from .prob_space import FilteredSpace, ModelError, RandomVariable, as_fraction

__all__ = [
    "cond_esssup", "cond_essinf", "cond_esssup_family", "cond_support",
    "in_convex_hull", "HullResult", "LinearProgram", "LpOutcome", "solve_lp",
    "verify_outcome",
]


def _scalar(X: RandomVariable, space: FilteredSpace):
    X._check(space)
    if X.dim is not None:
        raise ModelError("conditional esssup needs a scalar variable; apply it per coordinate")


def cond_esssup(space: FilteredSpace, t, X: RandomVariable) -> RandomVariable:
    _scalar(X, space)
    k = space.time_index(t)
    out = list(X.values)
    for cell in space.cells(k):
        m = max(X.values[i] for i in cell)
        for i in cell:
            out[i] = m
    return RandomVariable(space, out)


def cond_essinf(space: FilteredSpace, t, X: RandomVariable) -> RandomVariable:
    return -cond_esssup(space, t, -X)


def cond_esssup_family(space: FilteredSpace, t, family) -> RandomVariable:
    """esssup over a finite family: pointwise max, then atom-wise max."""
    family = list(family)
    if not family:
        raise ModelError("empty family")
    top = family[0]
    for X in family[1:]:
        top = top.maximum(X)
    return cond_esssup(space, t, top)


def _point(v) -> tuple:
    if isinstance(v, tuple):
        return v
    if isinstance(v, list):
        return tuple(as_fraction(x) for x in v)
    return (as_fraction(v),)


def cond_support(space: FilteredSpace, t, X: RandomVariable) -> dict:
    """Atom -> frozenset of attained values (tuples for vector X)."""
    X._check(space)
    k = space.time_index(t)
    return {space.atom(k, c): frozenset(X.values[i] for i in cell)
            for c, cell in enumerate(space.cells(k))}


@dataclass
class HullResult:
    inside: bool
    weights: Optional[tuple] = None    # convex weights over the cloud when inside
    normal: Optional[tuple] = None     # separator f(x) = normal.x + offset
    offset: Optional[Fraction] = None

    def separator(self, x) -> Fraction:
        x = _point(x)
        return sum((a * b for a, b in zip(self.normal, x)), Fraction(0)) + self.offset

    def __bool__(self):
        return self.inside


def in_convex_hull(point, cloud) -> HullResult:
    """Exact hull membership.

    When the point lies outside, the returned affine separator is normalised
    so that it is >= 0 on the cloud and equals -1 at the point.
    """
    pts = [_point(p) for p in cloud]
    if not pts:
        raise ModelError("empty point cloud")
    x = _point(point)
    d = len(x)
    if any(len(p) != d for p in pts):
        raise ModelError("points of different dimensions")
    n = len(pts)

    if all(p == pts[0] for p in pts):
        if x == pts[0]:
            return HullResult(True, weights=(Fraction(1),) + (Fraction(0),) * (n - 1))
        diff = tuple(a - b for a, b in zip(pts[0], x))
        return _separator(diff, pts, x)

    lp = LinearProgram(n, sense="feasibility", bounds=[(0, None)] * n)
    for j in range(d):
        lp.add([p[j] for p in pts], "=", x[j])
    lp.add([1] * n, "=", 1)
    out = solve_lp(lp)
    assert verify_outcome(lp, out), "hull LP certificate failed to verify"
    if out.status == "optimal":
        return HullResult(True, weights=out.witness)
    # Farkas rows: d coordinate rows, the sum row, then n lower bounds.
    u = out.certificate[:d]
    return _separator(tuple(-a for a in u), pts, x)


def _separator(w, pts, x) -> HullResult:
    def dot(a, b):
        return sum((p * q for p, q in zip(a, b)), Fraction(0))

    lo = min(dot(w, p) for p in pts)
    gap = lo - dot(w, x)
    if gap <= 0:
        raise AssertionError("separator does not separate")
    return HullResult(False, normal=tuple(a / gap for a in w), offset=-lo / gap)
