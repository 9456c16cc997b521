"""Independent brute-force oracles shared by the test modules."""

import itertools
from fractions import Fraction as F

from hedgelab.prob_space import AdaptedProcess


def node_grid_arbitrage(model, radius=8):
    """First node where some integer theta in [-radius, radius]^d has
    theta.dS >= 0 on every child and > 0 on one, or None.

    Random models use integer increments, so the extreme rays of every
    one-step arbitrage cone (perpendiculars of increments in the plane)
    lie on this grid.
    """
    sp = model.space
    rng = range(-radius, radius + 1)
    for k in range(sp.horizon):
        for c in range(len(sp.cells(k))):
            incs = [dS for _, dS in model.child_increments(k, c)]
            for theta in itertools.product(rng, repeat=model.d):
                gains = [sum(a * x for a, x in zip(theta, dS)) for dS in incs]
                if min(gains) >= 0 and max(gains) > 0:
                    return (k, c), theta
    return None


def interval_aip(model):
    """d = 1 only: S_k lies between the min and max of its children."""
    sp = model.space
    for k in range(sp.horizon):
        for c in range(len(sp.cells(k))):
            s = model.node_price(k, c)[0]
            kids = [model.node_price(k + 1, ch)[0] for ch in sp.children(k, c)]
            if not min(kids) <= s <= max(kids):
                return False
    return True


def scalar_process(model, j=0):
    return AdaptedProcess(model.space, [X.coord(j) for X in model.S.slices])


def emm_backward(model, h, Q):
    """E_Q[h | F_k] at each node by direct summation over the cell."""
    sp = model.space
    out = []
    for k in range(sp.horizon + 1):
        vals = [None] * sp.n
        for cell in sp.cells(k):
            mass = sum(Q[i] for i in cell)
            e = sum(Q[i] * h.values[i] for i in cell) / mass
            for i in cell:
                vals[i] = e
        out.append(tuple(vals))
    return out


def grid_superhedge_price(model, h, radius=3, denom=3, extra=()):
    """One-period only: min over theta on a rational grid of max_c (h_c - theta.dS_c)."""
    sp = model.space
    assert sp.horizon == 1
    best = None
    incs = model.child_increments(0, 0)
    pts = [F(a, denom) for a in range(-radius * denom, radius * denom + 1)]
    cands = list(itertools.product(pts, repeat=model.d)) + [tuple(e) for e in extra]
    for theta in cands:
        val = max(h.values[sp.cells(1)[ch][0]] - sum(a * x for a, x in zip(theta, dS)) for ch, dS in incs)
        if best is None or val < best:
            best = val
    return best
