"""Builders for event-tree spaces and seeded random market models."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional, Sequence

from .market import MarketModel
from .prob_space import FilteredSpace


def tree_space(children: dict, prob_weights: Optional[dict] = None, times=None) -> FilteredSpace:
    """Space from an explicit tree.

    ``children`` maps a node path (tuple of child indices, root = ()) to its
    number of children; leaves are the nodes absent from the map (or mapped
    to 0).  All leaves must sit at the same depth.  ``prob_weights[path]``
    lists positive integer weights for the children (uniform by default).
    """
    leaves = []
    probs = {}

    def walk(path, p, depth):
        m = children.get(path, 0)
        if m == 0:
            leaves.append((path, depth))
            probs[path] = p
            return
        w = (prob_weights or {}).get(path, [1] * m)
        tot = sum(w)
        for j in range(m):
            walk(path + (j,), p * Fraction(w[j], tot), depth + 1)

    walk((), Fraction(1), 0)
    depths = {d for _, d in leaves}
    if len(depths) != 1:
        raise ValueError("all leaves must have the same depth")
    N = depths.pop()
    labels = ["w" + "".join(str(j) for j in path) if path else "w" for path, _ in leaves]
    partitions = []
    for k in range(N + 1):
        cells = {}
        for (path, _), lab in zip(leaves, labels):
            cells.setdefault(path[:k], []).append(lab)
        partitions.append(list(cells.values()))
    times = list(range(N + 1)) if times is None else list(times)
    return FilteredSpace(labels, times, partitions, [probs[p] for p, _ in leaves])


def full_tree(branching: Sequence[int], times=None) -> FilteredSpace:
    """Uniform tree with branching[k] children at every node of level k."""
    children = {}

    def walk(path):
        k = len(path)
        if k < len(branching):
            children[path] = branching[k]
            for j in range(branching[k]):
                walk(path + (j,))

    walk(())
    return tree_space(children, times=times)


def leaf_paths(space: FilteredSpace) -> list:
    """Recover the path of each outcome from the canonical cell numbering."""
    out = []
    for i in range(space.n):
        path = []
        for k in range(1, len(space.times)):
            parent = space.cell_of(k - 1)[i]
            kids = space.children(k - 1, parent)
            path.append(kids.index(space.cell_of(k)[i]))
        out.append(tuple(path))
    return out


def binomial_model(steps: int, s0=1, up=2, down=Fraction(1, 2), p=Fraction(1, 2)) -> MarketModel:
    """Recombining-price binomial model on the full (non-recombining) tree."""
    up, down, s0 = Fraction(up), Fraction(down), Fraction(s0)
    weights = {}
    pn, pd = Fraction(p).numerator, Fraction(p).denominator
    children = {}

    def walk(path):
        if len(path) < steps:
            children[path] = 2
            weights[path] = [pn, pd - pn]
            walk(path + (0,))
            walk(path + (1,))

    walk(())
    space = tree_space(children, weights)
    paths = leaf_paths(space)
    prices = []
    for k in range(steps + 1):
        prices.append([s0 * up ** path[:k].count(0) * down ** path[:k].count(1) for path in paths])
    return MarketModel(space, prices)


def random_model(rng: random.Random, max_depth: int = 4, max_branch: int = 3, dims=(1, 2),
                 aip_bias: float = 0.5, start: int = 20) -> MarketModel:
    """Random tree market.

    With probability ``aip_bias`` the increments at each node are repaired so
    that the current price lies in the hull of the next prices (either mean
    zero, or nonnegative along one coordinate with a zero increment present,
    which keeps AIP but breaks NA).  Otherwise increments are left as drawn.
    """
    depth = rng.randint(1, max_depth)
    d = rng.choice(list(dims))
    forced = rng.random() < aip_bias
    children = {}
    weights = {}
    incr = {}

    def walk(path):
        if len(path) == depth:
            return
        m = rng.randint(1, max_branch)
        children[path] = m
        weights[path] = [rng.randint(1, 4) for _ in range(m)]
        deltas = [[rng.randint(-2, 2) for _ in range(d)] for _ in range(m)]
        if forced:
            mode = rng.random()
            if m == 1:
                deltas = [[0] * d]
            elif mode < 0.75:
                for j in range(d):
                    deltas[-1][j] = -sum(x[j] for x in deltas[:-1])
            else:
                # weak form: one-sided increments including a zero child
                deltas[0] = [0] * d
                for x in deltas[1:]:
                    for j in range(d):
                        x[j] = abs(x[j]) if j == 0 else 0
        for j in range(m):
            incr[path + (j,)] = deltas[j]
            walk(path + (j,))

    walk(())
    space = tree_space(children, weights)
    paths = leaf_paths(space)
    prices = []
    for k in range(depth + 1):
        sl = []
        for path in paths:
            v = [start] * d
            for q in range(1, k + 1):
                for j in range(d):
                    v[j] += incr[path[:q]][j]
            sl.append(v)
        prices.append(sl)
    return MarketModel(space, prices, d)


def random_claim(model: MarketModel, rng: random.Random, lo: int = -5, hi: int = 5):
    return model.space.rv([rng.randint(lo, hi) for _ in range(model.space.n)])
