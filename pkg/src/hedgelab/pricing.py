"""Super-hedging prices.

Prices follow p + V >= h: the price of a claim h against a terminal value V
is esssup_{F_t}(h - V).  Signed infinities are explicit values: -inf where
the hedging LP is unbounded (an instantaneous profit below the node), +inf
for an empty menu.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .cond_calc import cond_esssup
from .lp import LinearProgram, solve_lp, verify_outcome
from .market import IdExtension, MarketModel, PortfolioMenu, SimpleStrategy
from .prob_space import (NEG_INF, POS_INF, FilteredSpace, ModelError, RandomVariable,
                         is_finite, is_measurable)

_ZERO = Fraction(0)


class PriceProcess:
    """One F_t-measurable price variable per date (values may be +-inf)."""

    def __init__(self, space: FilteredSpace, slices: Sequence[RandomVariable]):
        for k, X in enumerate(slices):
            if not is_measurable(space, space.times[k], X):
                raise ModelError(f"price at time {space.times[k]} is not measurable")
        self.space = space
        self.slices = tuple(slices)

    def at(self, t) -> RandomVariable:
        return self.slices[self.space.time_index(t)]

    def __getitem__(self, k):
        return self.slices[k]

    def is_finite(self) -> bool:
        return all(is_finite(v) for X in self.slices for v in X.values)


@dataclass
class HedgeResult:
    prices: PriceProcess
    theta: dict                  # (k, cell) -> optimal position where the price is finite
    strategy: SimpleStrategy     # positions from theta, zero elsewhere

    @property
    def price0(self) -> RandomVariable:
        return self.prices[0]


def node_hedge(increments, values):
    """min p s.t. p + theta.dS_c >= values_c over the children with finite values.

    Returns (price, theta); price is -inf when no child constrains or the LP
    is unbounded, +inf when a child is +inf.
    """
    if any(v == POS_INF for v in values):
        return POS_INF, None
    rows = [(dS, v) for dS, v in zip(increments, values) if is_finite(v)]
    if not rows:
        return NEG_INF, None
    d = len(rows[0][0])
    lp = LinearProgram(1 + d, [1] + [0] * d, "min")
    for dS, v in rows:
        lp.add([1] + list(dS), ">=", v)
    out = solve_lp(lp)
    assert verify_outcome(lp, out), "hedging LP certificate failed"
    if out.status == "unbounded":
        return NEG_INF, None
    return out.witness[0], tuple(out.witness[1:])


def superhedge_dp(model: MarketModel, h: RandomVariable) -> HedgeResult:
    """Backward induction over the tree, one small LP per node."""
    space = model.space
    h._check(space)
    N = space.horizon
    node_val = [None] * (N + 1)
    if not is_measurable(space, space.times[N], h):
        raise ModelError("claim is not measurable at the terminal date")
    node_val[N] = [h.values[cell[0]] for cell in space.cells(N)]
    theta = {}
    for k in range(N - 1, -1, -1):
        vals = []
        for c in range(len(space.cells(k))):
            inc = model.child_increments(k, c)
            p, th = node_hedge([dS for _, dS in inc], [node_val[k + 1][ch] for ch, _ in inc])
            vals.append(p)
            if th is not None:
                theta[(k, c)] = th
        node_val[k] = vals
    slices = []
    for k in range(N + 1):
        cof = space.cell_of(k)
        slices.append(RandomVariable(space, [node_val[k][cof[i]] for i in range(space.n)]))
    prices = PriceProcess(space, slices)
    strat = SimpleStrategy.from_node_positions(model, theta, anchor=0)
    res = HedgeResult(prices, theta, strat)
    assert check_superhedge(model, h, res), "super-hedging inequality fails along some path"
    return res


def check_superhedge(model: MarketModel, h: RandomVariable, res: HedgeResult) -> bool:
    """p_k(node) + sum_{j>=k} theta_j . dS_j >= h along every path below each
    node whose subtree prices are all finite."""
    space = model.space
    N = space.horizon
    # fin[k][c]: price finite at (k, c) and at every node below it
    fin = [None] * (N + 1)
    fin[N] = [is_finite(res.prices[N].values[cell[0]]) for cell in space.cells(N)]
    for k in range(N - 1, -1, -1):
        fin[k] = [is_finite(res.prices[k].values[cell[0]]) and all(fin[k + 1][ch] for ch in space.children(k, c))
                  for c, cell in enumerate(space.cells(k))]
    for i in range(space.n):
        gain = _ZERO
        for k in range(N, -1, -1):
            c = space.cell_of(k)[i]
            if not fin[k][c]:
                break
            if k < N:
                th = res.theta[(k, c)]
                gain += sum((a * (y - x) for a, x, y in zip(th, model.price(k, i), model.price(k + 1, i))), _ZERO)
            if res.prices[k].values[i] + gain < h.values[i]:
                return False
    return True


def emm_price(model: MarketModel, h: RandomVariable, Q) -> list:
    """E_Q[h | F_t] per date, computed by backward averaging with Q."""
    space = model.space
    N = space.horizon
    out = [None] * (N + 1)
    out[N] = h
    for k in range(N - 1, -1, -1):
        vals = list(h.values)
        for cell in space.cells(k):
            mass = sum(Q[i] for i in cell)
            e = sum((Q[i] * h.values[i] for i in cell), _ZERO) / mass
            for i in cell:
                vals[i] = e
        out[k] = RandomVariable(space, vals)
    return out


# -- menus ----------------------------------------------------------------------

def entry_price(space: FilteredSpace, t, h: RandomVariable, V: RandomVariable) -> RandomVariable:
    return cond_esssup(space, t, h - V)


@dataclass
class PriceSetDescription:
    space: FilteredSpace
    time: object
    pi: RandomVariable            # infimum price (values may be +inf for an empty menu)
    lambda_cells: frozenset       # cell numbers at `time` where the infimum is attained

    @property
    def lambda_set(self) -> frozenset:
        k = self.space.time_index(self.time)
        return frozenset(w for c in self.lambda_cells for w in self.space.atom(k, c).members)

    def interval(self, cell: int) -> tuple:
        """(lower end, closed?) of J on one atom."""
        k = self.space.time_index(self.time)
        return self.pi.values[self.space.cells(k)[cell][0]], cell in self.lambda_cells


@dataclass
class MenuPricing:
    entry_prices: dict            # name -> price variable
    description: PriceSetDescription
    assignment: Optional[tuple]   # attaining entry index per F_t-atom
    attaining_value: Optional[RandomVariable] = None


def menu_price_set(model_or_space, menu: PortfolioMenu, h: RandomVariable, t=None) -> MenuPricing:
    space = model_or_space.space if isinstance(model_or_space, MarketModel) else model_or_space
    t = menu.anchor_time if t is None else t
    if space.time_index(t) != menu.anchor_index:
        raise ModelError("menu is anchored at a different time")
    k = space.time_index(t)
    cells = space.cells(k)
    if len(menu) == 0:
        pi = RandomVariable(space, [POS_INF] * space.n)
        return MenuPricing({}, PriceSetDescription(space, t, pi, frozenset()), None)
    prices = {name: entry_price(space, t, h, V) for name, V in zip(menu.names, menu.entries)}
    plist = [prices[n] for n in menu.names]
    assignment = []
    for cell in cells:
        i = cell[0]
        best = min(range(len(plist)), key=lambda j: (plist[j].values[i], j))
        assignment.append(best)
    cof = space.cell_of(k)
    pi = RandomVariable(space, [plist[assignment[cof[i]]].values[i] for i in range(space.n)])
    ext = IdExtension(menu)
    attaining = ext.glue(assignment)
    # attained on every atom for finite menus
    lam = frozenset(c for c in range(len(cells))
                    if entry_price(space, t, h, attaining).values[cells[c][0]] == pi.values[cells[c][0]])
    return MenuPricing(prices, PriceSetDescription(space, t, pi, lam), tuple(assignment), attaining)


def menu_price_membership(desc: PriceSetDescription, p: RandomVariable) -> bool:
    space = desc.space
    if not is_measurable(space, desc.time, p):
        raise ModelError(f"price is not measurable at time {desc.time}")
    k = space.time_index(desc.time)
    for c, cell in enumerate(space.cells(k)):
        i = cell[0]
        lo = desc.pi.values[i]
        if lo == POS_INF:
            return False
        if c in desc.lambda_cells:
            if p.values[i] < lo:
                return False
        elif p.values[i] <= lo:
            return False
    return True


def raw_menu_membership(space: FilteredSpace, menu: PortfolioMenu, h: RandomVariable, p: RandomVariable) -> bool:
    """p in {esssup_{F_t}(h - V) : V in menu} + L0(R+, F_t), without gluing."""
    t = menu.anchor_time
    return any(p.ge(entry_price(space, t, h, V)) for V in menu.entries)


def id_membership_bruteforce(space: FilteredSpace, menu: PortfolioMenu, h: RandomVariable, p: RandomVariable) -> bool:
    """Membership in the id-extension price set by enumerating every gluing."""
    ext = IdExtension(menu)
    t = menu.anchor_time
    return any(p.ge(entry_price(space, t, h, ext.glue(a))) for a in ext.assignments())


def lambda_from_gamma(space: FilteredSpace, menu: PortfolioMenu, h: RandomVariable, p0: RandomVariable) -> frozenset:
    """Largest union of F_t-atoms L with pi 1_L + p0 1_{not L} an id-price.

    Computed by brute force over subsets of atoms for a given id-price p0.
    """
    t = menu.anchor_time
    k = space.time_index(t)
    cells = space.cells(k)
    pi = menu_price_set(space, menu, h, t).description.pi
    cof = space.cell_of(k)
    best = frozenset()
    for r in range(len(cells) + 1):
        for subset in itertools.combinations(range(len(cells)), r):
            s = set(subset)
            cand = RandomVariable(space, [pi.values[i] if cof[i] in s else p0.values[i] for i in range(space.n)])
            if id_membership_bruteforce(space, menu, h, cand) and len(s) > len(best):
                best = frozenset(s)
    return best


# -- closed prices ----------------------------------------------------------------

@dataclass
class SequenceLimitReport:
    index: int
    limit: RandomVariable
    price: RandomVariable
    accepted: bool
    reason: str = ""


@dataclass
class InvarianceReport:
    base_price: RandomVariable
    closed_price: Optional[RandomVariable]
    invariant: bool
    sequences: list


def closed_price_invariance(model_or_space, menu: PortfolioMenu, h: RandomVariable, t, batch,
                            limits: Optional[Sequence] = None) -> InvarianceReport:
    """Adjoin limits of menu sequences and confirm the infimum price is unchanged.

    ``limits[j]`` (optional) overrides the canonical limit inf_n X_n of
    sequence j; it must pass the limit test.
    """
    from .topology import converges, is_limit

    space = model_or_space.space if isinstance(model_or_space, MarketModel) else model_or_space
    base = menu_price_set(space, menu, h, t).description.pi
    ext = IdExtension(menu)
    glued = {V for V, _ in ext.enumerate()}
    reports = []
    extra = {}
    for j, seq in enumerate(batch):
        if seq.tail == "monotone":
            raise ModelError(f"sequence {j}: monotone tails leave the menu; only menu entries may be used")
        for X in seq.prefix:
            if X not in glued:
                raise ModelError(f"sequence {j}: term {X} is not an id-extension entry")
        conv = converges(space, t, seq)
        if not conv.convergent:
            raise ModelError(f"sequence {j} does not converge (inf = -inf at {conv.violation})")
        Z = conv.limit if limits is None or limits[j] is None else limits[j]
        ok = is_limit(space, t, seq, Z).is_limit
        price = entry_price(space, t, h, Z)
        reports.append(SequenceLimitReport(j, Z, price, ok, "" if ok else "not a limit"))
        if ok:
            extra[f"L{j}"] = Z
    closed = menu.with_entries(extra) if extra else menu
    new = menu_price_set(space, closed, h, t).description.pi
    return InvarianceReport(base, new, new == base, reports)
