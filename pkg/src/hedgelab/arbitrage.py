"""No-arbitrage detectors with exact witnesses.

* AIP: at every node the current price lies in the convex hull of the
  next-step prices.  A failure yields a separating direction, which is an
  instantaneous profit.
* NA / EMM: on a finite tree an equivalent martingale measure exists iff every
  node admits strictly positive one-step martingale weights.  Each node is
  solved as a small LP (maximize a uniform lower bound on the weights).  The
  product of the one-step weights is the EMM.  A zero optimum at some node
  gives, through the LP dual, a one-step arbitrage.
* NUPBR: the admissible value set with floor -m is unbounded in probability
  iff some strategy has I_u >= 0 for all u and I_T != 0 (scale it up without
  touching the floor).  Because every outcome has positive mass, boundedness
  in probability and pointwise boundedness coincide.  This is decided by one
  cone LP over all node positions, so the verdict does not depend on m.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .cond_calc import HullResult, in_convex_hull
from .lp import LinearProgram, solve_lp, verify_outcome
from .market import MarketModel, SimpleStrategy, portfolio_value, value_path
from .prob_space import ModelError, RandomVariable, as_fraction, is_measurable, stopped_partition

_ZERO = Fraction(0)

NA_VIOLATION = "NA-violation"
AIP_PROFIT = "AIP-instantaneous-profit"
NUPBR_DIRECTION = "NUPBR-cone-direction"


def _dot(a, b):
    return sum((x * y for x, y in zip(a, b)), _ZERO)


@dataclass
class ArbitrageWitness:
    strategy: SimpleStrategy
    kind: str
    terminal: RandomVariable
    price: Optional[RandomVariable] = None   # AIP only: the nonpositive price at the anchor
    node: Optional[tuple] = None            # (time index, cell) where the witness was found

    def verify(self) -> bool:
        model = self.strategy.model
        space = model.space
        T = space.times[-1]
        if portfolio_value(model, self.strategy, T) != self.terminal:
            return False
        if self.kind == AIP_PROFIT:
            p = self.price
            t = space.times[self.strategy.anchor]
            return (p is not None and is_measurable(space, t, p) and p.le(0) and not p.is_zero()
                    and (p + self.terminal).ge(0))
        if self.kind == NA_VIOLATION:
            return self.terminal.ge(0) and not self.terminal.is_zero()
        if self.kind == NUPBR_DIRECTION:
            return all(V.ge(0) for V in value_path(model, self.strategy)) and not self.terminal.is_zero()
        return False


@dataclass
class EmmWitness:
    Q: tuple          # per outcome, aligned with space.omega
    margin: Fraction
    conditional: dict = field(default_factory=dict)  # (k, cell) -> one-step weights per child

    def as_dict(self, space) -> dict:
        return dict(zip(space.omega, self.Q))


def verify_emm(model: MarketModel, Q) -> bool:
    """Exact check: Q > 0, sums to 1, and every one-step conditional mean of dS is 0."""
    space = model.space
    Q = tuple(as_fraction(q) for q in Q)
    if len(Q) != space.n or any(q <= 0 for q in Q) or sum(Q) != 1:
        return False
    for k in range(space.horizon):
        for c, cell in enumerate(space.cells(k)):
            s0 = model.node_price(k, c)
            for j in range(model.d):
                if sum((Q[i] * (model.price(k + 1, i)[j] - s0[j]) for i in cell), _ZERO) != 0:
                    return False
    return True


# -- AIP ----------------------------------------------------------------------

@dataclass
class AipVerdict:
    holds: bool
    node: Optional[tuple] = None          # (time index, cell) of the first failure
    hull: Optional[HullResult] = None
    witness: Optional[ArbitrageWitness] = None


def _node_hull(model: MarketModel, k: int, c: int) -> HullResult:
    point = model.node_price(k, c)
    cloud = [model.node_price(k + 1, ch) for ch in model.space.children(k, c)]
    return in_convex_hull(point, cloud)


def _profit_witness(model, k, c, normal) -> ArbitrageWitness:
    space = model.space
    strat = SimpleStrategy.from_node_positions(model, {(k, c): normal}, anchor=k)
    terminal = portfolio_value(model, strat, space.times[-1])
    members = space.cells(k)[c]
    price = RandomVariable(space, [-1 if i in members else 0 for i in range(space.n)])
    w = ArbitrageWitness(strat, AIP_PROFIT, terminal, price=price, node=(k, c))
    assert w.verify(), "instantaneous-profit witness failed to verify"
    return w


def check_aip(model: MarketModel) -> AipVerdict:
    """Consecutive-date hull test, nodes visited in canonical order."""
    space = model.space
    for k in range(space.horizon):
        for c in range(len(space.cells(k))):
            h = _node_hull(model, k, c)
            if not h.inside:
                return AipVerdict(False, (k, c), h, _profit_witness(model, k, c, h.normal))
    return AipVerdict(True)


def aip_all_pairs(model: MarketModel) -> bool:
    """Hull condition for every pair of grid dates t1 <= t2 (not only consecutive)."""
    space = model.space
    for k1 in range(len(space.times)):
        for cell in space.cells(k1):
            point = model.price(k1, cell[0])
            for k2 in range(k1, len(space.times)):
                if not in_convex_hull(point, {model.price(k2, i) for i in cell}).inside:
                    return False
    return True


def _pair_holds(model, r1, r2) -> bool:
    for cell in stopped_partition(model.space, r1):
        point = model.price(r1[cell[0]], cell[0])
        cloud = {model.price(r2[i], i) for i in cell}
        if not in_convex_hull(point, cloud).inside:
            return False
    return True


@dataclass
class StoppingAipVerdict:
    holds: bool
    exhaustive: bool
    pairs_checked: int
    seed: Optional[int] = None
    failing_pair: Optional[tuple] = None


def default_seed() -> int:
    return int(os.environ.get("HEDGELAB_SEED", "0"))


def check_aip_stopping(model: MarketModel, pair_budget: int = 10000, seed: Optional[int] = None) -> StoppingAipVerdict:
    """Hull condition at pairs of stopping times tau1 <= tau2.

    Exhaustive when the number of ordered pairs fits the budget; otherwise
    ``pair_budget`` pairs are sampled with a seeded generator.
    """
    from .maxingale import count_stopping_times, enumerate_stopping_times, random_stopping_time

    space = model.space
    n_tau = count_stopping_times(space)
    if n_tau * n_tau <= pair_budget:
        taus = enumerate_stopping_times(space)
        checked = 0
        for r1 in taus:
            for r2 in taus:
                if any(a > b for a, b in zip(r1, r2)):
                    continue
                checked += 1
                if not _pair_holds(model, r1, r2):
                    return StoppingAipVerdict(False, True, checked, failing_pair=(r1, r2))
        return StoppingAipVerdict(True, True, checked)
    seed = default_seed() if seed is None else seed
    rng = random.Random(seed)
    for checked in range(1, pair_budget + 1):
        r1 = random_stopping_time(space, rng)
        r2 = random_stopping_time(space, rng)
        r2 = tuple(max(a, b) for a, b in zip(r1, r2))
        if not _pair_holds(model, r1, r2):
            return StoppingAipVerdict(False, False, checked, seed, (r1, r2))
    return StoppingAipVerdict(True, False, pair_budget, seed)


# -- EMM / NA -----------------------------------------------------------------

def _one_step(increments):
    """max eps s.t. sum(w + eps) <= 1, sum (w_i + eps) dS_i = 0, w >= 0.

    Returns (weights, None) with strictly positive normalized weights, or
    (None, theta) where theta.dS_i >= 0 for all i with a positive total.
    """
    m = len(increments)
    d = len(increments[0]) if increments else 0
    # variables: w_1..w_m, eps
    lp = LinearProgram(m + 1, [0] * m + [1], "max", bounds=[(0, None)] * (m + 1))
    lp.add([1] * m + [m], "<=", 1)
    rows = []
    for j in range(d):
        col = [dS[j] for dS in increments]
        if any(col):
            lp.add(col + [sum(col)], "=", 0)
            rows.append(j)
    out = solve_lp(lp)
    assert out.status == "optimal" and verify_outcome(lp, out), "one-step EMM LP failed"
    eps = out.witness[m]
    if eps > 0:
        q = [out.witness[i] + eps for i in range(m)]
        total = sum(q)
        return tuple(x / total for x in q), None
    # Dual of the equality rows: theta = -y gives theta.dS_i >= 0 with sum >= 1.
    theta = [_ZERO] * d
    for r, j in enumerate(rows):
        theta[j] = -out.dual[1 + r]
    return None, tuple(theta)


def find_emm(model: MarketModel):
    """EmmWitness, or an ArbitrageWitness (NA violation) from the first bad node."""
    space = model.space
    cond = {}
    for k in range(space.horizon):
        for c in range(len(space.cells(k))):
            inc = model.child_increments(k, c)
            weights, theta = _one_step([dS for _, dS in inc])
            if weights is None:
                # scale so the smallest positive one-step gain is 1
                gains = [_dot(theta, dS) for _, dS in inc]
                unit = min(g for g in gains if g > 0)
                theta = tuple(x / unit for x in theta)
                strat = SimpleStrategy.from_node_positions(model, {(k, c): theta}, anchor=0)
                terminal = portfolio_value(model, strat, space.times[-1])
                w = ArbitrageWitness(strat, NA_VIOLATION, terminal, node=(k, c))
                assert w.verify(), "NA witness failed to verify"
                return w
            cond[(k, c)] = dict(zip((ch for ch, _ in inc), weights))
    # Q(omega): mass of the root cell times the product of one-step weights.
    Q = []
    root_mass = [space.cell_prob(0, c) for c in range(len(space.cells(0)))]
    for i in range(space.n):
        q = root_mass[space.cell_of(0)[i]]
        for k in range(space.horizon):
            q *= cond[(k, space.cell_of(k)[i])][space.cell_of(k + 1)[i]]
        if not space.terminal_singletons:
            # spread the terminal-cell mass proportionally to P inside the cell
            cell = space.cells(space.horizon)[space.cell_of(space.horizon)[i]]
            q *= space.prob[i] / sum(space.prob[j] for j in cell)
        Q.append(q)
    Q = tuple(Q)
    assert verify_emm(model, Q), "EMM witness failed to verify"
    return EmmWitness(Q, min(Q), cond)


def find_emm_global(model: MarketModel):
    """The single LP max eps s.t. Q >= eps, sum Q = 1, martingale identities.

    Returns (eps*, Q).  Used as a cross-check of :func:`find_emm`.
    """
    space = model.space
    n = space.n
    lp = LinearProgram(n + 1, [0] * n + [1], "max", bounds=[(0, None)] * (n + 1))
    lp.add([1] * n + [0], "=", 1)
    for i in range(n):
        row = [0] * (n + 1)
        row[i] = 1
        row[n] = -1
        lp.add(row, ">=", 0)
    for k in range(space.horizon):
        for c, cell in enumerate(space.cells(k)):
            s0 = model.node_price(k, c)
            for j in range(model.d):
                row = [_ZERO] * (n + 1)
                for i in cell:
                    row[i] = model.price(k + 1, i)[j] - s0[j]
                if any(row):
                    lp.add(row, "=", 0)
    out = solve_lp(lp)
    assert verify_outcome(lp, out)
    if out.status != "optimal":
        return _ZERO, None
    return out.witness[n], out.witness[:n]


def check_na(model: MarketModel) -> bool:
    return isinstance(find_emm(model), EmmWitness)


# -- NUPBR --------------------------------------------------------------------

@dataclass
class NupbrVerdict:
    holds: bool
    m: Fraction
    witness: Optional[ArbitrageWitness] = None


def check_nupbr(model: MarketModel, m=1) -> NupbrVerdict:
    """Cone LP: max sum_omega I_T s.t. I_u >= 0 for all u, capped at 1.

    The cap keeps the LP bounded; the optimum is 0 (NUPBR holds) or 1 (a
    cone direction exists).  ``m`` is accepted and echoed: the verdict is
    invariant in it on finite spaces.
    """
    m = as_fraction(m)
    if m <= 0:
        raise ModelError("NUPBR floor m must be positive")
    space = model.space
    d = model.d
    nodes = [(k, c) for k in range(space.horizon) for c in range(len(space.cells(k)))]
    if d == 0 or not nodes:
        return NupbrVerdict(True, m)
    col = {node: idx * d for idx, node in enumerate(nodes)}
    nv = len(nodes) * d

    def value_row(u, i):
        # I_u(omega_i) as a linear form in the node positions
        row = [_ZERO] * nv
        for k in range(u):
            c = space.cell_of(k)[i]
            s0 = model.node_price(k, c)
            s1 = model.price(k + 1, i)
            for j in range(d):
                row[col[(k, c)] + j] += s1[j] - s0[j]
        return row

    lp = LinearProgram(nv, sense="max")
    for u in range(1, space.horizon + 1):
        for cell in space.cells(u):
            row = value_row(u, cell[0])
            if any(row):
                lp.add(row, ">=", 0)
    total = [_ZERO] * nv
    for i in range(space.n):
        for j, a in enumerate(value_row(space.horizon, i)):
            total[j] += a
    lp.objective = tuple(total)
    lp.add(total, "<=", 1)
    out = solve_lp(lp)
    assert out.status == "optimal" and verify_outcome(lp, out), "NUPBR LP failed"
    if out.value == 0:
        return NupbrVerdict(True, m)
    x = out.witness
    theta = {node: tuple(x[col[node] + j] for j in range(d)) for node in nodes}
    strat = SimpleStrategy.from_node_positions(model, theta, anchor=0)
    terminal = portfolio_value(model, strat, space.times[-1])
    w = ArbitrageWitness(strat, NUPBR_DIRECTION, terminal)
    assert w.verify(), "NUPBR witness failed to verify"
    return NupbrVerdict(False, m, w)
