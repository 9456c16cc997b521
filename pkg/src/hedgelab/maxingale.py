"""Stopping times, stopped sigma-algebras and maxingale checks.

Stopping times are tuples of time indices, one per outcome.  On a tree they
are enumerated by a backward recursion: at each atom either stop, or continue
and pick a stopping rule independently in every child.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .cond_calc import cond_esssup
from .prob_space import (AdaptedProcess, FilteredSpace, ModelError, RandomVariable,
                         is_stopping_time, stopped_partition, stopping_indices, time_rv)


class StoppingTime:
    """Validated stopping time; ``tau`` holds time labels (or index tuples via ``from_indices``)."""

    def __init__(self, space: FilteredSpace, tau):
        ks = stopping_indices(space, tau)
        if not is_stopping_time(space, time_rv(space, ks)):
            raise ModelError("not a stopping time: some {tau <= t} splits an atom at time t")
        self.space = space
        self.indices = ks

    @classmethod
    def from_indices(cls, space: FilteredSpace, ks):
        return cls(space, [space.times[k] for k in ks])

    @property
    def labels(self) -> tuple:
        return tuple(self.space.times[k] for k in self.indices)

    def __eq__(self, other):
        return isinstance(other, StoppingTime) and self.indices == other.indices

    def __hash__(self):
        return hash(self.indices)

    def __repr__(self):
        return f"StoppingTime({list(self.labels)})"


def _ks(space, tau) -> tuple:
    if isinstance(tau, StoppingTime):
        return tau.indices
    if isinstance(tau, tuple) and all(type(x) is int for x in tau):
        return tau
    return StoppingTime(space, tau).indices


# -- enumeration --------------------------------------------------------------

def _node_count(space, k, c, start, memo):
    key = (k, c)
    if key not in memo:
        if k == space.horizon:
            memo[key] = 1
        else:
            prod = 1
            for ch in space.children(k, c):
                prod *= _node_count(space, k + 1, ch, start, memo)
            memo[key] = prod + (1 if k >= start else 0)
    return memo[key]


def count_stopping_times(space: FilteredSpace, start: int = 0) -> int:
    """Number of stopping times with values in times[start:]."""
    memo = {}
    total = 1
    for c in range(len(space.cells(0))):
        total *= _node_count(space, 0, c, start, memo)
    return total


def _node_rules(space, k, c, start):
    """All stopping rules below node (k, c) as dicts outcome index -> time index."""
    cell = space.cells(k)[c]
    rules = []
    if k >= start:
        rules.append({i: k for i in cell})
    if k < space.horizon:
        per_child = [_node_rules(space, k + 1, ch, start) for ch in space.children(k, c)]
        for combo in itertools.product(*per_child):
            merged = {}
            for part in combo:
                merged.update(part)
            rules.append(merged)
    return rules


def enumerate_stopping_times(space: FilteredSpace, start: int = 0, limit: Optional[int] = None) -> list:
    """Canonically ordered list of index tuples (earliest stopping first)."""
    n_tau = count_stopping_times(space, start)
    if limit is not None and n_tau > limit:
        raise ModelError(f"{n_tau} stopping times exceed the enumeration limit {limit}")
    per_root = [_node_rules(space, 0, c, start) for c in range(len(space.cells(0)))]
    out = []
    for combo in itertools.product(*per_root):
        merged = {}
        for part in combo:
            merged.update(part)
        out.append(tuple(merged[i] for i in range(space.n)))
    return out


def random_stopping_time(space: FilteredSpace, rng: random.Random, start: int = 0) -> tuple:
    ks = [0] * space.n

    def walk(k, c):
        if k == space.horizon or (k >= start and rng.random() < 0.5):
            for i in space.cells(k)[c]:
                ks[i] = k
            return
        for ch in space.children(k, c):
            walk(k + 1, ch)

    for c in range(len(space.cells(0))):
        walk(0, c)
    return tuple(ks)


# -- F_tau ----------------------------------------------------------------------

@dataclass
class StoppedSigmaAlgebra:
    space: FilteredSpace
    cells: tuple   # sorted tuples of outcome indices

    @property
    def atoms(self) -> list:
        return [frozenset(self.space.omega[i] for i in cell) for cell in self.cells]

    def contains(self, members) -> bool:
        """True iff the event is a union of cells."""
        idx = {self.space.outcome_index(w) for w in members}
        return all(set(cell) <= idx or not (set(cell) & idx) for cell in self.cells)


def sigma_at(space: FilteredSpace, tau) -> StoppedSigmaAlgebra:
    return StoppedSigmaAlgebra(space, stopped_partition(space, _ks(space, tau)))


def in_stopped_sigma(space: FilteredSpace, tau, members) -> bool:
    """Definition test: B is in F_tau iff B n {tau <= t} is F_t-measurable for every t."""
    ks = _ks(space, tau)
    idx = {space.outcome_index(w) for w in members}
    for k in range(len(space.times)):
        sub = {i for i in idx if ks[i] <= k}
        for cell in space.cells(k):
            hit = [i in sub for i in cell]
            if any(hit) and not all(hit):
                return False
    return True


def _cells_max(space, cells, X) -> RandomVariable:
    out = list(X.values)
    for cell in cells:
        m = max(X.values[i] for i in cell)
        for i in cell:
            out[i] = m
    return RandomVariable(space, out)


def cond_esssup_at(space: FilteredSpace, tau, X: RandomVariable) -> RandomVariable:
    ks = _ks(space, tau)
    X._check(space)
    if X.dim is not None:
        raise ModelError("conditional esssup needs a scalar variable")
    out = _cells_max(space, stopped_partition(space, ks), X)
    for k in set(ks):
        ind = RandomVariable(space, [1 if kk == k else 0 for kk in ks])
        lhs = _cells_max(space, stopped_partition(space, ks), X * ind)
        rhs = cond_esssup(space, space.times[k], X) * ind
        assert lhs == rhs, "stopped esssup identity failed"
    return out


def stopped_value(M: AdaptedProcess, ks) -> RandomVariable:
    """M_tau as a random variable."""
    return RandomVariable(M.space, [M.slices[k].values[i] for i, k in enumerate(ks)])


def stopped_process(M: AdaptedProcess, ks) -> AdaptedProcess:
    """M^tau_t = M_{tau ^ t}."""
    n = len(M.space.times)
    return AdaptedProcess(M.space, [stopped_value(M, tuple(min(k, u) for k in ks)) for u in range(n)])


# -- maxingale verdicts ---------------------------------------------------------

@dataclass
class MaxingaleVerdict:
    holds: bool
    violation: Optional[tuple] = None   # (atom, u label, t label)


def _as_process(space, M) -> AdaptedProcess:
    if isinstance(M, AdaptedProcess):
        return M
    return AdaptedProcess(space, M)


def is_sub_maxingale(space: FilteredSpace, M) -> MaxingaleVerdict:
    """esssup_{F_u} M_t >= M_u for all grid pairs u <= t."""
    return _maxingale(space, _as_process(space, M), sub=True)


def is_super_maxingale(space: FilteredSpace, M) -> MaxingaleVerdict:
    """esssup_{F_u} M_t <= M_u for all grid pairs u <= t."""
    return _maxingale(space, _as_process(space, M), sub=False)


def _maxingale(space, M, sub):
    n = len(space.times)
    for u in range(n):
        for t in range(u, n):
            E = cond_esssup(space, space.times[u], M.slices[t])
            for c, cell in enumerate(space.cells(u)):
                i = cell[0]
                a, b = E.values[i], M.slices[u].values[i]
                if (a < b) if sub else (a > b):
                    return MaxingaleVerdict(False, (space.atom(u, c), space.times[u], space.times[t]))
    return MaxingaleVerdict(True)


def is_nonincreasing(M: AdaptedProcess) -> bool:
    return all(M.slices[k + 1].le(M.slices[k]) for k in range(len(M.slices) - 1))


def optional_inequality(space, M: AdaptedProcess, s_ks, t_ks) -> bool:
    """esssup_{F_S}(M_tau) >= M_{S ^ tau}."""
    lhs = _cells_max(space, stopped_partition(space, s_ks), stopped_value(M, t_ks))
    rhs = stopped_value(M, tuple(min(a, b) for a, b in zip(s_ks, t_ks)))
    return lhs.ge(rhs)


@dataclass
class StrongVerdict:
    holds: bool
    exhaustive: bool
    pairs_checked: int
    seed: Optional[int] = None
    violation: Optional[tuple] = None       # (S, tau) index tuples
    definition_holds: Optional[bool] = None  # stopped-process form, exhaustive mode only


def is_strong_sub_maxingale(space: FilteredSpace, M, budget: int = 10000,
                            seed: Optional[int] = None) -> StrongVerdict:
    """Checks esssup_{F_S}(M_tau) >= M_{S ^ tau} over pairs of stopping times.

    Exhaustive (and cross-checked against the stopped-process definition)
    when the number of pairs is within ``budget``; otherwise deterministic
    pairs plus ``budget`` seeded random pairs.
    """
    from .arbitrage import default_seed

    M = _as_process(space, M)
    n_tau = count_stopping_times(space)
    if n_tau * n_tau <= budget:
        taus = enumerate_stopping_times(space)
        checked = 0
        violation = None
        for s in taus:
            for t in taus:
                checked += 1
                if not optional_inequality(space, M, s, t):
                    violation = (s, t)
                    break
            if violation:
                break
        definition = all(is_sub_maxingale(space, stopped_process(M, t)).holds for t in taus)
        holds = violation is None
        assert holds == definition, "optional-time form and stopped-process form disagree"
        return StrongVerdict(holds, True, checked, violation=violation, definition_holds=definition)
    seed = default_seed() if seed is None else seed
    rng = random.Random(seed)
    n = len(space.times)
    pairs = [((a,) * space.n, (b,) * space.n) for a in range(n) for b in range(n)]
    pairs += [(random_stopping_time(space, rng), random_stopping_time(space, rng)) for _ in range(budget)]
    for checked, (s, t) in enumerate(pairs, 1):
        if not optional_inequality(space, M, s, t):
            return StrongVerdict(False, False, checked, seed, (s, t))
    return StrongVerdict(True, False, len(pairs), seed)


# -- stopping-time lemma suite -------------------------------------------------------

@dataclass
class LemmaReport:
    checks: dict = field(default_factory=dict)      # lemma name -> number of instances
    violations: list = field(default_factory=list)  # (lemma name, details)

    @property
    def ok(self) -> bool:
        return not self.violations

    def _tick(self, name, good, detail):
        self.checks[name] = self.checks.get(name, 0) + 1
        if not good:
            self.violations.append((name, detail))


def lemma_suite(space: FilteredSpace, M, X: Optional[RandomVariable] = None,
                limit: int = 2000) -> LemmaReport:
    """Exhaustive check of the stopping-time lemmas on one process.

    * stopped_bound: esssup_{F_{t_i}}(M_tau) >= M_{tau ^ t_i}       (sub-maxingale M)
    * stopped_identity: esssup_{F_tau}(X 1_{tau=t_i}) = esssup_{F_{t_i}}(X) 1_{tau=t_i}
    * optional_bound: esssup_{F_S}(M_tau) >= M_{tau ^ S}            (sub-maxingale M)
    * stopped_definition: optional-time form agrees with the stopped-process definition
    * f_tau:  the materialized F_tau equals the set-family definition
    """
    M = _as_process(space, M)
    rep = LemmaReport()
    taus = enumerate_stopping_times(space, limit=limit)
    sub = is_sub_maxingale(space, M).holds
    n = len(space.times)
    if X is None:
        X = M.slices[-1]
    for t in taus:
        Mt = stopped_value(M, t)
        for ti in range(n):
            if sub:
                lhs = cond_esssup(space, space.times[ti], Mt)
                rhs = stopped_value(M, tuple(min(k, ti) for k in t))
                rep._tick("stopped_bound", lhs.ge(rhs), (t, ti))
            ind = RandomVariable(space, [1 if k == ti else 0 for k in t])
            lhs = _cells_max(space, stopped_partition(space, t), X * ind)
            rhs = cond_esssup(space, space.times[ti], X) * ind
            rep._tick("stopped_identity", lhs == rhs, (t, ti))
        cells = stopped_partition(space, t)
        for cell in cells:
            rep._tick("f_tau", in_stopped_sigma(space, t, [space.omega[i] for i in cell]), (t, cell))
    all_pairs_ok = True
    for s in taus:
        for t in taus:
            good = optional_inequality(space, M, s, t)
            all_pairs_ok &= good
            if sub:
                rep._tick("optional_bound", good, (s, t))
    definition = all(is_sub_maxingale(space, stopped_process(M, t)).holds for t in taus)
    rep._tick("stopped_definition", definition == all_pairs_ok, (definition, all_pairs_ok))
    return rep


# -- dyadic refinement ----------------------------------------------------------

def refined_space(space: FilteredSpace, level: int) -> FilteredSpace:
    """Same outcomes on the grid t0 + (T - t0) j / 2^level, j = 0..2^level.

    The filtration at a new date is the one of the last original date before
    it.  Every original date must lie on the refined grid.
    """
    try:
        grid = [Fraction(t) for t in space.times]
    except (TypeError, ValueError):
        raise ModelError("dyadic refinement needs numeric time labels") from None
    t0, T = grid[0], grid[-1]
    if T == t0:
        raise ModelError("dyadic refinement needs a nondegenerate horizon")
    step = (T - t0) / 2 ** level
    new = [t0 + step * j for j in range(2 ** level + 1)]
    if not set(grid) <= set(new):
        raise ModelError(f"time grid does not embed into the dyadic grid of level {level}")
    parts = []
    for s in new:
        k = max(j for j, g in enumerate(grid) if g <= s)
        parts.append([[space.omega[i] for i in cell] for cell in space.cells(k)])
    return FilteredSpace(space.omega, new, parts, space.prob, space.terminal_singletons)


def dyadic_refine(space: FilteredSpace, tau, n: int, level: Optional[int] = None):
    """Discretize tau from above at level n on the refined space of ``level`` (>= n).

    tau_n = t0 + (T-t0)(i+1)/2^n on {t0 + (T-t0)i/2^n < tau <= t0 + (T-t0)(i+1)/2^n};
    tau = t0 is sent to the first dyadic date.  Returns (refined space,
    StoppingTime for tau_n, StoppingTime for tau on the refined space).
    """
    level = n if level is None else level
    if level < n:
        raise ModelError("refinement level must be at least n")
    ks = _ks(space, tau)
    fine = refined_space(space, level)
    t0 = Fraction(space.times[0])
    T = Fraction(space.times[-1])
    coarse_step = (T - t0) / 2 ** n
    labels = []
    for k in ks:
        x = Fraction(space.times[k])
        i = (x - t0) / coarse_step
        j = int(i) if i.denominator == 1 else int(i) + 1   # ceil
        j = max(j, 1)
        labels.append(t0 + coarse_step * j)
    tau_n = StoppingTime(fine, labels)
    tau_fine = StoppingTime(fine, [Fraction(space.times[k]) for k in ks])
    return fine, tau_n, tau_fine


@dataclass
class DyadicReport:
    levels: list
    values: list        # esssup_{F_{tau_n}}(X) per level
    target: RandomVariable
    monotone: bool
    bounded: bool
    reaches: bool


def dyadic_check(space: FilteredSpace, tau, X: RandomVariable, levels=(1, 2, 3)) -> DyadicReport:
    """esssup_{F_{tau_n}}(X) increases in n, stays below esssup_{F_tau}(X) and meets it."""
    levels = sorted(levels)
    top = levels[-1]
    vals = []
    prev_tau = None
    target = None
    for n in levels:
        fine, tau_n, tau_f = dyadic_refine(space, tau, n, level=top)
        Xf = RandomVariable(fine, X.values)
        if prev_tau is not None and any(a > b for a, b in zip(tau_n.indices, prev_tau)):
            raise AssertionError("dyadic approximations are not nonincreasing")
        if any(a < b for a, b in zip(tau_n.indices, tau_f.indices)):
            raise AssertionError("dyadic approximation lies below tau")
        prev_tau = tau_n.indices
        vals.append(cond_esssup_at(fine, tau_n, Xf))
        target = cond_esssup_at(fine, tau_f, Xf)
    monotone = all(vals[j].le(vals[j + 1]) for j in range(len(vals) - 1))
    bounded = all(v.le(target) for v in vals)
    return DyadicReport(list(levels), vals, target, monotone, bounded, vals[-1] == target)


# -- open-question experiment ---------------------------------------------------

@dataclass
class GapReport:
    trials: int
    sub_maxingales: int
    gaps: list
    seed: int


def strong_gap_experiment(depth: int = 2, trials: int = 200, seed: Optional[int] = None,
                          value_range: int = 3) -> GapReport:
    """Search random integer processes on a binary tree for sub-maxingales
    that fail the strong property.  No resolution is claimed."""
    from .arbitrage import default_seed
    from .trees import full_tree

    seed = default_seed() if seed is None else seed
    rng = random.Random(seed)
    space = full_tree([2] * depth)
    found = 0
    gaps = []
    for _ in range(trials):
        slices = []
        for k in range(len(space.times)):
            cellvals = [rng.randint(-value_range, value_range) for _ in space.cells(k)]
            slices.append([cellvals[space.cell_of(k)[i]] for i in range(space.n)])
        M = AdaptedProcess(space, slices)
        if not is_sub_maxingale(space, M).holds:
            continue
        found += 1
        v = is_strong_sub_maxingale(space, M, budget=10 ** 6)
        if not v.holds:
            gaps.append([list(map(str, s.values)) for s in M.slices])
    return GapReport(trials, found, gaps, seed)
