"""Price processes, simple strategies, portfolio values and portfolio menus."""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Mapping, Sequence

from .prob_space import (AdaptedProcess, FilteredSpace, ModelError, RandomVariable,
                         as_fraction, is_measurable, is_measurable_cells,
                         is_stopping_time, stopped_partition, stopping_indices)

_ZERO = Fraction(0)


def _vec(v, d) -> tuple:
    if isinstance(v, (tuple, list)):
        out = tuple(as_fraction(x) for x in v)
    else:
        out = (as_fraction(v),)
    if len(out) != d:
        raise ModelError(f"expected a {d}-vector, got {len(out)} entries")
    return out


class MarketModel:
    """A space plus a d-dimensional nonnegative adapted price process.

    ``prices`` is one slice per time; each slice gives per outcome either a
    scalar (d=1) or a list of d rationals.  The bond is the implicit numeraire.
    """

    def __init__(self, space: FilteredSpace, prices, d: int | None = None):
        slices = []
        for k, sl in enumerate(prices):
            if isinstance(sl, RandomVariable):
                vals = sl.values
            elif isinstance(sl, Mapping):
                vals = [sl[w] for w in space.omega]
            else:
                vals = list(sl)
            if len(vals) != space.n:
                raise ModelError(f"price slice at time {space.times[k] if k < len(space.times) else k} "
                                 f"has {len(vals)} values for {space.n} outcomes")
            if d is None:
                d = len(vals[0]) if isinstance(vals[0], (tuple, list)) else 1
            slices.append([_vec(v, d) for v in vals])
        if d is None:
            d = 0
        self.space = space
        self.d = d
        self.S = AdaptedProcess(space, [RandomVariable(space, sl) if d else _empty(space) for sl in slices])
        for k, X in enumerate(self.S.slices):
            for i, v in enumerate(X.values):
                if any(x < 0 for x in v):
                    raise ModelError(f"negative price at time {space.times[k]}, outcome {space.omega[i]}")

    def price(self, k: int, i: int) -> tuple:
        return self.S.slices[k].values[i]

    def node_price(self, k: int, c: int) -> tuple:
        return self.price(k, self.space.cells(k)[c][0])

    def child_increments(self, k: int, c: int) -> list:
        """[(child cell at k+1, S_{k+1}(child) - S_k(c))] in canonical order."""
        s0 = self.node_price(k, c)
        out = []
        for ch in self.space.children(k, c):
            s1 = self.node_price(k + 1, ch)
            out.append((ch, tuple(a - b for a, b in zip(s1, s0))))
        return out

    def restrict(self, t, atom_members) -> "MarketModel":
        sub = self.space.restrict(t, atom_members)
        k0 = self.space.time_index(t)
        keep = [self.space.outcome_index(w) for w in sub.omega]
        prices = [[self.S.slices[k].values[i] for i in keep] for k in range(k0, len(self.space.times))]
        return MarketModel(sub, prices, self.d)

    def __repr__(self):
        return f"MarketModel(d={self.d}, {self.space!r})"


def _empty(space):
    rv = object.__new__(RandomVariable)
    rv.space = space
    rv.values = ((),) * space.n
    return rv


class SimpleStrategy:
    """Positions held between revision times.

    ``revisions`` are stopping times, each either a tuple of time indices per
    outcome or a RandomVariable / list of time labels
    (tau_0 <= tau_1 <= ... pathwise, tau_0 constant); ``positions[i]`` is the
    d-vector held on (tau_i, tau_{i+1}], measurable for F_{tau_i}.  Equal
    consecutive revision times are allowed and contribute nothing.
    """

    def __init__(self, model: MarketModel, revisions: Sequence, positions: Sequence):
        space = model.space
        revs = [tuple(r) if _is_index_tuple(r) else stopping_indices(space, r) for r in revisions]
        if len(revs) < 1:
            raise ModelError("a strategy needs at least one revision time")
        if len(positions) != len(revs) - 1:
            raise ModelError("need one position per revision interval")
        if len(set(revs[0])) != 1:
            raise ModelError("the first revision time must be deterministic")
        for i, r in enumerate(revs):
            if any(k < 0 or k > space.horizon for k in r):
                raise ModelError(f"revision {i} leaves the time grid")
            tau = _index_rv(space, r)
            if not is_stopping_time(space, tau):
                raise ModelError(f"revision {i} is not a stopping time")
            if i and any(a < b for a, b in zip(r, revs[i - 1])):
                raise ModelError(f"revision {i} precedes revision {i - 1} on some path")
        pos = []
        for i, p in enumerate(positions):
            if isinstance(p, RandomVariable):
                vals = p.values
            elif isinstance(p, Mapping):
                vals = [p[w] for w in space.omega]
            elif isinstance(p, (list, tuple)) and len(p) == space.n and (
                    model.d != len(p) or isinstance(p[0], (tuple, list))):
                vals = list(p)
            else:
                vals = [p] * space.n
            vals = [_vec(v, model.d) for v in vals]
            X = RandomVariable(space, vals) if model.d else _empty(space)
            if not is_measurable_cells(stopped_partition(space, revs[i]), X):
                raise ModelError(f"position {i} is not measurable at its revision time")
            pos.append(X)
        self.model = model
        self.revisions = tuple(revs)
        self.positions = tuple(pos)

    @property
    def anchor(self) -> int:
        return self.revisions[0][0]

    # -- constructors --------------------------------------------------------
    @classmethod
    def deterministic(cls, model: MarketModel, times: Sequence, positions: Sequence):
        ks = [model.space.time_index(t) for t in times]
        return cls(model, [(k,) * model.space.n for k in ks], positions)

    @classmethod
    def at_stopping_times(cls, model: MarketModel, taus: Sequence, positions: Sequence):
        """``taus`` hold time labels per outcome."""
        return cls(model, [stopping_indices(model.space, list(t) if not isinstance(t, RandomVariable) else t)
                           for t in taus], positions)

    @classmethod
    def from_node_positions(cls, model: MarketModel, theta: Mapping, anchor: int = 0):
        """Revise at every grid time from ``anchor``; theta[(k, cell)] is the
        position held from time index k to k+1 (missing nodes hold zero)."""
        space = model.space
        N = space.horizon
        zero = (_ZERO,) * model.d
        revs = [(k,) * space.n for k in range(anchor, N + 1)]
        pos = []
        for k in range(anchor, N):
            cof = space.cell_of(k)
            pos.append([tuple(theta.get((k, cof[i]), zero)) for i in range(space.n)])
        return cls(model, revs, pos)

    @classmethod
    def zero(cls, model: MarketModel, anchor: int = 0):
        return cls.from_node_positions(model, {}, anchor)

    def scaled(self, alpha: RandomVariable) -> "SimpleStrategy":
        """Multiply every position by a nonnegative alpha measurable at the anchor."""
        space = self.model.space
        if not is_measurable(space, space.times[self.anchor], alpha):
            raise ModelError("scaling factor must be measurable at the anchor time")
        if any(a < 0 for a in alpha.values):
            raise ModelError("scaling factor must be nonnegative")
        pos = [p * alpha if self.model.d else p for p in self.positions]
        return SimpleStrategy(self.model, self.revisions, pos)

    def __repr__(self):
        return f"SimpleStrategy(revisions={len(self.revisions)}, anchor={self.anchor})"


def _is_index_tuple(r) -> bool:
    return isinstance(r, tuple) and all(type(x) is int for x in r)


def _index_rv(space, ks):
    rv = object.__new__(RandomVariable)
    rv.space = space
    rv.values = tuple(space.times[k] for k in ks)
    return rv


def portfolio_value(model: MarketModel, strat: SimpleStrategy, u) -> RandomVariable:
    """Pathwise sum of theta_{tau_{i-1}} . (S_{tau_i ^ u} - S_{tau_{i-1} ^ u})."""
    space = model.space
    ku = space.time_index(u)
    if ku < strat.anchor:
        raise ModelError(f"time {u} precedes the strategy's anchor {space.times[strat.anchor]}")
    out = []
    S = model.S.slices
    for i in range(space.n):
        total = _ZERO
        for j, pos in enumerate(strat.positions):
            a = min(strat.revisions[j][i], ku)
            b = min(strat.revisions[j + 1][i], ku)
            if a == b:
                continue
            th = pos.values[i]
            s1 = S[b].values[i]
            s0 = S[a].values[i]
            total += sum((x * (p - q) for x, p, q in zip(th, s1, s0)), _ZERO)
        out.append(total)
    return RandomVariable(space, out)


def value_path(model: MarketModel, strat: SimpleStrategy) -> list:
    """Portfolio values at every grid time from the anchor onward."""
    return [portfolio_value(model, strat, model.space.times[k])
            for k in range(strat.anchor, model.space.horizon + 1)]


def is_admissible(model: MarketModel, strat: SimpleStrategy, m) -> bool:
    m = as_fraction(m)
    if m < 0:
        raise ModelError("the floor parameter m must be nonnegative")
    return all(V.ge(-m) for V in value_path(model, strat))


# -- portfolio menus ---------------------------------------------------------

class PortfolioMenu:
    """Explicit finite set of terminal values reachable from zero capital at ``anchor_time``."""

    def __init__(self, space: FilteredSpace, entries, anchor_time):
        if isinstance(entries, Mapping):
            items = list(entries.items())
        else:
            items = [(f"V{j + 1}", e) for j, e in enumerate(entries)]
        conv = []
        for name, e in items:
            X = e if isinstance(e, RandomVariable) else space.rv(e)
            X._check(space)
            if X.dim is not None:
                raise ModelError(f"menu entry {name} must be scalar")
            conv.append((str(name), X))
        if len({n for n, _ in conv}) != len(conv):
            raise ModelError("duplicate menu entry names")
        self.space = space
        self.anchor_time = space.times[space.time_index(anchor_time)]
        self.names = tuple(n for n, _ in conv)
        self.entries = tuple(X for _, X in conv)

    @property
    def anchor_index(self) -> int:
        return self.space.time_index(self.anchor_time)

    def __len__(self):
        return len(self.entries)

    def entry(self, name) -> RandomVariable:
        if isinstance(name, int):
            return self.entries[name]
        try:
            return self.entries[self.names.index(str(name))]
        except ValueError:
            raise ModelError(f"unknown menu entry {name!r}") from None

    def with_entries(self, extra: Mapping) -> "PortfolioMenu":
        d = dict(zip(self.names, self.entries))
        d.update(extra)
        return PortfolioMenu(self.space, d, self.anchor_time)


class IdExtension:
    """Gluing of menu entries along the atoms of F_anchor."""

    def __init__(self, base: PortfolioMenu):
        self.base = base
        self.space = base.space
        self.k = base.anchor_index

    @property
    def atoms(self) -> list:
        return self.space.atoms(self.base.anchor_time)

    def _normalize(self, assignment) -> list:
        """Entry index per cell of F_anchor."""
        cells = self.space.cells(self.k)
        out = [None] * len(cells)
        if isinstance(assignment, Mapping):
            for key, entry in assignment.items():
                c = self._cell_index(key)
                out[c] = self._entry_index(entry)
        else:
            seq = list(assignment)
            if len(seq) != len(cells):
                raise ModelError(f"assignment has {len(seq)} entries for {len(cells)} atoms")
            out = [self._entry_index(e) for e in seq]
        for c, e in enumerate(out):
            if e is None:
                raise ModelError(f"atom {self.space.atom(self.k, c)} is not covered by the assignment")
        return out

    def _cell_index(self, key) -> int:
        if isinstance(key, int):
            return key
        members = key.members if hasattr(key, "members") else frozenset(key)
        for c in range(len(self.space.cells(self.k))):
            if self.space.atom(self.k, c).members == members:
                return c
        raise ModelError(f"{key!r} is not an atom at time {self.base.anchor_time}")

    def _entry_index(self, e) -> int:
        if isinstance(e, int):
            if not 0 <= e < len(self.base):
                raise ModelError(f"menu entry index {e} out of range")
            return e
        if str(e) in self.base.names:
            return self.base.names.index(str(e))
        raise ModelError(f"unknown menu entry {e!r}")

    def glue(self, assignment) -> RandomVariable:
        idx = self._normalize(assignment)
        cof = self.space.cell_of(self.k)
        vals = [self.base.entries[idx[cof[i]]].values[i] for i in range(self.space.n)]
        return RandomVariable(self.space, vals)

    def assignments(self):
        """Every assignment (tuple of entry indices per atom), lexicographic."""
        m = len(self.space.cells(self.k))
        return itertools.product(range(len(self.base)), repeat=m)

    def enumerate(self) -> list:
        """Distinct glued values in first-seen order with one witnessing assignment each."""
        seen = {}
        for a in self.assignments():
            V = self.glue(a)
            if V not in seen:
                seen[V] = a
        return list(seen.items())


def menu_id_entries(ext: IdExtension, assignment) -> RandomVariable:
    return ext.glue(assignment)
