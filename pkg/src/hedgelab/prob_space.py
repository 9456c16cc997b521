"""Finite filtered probability spaces represented as event trees.

Every sigma-algebra on a finite outcome set is generated by a partition, so a
filtration is stored as one partition per time label.  Values are kept as
``fractions.Fraction`` so that equalities between prices, probabilities and
process values are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Mapping, Sequence


class ModelError(ValueError):
    """Raised on malformed inputs (unknown labels, broken invariants)."""


@total_ordering
class Infinite:
    """Signed infinity used for prices (``+inf`` / ``-inf``)."""

    __slots__ = ("sign",)

    def __init__(self, sign: int):
        self.sign = 1 if sign > 0 else -1

    def __neg__(self):
        return NEG_INF if self.sign > 0 else POS_INF

    def __eq__(self, other):
        return isinstance(other, Infinite) and other.sign == self.sign

    def __hash__(self):
        return hash(("inf", self.sign))

    def __lt__(self, other):
        if isinstance(other, Infinite):
            return self.sign < other.sign
        return self.sign < 0

    def __add__(self, other):
        if isinstance(other, Infinite) and other.sign != self.sign:
            raise ArithmeticError("+inf - inf is undefined")
        return self

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __repr__(self):
        return "+inf" if self.sign > 0 else "-inf"

    __str__ = __repr__


POS_INF = Infinite(1)
NEG_INF = Infinite(-1)


def is_finite(x) -> bool:
    return not isinstance(x, Infinite)


def as_fraction(x) -> Fraction:
    """Exact conversion; floats are refused because they carry binary noise."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ModelError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelError(f"not a rational: {x!r}") from exc
    raise ModelError(f"not an exact rational: {x!r}")


@dataclass(frozen=True)
class Atom:
    time: object
    members: frozenset

    def __contains__(self, omega):
        return omega in self.members

    def __repr__(self):
        inner = ",".join(str(m) for m in sorted(self.members, key=str))
        return f"Atom({self.time}: {{{inner}}})"


class FilteredSpace:
    """Finite outcome set, time grid, refining partitions and a probability.

    ``partitions`` holds, per time, the cells as iterables of outcome labels.
    The terminal partition must separate outcomes unless
    ``terminal_singletons=False``.
    """

    def __init__(self, omega: Sequence, times: Sequence, partitions: Sequence,
                 prob: Mapping | Sequence, terminal_singletons: bool = True):
        self.omega = tuple(omega)
        self.times = tuple(times)
        self.terminal_singletons = terminal_singletons
        if not self.omega:
            raise ModelError("omega must be nonempty")
        if len(set(self.omega)) != len(self.omega):
            raise ModelError("duplicate outcome labels")
        if not self.times:
            raise ModelError("at least one time is required")
        if len(set(self.times)) != len(self.times):
            raise ModelError("duplicate time labels")
        if len(partitions) != len(self.times):
            raise ModelError("one partition per time is required")
        self._oidx = {w: i for i, w in enumerate(self.omega)}
        self._tidx = {t: k for k, t in enumerate(self.times)}

        if isinstance(prob, Mapping):
            missing = [w for w in self.omega if w not in prob]
            if missing:
                raise ModelError(f"missing probability for outcomes {missing}")
            p = tuple(as_fraction(prob[w]) for w in self.omega)
        else:
            if len(prob) != len(self.omega):
                raise ModelError("probability vector length differs from omega")
            p = tuple(as_fraction(x) for x in prob)
        for w, x in zip(self.omega, p):
            if x <= 0:
                raise ModelError(f"probability of {w} must be positive, got {x}")
        if sum(p) != 1:
            raise ModelError(f"probabilities sum to {sum(p)} != 1")
        self.prob = p

        # cells[k]: tuple of cells, each a sorted tuple of outcome indices,
        # canonically ordered by their smallest member.
        self._cells = []
        self._cell_of = []
        for k, part in enumerate(partitions):
            seen = {}
            cells = []
            for cell in part:
                idx = []
                for w in cell:
                    if w not in self._oidx:
                        raise ModelError(f"unknown outcome {w!r} in partition at time {self.times[k]}")
                    i = self._oidx[w]
                    if i in seen:
                        raise ModelError(f"outcome {w!r} appears twice in partition at time {self.times[k]}")
                    seen[i] = True
                    idx.append(i)
                if not idx:
                    raise ModelError(f"empty cell in partition at time {self.times[k]}")
                cells.append(tuple(sorted(idx)))
            if len(seen) != len(self.omega):
                missing = [self.omega[i] for i in range(len(self.omega)) if i not in seen]
                raise ModelError(f"partition at time {self.times[k]} misses outcomes {missing}")
            cells.sort()
            cell_of = [0] * len(self.omega)
            for c, cell in enumerate(cells):
                for i in cell:
                    cell_of[i] = c
            self._cells.append(tuple(cells))
            self._cell_of.append(tuple(cell_of))

        for k in range(len(self.times) - 1):
            for cell in self._cells[k + 1]:
                parents = {self._cell_of[k][i] for i in cell}
                if len(parents) != 1:
                    names = [self.omega[i] for i in cell]
                    raise ModelError(
                        f"partition at time {self.times[k + 1]} does not refine time {self.times[k]}: "
                        f"atom {names} straddles {len(parents)} atoms")
        if terminal_singletons and any(len(c) != 1 for c in self._cells[-1]):
            raise ModelError("terminal partition must consist of singletons")

    # -- index helpers -------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.omega)

    @property
    def horizon(self) -> int:
        """Index of the last time."""
        return len(self.times) - 1

    def time_index(self, t) -> int:
        try:
            return self._tidx[t]
        except KeyError:
            pass
        # allow "1" to match 1 coming from command lines
        for label, k in self._tidx.items():
            if str(label) == str(t):
                return k
        raise ModelError(f"unknown time {t!r}")

    def outcome_index(self, w) -> int:
        try:
            return self._oidx[w]
        except KeyError:
            raise ModelError(f"unknown outcome {w!r}") from None

    def cells(self, k: int) -> tuple:
        """Cells (tuples of outcome indices) of the partition at time index k."""
        return self._cells[k]

    def cell_of(self, k: int) -> tuple:
        """cell_of(k)[i] is the cell number containing outcome i at time index k."""
        return self._cell_of[k]

    def children(self, k: int, c: int) -> list:
        """Cell numbers at time index k+1 contained in cell c at time k."""
        first = {}
        for i in self._cells[k][c]:
            first.setdefault(self._cell_of[k + 1][i], None)
        return sorted(first)

    def atom(self, k: int, c: int) -> Atom:
        return Atom(self.times[k], frozenset(self.omega[i] for i in self._cells[k][c]))

    def atoms(self, t) -> list:
        k = self.time_index(t)
        return [self.atom(k, c) for c in range(len(self._cells[k]))]

    def cell_prob(self, k: int, c: int) -> Fraction:
        return sum((self.prob[i] for i in self._cells[k][c]), Fraction(0))

    # -- random variables ------------------------------------------------
    def rv(self, values) -> "RandomVariable":
        """Build a random variable from a sequence aligned with omega or a mapping."""
        if isinstance(values, Mapping):
            vals = [values[w] for w in self.omega]
        else:
            vals = list(values)
        return RandomVariable(self, vals)

    def constant(self, c) -> "RandomVariable":
        return RandomVariable(self, [c] * self.n)

    def indicator(self, members: Iterable) -> "RandomVariable":
        members = set(members)
        for w in members:
            self.outcome_index(w)
        return RandomVariable(self, [1 if w in members else 0 for w in self.omega])

    def expectation(self, X: "RandomVariable") -> Fraction:
        X._check(self)
        return sum((p * x for p, x in zip(self.prob, X.values)), Fraction(0))

    # -- sub-models -------------------------------------------------------
    def restrict(self, t, atom_members: Iterable) -> "FilteredSpace":
        """The space conditioned on an atom at time t, with grid from t onward."""
        k = self.time_index(t)
        members = set(atom_members)
        k_cells = {self._cell_of[k][self.outcome_index(w)] for w in members}
        if len(k_cells) != 1 or len(self._cells[k][next(iter(k_cells))]) != len(members):
            raise ModelError(f"{sorted(members, key=str)} is not an atom at time {t}")
        omega = [w for w in self.omega if w in members]
        mass = sum(self.prob[self._oidx[w]] for w in omega)
        prob = [self.prob[self._oidx[w]] / mass for w in omega]
        parts = []
        for j in range(k, len(self.times)):
            parts.append([[self.omega[i] for i in cell] for cell in self._cells[j]
                          if self.omega[cell[0]] in members])
        return FilteredSpace(omega, self.times[k:], parts, prob, self.terminal_singletons)

    def __eq__(self, other):
        return (isinstance(other, FilteredSpace) and self.omega == other.omega
                and self.times == other.times and self._cells == other._cells
                and self.prob == other.prob)

    def __hash__(self):
        return hash((self.omega, self.times, tuple(self._cells)))

    def __repr__(self):
        return f"FilteredSpace(n={self.n}, times={list(self.times)})"


class RandomVariable:
    """Map from the outcomes of one space to rationals (or rational vectors).

    Scalar values are Fractions (or signed infinities for prices); vector
    values are tuples of Fractions of a common length.
    """

    __slots__ = ("space", "values")

    def __init__(self, space: FilteredSpace, values):
        vals = list(values)
        if len(vals) != space.n:
            raise ModelError(f"random variable has {len(vals)} values for {space.n} outcomes")
        conv = []
        dim = None
        for v in vals:
            if isinstance(v, Infinite):
                conv.append(v)
            elif isinstance(v, (tuple, list)):
                vec = tuple(as_fraction(x) for x in v)
                if dim is None:
                    dim = len(vec)
                elif dim != len(vec):
                    raise ModelError("vector random variable with ragged dimensions")
                conv.append(vec)
            else:
                conv.append(as_fraction(v))
        if dim is not None and not all(isinstance(v, tuple) for v in conv):
            raise ModelError("mixed scalar and vector values")
        self.space = space
        self.values = tuple(conv)

    @property
    def dim(self):
        """None for scalars, d for d-vectors."""
        v = self.values[0]
        return len(v) if isinstance(v, tuple) else None

    def _check(self, space):
        if space is not self.space and space.omega != self.space.omega:
            raise ModelError("random variable is keyed to a different space")

    def _other(self, other):
        if isinstance(other, RandomVariable):
            other._check(self.space)
            return other.values
        return (other,) * self.space.n

    def __getitem__(self, w):
        return self.values[self.space.outcome_index(w)]

    def as_dict(self) -> dict:
        return dict(zip(self.space.omega, self.values))

    def __add__(self, other):
        o = self._other(other)
        if self.dim is not None:
            return RandomVariable(self.space, [tuple(a + b for a, b in zip(x, y)) for x, y in zip(self.values, o)])
        return RandomVariable(self.space, [x + y for x, y in zip(self.values, o)])

    __radd__ = __add__

    def __neg__(self):
        if self.dim is not None:
            return RandomVariable(self.space, [tuple(-a for a in x) for x in self.values])
        return RandomVariable(self.space, [-x for x in self.values])

    def __sub__(self, other):
        if isinstance(other, RandomVariable):
            return self + (-other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._other(other)
        if self.dim is not None:
            return RandomVariable(self.space, [tuple(a * b for a in x) for x, b in zip(self.values, o)])
        return RandomVariable(self.space, [x * y for x, y in zip(self.values, o)])

    __rmul__ = __mul__

    def dot(self, other: "RandomVariable") -> "RandomVariable":
        o = self._other(other)
        return RandomVariable(self.space, [sum((a * b for a, b in zip(x, y)), Fraction(0))
                                           for x, y in zip(self.values, o)])

    def coord(self, j: int) -> "RandomVariable":
        return RandomVariable(self.space, [x[j] for x in self.values])

    def pos(self) -> "RandomVariable":
        return RandomVariable(self.space, [x if x > 0 else Fraction(0) for x in self.values])

    def cap(self, c=1) -> "RandomVariable":
        c = as_fraction(c)
        return RandomVariable(self.space, [x if x < c else c for x in self.values])

    def minimum(self, other) -> "RandomVariable":
        return RandomVariable(self.space, [min(x, y) for x, y in zip(self.values, self._other(other))])

    def maximum(self, other) -> "RandomVariable":
        return RandomVariable(self.space, [max(x, y) for x, y in zip(self.values, self._other(other))])

    def le(self, other) -> bool:
        return all(x <= y for x, y in zip(self.values, self._other(other)))

    def lt(self, other) -> bool:
        return all(x < y for x, y in zip(self.values, self._other(other)))

    def ge(self, other) -> bool:
        return all(x >= y for x, y in zip(self.values, self._other(other)))

    def is_zero(self) -> bool:
        if self.dim is not None:
            return all(not any(x) for x in self.values)
        return all(x == 0 for x in self.values)

    def __eq__(self, other):
        if not isinstance(other, RandomVariable):
            return NotImplemented
        return self.space.omega == other.space.omega and self.values == other.values

    def __hash__(self):
        return hash(self.values)

    def __repr__(self):
        return "RV(" + ", ".join(_fmt(v) for v in self.values) + ")"


def _fmt(v):
    if isinstance(v, tuple):
        return "(" + ", ".join(str(x) for x in v) + ")"
    return str(v)


class AdaptedProcess:
    """One random variable per time, each measurable for its time."""

    def __init__(self, space: FilteredSpace, values: Sequence):
        if len(values) != len(space.times):
            raise ModelError(f"process needs {len(space.times)} time slices, got {len(values)}")
        slices = []
        for k, v in enumerate(values):
            X = v if isinstance(v, RandomVariable) else RandomVariable(space, v)
            X._check(space)
            if not is_measurable(space, space.times[k], X):
                raise ModelError(f"process value at time {space.times[k]} is not measurable for that time")
            slices.append(X)
        self.space = space
        self.slices = tuple(slices)

    def at(self, t) -> RandomVariable:
        return self.slices[self.space.time_index(t)]

    def __getitem__(self, k: int) -> RandomVariable:
        return self.slices[k]

    def __len__(self):
        return len(self.slices)

    def __neg__(self):
        return AdaptedProcess(self.space, [-X for X in self.slices])

    @property
    def dim(self):
        return self.slices[0].dim


def atom_of(space: FilteredSpace, t, omega) -> Atom:
    k = space.time_index(t)
    i = space.outcome_index(omega)
    return space.atom(k, space.cell_of(k)[i])


def is_measurable(space: FilteredSpace, t, X: RandomVariable) -> bool:
    X._check(space)
    k = space.time_index(t)
    vals = X.values
    return all(all(vals[i] == vals[cell[0]] for i in cell) for cell in space.cells(k))


def is_stopping_time(space: FilteredSpace, tau: RandomVariable) -> bool:
    """tau holds time labels; true iff every {tau <= t} is F_t-measurable."""
    ks = stopping_indices(space, tau)
    for k in range(len(space.times)):
        for cell in space.cells(k):
            flags = {ks[i] <= k for i in cell}
            if len(flags) > 1:
                return False
    return True


def stopping_indices(space: FilteredSpace, tau) -> tuple:
    """Time indices of a time-valued random variable (labels or RandomVariable)."""
    raw = tau.values if isinstance(tau, RandomVariable) else tuple(tau)
    if len(raw) != space.n:
        raise ModelError("stopping time must have one value per outcome")
    out = []
    for v in raw:
        try:
            out.append(space.time_index(v))
        except ModelError:
            raise ModelError(f"stopping-time value {v!r} is not on the time grid") from None
    return tuple(out)


def time_rv(space: FilteredSpace, indices: Sequence[int]) -> RandomVariable:
    """Random variable holding time labels (as exact values when numeric)."""
    rv = object.__new__(RandomVariable)
    rv.space = space
    rv.values = tuple(space.times[k] for k in indices)
    return rv


def stopped_partition(space: FilteredSpace, ks: Sequence[int]) -> tuple:
    """Cells of F_tau for a stopping time given by time indices per outcome.

    The cell of omega is its atom at time tau(omega) intersected with
    {tau = tau(omega)}; cells are sorted tuples ordered by smallest member.
    """
    groups = {}
    for i, k in enumerate(ks):
        groups.setdefault((k, space.cell_of(k)[i]), []).append(i)
    return tuple(sorted(tuple(g) for g in groups.values()))


def is_measurable_cells(cells, X: RandomVariable) -> bool:
    vals = X.values
    return all(all(vals[i] == vals[cell[0]] for i in cell) for cell in cells)
