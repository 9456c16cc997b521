"""Pseudo-distances and convergence for finitely described sequences.

A :class:`SequenceSpec` is an explicit prefix X_0..X_{K-1} (positions) plus a
tail rule, which makes inf_n X_n, liminf and the behaviour of
alpha_n = esssup_{F_t}((Z - X_n)^+) exactly decidable:

* ``constant``  -- X_j = X_{K-1} for j >= K;
* ``periodic``  -- the last ``period`` prefix terms repeat forever;
* ``monotone``  -- X_{K-1+q} = L + (X_{K-1} - L) / 2^q for a finite limit L,
  X_{K-1} - q for L = -inf and X_{K-1} + q for L = +inf, per outcome.

Sequence index n maps to position n - first_index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .cond_calc import cond_esssup
from .prob_space import (NEG_INF, POS_INF, FilteredSpace, Infinite, ModelError,
                         RandomVariable, as_fraction, is_finite)

_ZERO = Fraction(0)
TAILS = ("constant", "periodic", "monotone")


def _lim_value(v):
    if isinstance(v, Infinite):
        return v
    if isinstance(v, str) and v.strip() in ("+inf", "inf", "-inf"):
        return NEG_INF if v.strip() == "-inf" else POS_INF
    return as_fraction(v)


class SequenceSpec:
    def __init__(self, space: FilteredSpace, prefix: Sequence, tail: str = "constant",
                 period: int = 1, limit=None, first_index: int = 1):
        if tail not in TAILS:
            raise ModelError(f"unknown tail rule {tail!r}")
        if not prefix:
            raise ModelError("a sequence needs a nonempty prefix")
        terms = []
        for X in prefix:
            X = X if isinstance(X, RandomVariable) else space.rv(X)
            X._check(space)
            if X.dim is not None or not all(is_finite(v) for v in X.values):
                raise ModelError("sequence terms must be finite scalars")
            terms.append(X)
        self.space = space
        self.prefix = tuple(terms)
        self.tail = tail
        self.first_index = first_index
        self.period = period if tail == "periodic" else 1
        if tail == "periodic" and not 1 <= period <= len(terms):
            raise ModelError(f"period {period} must lie between 1 and the prefix length {len(terms)}")
        self.limit = None
        if tail == "monotone":
            if limit is None:
                raise ModelError("a monotone tail needs its pointwise limit")
            vals = limit.values if isinstance(limit, RandomVariable) else list(limit)
            if len(vals) != space.n:
                raise ModelError("limit must have one value per outcome")
            self.limit = tuple(_lim_value(v) for v in vals)
            last = self.prefix[-1].values
            before = self.prefix[-2].values if len(self.prefix) > 1 else None
            for i, (x, L) in enumerate(zip(last, self.limit)):
                if before is None or L == x:
                    continue
                if L < x and before[i] < x:
                    raise ModelError(f"tail at {space.omega[i]} decreases but the prefix increases")
                if L > x and before[i] > x:
                    raise ModelError(f"tail at {space.omega[i]} increases but the prefix decreases")

    @property
    def K(self) -> int:
        return len(self.prefix)

    def __len__(self):
        return self.K

    # -- terms -----------------------------------------------------------------
    def at_position(self, j: int) -> RandomVariable:
        if j < 0:
            raise ModelError("negative sequence position")
        K = self.K
        if j < K:
            return self.prefix[j]
        if self.tail == "constant":
            return self.prefix[-1]
        if self.tail == "periodic":
            p = self.period
            return self.prefix[K - p + (j - K) % p]
        q = j - K + 1
        out = []
        for x, L in zip(self.prefix[-1].values, self.limit):
            if L == NEG_INF:
                out.append(x - q)
            elif L == POS_INF:
                out.append(x + q)
            else:
                out.append(L + (x - L) / 2 ** q)
        return RandomVariable(self.space, out)

    def term(self, n: int) -> RandomVariable:
        return self.at_position(n - self.first_index)

    def terms(self, count: int) -> list:
        return [self.at_position(j) for j in range(count)]

    # -- pointwise limits --------------------------------------------------------
    def inf(self) -> RandomVariable:
        vals = [min(X.values[i] for X in self.prefix) for i in range(self.space.n)]
        if self.tail == "monotone":
            vals = [min(v, L) for v, L in zip(vals, self.limit)]
        return RandomVariable(self.space, vals)

    def liminf(self) -> RandomVariable:
        if self.tail == "constant":
            return self.prefix[-1]
        if self.tail == "periodic":
            per = self.prefix[-self.period:]
            return RandomVariable(self.space, [min(X.values[i] for X in per) for i in range(self.space.n)])
        return RandomVariable(self.space, list(self.limit))

    def tail_block(self) -> list:
        """Terms that repeat forever (constant / periodic tails)."""
        if self.tail == "monotone":
            raise ModelError("monotone tails have no repeating block")
        return list(self.prefix[-self.period:])

    # -- algebra -------------------------------------------------------------------
    def padded(self, K: int) -> "SequenceSpec":
        """Same sequence with a prefix of length max(K, self.K)."""
        if K <= self.K:
            return self
        return SequenceSpec(self.space, self.terms(K), self.tail, self.period,
                            self.limit, self.first_index)

    def _spec(self, prefix, tail, period=1, limit=None):
        return SequenceSpec(self.space, prefix, tail, period, limit, self.first_index)

    def __neg__(self):
        lim = None if self.limit is None else [-L for L in self.limit]
        return self._spec([-X for X in self.prefix], self.tail, self.period, lim)

    def scaled(self, alpha: RandomVariable) -> "SequenceSpec":
        """alpha * X_n for a nonnegative alpha (measurability is the caller's business)."""
        if any(a < 0 for a in alpha.values):
            raise ModelError("scaling factor must be nonnegative")
        lim = None
        if self.limit is not None:
            lim = []
            for a, L in zip(alpha.values, self.limit):
                if is_finite(L):
                    lim.append(a * L)
                elif a == 0:
                    lim.append(_ZERO)
                elif a == 1:
                    lim.append(L)
                else:
                    raise ModelError("scaling an infinite monotone tail by a factor other than 0 or 1")
            pre = [X * alpha for X in self.prefix]
            # alpha = 0 turns an infinite tail into the constant 0 sequence
            return self._spec(pre, "monotone", limit=lim)
        return self._spec([X * alpha for X in self.prefix], self.tail, self.period)

    def __add__(self, other: "SequenceSpec") -> "SequenceSpec":
        if self.first_index != other.first_index:
            raise ModelError("sequences use different first indices")
        a, b = self, other
        if a.tail == "monotone" or b.tail == "monotone":
            if "periodic" in (a.tail, b.tail):
                raise ModelError("periodic plus monotone tails are not representable")
            K = max(a.K, b.K)
            a, b = a.padded(K), b.padded(K)
            la = a.limit if a.tail == "monotone" else a.prefix[-1].values
            lb = b.limit if b.tail == "monotone" else b.prefix[-1].values
            lim = []
            one_constant = "constant" in (a.tail, b.tail)
            for x, y in zip(la, lb):
                if (is_finite(x) and is_finite(y)) or one_constant:
                    lim.append(x + y)
                else:
                    raise ModelError("sum of two infinite monotone tails is not representable")
            return self._spec([X + Y for X, Y in zip(a.prefix, b.prefix)], "monotone", limit=lim)
        P = a.period * b.period // math.gcd(a.period, b.period)
        K = max(a.K, b.K) + (P if P > 1 else 0)
        a, b = a.padded(K), b.padded(K)
        pre = [X + Y for X, Y in zip(a.prefix, b.prefix)]
        if P == 1:
            return self._spec(pre, "constant")
        return self._spec(pre, "periodic", P)

    def shifted(self, shift: RandomVariable) -> "SequenceSpec":
        """Random subsequence n_k(omega) = k + shift(omega) with integer shift >= 0."""
        sh = []
        for s in shift.values:
            if s < 0 or s.denominator != 1:
                raise ModelError("shifts must be nonnegative integers")
            sh.append(int(s))
        pre = []
        for j in range(self.K):
            pre.append(RandomVariable(self.space, [self.at_position(j + s).values[i] for i, s in enumerate(sh)]))
        return self._spec(pre, self.tail, self.period, self.limit)

    def map_esssup(self, t) -> "SequenceSpec":
        if self.tail == "monotone":
            raise ModelError("esssup of a monotone tail is outside the representable fragment")
        return self._spec([cond_esssup(self.space, t, X) for X in self.prefix], self.tail, self.period)

    def __repr__(self):
        return f"SequenceSpec(K={self.K}, tail={self.tail}, period={self.period})"


# -- pseudo-distances -------------------------------------------------------------

def pdist(space: FilteredSpace, X: RandomVariable, Y: RandomVariable) -> Fraction:
    """E[(X - Y)^+ ^ 1]."""
    return space.expectation((X - Y).pos().cap(1))


def pdist_hat(space: FilteredSpace, t, X: RandomVariable, Y: RandomVariable) -> Fraction:
    """E[esssup_{F_t}(X - Y)^+ ^ 1]."""
    return space.expectation(cond_esssup(space, t, (X - Y).pos()).cap(1))


def process_pdist(space: FilteredSpace, t, X: Sequence, Y: Sequence) -> Fraction:
    """E[max_u esssup_{F_t}(X_u - Y_u)^+ ^ 1] over the shared grid."""
    X, Y = list(X), list(Y)
    if len(X) != len(Y):
        raise ModelError(f"processes live on different grids ({len(X)} vs {len(Y)} dates)")
    if not X:
        raise ModelError("empty process")
    top = None
    for a, b in zip(X, Y):
        g = cond_esssup(space, t, (a - b).pos())
        top = g if top is None else top.maximum(g)
    return space.expectation(top.cap(1))


class ProcessSequenceSpec:
    """One SequenceSpec per grid date sharing the index n."""

    def __init__(self, components: Sequence):
        comps = list(components)
        if not comps:
            raise ModelError("empty process sequence")
        K, tail = comps[0].K, comps[0].tail
        for c in comps:
            if c.K != K or c.tail != tail or c.period != comps[0].period:
                raise ModelError("process components must share prefix length and tail rule")
        self.components = comps

    def term(self, n: int) -> list:
        return [c.term(n) for c in self.components]


# -- convergence ---------------------------------------------------------------

@dataclass
class ConvergenceVerdict:
    convergent: bool
    limit: Optional[RandomVariable] = None   # canonical limit inf_n X_n
    violation: Optional[object] = None       # outcome where inf = -inf


def converges(space: FilteredSpace, t, seq: SequenceSpec) -> ConvergenceVerdict:
    space.time_index(t)
    low = seq.inf()
    for w, v in zip(space.omega, low.values):
        if v == NEG_INF:
            return ConvergenceVerdict(False, violation=w)
    return ConvergenceVerdict(True, low)


@dataclass
class AlphaWitness:
    prefix: list          # alpha_j for prefix positions
    tail: str
    block: list           # repeating alphas (constant / periodic)
    limit: Optional[RandomVariable] = None   # limit of alpha (monotone)


@dataclass
class LimitVerdict:
    is_limit: bool
    alpha: AlphaWitness


def _alpha(space, t, Z, X):
    return cond_esssup(space, t, (Z - X).pos())


def is_limit(space: FilteredSpace, t, seq: SequenceSpec, Z: RandomVariable) -> LimitVerdict:
    """Decide alpha_n = esssup_{F_t}((Z - X_n)^+) -> 0 in probability."""
    conv = converges(space, t, seq)
    if not conv.convergent:
        raise ModelError(f"sequence does not converge: inf_n X_n = -inf at {conv.violation} "
                         "(a sequence converges iff its infimum is finite)")
    pre = [_alpha(space, t, Z, X) for X in seq.prefix]
    if seq.tail != "monotone":
        block = pre[-seq.period:]
        ok = all(a.is_zero() for a in block)
        return LimitVerdict(ok, AlphaWitness(pre, seq.tail, block))
    # monotone tail: alpha_n -> esssup_{F_t}((Z - L)^+) pointwise, with +inf limits contributing 0
    gap = []
    for z, L in zip(Z.values, seq.limit):
        gap.append(_ZERO if L == POS_INF else max(z - L, _ZERO))
    lim = cond_esssup(space, t, RandomVariable(space, gap))
    return LimitVerdict(lim.is_zero(), AlphaWitness(pre, "monotone", [], lim))


@dataclass
class FatouVerdict:
    holds: bool
    subsequence: Optional[tuple] = None   # (first sequence index, step)


def fatou_check(space: FilteredSpace, t, seq: SequenceSpec, Z: RandomVariable) -> FatouVerdict:
    """Find a tail-aligned subsequence with Z <= liminf of the subsequence."""
    if not is_limit(space, t, seq, Z).is_limit:
        raise ModelError("Z is not a limit of the sequence")
    cands = []
    if seq.tail == "periodic":
        p = seq.period
        for j0 in range(seq.K - p, seq.K):
            cands.append((j0 + seq.first_index, p, seq.at_position(j0)))
    cands.append((seq.first_index, 1, seq.liminf()))
    for n0, step, low in cands:
        if Z.le(low):
            return FatouVerdict(True, (n0, step))
    return FatouVerdict(False)


@dataclass
class CauchyVerdict:
    cauchy: bool
    pair: Optional[tuple] = None          # (n, m) with d(X_n, X_m) bounded away from 0
    distance: Optional[Fraction] = None


def is_cauchy(space: FilteredSpace, t, seq: SequenceSpec) -> CauchyVerdict:
    if seq.tail == "constant":
        return CauchyVerdict(True)
    if seq.tail == "monotone":
        return CauchyVerdict(all(is_finite(L) for L in seq.limit))
    block = seq.tail_block()
    if all(X == block[0] for X in block):
        return CauchyVerdict(True)
    best = None
    base = seq.K - seq.period
    for a in range(len(block)):
        for b in range(len(block)):
            if a != b:
                dist = pdist_hat(space, t, block[a], block[b])
                if best is None or dist > best[2]:
                    best = (base + a + seq.first_index, base + b + seq.first_index, dist)
    return CauchyVerdict(False, best[:2], best[2])
