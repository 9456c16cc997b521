from fractions import Fraction as F

import pytest
from hypothesis import assume, given, settings, strategies as st

from hedgelab.cond_calc import cond_esssup
from hedgelab.prob_space import NEG_INF, POS_INF, FilteredSpace, ModelError, is_measurable
from hedgelab.topology import (ProcessSequenceSpec, SequenceSpec, converges, fatou_check, is_cauchy,
                               is_limit, pdist, pdist_hat, process_pdist)

MANY = settings(max_examples=1000, deadline=None)


# -- golden examples ----------------------------------------------------------------

def test_asymmetry(sp2):
    X = sp2.rv([0, 1, -2, 5])
    Y = X + 1
    assert pdist_hat(sp2, 1, X, Y) == 0 and pdist_hat(sp2, 1, Y, X) == 1
    assert pdist(sp2, X, X) == 0 and pdist_hat(sp2, 2, X, X) == 0


def test_atomwise_pdist_hat(sp2):
    assert pdist_hat(sp2, 1, sp2.rv([2, 0, 0, 0]), sp2.constant(0)) == F(1, 2)
    assert pdist(sp2, sp2.rv([2, 0, 0, 0]), sp2.constant(0)) == F(1, 4)


def test_constant_sequence(sp2):
    C = sp2.rv([1, 2, 3, 4])
    seq = SequenceSpec(sp2, [C])
    v = converges(sp2, 1, seq)
    assert v.convergent and v.limit == C
    assert is_limit(sp2, 1, seq, C - 5).is_limit
    assert is_limit(sp2, 1, seq, C.minimum(sp2.constant(2))).is_limit
    assert not is_limit(sp2, 1, seq, C + sp2.rv([0, 0, 0, F(1, 10)])).is_limit
    assert fatou_check(sp2, 1, seq, C).subsequence == (1, 1)
    assert is_cauchy(sp2, 1, seq).cauchy


def alternating(space):
    # (-1)^n indexed from n = 0
    return SequenceSpec(space, [space.constant(1), space.constant(-1)], "periodic", 2, first_index=0)


def test_alternating_sequence(sp2):
    seq = alternating(sp2)
    assert [seq.term(n).values[0] for n in range(5)] == [1, -1, 1, -1, 1]
    v = converges(sp2, 1, seq)
    assert v.convergent and v.limit == sp2.constant(-1)
    assert is_limit(sp2, 1, seq, sp2.constant(-1)).is_limit
    assert not is_limit(sp2, 1, seq, sp2.constant(0)).is_limit
    f = fatou_check(sp2, 1, seq, sp2.constant(-1))
    assert f.holds and f.subsequence[1] == 2
    c = is_cauchy(sp2, 1, seq)
    assert not c.cauchy and c.distance == 1
    n, m = c.pair
    assert n % 2 == 0 and m == n + 1
    # the negated sequence is the same periodic set of values, but -X = 1 is not its limit
    assert is_limit(sp2, 1, -seq, sp2.constant(-1)).is_limit
    assert not is_limit(sp2, 1, -seq, sp2.constant(1)).is_limit


def shrinking_space():
    return FilteredSpace(["c1", "c2", "c3", "c4"], [0, 1],
                         [[["c1", "c2", "c3", "c4"]], [["c1"], ["c2"], ["c3"], ["c4"]]],
                         [F(1, 2), F(1, 6), F(1, 12), F(1, 4)])


def shrinking_sequence(sp):
    # X_n = -1 on cells j >= n, so P(B_n) = 1/n along the prefix
    return SequenceSpec(sp, [sp.rv([-1 if j >= n else 0 for j in range(1, 5)]) for n in range(1, 5)])


def test_shrinking_support():
    sp = shrinking_space()
    seq = shrinking_sequence(sp)
    zero = sp.constant(0)
    assert [pdist(sp, zero, seq.term(n)) for n in range(1, 5)] == [1, F(1, 2), F(1, 3), F(1, 4)]
    assert all(pdist_hat(sp, 0, zero, seq.term(n)) == 1 for n in range(1, 5))
    assert not is_limit(sp, 0, seq, zero).is_limit
    for n0 in range(1, 5):
        Z = sp.rv([min(seq.term(n).values[i] for n in range(n0, 10)) for i in range(sp.n)])
        assert is_limit(sp, 0, seq, Z).is_limit
        assert fatou_check(sp, 0, seq, Z).holds


def test_divergent_monotone(sp2):
    seq = SequenceSpec(sp2, [sp2.constant(0)], "monotone", limit=["-inf", 0, 0, 0])
    v = converges(sp2, 1, seq)
    assert not v.convergent and v.violation == "w1"
    assert seq.term(4).values[0] == -3
    with pytest.raises(ModelError):
        is_limit(sp2, 1, seq, sp2.constant(-10))


def test_monotone_cauchy_and_limits(sp2):
    seq = SequenceSpec(sp2, [sp2.constant(1)], "monotone", limit=[0, 0, 0, 0])
    assert is_cauchy(sp2, 1, seq).cauchy
    assert is_limit(sp2, 1, seq, sp2.constant(0)).is_limit
    assert not is_limit(sp2, 1, seq, sp2.rv([F(1, 1000), 0, 0, 0])).is_limit
    up = SequenceSpec(sp2, [sp2.constant(1)], "monotone", limit=["+inf"] * 4)
    assert not is_cauchy(sp2, 1, up).cauchy
    assert is_limit(sp2, 1, up, sp2.constant(50)).is_limit


def test_process_pdist(sp2):
    X = [sp2.constant(0), sp2.constant(0)]
    assert process_pdist(sp2, 1, X, X) == 0
    Y = [sp2.constant(0), sp2.rv([2, 0, 0, 0])]
    # atom of mass 1/4 that is an atom of the conditioning sigma-field
    assert process_pdist(sp2, 2, Y, X) == F(1, 4)
    trivial = FilteredSpace(sp2.omega, [0, 1], [[list(sp2.omega)], [[w] for w in sp2.omega]], sp2.prob)
    Yt = [trivial.constant(0), trivial.rv([2, 0, 0, 0])]
    Xt = [trivial.constant(0)] * 2
    assert process_pdist(trivial, 0, Yt, Xt) == 1
    a, b = sp2.rv([3, 0, 1, 0]), sp2.rv([0, 1, 0, 0])
    assert process_pdist(sp2, 1, [a], [b]) == pdist_hat(sp2, 1, a, b)
    with pytest.raises(ModelError):
        process_pdist(sp2, 1, [a], [a, b])


def test_process_sequence_spec(sp2):
    a = SequenceSpec(sp2, [sp2.constant(0), sp2.constant(1)], "periodic", 2)
    b = SequenceSpec(sp2, [sp2.constant(2), sp2.constant(3)], "periodic", 2)
    ps = ProcessSequenceSpec([a, b])
    assert [X.values[0] for X in ps.term(2)] == [1, 3]
    with pytest.raises(ModelError):
        ProcessSequenceSpec([a, SequenceSpec(sp2, [sp2.constant(0)])])


# -- random 5-outcome spaces -----------------------------------------------------------

@st.composite
def spaces(draw):
    labels = [0, 1, 2, 3, 4]
    fine = draw(st.lists(st.integers(0, 4), min_size=5, max_size=5))     # F_1 block per outcome
    merge = draw(st.lists(st.integers(0, 1), min_size=5, max_size=5))    # F_0 block per F_1 block
    def blocks(key):
        out = {}
        for w in labels:
            out.setdefault(key(w), []).append(w)
        return list(out.values())
    p0 = blocks(lambda w: merge[fine[w]])
    p1 = blocks(lambda w: fine[w])
    p2 = [[w] for w in labels]
    weights = draw(st.lists(st.integers(1, 4), min_size=5, max_size=5))
    tot = sum(weights)
    return FilteredSpace(labels, [0, 1, 2], [p0, p1, p2], [F(x, tot) for x in weights])


vals = st.integers(-3, 3)


def rv(draw, sp):
    return sp.rv(draw(st.lists(vals, min_size=sp.n, max_size=sp.n)))


@st.composite
def sequences(draw, sp, tails=("constant", "periodic", "monotone"), infinite=True):
    tail = draw(st.sampled_from(tails))
    K = draw(st.integers(1, 4))
    prefix = [rv(draw, sp) for _ in range(K)]
    if tail == "constant":
        return SequenceSpec(sp, prefix)
    if tail == "periodic":
        return SequenceSpec(sp, prefix, "periodic", draw(st.integers(1, K)))
    lim = []
    for i in range(sp.n):
        x = prefix[-1].values[i]
        b = prefix[-2].values[i] if K > 1 else x
        opts = [F(draw(vals))]
        if infinite:
            opts += ["-inf", "+inf"]
        L = draw(st.sampled_from(opts))
        # keep the tail monotone in the direction of the last prefix step
        if b < x and (L == "-inf" or (L != "+inf" and L < x)):
            L = x
        if b > x and (L == "+inf" or (L != "-inf" and L > x)):
            L = x
        lim.append(L)
    return SequenceSpec(sp, prefix, "monotone", limit=lim)


@st.composite
def space_and_seq(draw, **kw):
    sp = draw(spaces())
    return sp, draw(sequences(sp, **kw))


@MANY
@given(spaces(), st.data())
def test_triangle_and_ordering(sp, data):
    X, Y, Z = (rv(data.draw, sp) for _ in range(3))
    t = data.draw(st.sampled_from([0, 1, 2]))
    assert pdist_hat(sp, t, X, Z) <= pdist_hat(sp, t, X, Y) + pdist_hat(sp, t, Y, Z)
    assert pdist(sp, X, Z) <= pdist(sp, X, Y) + pdist(sp, Y, Z)
    assert pdist(sp, X, Y) <= pdist_hat(sp, t, X, Y)
    assert 0 <= pdist_hat(sp, t, X, Y) <= 1
    assert pdist_hat(sp, 2, X, Y) == pdist(sp, X, Y)


def _brute_min(seq, extra):
    return [min(seq.at_position(j).values[i] for j in range(seq.K + extra)) for i in range(seq.space.n)]


@MANY
@given(space_and_seq())
def test_convergence_matches_pointwise_brute_force(data):
    sp, seq = data
    v = converges(sp, 1, seq)
    short, long_ = _brute_min(seq, 30), _brute_min(seq, 60)
    diverging = any(b < a - 10 for a, b in zip(short, long_))
    assert v.convergent == (not diverging)
    if v.convergent:
        for i in range(sp.n):
            assert v.limit.values[i] <= long_[i]
            assert long_[i] - v.limit.values[i] <= F(8, 2 ** 59)
        assert is_limit(sp, 1, seq, v.limit).is_limit


def _limit_candidate(data, sp, seq):
    low = converges(sp, 1, seq).limit
    mode = data.draw(st.integers(0, 2))
    if mode == 0:
        return low
    if mode == 1:
        return low - rv(data.draw, sp).pos()
    return low + rv(data.draw, sp)


def _alpha(draw, sp, t):
    k = sp.time_index(t)
    cof = sp.cell_of(k)
    per_cell = draw(st.lists(st.integers(0, 3), min_size=len(sp.cells(k)), max_size=len(sp.cells(k))))
    return sp.rv([per_cell[cof[i]] for i in range(sp.n)])


@MANY
@given(space_and_seq(), st.data())
def test_homogeneity_and_lower_sets(d, data):
    sp, seq = d
    assume(converges(sp, 1, seq).convergent)
    Z = _limit_candidate(data, sp, seq)
    ok = is_limit(sp, 1, seq, Z).is_limit
    alpha = _alpha(data.draw, sp, 1)
    assert is_measurable(sp, 1, alpha)
    if ok:
        W = Z - rv(data.draw, sp).pos()
        assert is_limit(sp, 1, seq, W).is_limit
        try:
            scaled = seq.scaled(alpha)
        except ModelError:
            return
        assert is_limit(sp, 1, scaled, Z * alpha).is_limit


@MANY
@given(spaces(), st.data())
def test_additivity(sp, data):
    a = data.draw(sequences(sp, infinite=False))
    b = data.draw(sequences(sp, infinite=False))
    try:
        s = a + b
    except ModelError:
        assume(False)
    Za, Zb = _limit_candidate(data, sp, a), _limit_candidate(data, sp, b)
    for n in range(6):
        assert s.term(n + 1) == a.term(n + 1) + b.term(n + 1)
    if is_limit(sp, 1, a, Za).is_limit and is_limit(sp, 1, b, Zb).is_limit:
        assert is_limit(sp, 1, s, Za + Zb).is_limit


@MANY
@given(space_and_seq(tails=("constant", "periodic")), st.data())
def test_esssup_continuity(d, data):
    sp, seq = d
    Z = _limit_candidate(data, sp, seq)
    if is_limit(sp, 1, seq, Z).is_limit:
        assert is_limit(sp, 1, seq.map_esssup(1), cond_esssup(sp, 1, Z)).is_limit


@MANY
@given(space_and_seq(tails=("constant", "periodic")), st.data())
def test_random_subsequences_keep_limits(d, data):
    sp, seq = d
    Z = _limit_candidate(data, sp, seq)
    shift = _alpha(data.draw, sp, 1)          # F_1-measurable integer shifts
    sub = seq.shifted(shift)
    for n in range(8):
        for i in range(sp.n):
            assert sub.at_position(n).values[i] == seq.at_position(n + int(shift.values[i])).values[i]
    if is_limit(sp, 1, seq, Z).is_limit:
        assert is_limit(sp, 1, sub, Z).is_limit
        f = fatou_check(sp, 1, seq, Z)
        assert f.holds


@MANY
@given(space_and_seq(tails=("monotone",), infinite=False), st.data())
def test_monotone_limit_set_is_lower_set_of_pointwise_limit(d, data):
    sp, seq = d
    L = sp.rv(list(seq.limit))
    W = L - rv(data.draw, sp).pos()
    assert is_limit(sp, 2, seq, W).is_limit
    bump = rv(data.draw, sp).pos()
    assert is_limit(sp, 2, seq, L + bump).is_limit == bump.is_zero()
    assert is_cauchy(sp, 1, seq).cauchy


@MANY
@given(space_and_seq(tails=("periodic",)))
def test_periodic_cauchy_rule(d):
    sp, seq = d
    block = seq.tail_block()
    c = is_cauchy(sp, 1, seq)
    assert c.cauchy == all(X == block[0] for X in block)
    if not c.cauchy:
        n, m = c.pair
        assert c.distance == pdist_hat(sp, 1, seq.term(n), seq.term(m)) > 0
