import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from hedgelab.cond_calc import cond_essinf, cond_esssup, cond_support, in_convex_hull
from hedgelab.prob_space import FilteredSpace, ModelError
from hedgelab.trees import binomial_model, full_tree


def test_esssup_examples(sp2):
    assert cond_esssup(sp2, 1, sp2.rv([1, 2, 3, 4])) == sp2.rv([2, 2, 4, 4])
    X = sp2.rv([5, -1, 0, 7])
    assert cond_esssup(sp2, 2, X) == X
    h_minus_v2 = sp2.rv([1, 2, 3, 4]) - sp2.rv([-1, 2, 3, 4])
    assert h_minus_v2 == sp2.rv([2, 0, 0, 0])
    assert cond_esssup(sp2, 1, h_minus_v2) == 2 * sp2.indicator({"w1", "w2"})


def test_essinf_is_dual(sp2):
    X = sp2.rv([1, 2, 3, 4])
    assert cond_essinf(sp2, 1, X) == sp2.rv([1, 1, 3, 3])


def test_vector_input_rejected(sp2):
    with pytest.raises(ModelError):
        cond_esssup(sp2, 1, sp2.rv([(1, 2)] * 4))


def test_support_examples(sp2):
    m = binomial_model(1)
    sup = cond_support(m.space, 0, m.S[1])
    assert list(sup.values()) == [frozenset({(2,), (F(1, 2),)})]
    supp = cond_support(sp2, 1, sp2.rv([1, 2, 3, 4]))
    assert {frozenset(a.members): v for a, v in supp.items()} == {
        frozenset({"w1", "w2"}): {1, 2}, frozenset({"w3", "w4"}): {3, 4}}
    det = cond_support(sp2, 1, sp2.constant(3))
    assert all(len(v) == 1 for v in det.values())


def test_hull_examples():
    r = in_convex_hull(1, [F(1, 2), 2])
    assert r.inside and r.weights == (F(2, 3), F(1, 3))
    assert in_convex_hull((1, 2), [(0, 0), (1, 2), (3, 3)]).inside
    r = in_convex_hull(1, [2, 3])
    assert not r.inside
    assert [r.separator(x) for x in (1, 2, 3)] == [-1, 0, 1]   # x -> x - 2
    with pytest.raises(ModelError):
        in_convex_hull(1, [])


def test_degenerate_cloud():
    assert in_convex_hull((1, 1), [(1, 1), (1, 1)]).inside
    r = in_convex_hull((0, 0), [(1, 1), (1, 1)])
    assert not r.inside and r.separator((0, 0)) == -1 and r.separator((1, 1)) >= 0


def _solve(A, b):
    n = len(A)
    M = [list(r) + [v] for r, v in zip(A, b)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return None
        M[c], M[piv] = M[piv], M[c]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c] / M[c][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return [M[i][n] / M[i][i] for i in range(n)]


def caratheodory(point, cloud):
    """Brute force: some affinely independent subset of <= d+1 points holds the point."""
    d = len(point)
    for size in range(1, d + 2):
        for sub in itertools.combinations(cloud, size):
            # solve sum l_i p_i = x, sum l_i = 1 in least-squares-free way: pick size independent rows
            rows = [[p[j] for p in sub] for j in range(d)] + [[1] * size]
            rhs = list(point) + [1]
            for pick in itertools.combinations(range(len(rows)), size):
                lam = _solve([rows[r] for r in pick], [rhs[r] for r in pick])
                if lam is None or any(l < 0 for l in lam):
                    continue
                if all(sum(l * a for l, a in zip(lam, rows[r])) == rhs[r] for r in range(len(rows))):
                    return True
    return False


pts = st.tuples(st.integers(-3, 3), st.integers(-3, 3))


@settings(max_examples=300, deadline=None)
@given(pts, st.lists(pts, min_size=1, max_size=8))
def test_hull_matches_caratheodory(point, cloud):
    point = tuple(F(x) for x in point)
    cloud = [tuple(F(x) for x in p) for p in cloud]
    r = in_convex_hull(point, cloud)
    assert r.inside == caratheodory(point, cloud)
    if r.inside:
        assert sum(r.weights) == 1 and all(w >= 0 for w in r.weights)
        assert tuple(sum(w * p[j] for w, p in zip(r.weights, cloud)) for j in range(2)) == point
    else:
        assert r.separator(point) == -1 and all(r.separator(p) >= 0 for p in cloud)


@st.composite
def tree_rvs(draw):
    sp = full_tree(draw(st.lists(st.integers(1, 3), min_size=1, max_size=3)))
    v = st.lists(st.integers(-6, 6), min_size=sp.n, max_size=sp.n)
    return sp, sp.rv(draw(v)), sp.rv(draw(v))


@settings(max_examples=200, deadline=None)
@given(tree_rvs(), st.integers(0, 4))
def test_esssup_properties(data, a):
    sp, X, Y = data
    n = len(sp.times)
    for t in range(n):
        E = cond_esssup(sp, sp.times[t], X)
        assert E.ge(X)
        for u in range(t + 1):
            assert cond_esssup(sp, sp.times[u], E) == cond_esssup(sp, sp.times[u], X)
        alpha = cond_esssup(sp, sp.times[t], Y).pos() + a
        assert cond_esssup(sp, sp.times[t], alpha * X) == alpha * E
        lo = X.minimum(Y)
        assert cond_esssup(sp, sp.times[t], lo).le(cond_esssup(sp, sp.times[t], Y))
