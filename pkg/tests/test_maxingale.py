import itertools
import random
from fractions import Fraction as F

import pytest

from hedgelab.cond_calc import cond_esssup
from hedgelab.maxingale import (StoppingTime, cond_esssup_at, count_stopping_times, dyadic_check,
                                dyadic_refine, enumerate_stopping_times, in_stopped_sigma,
                                is_nonincreasing, is_strong_sub_maxingale, is_sub_maxingale,
                                is_super_maxingale, lemma_suite, sigma_at, strong_gap_experiment)
from hedgelab.prob_space import AdaptedProcess, FilteredSpace, ModelError
from hedgelab.trees import binomial_model, full_tree, tree_space


def names(sig):
    return sorted(sorted(a) for a in sig.atoms)


def test_sigma_at_examples():
    sp = binomial_model(2).space            # w00 (uu), w01, w10, w11 (dd)
    assert names(sigma_at(sp, [0] * 4)) == [sorted(sp.omega)]
    assert names(sigma_at(sp, [1] * 4)) == [["w00", "w01"], ["w10", "w11"]]
    first_up = StoppingTime(sp, [1, 1, 2, 2])
    assert names(sigma_at(sp, first_up)) == [["w00", "w01"], ["w10"], ["w11"]]
    assert names(sigma_at(sp, [2] * 4)) == [[w] for w in sorted(sp.omega)]
    with pytest.raises(ModelError):
        StoppingTime(sp, [1, 2, 2, 2])


def test_counts():
    assert count_stopping_times(full_tree([2, 2])) == 5
    assert count_stopping_times(full_tree([2, 2, 2])) == 26
    assert len(enumerate_stopping_times(full_tree([2, 2, 2]))) == 26
    assert count_stopping_times(full_tree([2, 2, 2, 2])) == 677


def test_f_tau_matches_definition_exhaustively(tree3):
    for tau in enumerate_stopping_times(tree3):
        sig = sigma_at(tree3, tau)
        for r in range(tree3.n + 1):
            for B in itertools.combinations(tree3.omega, r):
                assert sig.contains(B) == in_stopped_sigma(tree3, tau, B)


def _five_leaf_space():
    return tree_space({(): 2, (0,): 3, (1,): 2}, {(): [1, 2], (0,): [1, 1, 2]})


@pytest.mark.parametrize("space_fn", [lambda: full_tree([2, 2]), _five_leaf_space])
def test_esssup_at_is_minimal_dominator(space_fn):
    sp = space_fn()
    rng = random.Random(len(sp.omega))
    for tau in enumerate_stopping_times(sp):
        X = sp.rv([rng.randint(-2, 2) for _ in range(sp.n)])
        values = sorted(set(X.values))
        dominators = []
        for ys in itertools.product(values, repeat=sp.n):
            if any(y < x for y, x in zip(ys, X.values)):
                continue
            if all(in_stopped_sigma(sp, tau, [sp.omega[i] for i in range(sp.n) if ys[i] == v]) for v in set(ys)):
                dominators.append(ys)
        least = tuple(min(col) for col in zip(*dominators))
        assert least in dominators
        assert cond_esssup_at(sp, tau, X).values == least


def test_esssup_at_trivial_cases(tree3):
    X = tree3.rv(range(8))
    assert cond_esssup_at(tree3, [1] * 8, X) == cond_esssup(tree3, 1, X)
    Y = cond_esssup(tree3, 2, X)
    assert cond_esssup_at(tree3, [2] * 8, Y) == Y


def test_maxingale_examples(tree3):
    inc = AdaptedProcess(tree3, [tree3.constant(k) for k in range(4)])
    assert is_sub_maxingale(tree3, inc).holds
    v = is_super_maxingale(tree3, inc)
    assert not v.holds and not is_nonincreasing(inc)
    const = AdaptedProcess(tree3, [tree3.constant(2)] * 4)
    s = is_strong_sub_maxingale(tree3, const, budget=10 ** 6)
    assert s.holds and s.exhaustive and s.definition_holds


def _random_process(sp, rng):
    slices = []
    for k in range(len(sp.times)):
        per = [rng.randint(-3, 3) for _ in sp.cells(k)]
        slices.append(sp.rv([per[sp.cell_of(k)[i]] for i in range(sp.n)]))
    return AdaptedProcess(sp, slices)


def _make_sub(sp, M):
    slices = list(M.slices)
    for k in range(len(slices) - 2, -1, -1):
        slices[k] = slices[k].minimum(cond_esssup(sp, sp.times[k], slices[k + 1]))
    return AdaptedProcess(sp, slices)


@pytest.mark.parametrize("seed", range(30))
def test_super_maxingale_is_nonincreasing(seed):
    sp = full_tree([2, 3])
    M = _random_process(sp, random.Random(seed))
    assert is_super_maxingale(sp, M).holds == is_nonincreasing(M)


@pytest.mark.parametrize("seed", range(10))
def test_depth2_sub_maxingales_are_strong(seed):
    sp = full_tree([2, 2])
    M = _make_sub(sp, _random_process(sp, random.Random(seed)))
    assert is_sub_maxingale(sp, M).holds
    v = is_strong_sub_maxingale(sp, M, budget=10 ** 4)
    assert v.exhaustive and v.holds and v.definition_holds


@pytest.mark.parametrize("seed", range(4))
def test_lemma_suite_depth3(tree3, seed):
    rng = random.Random(seed)
    M = _make_sub(tree3, _random_process(tree3, rng))
    X = tree3.rv([rng.randint(-5, 5) for _ in range(tree3.n)])
    rep = lemma_suite(tree3, M, X)
    assert rep.ok, rep.violations[:3]
    assert rep.checks["optional_bound"] == 26 * 26 and rep.checks["stopped_identity"] == 26 * 4


def test_non_sub_maxingale_skips_sub_lemmas(tree3):
    dec = AdaptedProcess(tree3, [tree3.constant(-k) for k in range(4)])
    rep = lemma_suite(tree3, dec)
    assert rep.ok and "stopped_bound" not in rep.checks and rep.checks["stopped_definition"] == 1


def dyadic_space():
    return FilteredSpace(["a", "b", "c", "d"], [0, 1, 3, 4],
                         [[["a", "b", "c", "d"]], [["a", "b"], ["c", "d"]],
                          [["a"], ["b"], ["c", "d"]], [["a"], ["b"], ["c"], ["d"]]],
                         [F(1, 4)] * 4)


def test_dyadic_refine_examples():
    sp = dyadic_space()
    fine, tn, tf = dyadic_refine(sp, [4] * 4, 2)
    assert tn.labels == (4, 4, 4, 4)
    fine, tn, tf = dyadic_refine(sp, [1, 1, 3, 3], 2)
    assert tn.labels == tf.labels == (1, 1, 3, 3)
    fine, tn, tf = dyadic_refine(sp, [1, 1, 3, 3], 1, level=2)
    assert tn.labels == (2, 2, 4, 4)
    fine, tn, tf = dyadic_refine(sp, [0] * 4, 3)
    assert tn.labels == (F(1, 2),) * 4
    with pytest.raises(ModelError):
        dyadic_refine(sp, [1, 1, 3, 3], 1)


def test_dyadic_check():
    sp = dyadic_space()
    X = sp.rv([4, 1, 3, 2])
    rep = dyadic_check(sp, [1, 1, 3, 3], X, levels=(1, 2, 3))
    assert rep.monotone and rep.bounded and rep.reaches
    assert rep.values[0] != rep.target      # the coarsest level sees less information
    tree = full_tree([2, 2], times=[0, 1, 2])
    for tau in enumerate_stopping_times(tree):
        rep = dyadic_check(tree, tau, tree.rv([3, 1, 4, 1]))
        assert rep.monotone and rep.bounded and rep.reaches


def test_strong_gap_experiment_runs():
    rep = strong_gap_experiment(depth=2, trials=30, seed=1)
    assert rep.trials == 30 and rep.seed == 1 and rep.gaps == []
