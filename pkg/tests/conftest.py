from fractions import Fraction as F

import pytest

from hedgelab.market import MarketModel, PortfolioMenu
from hedgelab.prob_space import FilteredSpace
from hedgelab.trees import binomial_model, full_tree


def two_atom_space():
    return FilteredSpace(["w1", "w2", "w3", "w4"], [1, 2],
                         [[["w1", "w2"], ["w3", "w4"]], [["w1"], ["w2"], ["w3"], ["w4"]]],
                         [F(1, 4)] * 4)


@pytest.fixture
def sp2():
    return two_atom_space()


@pytest.fixture
def menu2(sp2):
    return PortfolioMenu(sp2, {"V1": [0, 1, 2, 3], "V2": [-1, 2, 3, 4]}, 1)


@pytest.fixture
def binom():
    return binomial_model(1)


@pytest.fixture
def no_aip():
    sp = FilteredSpace(["a", "b"], [0, 1], [[["a", "b"]], [["a"], ["b"]]], [F(1, 2)] * 2)
    return MarketModel(sp, [[1, 1], [2, 3]])


@pytest.fixture
def tree3():
    return full_tree([2, 2, 2])


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
