from fractions import Fraction

import pytest

from conftest import Q1_BANZHAF, q1, q2
from provattr import (
    Bottom, DnfFormula, LineageError, brute_banzhaf, brute_counts, brute_shapley,
    evaluate,
)


def test_banzhaf_examples():
    assert brute_banzhaf(DnfFormula.parse("x | y")) == {"x": 1, "y": 1}
    assert brute_banzhaf(q1()) == Q1_BANZHAF
    zero = DnfFormula((), frozenset({"x", "y"}))
    assert brute_banzhaf(zero) == {"x": 0, "y": 0}
    assert brute_banzhaf(q1(), "m3") == 24


def test_shapley_examples():
    half = Fraction(1, 2)
    assert brute_shapley(DnfFormula.parse("x | y")) == {"x": half, "y": half}
    assert brute_shapley(DnfFormula.parse("x y")) == {"x": half, "y": half}
    s = brute_shapley(q2())
    assert sum(s.values()) == evaluate(q2(), q2().universe)


def test_counts_examples():
    c = brute_counts(DnfFormula.parse("x | y"))
    assert c["modelCount"] == 3 and c["kCounts"] == [0, 2, 1]
    # p = 0.46875 at the root, over 2^7 valuations
    assert brute_counts(q1())["modelCount"] == 60
    out = brute_counts(q2())["outcomeCounts"]
    assert sum(out.values()) == 128
    assert out[Bottom] == 36 and out[Fraction(377)] == 56


def test_self_consistency():
    c = brute_counts(q1())
    assert sum(c["kCounts"]) == c["modelCount"]
    phi = q1()
    for x in phi.universe:
        hi = brute_counts(phi.substitute(x, True))["modelCount"]
        lo = brute_counts(phi.substitute(x, False))["modelCount"]
        # substituted formulas still range over x, which doubles both counts
        assert brute_banzhaf(phi, x) == (hi - lo) // 2


def test_cap_and_unknown_variable():
    with pytest.raises(LineageError):
        brute_banzhaf(q1(), cap=3)
    with pytest.raises(LineageError):
        brute_banzhaf(q1(), "nope")
