from fractions import Fraction
from itertools import chain, combinations

import pytest

from conftest import q1, q2
from provattr import (
    ContractViolation, DnfFormula, bnp, bnp_to_lifted, check_lifted,
    cofactor_partition, interchangeable_partition, is_saturated, lift, lift_and,
    lift_or,
)
from provattr.lifting import (
    ROAnd, ROOr, ROVar, ValueTerm, identity_bindings, is_read_once,
)
from provattr.lineage import eval_bnp_outcome, eval_dnf


def subsets(names):
    names = sorted(names)
    return chain.from_iterable(combinations(names, k) for k in range(len(names) + 1))


def classes(partition):
    return {frozenset(c) for c in partition}


def test_cofactor_partition_examples():
    assert classes(cofactor_partition(DnfFormula.parse("y1 y2 | y3 y2"))) == \
        {frozenset({"y1", "y3"}), frozenset({"y2"})}
    assert frozenset({"d1", "d2"}) in classes(cofactor_partition(q1()))
    assert classes(cofactor_partition(DnfFormula.parse("x"))) == {frozenset({"x"})}


def test_interchangeable_partition_examples():
    phi0 = DnfFormula.parse("x1 x2 x3 | x4 x5 x3")
    assert classes(interchangeable_partition(phi0)) == \
        {frozenset({"x1", "x2"}), frozenset({"x4", "x5"}), frozenset({"x3"})}
    assert classes(interchangeable_partition(DnfFormula.parse("x y | x z"))) == \
        {frozenset("x"), frozenset("y"), frozenset("z")}
    assert frozenset("xy") in classes(interchangeable_partition(DnfFormula.parse("x y u | x y w")))


def test_lift_or_example():
    phi = DnfFormula.parse("y1 y2 | y3 y2")
    clauses, b = lift_or(phi.clauses, identity_bindings(phi.vars), {"y1", "y3"})
    assert clauses == (frozenset({"(y1|y3)", "y2"}),)
    assert b["(y1|y3)"] == ROOr((ROVar("y1"), ROVar("y3")))


def test_lift_or_q1_steps():
    phi = q1()
    clauses, b = lift_or(phi.clauses, identity_bindings(phi.vars), {"d1", "d2"})
    assert len(clauses) == 5
    clauses, b = lift_or(clauses, b, {"a1", "a3"})
    assert len(clauses) == 3
    assert frozenset({"(d1|d2)", "(a1|a3)", "m3"}) in clauses


def test_lift_and_examples():
    phi0 = DnfFormula.parse("x1 x2 x3 | x4 x5 x3")
    clauses, b = lift_and(phi0.clauses, identity_bindings(phi0.vars), {"x1", "x2"})
    assert set(clauses) == {frozenset({"(x1&x2)", "x3"}), frozenset({"x4", "x5", "x3"})}
    assert b["(x1&x2)"] == ROAnd((ROVar("x1"), ROVar("x2")))
    phi = DnfFormula.parse("x y u | x y w")
    clauses, b = lift_and(phi.clauses, identity_bindings(phi.vars), {"x", "y"})
    lifted = lift(phi)
    for theta in subsets(phi.universe):
        assert lifted.inline_eval(theta) == eval_dnf(phi, theta)


def test_lift_rejects_bad_classes():
    phi = DnfFormula.parse("x y | x z")
    with pytest.raises(ContractViolation):
        lift_or(phi.clauses, identity_bindings(phi.vars), {"x", "y"})
    with pytest.raises(ContractViolation):
        lift_and(phi.clauses, identity_bindings(phi.vars), {"y", "z"})
    with pytest.raises(ContractViolation):
        lift_and(phi.clauses, identity_bindings(phi.vars), {"y"})


def test_lift_q1_matches_lifted_column():
    lf = lift(q1())
    assert set(lf.clauses) == {
        frozenset({"(d1|d2)", "(a1|a3)", "m3"}),
        frozenset({"(d1|d2)", "a2", "m3"}),
        frozenset({"(d1|d2)", "(a1|a3)", "m2"}),
    }
    assert lf.bindings["(d1|d2)"] == ROOr((ROVar("d1"), ROVar("d2")))
    assert is_saturated(lf)
    check_lifted(lf)


def test_lift_saturated_and_trivial_cases():
    phi2 = DnfFormula.parse("y4 y2")
    # a single clause fuses into one conjunction variable
    assert len(lift(phi2).clauses) == 1
    lf = lift(DnfFormula.parse("x | y"))
    assert lf.clauses == (frozenset({"(x|y)"}),)
    assert lf.bindings["(x|y)"] == ROOr((ROVar("x"), ROVar("y")))


def test_bnp_to_lifted_q2():
    lf = bnp_to_lifted(q2())
    check_lifted(lf)
    assert is_saturated(lf)
    assert len(lf.clauses) == 4
    values = {str(b) for b in lf.bindings.values() if isinstance(b, ValueTerm)}
    assert values == {"(a4 ∧ m1) ⊗ 176", "m2 ⊗ 322", "m3 ⊗ 377"}
    assert lf.bindings["(a1|a3)"] == ROOr((ROVar("a1"), ROVar("a3")))
    expr = q2()
    for theta in subsets(expr.universe):
        assert lf.inline_outcome(theta) == eval_bnp_outcome(expr, theta)


def test_bnp_to_lifted_small_cases():
    lf = bnp_to_lifted(bnp([("x", 5)], "max"), lifting=False)
    assert lf.clauses == (frozenset({"x", "$5"}),)
    assert lf.bindings["$5"] == ValueTerm(None, Fraction(5))
    same = bnp([("a b", 3), ("a b", 7)], "max")
    lf = bnp_to_lifted(same, lifting=False)
    assert set(lf.clauses) == {frozenset({"a", "b", "$3"}), frozenset({"a", "b", "$7"})}
    lifted = bnp_to_lifted(same)
    for theta in subsets(same.universe):
        assert lifted.inline_outcome(theta) == eval_bnp_outcome(same, theta)


def test_bnp_to_lifted_rejects_sum():
    with pytest.raises(ContractViolation):
        bnp_to_lifted(bnp([("x", 1)], "sum"))


def test_read_once_check():
    assert is_read_once(ROOr((ROVar("a"), ROAnd((ROVar("b"), ROVar("c"))))))
    assert not is_read_once(ROOr((ROVar("a"), ROVar("a"))))
