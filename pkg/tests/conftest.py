import random
import sys

import pytest

from provattr import BnpExpression, DnfFormula, Monoid, bnp, canonicalize

sys.setrecursionlimit(max(sys.getrecursionlimit(), 10000))

Q1_TEXT = ("d1 a1 m3 | d1 a2 m3 | d1 a3 m3 | d1 a1 m2 | d1 a3 m2 | "
           "d2 a1 m3 | d2 a2 m3 | d2 a3 m3 | d2 a1 m2 | d2 a3 m2")
Q1_BANZHAF = {"d1": 20, "d2": 20, "a1": 12, "a3": 12, "a2": 6, "m2": 18, "m3": 24}


def q1():
    return DnfFormula.parse(Q1_TEXT)


def q2(monoid="max"):
    return bnp([("a1 m3 | a2 m3 | a3 m3", 377), ("a1 m2 | a3 m2", 322),
                ("a4 m1", 176)], monoid)


@pytest.fixture
def q1_phi():
    return q1()


@pytest.fixture
def q2_expr():
    return q2()


def random_dnf(rng, n_lo=4, n_hi=12, max_clauses=20, max_width=4):
    """Canonical positive DNF whose universe may include unused variables."""
    n = rng.randint(n_lo, n_hi)
    names = [f"x{i}" for i in range(n)]
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        clauses.append(frozenset(rng.sample(names, rng.randint(1, min(max_width, n)))))
    return canonicalize(DnfFormula(tuple(clauses), frozenset(names)))


def random_bnp(rng, monoid, max_vars=10, max_terms=6):
    n = rng.randint(2, max_vars)
    names = [f"x{i}" for i in range(n)]
    terms = []
    for _ in range(rng.randint(1, max_terms)):
        clauses = tuple(frozenset(rng.sample(names, rng.randint(1, min(3, n))))
                        for _ in range(rng.randint(1, 3)))
        value = 1 if monoid == "count" else rng.randint(1, 9)
        terms.append((DnfFormula(clauses), value))
    return BnpExpression(tuple(terms), Monoid.of(monoid), frozenset(names))


def boolean_corpus(size=500, seed=20240611):
    rng = random.Random(seed)
    return [random_dnf(rng) for _ in range(size)]


def aggregate_corpus(monoid, size=200, seed=777):
    rng = random.Random(f"{seed}-{monoid}")
    return [random_bnp(rng, monoid) for _ in range(size)]


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: (len(s.split(":")[0]), s)):
            terminalreporter.write_line(line)
