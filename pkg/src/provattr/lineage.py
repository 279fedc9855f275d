"""Lineage types: positive DNF formulas, valuations, monoids and
Boolean-number-pair (BNP) expressions with their exact evaluation semantics.

Variables are plain strings. A clause is a frozenset of variable names, a
valuation is the frozenset of variables mapped to 1.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import LineageError

VarId = str
Clause = frozenset
Valuation = frozenset

# reserved for names minted by the lifting pass
RESERVED_CHARS = "|&()$"
NAME_RE = re.compile(r"^[A-Za-z0-9_.:\-]+$")


class _BottomType:
    """Outcome of a BNP valuation that satisfies no term."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Bottom"

    def __reduce__(self):
        return (_BottomType, ())


Bottom = _BottomType()
Outcome = Union[Fraction, _BottomType]


def outcome_value(o: Outcome) -> Fraction:
    """Real value of an outcome; Bottom counts as 0 for attribution."""
    return Fraction(0) if o is Bottom else o


class MonoidKind(enum.Enum):
    SUM = "sum"
    COUNT = "count"
    MAX = "max"
    MIN = "min"


@dataclass(frozen=True)
class Monoid:
    kind: MonoidKind

    @classmethod
    def of(cls, kind) -> "Monoid":
        if isinstance(kind, Monoid):
            return kind
        if isinstance(kind, MonoidKind):
            return cls(kind)
        try:
            return cls(MonoidKind(str(kind).lower()))
        except ValueError:
            raise LineageError(f"unknown monoid {kind!r}") from None

    @property
    def idempotent(self) -> bool:
        return self.kind in (MonoidKind.MAX, MonoidKind.MIN)

    @property
    def neutral(self) -> float:
        if self.kind is MonoidKind.MAX:
            return float("-inf")
        if self.kind is MonoidKind.MIN:
            return float("inf")
        return 0

    def combine(self, values: Iterable[Fraction]) -> Fraction:
        values = list(values)
        if self.kind is MonoidKind.MAX:
            return max(values)
        if self.kind is MonoidKind.MIN:
            return min(values)
        return sum(values, Fraction(0))

    def __str__(self):
        return self.kind.value.upper()


def check_name(name: str) -> str:
    if not isinstance(name, str) or not NAME_RE.match(name):
        raise LineageError(f"invalid variable name {name!r}")
    return name


def _clause_key(c: frozenset):
    return (len(c), sorted(c))


@dataclass(frozen=True)
class DnfFormula:
    """Positive DNF over named variables.

    ``universe`` lists every variable that receives an attribution value and
    may contain variables that appear in no clause.
    """

    clauses: tuple
    universe: frozenset = field(default=None)

    def __post_init__(self):
        clauses = tuple(frozenset(c) for c in self.clauses)
        appearing = frozenset().union(*clauses) if clauses else frozenset()
        universe = appearing if self.universe is None else frozenset(self.universe)
        missing = appearing - universe
        if missing:
            raise LineageError(
                f"clause variables not in universe: {sorted(missing)}")
        object.__setattr__(self, "clauses", clauses)
        object.__setattr__(self, "universe", universe)

    @classmethod
    def parse(cls, text: str, universe: Iterable[str] | None = None) -> "DnfFormula":
        """Parse ``"x y | y z"``: clauses split on ``|``, variables on
        whitespace, commas or ``&``."""
        clauses = []
        for chunk in text.split("|"):
            names = [n for n in re.split(r"[\s&,]+", chunk) if n]
            if names:
                clauses.append(frozenset(names))
        return cls(tuple(clauses), None if universe is None else frozenset(universe))

    @property
    def vars(self) -> frozenset:
        return frozenset().union(*self.clauses) if self.clauses else frozenset()

    def is_false(self) -> bool:
        return not self.clauses

    def is_true(self) -> bool:
        return any(not c for c in self.clauses)

    def substitute(self, var: str, value: bool) -> "DnfFormula":
        """``φ[var:=value]`` keeping the universe unchanged."""
        if value:
            clauses = tuple(c - {var} for c in self.clauses)
        else:
            clauses = tuple(c for c in self.clauses if var not in c)
        return DnfFormula(clauses, self.universe)

    def __str__(self):
        if not self.clauses:
            return "0"
        parts = []
        for c in sorted(self.clauses, key=_clause_key):
            parts.append("(" + " ∧ ".join(sorted(c)) + ")" if c else "1")
        return " ∨ ".join(parts)


def canonicalize(phi: DnfFormula) -> DnfFormula:
    """Deduplicate clauses, drop subsumed clauses and sort deterministically."""
    uniq = sorted(set(phi.clauses), key=_clause_key)
    if uniq and not uniq[0]:
        return DnfFormula((frozenset(),), phi.universe)
    kept: list[frozenset] = []
    # kept clauses indexed by their smallest variable: a subsumer of c is
    # filed under one of c's variables
    by_var: dict = {}
    for c in uniq:
        # uniq is ordered by size, so only earlier clauses can subsume c
        if not any(k <= c for x in c for k in by_var.get(x, ())):
            kept.append(c)
            by_var.setdefault(min(c), []).append(c)
    return DnfFormula(tuple(kept), phi.universe)


def _check_valuation(theta, universe) -> frozenset:
    theta = frozenset(theta)
    extra = theta - universe
    if extra:
        raise LineageError(f"valuation mentions unknown variables {sorted(extra)}")
    return theta


def eval_dnf(phi: DnfFormula, theta: Iterable[str]) -> bool:
    theta = _check_valuation(theta, phi.universe)
    return any(c <= theta for c in phi.clauses)


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # floats go through repr so 0.1 stays 1/10
        return Fraction(repr(value))
    try:
        return Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError):
        raise LineageError(f"not an exact numeric value: {value!r}") from None


@dataclass(frozen=True)
class BnpExpression:
    """Bag of (formula, value) pairs combined under a monoid.

    Every term formula is re-homed onto the shared universe.
    """

    terms: tuple
    monoid: Monoid
    universe: frozenset = field(default=None)

    def __post_init__(self):
        monoid = Monoid.of(self.monoid)
        terms = []
        for phi, value in self.terms:
            if not isinstance(phi, DnfFormula):
                phi = DnfFormula(tuple(phi))
            terms.append((phi, to_fraction(value)))
        appearing = frozenset().union(*(t[0].universe for t in terms)) if terms else frozenset()
        universe = appearing if self.universe is None else frozenset(self.universe)
        if not appearing <= universe:
            raise LineageError(
                f"term variables not in universe: {sorted(appearing - universe)}")
        terms = tuple((DnfFormula(phi.clauses, universe), v) for phi, v in terms)
        if monoid.kind is MonoidKind.COUNT and any(v != 1 for _, v in terms):
            raise LineageError("COUNT terms must all carry value 1")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "monoid", monoid)
        object.__setattr__(self, "universe", universe)

    @property
    def vars(self) -> frozenset:
        return frozenset().union(*(phi.vars for phi, _ in self.terms)) if self.terms else frozenset()

    def substitute(self, var: str, value: bool) -> "BnpExpression":
        return BnpExpression(
            tuple((phi.substitute(var, value), m) for phi, m in self.terms),
            self.monoid, self.universe)

    def boolean_part(self) -> DnfFormula:
        return DnfFormula(tuple(c for phi, _ in self.terms for c in phi.clauses),
                          self.universe)

    def __str__(self):
        op = f" +{self.monoid} "
        return op.join(f"[{phi}] ⊗ {m}" for phi, m in self.terms) or "⊥"


def eval_bnp_outcome(expr: BnpExpression, theta: Iterable[str]) -> Outcome:
    """Monoid-sum of satisfied term values, or ``Bottom`` if none is satisfied."""
    theta = _check_valuation(theta, expr.universe)
    sat = [m for phi, m in expr.terms if any(c <= theta for c in phi.clauses)]
    if not sat:
        return Bottom
    return expr.monoid.combine(sat)


def eval_bnp(expr: BnpExpression, theta: Iterable[str]) -> Fraction:
    return outcome_value(eval_bnp_outcome(expr, theta))


Lineage = Union[DnfFormula, BnpExpression]


def evaluate(psi: Lineage, theta: Iterable[str]) -> Fraction:
    """Query value of either lineage kind; Boolean formulas map to 0/1."""
    if isinstance(psi, DnfFormula):
        return Fraction(int(eval_dnf(psi, theta)))
    return eval_bnp(psi, theta)


def with_universe(psi: Lineage, universe: Iterable[str]) -> Lineage:
    universe = frozenset(universe)
    if isinstance(psi, DnfFormula):
        return DnfFormula(psi.clauses, universe)
    return BnpExpression(psi.terms, psi.monoid, universe)


def bnp(terms: Mapping | Iterable, monoid="max", universe=None) -> BnpExpression:
    """Convenience constructor: ``bnp([("a b | c", 3), ...], "max")``."""
    items = terms.items() if isinstance(terms, Mapping) else terms
    parsed = []
    for phi, value in items:
        if isinstance(phi, str):
            phi = DnfFormula.parse(phi)
        parsed.append((phi, value))
    return BnpExpression(tuple(parsed), Monoid.of(monoid),
                         None if universe is None else frozenset(universe))
