"""Lifting: rewrite DNF lineage into a saturated lifted formula.

Cofactor-equivalent variables (same set of residual clauses) are replaced by
a fresh variable bound to their disjunction, interchangeable variables (same
clause membership) by a fresh variable bound to their conjunction. Fresh
names serialize the binding, e.g. ``(d1|d2)`` or ``(a2&m3)``, so a name
uniquely identifies what it stands for within an instance.

For MIN/MAX lineage each distinct value ``m`` becomes a value variable
``$m``; clauses carry exactly one value variable, and lifting may fuse a
value with its guard, ``(m3&$377) -> m3 ⊗ 377``.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import ContractViolation, LineageError
from .lineage import Bottom, BnpExpression, DnfFormula, canonicalize

VALUE_PREFIX = "$"


# -- read-once formulas -----------------------------------------------------

@dataclass(frozen=True)
class ROVar:
    name: str

    @property
    def vars(self) -> frozenset:
        return frozenset((self.name,))

    def evaluate(self, theta) -> bool:
        return self.name in theta

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class ROOr:
    children: tuple

    @property
    def vars(self) -> frozenset:
        return frozenset().union(*(c.vars for c in self.children))

    def evaluate(self, theta) -> bool:
        return any(c.evaluate(theta) for c in self.children)

    def __str__(self):
        return "(" + " ∨ ".join(map(str, self.children)) + ")"


@dataclass(frozen=True)
class ROAnd:
    children: tuple

    @property
    def vars(self) -> frozenset:
        return frozenset().union(*(c.vars for c in self.children))

    def evaluate(self, theta) -> bool:
        return all(c.evaluate(theta) for c in self.children)

    def __str__(self):
        return "(" + " ∧ ".join(map(str, self.children)) + ")"


ReadOnceFormula = Union[ROVar, ROOr, ROAnd]


def ro_or(parts: Iterable[ReadOnceFormula]) -> ReadOnceFormula:
    flat = []
    for p in parts:
        flat.extend(p.children if isinstance(p, ROOr) else (p,))
    return flat[0] if len(flat) == 1 else ROOr(tuple(flat))


def ro_and(parts: Iterable[ReadOnceFormula]) -> ReadOnceFormula:
    flat = []
    for p in parts:
        flat.extend(p.children if isinstance(p, ROAnd) else (p,))
    return flat[0] if len(flat) == 1 else ROAnd(tuple(flat))


def is_read_once(f: ReadOnceFormula) -> bool:
    seen: set = set()

    def walk(g) -> bool:
        if isinstance(g, ROVar):
            if g.name in seen:
                return False
            seen.add(g.name)
            return True
        return all(walk(c) for c in g.children)

    return walk(f)


@dataclass(frozen=True)
class ValueTerm:
    """``guard ⊗ value``; a ``None`` guard is the constant true."""

    guard: ReadOnceFormula | None
    value: Fraction

    @property
    def vars(self) -> frozenset:
        return frozenset() if self.guard is None else self.guard.vars

    def __str__(self):
        return f"{self.value}" if self.guard is None else f"{self.guard} ⊗ {self.value}"


Binding = Union[ReadOnceFormula, ValueTerm]


def value_var_name(value: Fraction) -> str:
    return f"{VALUE_PREFIX}{value}"


# -- lifted formulas --------------------------------------------------------

@dataclass(frozen=True)
class LiftedFormula:
    """A DNF over fresh and original variables plus the binding of each."""

    clauses: tuple
    bindings: Mapping[str, Binding]

    @property
    def vars(self) -> frozenset:
        return frozenset().union(*self.clauses) if self.clauses else frozenset()

    @property
    def is_aggregate(self) -> bool:
        return any(isinstance(self.bindings[v], ValueTerm) for v in self.vars)

    def original_vars(self) -> frozenset:
        return frozenset().union(*(self.bindings[v].vars for v in self.vars)) \
            if self.clauses else frozenset()

    def inline_eval(self, theta) -> bool:
        """Boolean value of the inlined formula (guards only for value vars)."""
        return any(all(_binding_true(self.bindings[v], theta) for v in c)
                   for c in self.clauses)

    def inline_outcome(self, theta, combine=max):
        """Aggregate outcome of the inlined expression, or ``Bottom``."""
        out = []
        for c in self.clauses:
            if all(_binding_true(self.bindings[v], theta) for v in c):
                vals = [self.bindings[v].value for v in c
                        if isinstance(self.bindings[v], ValueTerm)]
                out.extend(vals)
        return combine(out) if out else Bottom

    def __str__(self):
        if not self.clauses:
            return "0"
        return " ∨ ".join("(" + " ∧ ".join(sorted(c)) + ")" if c else "1"
                          for c in self.clauses)


def _binding_true(b: Binding, theta) -> bool:
    if isinstance(b, ValueTerm):
        return b.guard is None or b.guard.evaluate(theta)
    return b.evaluate(theta)


def identity_bindings(names: Iterable[str]) -> dict:
    return {v: ROVar(v) for v in names}


def _canon(clauses: Iterable[frozenset]) -> tuple:
    return canonicalize(DnfFormula(tuple(clauses))).clauses


def _cofactors(clauses) -> dict:
    residual = defaultdict(set)
    for c in clauses:
        for x in c:
            residual[x].add(c - {x})
    return {x: frozenset(r) for x, r in residual.items()}


def _memberships(clauses) -> dict:
    member = defaultdict(list)
    for i, c in enumerate(clauses):
        for x in c:
            member[x].append(i)
    return {x: tuple(ix) for x, ix in member.items()}


def _kind(bindings, x):
    """Variables may only be merged with variables of the same kind."""
    b = bindings.get(x) if bindings is not None else None
    if isinstance(b, ValueTerm):
        return ("value", b.value)
    return ("bool",)


def _group(keys: dict) -> list:
    # dict lookup hashes the key and falls back to full equality on collision
    groups = defaultdict(list)
    for x in sorted(keys):
        groups[keys[x]].append(x)
    return sorted((frozenset(g) for g in groups.values()), key=lambda s: sorted(s))


def cofactor_partition(phi, bindings: Mapping | None = None) -> list:
    """Maximal classes of variables sharing the same cofactor.

    ``phi`` is a :class:`DnfFormula` or a clause collection. Value variables
    are only grouped with value variables carrying the same value.
    """
    clauses = phi.clauses if hasattr(phi, "clauses") else tuple(phi)
    cof = _cofactors(clauses)
    return _group({x: (k, _kind(bindings, x)) for x, k in cof.items()})


def interchangeable_partition(phi, bindings: Mapping | None = None) -> list:
    """Maximal classes of variables occurring in exactly the same clauses."""
    clauses = phi.clauses if hasattr(phi, "clauses") else tuple(phi)
    return _group(_memberships(clauses))


def _fresh_name(members, sep: str) -> str:
    return "(" + sep.join(sorted(members)) + ")"


def _or_binding(parts: list) -> Binding:
    if isinstance(parts[0], ValueTerm):
        values = {p.value for p in parts}
        if len(values) != 1 or not all(isinstance(p, ValueTerm) for p in parts):
            raise ContractViolation("cannot OR-lift value variables with distinct values")
        if any(p.guard is None for p in parts):
            return ValueTerm(None, parts[0].value)
        return ValueTerm(ro_or(p.guard for p in parts), parts[0].value)
    if any(isinstance(p, ValueTerm) for p in parts):
        raise ContractViolation("cannot OR-lift a value variable with a Boolean one")
    return ro_or(parts)


def _and_binding(parts: list) -> Binding:
    values = [p for p in parts if isinstance(p, ValueTerm)]
    if len(values) > 1:
        raise ContractViolation("a lifted clause carries at most one value")
    if not values:
        return ro_and(parts)
    guards = [p for p in parts if not isinstance(p, ValueTerm)]
    if values[0].guard is not None:
        guards.append(values[0].guard)
    return ValueTerm(ro_and(guards) if guards else None, values[0].value)


def lift_or(clauses, bindings: Mapping, V) -> tuple:
    """Replace the cofactor-equivalent class ``V`` by one fresh variable."""
    V = frozenset(V)
    if len(V) < 2:
        raise ContractViolation("lift_or needs at least two variables")
    clauses = tuple(clauses)
    cof = _cofactors(clauses)
    if len({cof.get(x) for x in V}) != 1 or None in {cof.get(x) for x in V}:
        raise ContractViolation(f"{sorted(V)} are not cofactor-equivalent")
    y = _fresh_name(V, "|")
    new_bindings = dict(bindings)
    new_bindings[y] = _or_binding([bindings[x] for x in sorted(V)])
    kept = [c for c in clauses if not (c & V)]
    kept.extend(n | {y} for n in cof[next(iter(V))])
    return _canon(kept), new_bindings


def lift_and(clauses, bindings: Mapping, V) -> tuple:
    """Replace the interchangeable class ``V`` by one fresh variable."""
    V = frozenset(V)
    if len(V) < 2:
        raise ContractViolation("lift_and needs at least two variables")
    clauses = tuple(clauses)
    mem = _memberships(clauses)
    if len({mem.get(x) for x in V}) != 1 or None in {mem.get(x) for x in V}:
        raise ContractViolation(f"{sorted(V)} are not interchangeable")
    y = _fresh_name(V, "&")
    new_bindings = dict(bindings)
    new_bindings[y] = _and_binding([bindings[x] for x in sorted(V)])
    out = [(c - V) | {y} if c & V else c for c in clauses]
    return _canon(out), new_bindings


def _still_equivalent(clauses, V, signature) -> bool:
    sigs = {signature([c for c in clauses if x in c], x) for x in V}
    return len(sigs) == 1 and None not in sigs


def _cofactor_sig(cs, x):
    return frozenset(c - {x} for c in cs) if cs else None


def _member_sig(cs, x):
    return frozenset(cs) if cs else None


def _lift_pass(clauses, bindings, partition, op, signature) -> tuple:
    changed = False
    for V in partition(clauses, bindings):
        if len(V) < 2:
            continue
        # an earlier rewrite in this pass may have broken the class
        if changed and not _still_equivalent(clauses, V, signature):
            continue
        clauses, bindings = op(clauses, bindings, V)
        changed = True
    return clauses, bindings, changed


def lift_clauses(clauses, bindings: Mapping) -> tuple:
    """Alg-1 loop on raw clauses: OR-lifts of the current partition, then
    AND-lifts, until a full pass changes nothing."""
    clauses = _canon(clauses)
    bindings = dict(bindings)
    while True:
        clauses, bindings, c1 = _lift_pass(
            clauses, bindings, cofactor_partition, lift_or, _cofactor_sig)
        clauses, bindings, c2 = _lift_pass(
            clauses, bindings, interchangeable_partition, lift_and, _member_sig)
        if not (c1 or c2):
            return clauses, bindings


def lift(phi: DnfFormula, bindings: Mapping | None = None) -> LiftedFormula:
    """Saturated lifted form of ``phi`` (identity bindings by default)."""
    if bindings is None:
        bindings = identity_bindings(phi.vars)
    clauses, bindings = lift_clauses(phi.clauses, bindings)
    used = frozenset().union(*clauses) if clauses else frozenset()
    return LiftedFormula(clauses, {v: bindings[v] for v in used})


def is_saturated(lf: LiftedFormula) -> bool:
    return all(len(V) < 2 for V in cofactor_partition(lf.clauses, lf.bindings)) and \
        all(len(V) < 2 for V in interchangeable_partition(lf.clauses, lf.bindings))


def bnp_clauses(expr: BnpExpression) -> tuple:
    """Valid lifted DNF for an idempotent BNP, before any lifting.

    Every clause of every term gets the value variable of its term's value;
    terms sharing a value share the variable.
    """
    if not expr.monoid.idempotent:
        raise ContractViolation(f"{expr.monoid} is not idempotent; use linearity instead")
    bindings = identity_bindings(expr.vars)
    clauses = []
    for phi, m in expr.terms:
        w = value_var_name(m)
        bindings[w] = ValueTerm(None, m)
        for c in phi.clauses:
            clauses.append(frozenset(c) | {w})
    return _canon(clauses), bindings


def bnp_to_lifted(expr: BnpExpression, lifting: bool = True) -> LiftedFormula:
    clauses, bindings = bnp_clauses(expr)
    if lifting:
        clauses, bindings = lift_clauses(clauses, bindings)
    used = frozenset().union(*clauses) if clauses else frozenset()
    return LiftedFormula(clauses, {v: bindings[v] for v in used})


def check_lifted(lf: LiftedFormula) -> None:
    """Raise if bindings overlap, are not read-once, or (aggregate case) a
    clause does not carry exactly one value variable."""
    seen: dict = {}
    for v in sorted(lf.vars):
        b = lf.bindings.get(v)
        if b is None:
            raise ContractViolation(f"{v} has no binding")
        f = b.guard if isinstance(b, ValueTerm) else b
        if f is not None and not is_read_once(f):
            raise ContractViolation(f"binding of {v} is not read-once")
        for x in b.vars:
            if x in seen:
                raise ContractViolation(f"{x} occurs in bindings of {seen[x]} and {v}")
            seen[x] = v
    if lf.is_aggregate:
        for c in lf.clauses:
            n = sum(isinstance(lf.bindings[v], ValueTerm) for v in c)
            if n != 1:
                raise ContractViolation(f"clause {sorted(c)} carries {n} values")


def check_names(names: Iterable[str]) -> None:
    for n in names:
        if any(ch in n for ch in "|&()$"):
            raise LineageError(f"variable name {n!r} uses a reserved character")
