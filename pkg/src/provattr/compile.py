"""Lifted compilation of lineage into decomposition trees.

The recursion tries, in order: constants, a single clause, independent-or
over connected components, independent-and over the variables common to all
clauses, and finally Shannon expansion on a most frequent variable whose two
residuals are re-lifted before compiling them.
"""
from __future__ import annotations

import sys
from collections import Counter

from .dtree import DTree, NodeFactory
from .errors import NO_DEADLINE, ContractViolation, Deadline
from .lifting import (
    ROAnd, ROOr, ROVar, ValueTerm, bnp_clauses, identity_bindings,
    lift_clauses, _canon,
)
from .lineage import BnpExpression, DnfFormula, MonoidKind, canonicalize


def independent_components(phi) -> list:
    """Split clauses into groups that share no variable (union-find)."""
    clauses = phi.clauses if isinstance(phi, DnfFormula) else tuple(phi)
    parent: dict = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in clauses:
        for x in c:
            parent.setdefault(x, x)
        it = iter(c)
        first = next(it, None)
        for x in it:
            ra, rb = find(first), find(x)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict = {}
    for c in clauses:
        key = find(next(iter(c))) if c else None
        groups.setdefault(key, []).append(c)
    parts = [tuple(g) for _, g in sorted(groups.items(), key=lambda kv: (kv[0] is None, kv[0] or ""))]
    if isinstance(phi, DnfFormula):
        return [DnfFormula(p, phi.universe) for p in parts]
    return parts


def common_variables(phi) -> frozenset:
    clauses = phi.clauses if isinstance(phi, DnfFormula) else tuple(phi)
    if not clauses:
        return frozenset()
    return frozenset.intersection(*map(frozenset, clauses))


def expand_readonce(f, factory: NodeFactory | None = None) -> DTree:
    """Read-once formula to d-tree: OR -> ⊕, AND -> ⊙, variable -> leaf."""
    factory = factory or NodeFactory()
    if isinstance(f, ROVar):
        return factory.var(f.name)
    kids = [expand_readonce(c, factory) for c in f.children]
    if isinstance(f, ROOr):
        return factory.ind_or(kids)
    if isinstance(f, ROAnd):
        return factory.ind_and(kids)
    raise TypeError(f"not a read-once formula: {f!r}")


class Compiler:
    """One compilation session: shared bindings, memo table and node factory."""

    def __init__(self, bindings=None, lifting: bool = True, minimize: bool = False,
                 deadline: Deadline | None = None, factory: NodeFactory | None = None):
        self.bindings = dict(bindings or {})
        self.lifting = lifting
        self.minimize = minimize
        self.deadline = deadline or NO_DEADLINE
        self.factory = factory or NodeFactory()
        self.memo: dict = {}
        self._expanded: dict = {}

    # bindings -> trees

    def expand(self, name: str) -> DTree:
        node = self._expanded.get(name)
        if node is None:
            b = self.bindings[name]
            if isinstance(b, ValueTerm):
                guards = [] if b.guard is None else [expand_readonce(b.guard, self.factory)]
                node = self.factory.scalar(guards, self.factory.value(b.value))
            else:
                node = expand_readonce(b, self.factory)
            self._expanded[name] = node
        return node

    def is_value(self, name: str) -> bool:
        return isinstance(self.bindings[name], ValueTerm)

    def lift(self, clauses) -> tuple:
        clauses = _canon(clauses)
        if not self.lifting or not clauses:
            return clauses
        used = frozenset().union(*clauses)
        out, new = lift_clauses(clauses, {v: self.bindings[v] for v in used})
        self.bindings.update(new)
        return out

    # recursion

    def compile(self, clauses) -> DTree:
        self.deadline.check()
        key = frozenset(clauses)
        node = self.memo.get(key)
        if node is None:
            node = self._compile(tuple(clauses))
            self.memo[key] = node
        return node

    def _compile(self, clauses) -> DTree:
        f = self.factory
        semimodule = any(self.is_value(v) for c in clauses for v in c)
        if not clauses:
            return f.false
        if any(not c for c in clauses):
            if semimodule:
                raise ContractViolation("empty clause in a semimodule formula")
            return f.true
        if len(clauses) == 1:
            return self._conjunction(clauses[0], ())
        comps = independent_components(clauses)
        if len(comps) > 1:
            kids = [self.compile(comp) for comp in comps]
            return f.ind_or(kids, minimize=self.minimize)
        common = common_variables(clauses)
        if common:
            rest = _canon(c - common for c in clauses)
            return self._conjunction(common, rest)
        return self._shannon(clauses)

    def _conjunction(self, names, rest) -> DTree:
        """Tree for ``(⋀ names) ∧ rest`` where ``rest`` is a clause tuple."""
        f = self.factory
        values = [v for v in names if self.is_value(v)]
        guards = [self.expand(v) for v in sorted(names) if not self.is_value(v)]
        if not values:
            sub = self.compile(rest) if rest else f.true
            if sub.semimodule:
                return f.scalar(guards, sub)
            return f.ind_and(guards + [sub])
        # at most one value variable per clause, so ``rest`` is Boolean here
        term = self.bindings[values[0]]
        if term.guard is not None:
            guards.append(expand_readonce(term.guard, f))
        if rest:
            guards.append(self.compile(rest))
        return f.scalar(guards, f.value(term.value))

    def _shannon(self, clauses) -> DTree:
        freq = Counter(v for c in clauses for v in c if not self.is_value(v))
        y = min(freq, key=lambda v: (-freq[v], v))
        one = self.lift(c - {y} for c in clauses)
        zero = self.lift(c for c in clauses if y not in c)
        return self.factory.shannon(self.expand(y), self.compile(one), self.compile(zero))


def _ensure_recursion(n: int) -> None:
    need = 4 * n + 200
    if sys.getrecursionlimit() < need:
        sys.setrecursionlimit(need)


def lifted_compile(phi: DnfFormula, lifting: bool = True, deadline: Deadline | None = None,
                   compiler: Compiler | None = None) -> DTree:
    """Compile positive DNF lineage into a Boolean d-tree."""
    phi = canonicalize(phi)
    _ensure_recursion(len(phi.vars))
    comp = compiler or Compiler(identity_bindings(phi.vars), lifting, deadline=deadline)
    comp.bindings.update({v: b for v, b in identity_bindings(phi.vars).items()
                          if v not in comp.bindings})
    return comp.compile(comp.lift(phi.clauses))


def compile_aggregate(expr: BnpExpression, lifting: bool = True,
                      deadline: Deadline | None = None) -> DTree:
    """Compile MIN/MAX lineage into a semimodule d-tree."""
    if not expr.monoid.idempotent:
        raise ContractViolation(f"cannot compile {expr.monoid} lineage into a semimodule tree")
    clauses, bindings = bnp_clauses(expr)
    _ensure_recursion(len(bindings))
    comp = Compiler(bindings, lifting, minimize=expr.monoid.kind is MonoidKind.MIN,
                    deadline=deadline)
    if not clauses:
        return comp.factory.bottom
    return comp.compile(comp.lift(clauses))


def compile_lineage(psi, lifting: bool = True, deadline: Deadline | None = None) -> DTree:
    if isinstance(psi, DnfFormula):
        return lifted_compile(psi, lifting, deadline)
    return compile_aggregate(psi, lifting, deadline)
