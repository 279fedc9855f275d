"""Decomposition trees.

Gates are independent-or (⊕), independent-and (⊙), Shannon (⊔) and scalar
multiplication (⊗); leaves are constants, variables and values. Nodes are
immutable and hash-consed through :class:`NodeFactory`, so a compiled tree may
share sub-trees internally. Size statistics count tree nodes unless asked for
the shared (DAG) count.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .lineage import Bottom


class DTree:
    __slots__ = ("varset", "semimodule", "_key", "__weakref__")
    kind = "node"

    def children(self) -> tuple:
        return ()

    def outcome(self, theta):
        """Evaluate under a valuation (set of true variables).

        Boolean trees return ``bool``; semimodule trees return a ``Fraction``
        or ``Bottom``.
        """
        raise NotImplementedError

    def __repr__(self):
        return to_text(self)


class ConstLeaf(DTree):
    __slots__ = ("value",)
    kind = "const"

    def __init__(self, value: bool):
        self.value = bool(value)
        self.varset = frozenset()
        self.semimodule = False

    def outcome(self, theta):
        return self.value


class BottomLeaf(DTree):
    """Semimodule constant: no value is produced under any valuation."""
    __slots__ = ()
    kind = "bottom"

    def __init__(self):
        self.varset = frozenset()
        self.semimodule = True

    def outcome(self, theta):
        return Bottom


class VarLeaf(DTree):
    __slots__ = ("name",)
    kind = "var"

    def __init__(self, name: str):
        self.name = name
        self.varset = frozenset((name,))
        self.semimodule = False

    def outcome(self, theta):
        return self.name in theta


class ValueLeaf(DTree):
    __slots__ = ("value",)
    kind = "value"

    def __init__(self, value: Fraction):
        self.value = Fraction(value)
        self.varset = frozenset()
        self.semimodule = True

    def outcome(self, theta):
        return self.value


class IndOr(DTree):
    """⊕ over pairwise independent children: Boolean OR, or the monoid sum
    (MAX, or MIN when ``minimize``) over semimodule children."""
    __slots__ = ("kids", "minimize")
    kind = "or"

    def __init__(self, kids, minimize: bool = False):
        self.kids = tuple(kids)
        self.varset = frozenset().union(*(k.varset for k in self.kids))
        self.semimodule = self.kids[0].semimodule
        self.minimize = minimize and self.semimodule

    def children(self):
        return self.kids

    def outcome(self, theta):
        outs = [k.outcome(theta) for k in self.kids]
        if not self.semimodule:
            return any(outs)
        vals = [o for o in outs if o is not Bottom]
        if not vals:
            return Bottom
        return min(vals) if self.minimize else max(vals)


class IndAnd(DTree):
    __slots__ = ("kids",)
    kind = "and"

    def __init__(self, kids):
        self.kids = tuple(kids)
        self.varset = frozenset().union(*(k.varset for k in self.kids))
        self.semimodule = False

    def children(self):
        return self.kids

    def outcome(self, theta):
        return all(k.outcome(theta) for k in self.kids)


class Shannon(DTree):
    """``(cond ∧ one) ∨ (¬cond ∧ zero)`` for a Boolean read-once ``cond``."""
    __slots__ = ("cond", "one", "zero")
    kind = "shannon"

    def __init__(self, cond, one, zero):
        self.cond, self.one, self.zero = cond, one, zero
        self.varset = cond.varset | one.varset | zero.varset
        self.semimodule = one.semimodule

    def children(self):
        return (self.cond, self.one, self.zero)

    def outcome(self, theta):
        return self.one.outcome(theta) if self.cond.outcome(theta) else self.zero.outcome(theta)


class ScalarMul(DTree):
    """``(⋀ guards) ⊗ child``: the child's value when every guard holds."""
    __slots__ = ("guards", "child")
    kind = "scalar"

    def __init__(self, guards, child):
        self.guards = tuple(guards)
        self.child = child
        self.varset = frozenset().union(child.varset, *(g.varset for g in self.guards))
        self.semimodule = True

    def children(self):
        return self.guards + (self.child,)

    def outcome(self, theta):
        if all(g.outcome(theta) for g in self.guards):
            return self.child.outcome(theta)
        return Bottom


class NodeFactory:
    """Hash-consing constructor: structurally identical nodes are one object."""

    def __init__(self):
        self._table: dict = {}
        self.true = self._intern(("const", True), lambda: ConstLeaf(True))
        self.false = self._intern(("const", False), lambda: ConstLeaf(False))
        self.bottom = self._intern(("bottom",), BottomLeaf)

    def _intern(self, key, build):
        node = self._table.get(key)
        if node is None:
            node = build()
            node._key = key
            self._table[key] = node
        return node

    def var(self, name: str) -> VarLeaf:
        return self._intern(("var", name), lambda: VarLeaf(name))

    def value(self, m) -> ValueLeaf:
        m = Fraction(m)
        return self._intern(("value", m), lambda: ValueLeaf(m))

    def ind_or(self, kids, minimize: bool = False) -> DTree:
        kids = list(kids)
        if kids and not kids[0].semimodule:
            if any(k is self.true for k in kids):
                return self.true
            kids = [k for k in kids if k is not self.false]
            if not kids:
                return self.false
        else:
            kids = [k for k in kids if k is not self.bottom]
            if not kids:
                return self.bottom
        if len(kids) == 1:
            return kids[0]
        kids.sort(key=_order)
        minimize = minimize and kids[0].semimodule
        return self._intern(("or", minimize) + tuple(id(k) for k in kids),
                            lambda: IndOr(kids, minimize))

    def ind_and(self, kids) -> DTree:
        kids = list(kids)
        if any(k is self.false for k in kids):
            return self.false
        kids = [k for k in kids if k is not self.true]
        if not kids:
            return self.true
        if len(kids) == 1:
            return kids[0]
        kids.sort(key=_order)
        return self._intern(("and",) + tuple(id(k) for k in kids), lambda: IndAnd(kids))

    def shannon(self, cond, one, zero) -> DTree:
        if one is zero:
            return one
        return self._intern(("shannon", id(cond), id(one), id(zero)),
                            lambda: Shannon(cond, one, zero))

    def scalar(self, guards, child) -> DTree:
        guards = list(guards)
        if any(g is self.false for g in guards) or child is self.bottom:
            return self.bottom
        guards = [g for g in guards if g is not self.true]
        if not guards:
            return child
        guards.sort(key=_order)
        return self._intern(("scalar", id(child)) + tuple(id(g) for g in guards),
                            lambda: ScalarMul(guards, child))


def _order(node: DTree):
    # deterministic child order: by smallest variable, then kind
    return (min(node.varset) if node.varset else "", node.kind, len(node.varset))


# -- traversal and statistics ----------------------------------------------

def topological(root: DTree) -> list:
    """Distinct nodes, children before parents."""
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for c in reversed(node.children()):
            if id(c) not in seen:
                stack.append((c, False))
    return order


def iter_tree(root: DTree) -> Iterator[DTree]:
    """Pre-order walk that revisits shared sub-trees (tree semantics)."""
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


@dataclass(frozen=True)
class TreeStats:
    size: int
    depth: int
    var_count: int
    gates: dict
    dag_size: int


def tree_stats(root: DTree, dag: bool = False) -> TreeStats:
    """Node count (tree semantics unless ``dag``), depth and gate histogram."""
    order = topological(root)
    size, depth = {}, {}
    for n in order:
        kids = n.children()
        size[id(n)] = 1 + sum(size[id(c)] for c in kids)
        depth[id(n)] = 1 + max((depth[id(c)] for c in kids), default=0)
    if dag:
        hist = Counter(n.kind for n in order)
        total = len(order)
    else:
        mult = {id(root): 1}
        for n in reversed(order):
            for c in n.children():
                mult[id(c)] = mult.get(id(c), 0) + mult[id(n)]
        hist = Counter()
        for n in order:
            hist[n.kind] += mult[id(n)]
        total = size[id(root)]
    return TreeStats(size=total, depth=depth[id(root)], var_count=len(root.varset),
                     gates=dict(sorted(hist.items())), dag_size=len(order))


_SYMBOL = {"or": "⊕", "and": "⊙", "shannon": "⊔", "scalar": "⊗"}


def to_text(node: DTree) -> str:
    """Compact prefix rendering, e.g. ``⊙(⊕(d1,d2),⊔[...](...))``."""
    if isinstance(node, ConstLeaf):
        return "1" if node.value else "0"
    if isinstance(node, BottomLeaf):
        return "⊥"
    if isinstance(node, VarLeaf):
        return node.name
    if isinstance(node, ValueLeaf):
        return str(node.value)
    if isinstance(node, Shannon):
        return f"⊔[{to_text(node.cond)}]({to_text(node.one)},{to_text(node.zero)})"
    return _SYMBOL[node.kind] + "(" + ",".join(to_text(c) for c in node.children()) + ")"


def check_structure(root: DTree) -> None:
    """Raise ``AssertionError`` if an independence or typing invariant fails."""
    for n in topological(root):
        if isinstance(n, (IndOr, IndAnd)) or isinstance(n, ScalarMul):
            kids = n.children()
            seen: set = set()
            for k in kids:
                if seen & k.varset:
                    raise AssertionError(f"dependent children under {n.kind}")
                seen |= k.varset
            if isinstance(n, IndOr) and len({k.semimodule for k in kids}) != 1:
                raise AssertionError("⊕ mixes Boolean and semimodule children")
            if isinstance(n, IndAnd) and any(k.semimodule for k in kids):
                raise AssertionError("⊙ over a semimodule child")
            if isinstance(n, ScalarMul) and (any(g.semimodule for g in n.guards)
                                             or not n.child.semimodule):
                raise AssertionError("⊗ needs Boolean guards and a semimodule child")
        elif isinstance(n, Shannon):
            if n.cond.varset & (n.one.varset | n.zero.varset):
                raise AssertionError("Shannon condition shares variables with a branch")
            if n.cond.semimodule or n.one.semimodule != n.zero.semimodule:
                raise AssertionError("ill-typed Shannon gate")
