"""Exact Banzhaf and Shapley values from compiled d-trees.

Everything is computed at the all-½ point with integer model counts: a node
over ``v`` variables carries ``#`` instead of ``#/2^v``. Shapley values use
the same passes over polynomials in ``z`` whose ``k``-th coefficient is the
number of size-``k`` valuations, so a leaf is ``z`` and a free variable
contributes ``1 + z``.

The backward pass propagates adjoints ``∂(root count)/∂(node count)`` with
node totals held fixed. Summing the adjoints over the leaves of ``x`` gives
``#φ[x:=1] - #φ[x:=0]`` directly, which is the Banzhaf value (or, over
polynomials, the per-size marginal counts that the Shapley coefficients
weight). Partials are products over siblings, taken from prefix and suffix
arrays, so nothing is ever divided.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .compile import compile_aggregate, lifted_compile
from .dtree import (
    BottomLeaf, ConstLeaf, DTree, IndAnd, IndOr, ScalarMul, Shannon, ValueLeaf,
    VarLeaf, topological, tree_stats,
)
from .errors import NO_DEADLINE, ContractViolation, Deadline, LineageError
from .lineage import (
    Bottom, BnpExpression, DnfFormula, MonoidKind, evaluate,
)


# -- count rings ------------------------------------------------------------

class IntRing:
    """Plain model counts."""

    zero, one, leaf = 0, 1, 1

    def __init__(self):
        self._pow = [1]

    def total(self, n: int) -> int:
        while len(self._pow) <= n:
            self._pow.append(self._pow[-1] * 2)
        return self._pow[n]

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def sub(a, b):
        return a - b

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def scale(a, c):
        return a * c


class PolyRing:
    """Size-resolved counts: lists of coefficients, index = valuation size."""

    zero, one, leaf = (0,), (1,), (0, 1)

    def total(self, n: int) -> tuple:
        return _binomial_row(n)

    @staticmethod
    def add(a, b):
        if len(a) < len(b):
            a, b = b, a
        return tuple(x + y for x, y in zip(a, b)) + a[len(b):]

    @staticmethod
    def sub(a, b):
        n = max(len(a), len(b))
        a = a + (0,) * (n - len(a))
        b = b + (0,) * (n - len(b))
        return tuple(x - y for x, y in zip(a, b))

    @staticmethod
    def mul(a, b):
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return tuple(out)

    @staticmethod
    def scale(a, c):
        return tuple(x * c for x in a)


@lru_cache(maxsize=None)
def _binomial_row(n: int) -> tuple:
    return tuple(math.comb(n, k) for k in range(n + 1))


def _others(xs: list, ring) -> list:
    """``out[i] = Π_{j≠i} xs[j]`` via prefix and suffix products."""
    n = len(xs)
    prefix = [ring.one] * (n + 1)
    for i, x in enumerate(xs):
        prefix[i + 1] = ring.mul(prefix[i], x)
    out = [None] * n
    suffix = ring.one
    for i in range(n - 1, -1, -1):
        out[i] = ring.mul(prefix[i], suffix)
        suffix = ring.mul(suffix, xs[i])
    return out


def _prod(xs, ring):
    out = ring.one
    for x in xs:
        out = ring.mul(out, x)
    return out


# -- forward pass -----------------------------------------------------------

class _Pass:
    """Counts for every node of one tree, plus the backward sweep."""

    def __init__(self, root: DTree, ring, values=None, override=None,
                 deadline: Deadline | None = None):
        self.root = root
        self.ring = ring
        self.order = topological(root)
        # ascending values; outcome vectors are indexed by this rank
        self.values = values if values is not None else _tree_values(self.order)
        self.rank = {m: i for i, m in enumerate(self.values)}
        self.override = override or {}
        self.deadline = deadline or NO_DEADLINE
        self.count: dict = {}
        self._forward()

    def total(self, node) -> object:
        return self.ring.total(len(node.varset))

    def _forward(self):
        ring, count = self.ring, self.count
        P = len(self.values)
        for i, n in enumerate(self.order):
            if i % 256 == 0:
                self.deadline.check()
            if isinstance(n, VarLeaf):
                c = self.override.get(n.name, ring.leaf)
            elif isinstance(n, ConstLeaf):
                c = ring.one if n.value else ring.zero
            elif isinstance(n, ValueLeaf):
                c = [ring.zero] * P
                c[self.rank[n.value]] = ring.one
            elif isinstance(n, BottomLeaf):
                c = [ring.zero] * P
            elif isinstance(n, IndAnd):
                c = _prod((count[id(k)] for k in n.kids), ring)
            elif isinstance(n, IndOr):
                if n.semimodule:
                    c = self._or_vectors(n)
                else:
                    miss = _prod((ring.sub(self.total(k), count[id(k)]) for k in n.kids), ring)
                    c = ring.sub(self.total(n), miss)
            elif isinstance(n, Shannon):
                c = self._shannon_mix(n)
            elif isinstance(n, ScalarMul):
                g = _prod((count[id(k)] for k in n.guards), ring)
                c = [ring.mul(g, x) for x in count[id(n.child)]]
            else:
                raise ContractViolation(f"unknown node {n!r}")
            count[id(n)] = c

    def _pads(self, n: Shannon):
        ring = self.ring
        vb = len(n.one.varset | n.zero.varset)
        return (ring.total(vb - len(n.one.varset)), ring.total(vb - len(n.zero.varset)))

    def _shannon_mix(self, n: Shannon):
        ring, count = self.ring, self.count
        mc = count[id(n.cond)]
        nc = ring.sub(self.total(n.cond), mc)
        p1, p0 = self._pads(n)
        w1, w0 = ring.mul(mc, p1), ring.mul(nc, p0)
        c1, c0 = count[id(n.one)], count[id(n.zero)]
        if not n.semimodule:
            return ring.add(ring.mul(w1, c1), ring.mul(w0, c0))
        return [ring.add(ring.mul(w1, x), ring.mul(w0, y)) for x, y in zip(c1, c0)]

    def _cdfs(self, n: IndOr) -> list:
        """Per child, ``F[k]`` = valuations whose outcome ranks below ``k``
        (Bottom ranks lowest). MIN gates rank values in reverse."""
        ring, P = self.ring, len(self.values)
        out = []
        for k in n.kids:
            d = self.count[id(k)]
            if n.minimize:
                d = d[::-1]
            F = [None] * (P + 1)
            F[P] = self.total(k)
            for q in range(P - 1, -1, -1):
                F[q] = ring.sub(F[q + 1], d[q])
            out.append(F)
        return out

    def _or_vectors(self, n: IndOr) -> list:
        ring, P = self.ring, len(self.values)
        Fs = self._cdfs(n)
        G = [_prod((F[q] for F in Fs), ring) for q in range(P + 1)]
        out = [ring.sub(G[q + 1], G[q]) for q in range(P)]
        return out[::-1] if n.minimize else out

    # -- backward ------------------------------------------------------------

    def backward(self, seed) -> dict:
        """Adjoints of every node given the root adjoint ``seed``; returns
        per-variable sums over leaf occurrences."""
        ring, count = self.ring, self.count
        adj = {id(self.root): seed}
        acc: dict = {}

        def push(node, a):
            key = id(node)
            old = adj.get(key)
            if old is None:
                adj[key] = a
            elif isinstance(a, list):
                adj[key] = [ring.add(x, y) for x, y in zip(old, a)]
            else:
                adj[key] = ring.add(old, a)

        for i, n in enumerate(reversed(self.order)):
            if i % 256 == 0:
                self.deadline.check()
            a = adj.get(id(n))
            if a is None:
                continue
            if isinstance(n, VarLeaf):
                acc[n.name] = ring.add(acc[n.name], a) if n.name in acc else a
            elif isinstance(n, IndAnd):
                for k, o in zip(n.kids, _others([count[id(k)] for k in n.kids], ring)):
                    push(k, ring.mul(a, o))
            elif isinstance(n, IndOr) and not n.semimodule:
                miss = [ring.sub(self.total(k), count[id(k)]) for k in n.kids]
                for k, o in zip(n.kids, _others(miss, ring)):
                    push(k, ring.mul(a, o))
            elif isinstance(n, IndOr):
                self._or_backward(n, a, push)
            elif isinstance(n, Shannon):
                self._shannon_backward(n, a, push)
            elif isinstance(n, ScalarMul):
                ms = [count[id(g)] for g in n.guards]
                dS = count[id(n.child)]
                inner = ring.zero
                for x, y in zip(a, dS):
                    inner = ring.add(inner, ring.mul(x, y))
                for g, o in zip(n.guards, _others(ms, ring)):
                    push(g, ring.mul(inner, o))
                m = _prod(ms, ring)
                push(n.child, [ring.mul(x, m) for x in a])
        self.adjoints = adj
        return acc

    def _shannon_backward(self, n: Shannon, a, push):
        ring, count = self.ring, self.count
        mc = count[id(n.cond)]
        nc = ring.sub(self.total(n.cond), mc)
        p1, p0 = self._pads(n)
        c1, c0 = count[id(n.one)], count[id(n.zero)]
        if n.semimodule:
            ac = ring.zero
            for x, y1, y0 in zip(a, c1, c0):
                ac = ring.add(ac, ring.mul(x, ring.sub(ring.mul(y1, p1), ring.mul(y0, p0))))
            w1, w0 = ring.mul(mc, p1), ring.mul(nc, p0)
            push(n.cond, ac)
            push(n.one, [ring.mul(x, w1) for x in a])
            push(n.zero, [ring.mul(x, w0) for x in a])
        else:
            push(n.cond, ring.mul(a, ring.sub(ring.mul(c1, p1), ring.mul(c0, p0))))
            push(n.one, ring.mul(a, ring.mul(mc, p1)))
            push(n.zero, ring.mul(a, ring.mul(nc, p0)))

    def _or_backward(self, n: IndOr, a, push):
        ring, P = self.ring, len(self.values)
        if n.minimize:
            a = a[::-1]
        Fs = self._cdfs(n)
        bG = [ring.zero] * (P + 1)
        for q in range(P):
            bG[q + 1] = ring.add(bG[q + 1], a[q])
            bG[q] = ring.sub(bG[q], a[q])
        # Π_{l≠i} F_l[k] for every k, one prefix/suffix sweep per k
        others = [_others([F[k] for F in Fs], ring) for k in range(P + 1)]
        for i, kid in enumerate(n.kids):
            out, run = [None] * P, ring.zero
            for q in range(P):
                run = ring.add(run, ring.mul(bG[q], others[q][i]))
                out[q] = ring.sub(ring.zero, run)
            push(kid, out[::-1] if n.minimize else out)


def _tree_values(order) -> list:
    return sorted({n.value for n in order if isinstance(n, ValueLeaf)})


def _check_universe(root: DTree, universe) -> frozenset:
    universe = frozenset(universe) if universe is not None else root.varset
    if not root.varset <= universe:
        raise LineageError(
            f"tree variables outside the universe: {sorted(root.varset - universe)}")
    return universe


def _boolean_root(root: DTree) -> None:
    if root.semimodule:
        raise ContractViolation("expected a Boolean d-tree, got a semimodule tree")


def _semimodule_root(root: DTree) -> None:
    if not root.semimodule:
        raise ContractViolation("expected a semimodule d-tree, got a Boolean tree")


# -- Boolean attribution ------------------------------------------------------

def model_counts(root: DTree) -> dict:
    """Model count of every node over its own variables, keyed by ``id``."""
    _boolean_root(root)
    return _Pass(root, IntRing()).count


def shapley_coefficients(n: int) -> list:
    """``C[k] = k!(n-k-1)!/n!`` for ``k = 0..n-1``."""
    if n < 1:
        raise LineageError("Shapley coefficients need at least one variable")
    return list(_coefficients(n))


@lru_cache(maxsize=64)
def _coefficients(n: int) -> tuple:
    f = math.factorial
    return tuple(Fraction(f(k) * f(n - k - 1), f(n)) for k in range(n))


def _shapley_from_delta(delta: tuple, coeffs) -> Fraction:
    return sum((Fraction(c) * d for c, d in zip(coeffs, delta)), Fraction(0))


def gradient_banzhaf(root: DTree, universe=None, deadline: Deadline | None = None) -> dict:
    """Banzhaf value of every universe variable in one backward pass."""
    _boolean_root(root)
    universe = _check_universe(root, universe)
    ring = IntRing()
    pas = _Pass(root, ring, deadline=deadline)
    acc = pas.backward(ring.total(len(universe) - len(root.varset)))
    return {x: acc.get(x, 0) for x in sorted(universe)}


def gradient_shapley(root: DTree, universe=None, deadline: Deadline | None = None) -> dict:
    _boolean_root(root)
    universe = _check_universe(root, universe)
    if not universe:
        return {}
    ring = PolyRing()
    pas = _Pass(root, ring, deadline=deadline)
    acc = pas.backward(ring.total(len(universe) - len(root.varset)))
    coeffs = _coefficients(len(universe))
    return {x: _shapley_from_delta(acc[x], coeffs) if x in acc else Fraction(0)
            for x in sorted(universe)}


def node_annotations(root: DTree, universe=None) -> dict:
    """Per node ``(p, g)``: probability at the all-½ point and the gradient
    scaled by ``2^(|universe|-1)``, keyed by ``id``. Shared nodes report
    their accumulated gradient."""
    _boolean_root(root)
    universe = _check_universe(root, universe)
    ring = IntRing()
    pas = _Pass(root, ring)
    pas.backward(ring.total(len(universe) - len(root.varset)))
    out = {}
    for n in pas.order:
        v = len(n.varset)
        p = Fraction(pas.count[id(n)], 2 ** v)
        a = pas.adjoints.get(id(n), 0)
        out[id(n)] = (p, Fraction(a * 2 ** v, 2))
    return out


def banzhaf_by_substitution(root: DTree, universe=None) -> dict:
    """Per-variable baseline: two forward passes per variable, with every
    leaf of ``x`` forced to true and to false."""
    _boolean_root(root)
    universe = _check_universe(root, universe)
    ring = IntRing()
    out = {}
    for x in sorted(universe):
        if x not in root.varset:
            out[x] = 0
            continue
        hi = _Pass(root, ring, override={x: ring.total(1)}).count[id(root)]
        lo = _Pass(root, ring, override={x: 0}).count[id(root)]
        # each count includes a factor 2 for x's own (now constant) leaf total
        pad = ring.total(len(universe) - len(root.varset))
        out[x] = (hi - lo) * pad // 2
    return out


# -- semimodule attribution ---------------------------------------------------

@dataclass(frozen=True)
class OutcomeDistribution:
    """Valuation counts per outcome over a node's own variables.

    ``counts`` maps each value (and ``Bottom``) to an integer, or to a tuple
    indexed by valuation size when size-resolved.
    """

    counts: dict
    size: int

    def __getitem__(self, key):
        return self.counts[key]


def value_counts(root: DTree, k_resolved: bool = False) -> dict:
    """Outcome distribution of every semimodule node, keyed by ``id``."""
    _semimodule_root(root)
    ring = PolyRing() if k_resolved else IntRing()
    pas = _Pass(root, ring)
    out = {}
    for n in pas.order:
        if not n.semimodule:
            continue
        d = pas.count[id(n)]
        counts = {m: c for m, c in zip(pas.values, d) if any_nonzero(c)}
        bottom = pas.total(n)
        for c in d:
            bottom = ring.sub(bottom, c)
        if any_nonzero(bottom):
            counts[Bottom] = bottom
        out[id(n)] = OutcomeDistribution(counts, len(n.varset))
    return out


def any_nonzero(c) -> bool:
    return any(c) if isinstance(c, tuple) else c != 0


def root_distribution(root: DTree, k_resolved: bool = False, universe=None) -> dict:
    """Root outcome counts padded to ``universe`` (defaults to the tree's own
    variables)."""
    universe = _check_universe(root, universe)
    dist = value_counts(root, k_resolved)[id(root)].counts
    ring = PolyRing() if k_resolved else IntRing()
    pad = ring.total(len(universe) - len(root.varset))
    return {m: ring.mul(c, pad) for m, c in dist.items()}


def minmax_gradient(root: DTree, universe=None, measure: str = "banzhaf",
                    deadline: Deadline | None = None) -> dict:
    """All-variables attribution for a MIN/MAX semimodule tree.

    The objective is the expected outcome (Bottom counting 0), i.e.
    ``Σ_p p · #^p``; its adjoints at the leaves give the attribution.
    """
    _semimodule_root(root)
    universe = _check_universe(root, universe)
    if not universe:
        return {}
    ring = PolyRing() if measure == "shapley" else IntRing()
    pas = _Pass(root, ring, deadline=deadline)
    pad = ring.total(len(universe) - len(root.varset))
    acc = pas.backward([ring.scale(pad, m) for m in pas.values])
    if measure == "banzhaf":
        return {x: Fraction(acc.get(x, 0)) for x in sorted(universe)}
    coeffs = _coefficients(len(universe))
    return {x: _shapley_from_delta(acc[x], coeffs) if x in acc else Fraction(0)
            for x in sorted(universe)}


def _expected_counts(expr: BnpExpression, ring, lifting: bool) -> object:
    """``Σ_p p · #^p`` of ``expr`` over its universe (Bottom counts 0)."""
    tree = compile_aggregate(expr, lifting)
    dist = root_distribution(tree, isinstance(ring, PolyRing), expr.universe)
    out = ring.zero
    for m, c in dist.items():
        if m is not Bottom:
            out = ring.add(out, ring.scale(c, m))
    return out


def minmax_attribution_counts(expr: BnpExpression, measure: str = "banzhaf",
                              lifting: bool = True) -> dict:
    """Reference method: substitute each variable both ways, recompile and
    difference the value-weighted outcome counts."""
    if not expr.monoid.idempotent:
        raise ContractViolation(f"{expr.monoid} lineage has no semimodule tree")
    ring = PolyRing() if measure == "shapley" else IntRing()
    universe = sorted(expr.universe)
    out = {}
    for x in universe:
        if x not in expr.vars:
            out[x] = Fraction(0)
            continue
        hi = _expected_counts(expr.substitute(x, True), ring, lifting)
        lo = _expected_counts(expr.substitute(x, False), ring, lifting)
        # counts above span the whole universe, x included as a free variable
        diff = ring.sub(hi, lo)
        if measure == "banzhaf":
            out[x] = Fraction(diff) / 2
        else:
            delta = _divide_free(diff)
            out[x] = _shapley_from_delta(delta, _coefficients(len(universe)))
    return out


def _divide_free(poly: tuple) -> tuple:
    """Divide a size polynomial by ``(1 + z)``, removing a free variable."""
    out, carry = [], 0
    for c in poly[:-1] if len(poly) > 1 else poly:
        carry = c - carry
        out.append(carry)
    return tuple(out)


def linear_aggregate_attribution(expr: BnpExpression, measure: str = "banzhaf",
                                 lifting: bool = True,
                                 deadline: Deadline | None = None) -> dict:
    """SUM/COUNT attribution as the value-weighted sum over terms."""
    if expr.monoid.kind not in (MonoidKind.SUM, MonoidKind.COUNT):
        raise ContractViolation(f"{expr.monoid} is not a linear aggregate")
    out = {x: Fraction(0) for x in sorted(expr.universe)}
    fn = gradient_shapley if measure == "shapley" else gradient_banzhaf
    for phi, m in expr.terms:
        tree = lifted_compile(phi, lifting, deadline)
        for x, val in fn(tree, expr.universe, deadline).items():
            out[x] += val * m
    return out


# -- float shadow for finite differences -------------------------------------

def expected_value(root: DTree, probs: dict) -> float:
    """Expected outcome (Bottom = 0) of a tree, or the probability of a
    Boolean tree, with independent leaf probabilities in floats."""
    values = _tree_values(topological(root))
    rank = {m: i for i, m in enumerate(values)}
    P = len(values)
    val: dict = {}
    for n in topological(root):
        if isinstance(n, VarLeaf):
            c = probs.get(n.name, 0.5)
        elif isinstance(n, ConstLeaf):
            c = 1.0 if n.value else 0.0
        elif isinstance(n, ValueLeaf):
            c = [0.0] * P
            c[rank[n.value]] = 1.0
        elif isinstance(n, BottomLeaf):
            c = [0.0] * P
        elif isinstance(n, IndAnd):
            c = math.prod(val[id(k)] for k in n.kids)
        elif isinstance(n, IndOr) and not n.semimodule:
            c = 1.0 - math.prod(1.0 - val[id(k)] for k in n.kids)
        elif isinstance(n, IndOr):
            G = [1.0] * (P + 1)
            for k in n.kids:
                d = val[id(k)][::-1] if n.minimize else val[id(k)]
                F, run = [0.0] * (P + 1), 1.0
                F[P] = 1.0
                for q in range(P - 1, -1, -1):
                    run -= d[q]
                    F[q] = run
                G = [g * f for g, f in zip(G, F)]
            c = [G[q + 1] - G[q] for q in range(P)]
            if n.minimize:
                c = c[::-1]
        elif isinstance(n, Shannon):
            pc = val[id(n.cond)]
            a, b = val[id(n.one)], val[id(n.zero)]
            c = [pc * x + (1 - pc) * y for x, y in zip(a, b)] if n.semimodule \
                else pc * a + (1 - pc) * b
        elif isinstance(n, ScalarMul):
            g = math.prod(val[id(k)] for k in n.guards)
            c = [g * x for x in val[id(n.child)]]
        val[id(n)] = c
    r = val[id(root)]
    if not root.semimodule:
        return float(r)
    return sum(float(m) * p for m, p in zip(values, r))


# -- reports ------------------------------------------------------------------

@dataclass
class AttributionReport:
    banzhaf: dict
    shapley: dict
    meta: dict = field(default_factory=dict)

    def variables(self) -> list:
        return sorted(set(self.banzhaf) | set(self.shapley))

    def efficiency_gap(self, psi) -> Fraction:
        """``Σ Shapley - (Ψ[full] - Ψ[empty])``; zero for exact results."""
        total = sum(self.shapley.values(), Fraction(0))
        return total - (evaluate(psi, psi.universe) - evaluate(psi, ()))


METHODS = ("gradient", "counts", "oracle")
MEASURES = ("banzhaf", "shapley")


def attribute(psi, measures=MEASURES, method: str = "gradient", lifting: bool = True,
              timeout: float | None = None) -> AttributionReport:
    """Build an attribution report for DNF or aggregate lineage."""
    if method not in METHODS:
        raise LineageError(f"unknown method {method!r}")
    for m in measures:
        if m not in MEASURES:
            raise LineageError(f"unknown measure {m!r}")
    if not psi.universe:
        raise LineageError("lineage has an empty universe; nothing to attribute")
    deadline = Deadline(timeout)
    started = time.perf_counter()
    meta = {"method": method, "lifting": lifting, "variables": len(psi.universe)}
    results = {m: {} for m in MEASURES}
    aggregate = isinstance(psi, BnpExpression)
    if aggregate:
        meta["monoid"] = str(psi.monoid)

    if method == "oracle":
        from .oracle import brute_banzhaf, brute_shapley
        fns = {"banzhaf": brute_banzhaf, "shapley": brute_shapley}
        for m in measures:
            results[m] = fns[m](psi)
    elif method == "counts":
        if not (aggregate and psi.monoid.idempotent):
            raise LineageError("--method counts applies only to MIN/MAX lineage")
        for m in measures:
            deadline.check()
            results[m] = minmax_attribution_counts(psi, m, lifting)
    elif aggregate and not psi.monoid.idempotent:
        for m in measures:
            results[m] = linear_aggregate_attribution(psi, m, lifting, deadline)
    else:
        t0 = time.perf_counter()
        if aggregate:
            tree = compile_aggregate(psi, lifting, deadline)
        else:
            tree = lifted_compile(psi, lifting, deadline)
        meta["compile_secs"] = time.perf_counter() - t0
        stats = tree_stats(tree)
        meta.update(tree_size=stats.size, tree_depth=stats.depth, dag_size=stats.dag_size)
        for m in measures:
            if aggregate:
                results[m] = minmax_gradient(tree, psi.universe, m, deadline)
            elif m == "banzhaf":
                results[m] = gradient_banzhaf(tree, psi.universe, deadline)
            else:
                results[m] = gradient_shapley(tree, psi.universe, deadline)
    meta["total_secs"] = time.perf_counter() - started
    return AttributionReport(results["banzhaf"], results["shapley"], meta)
