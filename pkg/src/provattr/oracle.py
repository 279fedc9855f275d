"""Brute-force ground truth by enumerating every valuation of the universe.

Valuations are bitmasks over the sorted universe (bit ``i`` is the ``i``-th
name). Outcomes are kept as exact integers after scaling all term values by
the least common multiple of their denominators.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import LineageError
from .lineage import Bottom, BnpExpression, DnfFormula, MonoidKind

DEFAULT_CAP = 24


@dataclass(frozen=True)
class _Table:
    names: list
    outcome: np.ndarray      # scaled integer value per mask, Bottom -> 0
    satisfied: np.ndarray    # False where the outcome is Bottom
    scale: int


def _sat(clauses, index, masks) -> np.ndarray:
    hit = np.zeros(len(masks), dtype=bool)
    for c in clauses:
        cm = 0
        for x in c:
            cm |= 1 << index[x]
        hit |= (masks & cm) == cm
    return hit


def _table(psi, cap: int) -> _Table:
    names = sorted(psi.universe)
    n = len(names)
    if n > cap:
        raise LineageError(f"oracle refuses {n} variables (cap is {cap})")
    index = {x: i for i, x in enumerate(names)}
    masks = np.arange(1 << n, dtype=np.int64)
    if isinstance(psi, DnfFormula):
        sat = _sat(psi.clauses, index, masks)
        return _Table(names, sat.astype(np.int64), sat, 1)

    scale = math.lcm(*(m.denominator for _, m in psi.terms)) if psi.terms else 1
    ints = [int(m * scale) for _, m in psi.terms]
    big = sum(abs(v) for v in ints) >= 2 ** 62
    sats = [_sat(phi.clauses, index, masks) for phi, _ in psi.terms]
    any_sat = np.zeros(len(masks), dtype=bool)
    for s in sats:
        any_sat |= s
    kind = psi.monoid.kind
    if kind in (MonoidKind.SUM, MonoidKind.COUNT):
        out = np.zeros(len(masks), dtype=object if big else np.int64)
        for s, v in zip(sats, ints):
            out = out + s.astype(out.dtype) * v
    else:
        # idempotent: pick the best satisfied value by rank
        ranked = sorted(set(ints), reverse=kind is MonoidKind.MIN)
        rank = {v: i for i, v in enumerate(ranked)}
        best = np.full(len(masks), -1, dtype=np.int64)
        for s, v in zip(sats, ints):
            best = np.where(s, np.maximum(best, rank[v]), best)
        lut = np.array(ranked + [0], dtype=object if big else np.int64)
        out = lut[best]
    return _Table(names, out, any_sat, scale)


def _popcounts(n: int) -> np.ndarray:
    masks = np.arange(1 << n, dtype=np.int64)
    pop = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        pop += (masks >> i) & 1
    return pop


def _marginals(table: _Table, x: str) -> tuple:
    """(masks without ``x``, marginal contributions of adding ``x``)."""
    i = table.names.index(x)
    masks = np.arange(len(table.outcome), dtype=np.int64)
    without = masks[(masks >> i) & 1 == 0]
    diff = table.outcome[without | (1 << i)] - table.outcome[without]
    return without, diff


def _check_var(psi, x):
    if x not in psi.universe:
        raise LineageError(f"{x!r} is not in the universe")


def brute_banzhaf(psi, x: str | None = None, cap: int = DEFAULT_CAP):
    """Banzhaf value of ``x`` (or a dict for every variable when ``x`` is None)."""
    table = _table(psi, cap)
    names = table.names if x is None else [x]
    out = {}
    for y in names:
        _check_var(psi, y)
        _, diff = _marginals(table, y)
        total = int(diff.sum()) if len(diff) else 0
        out[y] = total if isinstance(psi, DnfFormula) else Fraction(total, table.scale)
    return out if x is None else out[x]


def brute_shapley(psi, x: str | None = None, cap: int = DEFAULT_CAP):
    table = _table(psi, cap)
    n = len(table.names)
    names = table.names if x is None else [x]
    f = math.factorial
    coeffs = [Fraction(f(k) * f(n - k - 1), f(n)) for k in range(n)]
    pop = _popcounts(n)
    out = {}
    for y in names:
        _check_var(psi, y)
        without, diff = _marginals(table, y)
        size = pop[without]
        total = Fraction(0)
        for k in range(n):
            s = diff[size == k].sum()
            if s:
                total += coeffs[k] * int(s)
        out[y] = total / table.scale
    return out if x is None else out[x]


def brute_counts(psi, cap: int = DEFAULT_CAP) -> dict:
    """Exhaustive tallies over the universe.

    Boolean lineage gives ``modelCount`` and ``kCounts``; aggregate lineage
    gives ``outcomeCounts`` and ``kOutcomeCounts`` with ``Bottom`` included.
    """
    table = _table(psi, cap)
    n = len(table.names)
    pop = _popcounts(n)
    if isinstance(psi, DnfFormula):
        k = np.bincount(pop[table.satisfied], minlength=n + 1)
        return {"modelCount": int(table.satisfied.sum()), "kCounts": [int(c) for c in k]}
    keys = [Fraction(int(v), table.scale) if s else Bottom
            for v, s in zip(table.outcome, table.satisfied)]
    counts = Counter(keys)
    per_k: dict = {}
    for key, size in zip(keys, pop):
        per_k.setdefault(key, [0] * (n + 1))[int(size)] += 1
    return {"outcomeCounts": dict(counts), "kOutcomeCounts": per_k}
