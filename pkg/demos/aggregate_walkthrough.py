"""Attribution for an aggregate query: the largest price among matching rows.

Each output row contributes its value when its Boolean lineage holds, and
MAX combines them. The compiled tree tracks full outcome distributions, so
each variable's marginal effect on the maximum comes out exactly.
"""
from provattr import (
    Bottom, attribute, bnp, brute_counts, compile_aggregate, root_distribution,
    to_text,
)

expr = bnp([("a1 m3 | a2 m3 | a3 m3", 377),
            ("a1 m2 | a3 m2", 322),
            ("a4 m1", 176)], "max")
print("lineage:", expr)

tree = compile_aggregate(expr)
print("tree:   ", to_text(tree))

dist = root_distribution(tree, universe=expr.universe)
shown = {("none" if k is Bottom else str(k)): v for k, v in dist.items()}
print("valuations per outcome:", shown)
assert dist == brute_counts(expr)["outcomeCounts"]

for method in ("gradient", "counts"):
    report = attribute(expr, method=method)
    print(f"\n{method} method")
    for x in report.variables():
        print(f"  {x:4} banzhaf={report.banzhaf[x]!s:>6}  shapley={report.shapley[x]}")
    print("  efficiency gap:", report.efficiency_gap(expr))

# SUM is linear, so it needs no tree at all
total = attribute(bnp(list(zip(["a1 m3 | a2 m3 | a3 m3", "a1 m2 | a3 m2", "a4 m1"],
                              [377, 322, 176])), "sum"))
print("\nSUM version, Shapley:", {x: str(v) for x, v in total.shapley.items()})
