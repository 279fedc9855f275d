"""Lineage files, attribution reports, synthetic instances and DOT export.

Lineage files are JSON::

    {"type": "dnf", "variables": [...], "clauses": [["x", "y"], ["z"]]}
    {"type": "aggregate", "monoid": "max",
     "terms": [{"clauses": [["a4", "m1"]], "value": "176"}, ...]}

A ``.dnf`` file is plain text with one clause per line and whitespace
separated variables; blank lines and ``#`` comments are skipped.
"""
from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .attribution import AttributionReport, node_annotations
from .dtree import (
    BottomLeaf, ConstLeaf, DTree, Shannon, ValueLeaf, VarLeaf,
)
from .errors import LineageError
from .lifting import check_names
from .lineage import (
    BnpExpression, DnfFormula, Monoid, MonoidKind, canonicalize, check_name,
    to_fraction,
)


# -- numbers ------------------------------------------------------------------

def format_number(q) -> str:
    """Exact decimal text when the rational has one, else ``num/den``."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    d = q.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{q.numerator}/{q.denominator}"
    digits = max(twos, fives)
    scaled = abs(q.numerator) * 10 ** digits // q.denominator
    sign = "-" if q < 0 else ""
    whole, frac = divmod(scaled, 10 ** digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def parse_number(text) -> Fraction:
    if isinstance(text, bool):
        raise LineageError(f"not a numeric value: {text!r}")
    if isinstance(text, (int, float)):
        return to_fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise LineageError(f"not an exact numeric value: {text!r}") from None


# -- lineage files --------------------------------------------------------------

def _clauses(raw, where: str) -> tuple:
    if not isinstance(raw, list):
        raise LineageError(f"{where}: clauses must be a list of lists")
    out = []
    for i, c in enumerate(raw):
        if not isinstance(c, list) or not c:
            raise LineageError(f"{where}: clause {i} must be a non-empty list of names")
        for x in c:
            check_name(x)
        out.append(frozenset(c))
    return tuple(out)


def lineage_from_dict(data: dict):
    """Build lineage from a parsed ``LineageFile`` mapping."""
    if not isinstance(data, dict):
        raise LineageError("lineage file must hold a JSON object")
    kind = data.get("type")
    universe = data.get("variables")
    if universe is not None:
        if not isinstance(universe, list):
            raise LineageError("'variables' must be a list of names")
        for x in universe:
            check_name(x)
        universe = frozenset(universe)
    if kind == "dnf":
        phi = DnfFormula(_clauses(data.get("clauses"), "dnf"), universe)
        check_names(phi.universe)
        return canonicalize(phi)
    if kind == "aggregate":
        monoid = Monoid.of(data.get("monoid"))
        raw_terms = data.get("terms")
        if not isinstance(raw_terms, list):
            raise LineageError("aggregate: 'terms' must be a list")
        terms = []
        for i, t in enumerate(raw_terms):
            if not isinstance(t, dict):
                raise LineageError(f"aggregate: term {i} must be an object")
            clauses = _clauses(t.get("clauses"), f"term {i}")
            if "value" in t:
                value = parse_number(t["value"])
            elif monoid.kind is MonoidKind.COUNT:
                value = Fraction(1)
            else:
                raise LineageError(f"term {i}: missing 'value'")
            terms.append((canonicalize(DnfFormula(clauses)), value))
        expr = BnpExpression(tuple(terms), monoid, universe)
        check_names(expr.universe)
        return expr
    raise LineageError(f"unknown lineage type {kind!r} (expected 'dnf' or 'aggregate')")


def lineage_to_dict(psi) -> dict:
    def clause_list(phi):
        return [sorted(c) for c in phi.clauses]

    if isinstance(psi, DnfFormula):
        return {"type": "dnf", "variables": sorted(psi.universe),
                "clauses": clause_list(psi)}
    return {"type": "aggregate", "monoid": psi.monoid.kind.value,
            "variables": sorted(psi.universe),
            "terms": [{"clauses": clause_list(phi), "value": format_number(m)}
                      for phi, m in psi.terms]}


def parse_dnf_text(text: str) -> DnfFormula:
    clauses = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            names = [check_name(x) for x in line.split()]
        except LineageError as e:
            raise LineageError(f"line {lineno}: {e}") from None
        clauses.append(frozenset(names))
    phi = DnfFormula(tuple(clauses))
    check_names(phi.universe)
    return canonicalize(phi)


def loads_lineage(text: str, suffix: str = ".json"):
    if suffix == ".dnf":
        return parse_dnf_text(text)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise LineageError(f"malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
    return lineage_from_dict(data)


def load_lineage(path):
    """Read a ``.json`` lineage file or a ``.dnf`` text file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise LineageError(f"cannot read {path}: {e.strerror}") from None
    try:
        return loads_lineage(text, path.suffix.lower())
    except LineageError as e:
        raise LineageError(f"{path}: {e}") from None


def dumps_lineage(psi) -> str:
    return json.dumps(lineage_to_dict(psi), indent=1, sort_keys=True) + "\n"


def save_lineage(psi, path) -> None:
    Path(path).write_text(dumps_lineage(psi))


# -- reports --------------------------------------------------------------------

CSV_COLUMNS = ("variable", "banzhaf", "shapley_num", "shapley_den", "shapley_float")


def report_rows(report: AttributionReport) -> list:
    rows = []
    for x in report.variables():
        b = report.banzhaf.get(x)
        s = report.shapley.get(x)
        s = None if s is None else Fraction(s)
        rows.append({
            "variable": x,
            "banzhaf": "" if b is None else format_number(b),
            "shapley_num": "" if s is None else str(s.numerator),
            "shapley_den": "" if s is None else str(s.denominator),
            # display only; the exact value is num/den
            "shapley_float": "" if s is None else repr(float(s)),
        })
    return rows


def report_to_dict(report: AttributionReport) -> dict:
    return {
        "banzhaf": {x: format_number(v) for x, v in sorted(report.banzhaf.items())},
        "shapley": {x: format_number(v) for x, v in sorted(report.shapley.items())},
        "meta": report.meta,
    }


def report_from_dict(data: dict) -> AttributionReport:
    return AttributionReport(
        {x: _exact(v) for x, v in data.get("banzhaf", {}).items()},
        {x: parse_number(v) for x, v in data.get("shapley", {}).items()},
        dict(data.get("meta", {})))


def _exact(text):
    q = parse_number(text)
    return q.numerator if q.denominator == 1 and "/" not in text and "." not in text else q


def render_report(report: AttributionReport, fmt: str = "csv") -> str:
    if fmt == "json":
        return json.dumps(report_to_dict(report), indent=1, sort_keys=True) + "\n"
    if fmt != "csv":
        raise LineageError(f"unknown report format {fmt!r}")
    import io as _io
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(report_rows(report))
    return buf.getvalue()


def write_report(report: AttributionReport, fmt: str, path) -> None:
    """Write a report as ``csv`` or ``json``; raises ``OSError`` if unwritable."""
    text = render_report(report, fmt)
    Path(path).write_text(text)


def read_report(path) -> AttributionReport:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        return AttributionReport(
            {r["variable"]: _exact(r["banzhaf"]) for r in rows if r["banzhaf"]},
            {r["variable"]: Fraction(int(r["shapley_num"]), int(r["shapley_den"]))
             for r in rows if r["shapley_num"]})
    return report_from_dict(json.loads(path.read_text()))


# -- generator ------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorParams:
    """Synthetic lineage shape.

    ``vars`` base variables are drawn into ``clauses`` clauses of at most
    ``width`` variables. Each base variable is then replaced by
    ``duplication`` symmetric copies, either as a disjunction (the copies
    replicate its clauses) or as a conjunction (the copies all join its
    clauses). With ``monoid`` set, clauses are dealt into ``terms``
    aggregate terms with integer values from ``values``.
    """

    vars: int
    clauses: int
    width: int
    duplication: int = 1
    values: tuple | None = None
    monoid: str | None = None
    terms: int = 3
    seed: int = 0

    def validate(self) -> None:
        if self.vars < 1 or self.clauses < 1 or self.width < 1:
            raise LineageError("vars, clauses and width must be positive")
        if self.width > self.vars:
            raise LineageError(f"width {self.width} exceeds vars {self.vars}")
        if self.duplication < 1:
            raise LineageError("duplication must be at least 1")
        if self.monoid is not None:
            Monoid.of(self.monoid)
            if self.terms < 1:
                raise LineageError("terms must be positive")
        if self.values is not None and (len(self.values) != 2 or self.values[0] > self.values[1]):
            raise LineageError("values must be a (low, high) range")


def _expand_copies(clauses: list, copies: dict) -> list:
    """Replace each base variable by its copies (``("or"|"and", names)``)."""
    out = [frozenset()]
    for c in clauses:
        expanded = [frozenset()]
        for x in sorted(c):
            how, names = copies[x]
            if how == "and":
                expanded = [e | frozenset(names) for e in expanded]
            else:
                expanded = [e | {n} for e in expanded for n in names]
        out.extend(expanded)
    return out[1:]


def generate(params: GeneratorParams) -> dict:
    """Deterministic synthetic ``LineageFile`` mapping for ``params``."""
    params.validate()
    rng = random.Random(params.seed)
    base = [f"v{i}" for i in range(params.vars)]
    clauses = []
    for _ in range(params.clauses):
        # singleton clauses would absorb most of the formula
        k = rng.randint(min(2, params.width), params.width)
        clauses.append(frozenset(rng.sample(base, k)))
    copies = {}
    for x in base:
        how = rng.choice(("or", "and"))
        names = [x] if params.duplication == 1 else \
            [f"{x}.{j}" for j in range(params.duplication)]
        copies[x] = (how, names)

    if params.monoid is None:
        out = _expand_copies(clauses, copies)
        universe = sorted(frozenset().union(*out))
        return {"type": "dnf", "variables": universe,
                "clauses": sorted(sorted(c) for c in set(out))}

    monoid = Monoid.of(params.monoid)
    lo, hi = params.values or (1, 9)
    n_terms = min(params.terms, len(clauses))
    buckets = [[] for _ in range(n_terms)]
    for i, c in enumerate(clauses):
        # every term gets at least one clause
        buckets[i if i < n_terms else rng.randrange(n_terms)].append(c)
    terms, universe = [], set()
    for b in buckets:
        out = _expand_copies(b, copies)
        universe.update(*out)
        value = 1 if monoid.kind is MonoidKind.COUNT else rng.randint(lo, hi)
        terms.append({"clauses": sorted(sorted(c) for c in set(out)), "value": str(value)})
    return {"type": "aggregate", "monoid": monoid.kind.value,
            "variables": sorted(universe), "terms": terms}


def dumps_generated(params: GeneratorParams) -> str:
    return json.dumps(generate(params), indent=1, sort_keys=True) + "\n"


# -- DOT --------------------------------------------------------------------------

_GATE = {"or": "⊕", "and": "⊙", "shannon": "⊔", "scalar": "⊗"}


def _label(node: DTree) -> str:
    if isinstance(node, VarLeaf):
        return node.name
    if isinstance(node, ValueLeaf):
        return format_number(node.value)
    if isinstance(node, ConstLeaf):
        return "1" if node.value else "0"
    if isinstance(node, BottomLeaf):
        return "⊥"
    return _GATE[node.kind]


def _quote(s: str) -> str:
    s = s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return '"' + s + '"'


def dot_source(root: DTree, universe=None, annotate: bool = True) -> str:
    """DOT digraph of the tree with one node per tree position (shared
    sub-trees are drawn once per use). Boolean trees get ``p`` and ``g``
    annotations when ``annotate`` is set."""
    notes = node_annotations(root, universe) if annotate and not root.semimodule else {}
    lines = ["digraph dtree {", "  node [shape=plaintext];"]
    counter = 0

    def emit(node) -> str:
        nonlocal counter
        name = f"n{counter}"
        counter += 1
        label = _label(node)
        if isinstance(node, Shannon):
            label = "⊔"
        if id(node) in notes:
            p, g = notes[id(node)]
            label += f"\np={float(p):g}, g={format_number(g)}"
        lines.append(f"  {name} [label={_quote(label)}];")
        kids = node.children()
        for i, k in enumerate(kids):
            child = emit(k)
            style = ' [style=dashed, label="cond"]' if isinstance(node, Shannon) and i == 0 else \
                ' [label="1"]' if isinstance(node, Shannon) and i == 1 else \
                ' [label="0"]' if isinstance(node, Shannon) else ""
            lines.append(f"  {name} -> {child}{style};")
        return name

    emit(root)
    lines.append("}")
    return "\n".join(lines) + "\n"


def dot_export(root: DTree, path, universe=None, annotate: bool = True) -> None:
    Path(path).write_text(dot_source(root, universe, annotate))

