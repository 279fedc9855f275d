"""Command-line interface: ``provattr <subcommand> ...``.

Exit codes: 0 success, 2 input error, 3 timeout, 4 internal invariant
violation. Every failure prints one line ``ERROR[<code>]: <message>`` to
stderr.
"""
from __future__ import annotations

import argparse
import concurrent.futures as cf
import csv
import os
import sys
import time
from pathlib import Path

import numpy as np

from .attribution import METHODS, attribute
from .compile import compile_lineage
from .dtree import check_structure, tree_stats
from .errors import AttributionTimeout, ContractViolation, Deadline, LineageError
from .io import (
    GeneratorParams, dot_export, dumps_generated, load_lineage, loads_lineage,
    render_report,
)

EXIT_OK, EXIT_INPUT, EXIT_TIMEOUT, EXIT_INTERNAL = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_input(path):
    if path in (None, "-"):
        return loads_lineage(sys.stdin.read())
    return load_lineage(path)


def _emit(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _add_io(p, output=True):
    p.add_argument("-i", "--input", help="lineage file (.json or .dnf); stdin when omitted")
    if output:
        p.add_argument("-o", "--output", help="output file; stdout when omitted")
        p.add_argument("--format", choices=("csv", "json"), default="csv")


def _cmd_measure(args, measure: str) -> int:
    psi = _read_input(args.input)
    report = attribute(psi, (measure,), args.method, not args.no_lift, args.timeout_secs)
    _emit(render_report(report, args.format), args.output)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    psi = _read_input(args.input)
    from .oracle import brute_banzhaf, brute_shapley
    from .attribution import AttributionReport
    report = AttributionReport(brute_banzhaf(psi, cap=args.cap),
                               brute_shapley(psi, cap=args.cap), {"method": "oracle"})
    _emit(render_report(report, args.format), args.output)
    return EXIT_OK


def _cmd_compile(args) -> int:
    psi = _read_input(args.input)
    tree = compile_lineage(psi, not args.no_lift, Deadline(args.timeout_secs))
    check_structure(tree)
    if args.dot:
        dot_export(tree, args.dot, psi.universe)
    if args.stats or not args.dot:
        st = tree_stats(tree)
        gates = " ".join(f"{k}={v}" for k, v in st.gates.items())
        print(f"size={st.size} dag_size={st.dag_size} depth={st.depth} "
              f"vars={st.var_count} {gates}")
    return EXIT_OK


def _cmd_gen(args) -> int:
    params = GeneratorParams(
        vars=args.vars, clauses=args.clauses, width=args.width,
        duplication=args.duplication,
        values=tuple(args.values) if args.values else None,
        monoid=args.monoid, terms=args.terms, seed=args.seed)
    _emit(dumps_generated(params), args.output)
    return EXIT_OK


# -- bench ------------------------------------------------------------------

BENCH_COLUMNS = ("instance", "variables", "tree_size", "runtime_secs", "status")


def _bench_one(path: str, method: str, lifting: bool, timeout) -> dict:
    row = {"instance": Path(path).name, "variables": "", "tree_size": "",
           "runtime_secs": "", "status": "ok"}
    start = time.perf_counter()
    try:
        psi = load_lineage(path)
        row["variables"] = len(psi.universe)
        report = attribute(psi, ("banzhaf",), method, lifting, timeout)
        row["tree_size"] = report.meta.get("tree_size", "")
    except AttributionTimeout:
        row["status"] = "timeout"
    except LineageError:
        row["status"] = "input_error"
    except (ContractViolation, AssertionError):
        row["status"] = "internal_error"
    row["runtime_secs"] = f"{time.perf_counter() - start:.6f}"
    return row


def _jobs(flag) -> int:
    if flag:
        return flag
    env = os.environ.get("ATTR_JOBS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise LineageError(f"ATTR_JOBS must be an integer, got {env!r}") from None
        if n < 1:
            raise LineageError("ATTR_JOBS must be positive")
        return n
    return os.cpu_count() or 1


def percentile_summary(runtimes) -> dict:
    if not len(runtimes):
        return {}
    arr = np.asarray(runtimes, dtype=float)
    out = {f"p{q}": float(np.percentile(arr, q)) for q in (50, 90, 95, 99)}
    out["max"] = float(arr.max())
    return out


def _cmd_bench(args) -> int:
    corpus = Path(args.dir)
    if not corpus.is_dir():
        raise LineageError(f"corpus directory {corpus} does not exist")
    files = sorted(str(p) for p in corpus.iterdir()
                   if p.suffix.lower() in (".json", ".dnf"))
    if not files:
        raise LineageError(f"no .json or .dnf instances in {corpus}")
    jobs = _jobs(args.jobs)
    lifting = not args.no_lift
    if jobs == 1:
        rows = [_bench_one(f, args.method, lifting, args.timeout_secs) for f in files]
    else:
        with cf.ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_bench_one, files, [args.method] * len(files),
                                 [lifting] * len(files), [args.timeout_secs] * len(files)))
    import io as _io
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    _emit(buf.getvalue(), args.output)
    ok = [float(r["runtime_secs"]) for r in rows if r["status"] == "ok"]
    summary = percentile_summary(ok)
    line = " ".join(f"{k}={v:.6f}" for k, v in summary.items())
    print(f"# instances={len(rows)} ok={len(ok)} {line}".rstrip(), file=sys.stderr)
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="provattr", description="Exact Banzhaf/Shapley attribution for lineage.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    for name in ("banzhaf", "shapley"):
        p = sub.add_parser(name, help=f"{name} values of every variable")
        _add_io(p)
        p.add_argument("--method", choices=METHODS, default="gradient")
        p.add_argument("--no-lift", action="store_true", help="compile without lifting")
        p.add_argument("--timeout-secs", type=float, default=None)
        p.set_defaults(func=lambda a, m=name: _cmd_measure(a, m))

    p = sub.add_parser("compile", help="compile lineage and report tree statistics")
    _add_io(p, output=False)
    p.add_argument("--dot", help="write the tree as a DOT digraph")
    p.add_argument("--stats", action="store_true")
    p.add_argument("--no-lift", action="store_true")
    p.add_argument("--timeout-secs", type=float, default=None)
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("oracle", help="brute-force Banzhaf and Shapley values")
    _add_io(p)
    p.add_argument("--cap", type=int, default=24, help="refuse more variables than this")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("gen", help="generate a synthetic lineage file")
    p.add_argument("--vars", type=int, required=True)
    p.add_argument("--clauses", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--duplication", type=int, default=1)
    p.add_argument("--values", type=int, nargs=2, metavar=("LOW", "HIGH"))
    p.add_argument("--monoid", choices=("sum", "count", "max", "min"))
    p.add_argument("--terms", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("bench", help="time attribution over a corpus directory")
    p.add_argument("--dir", required=True)
    p.add_argument("--jobs", type=int, default=None, help="workers (default: $ATTR_JOBS or cores)")
    p.add_argument("--method", choices=METHODS, default="gradient")
    p.add_argument("--no-lift", action="store_true")
    p.add_argument("--timeout-secs", type=float, default=None)
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_bench)
    return parser


def _fail(code: int, message: str) -> int:
    first = str(message).strip().splitlines()[0] if str(message).strip() else "failed"
    print(f"ERROR[{code}]: {first}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as e:
        return _fail(EXIT_INPUT, e)
    except AttributionTimeout as e:
        return _fail(EXIT_TIMEOUT, e)
    except LineageError as e:
        return _fail(EXIT_INPUT, e)
    except OSError as e:
        return _fail(EXIT_INPUT, f"{e.filename or ''}: {e.strerror or e}".lstrip(": "))
    except (ContractViolation, AssertionError) as e:
        return _fail(EXIT_INTERNAL, f"internal invariant violated: {e}")
    except RecursionError:
        return _fail(EXIT_INTERNAL, "recursion limit exceeded")


if __name__ == "__main__":
    sys.exit(main())
