"""Command-line front end.

    mixquant quantize --spec sec2 --n 2 --method closed-form
    mixquant repro 'sec2.*'
    mixquant sweep --spec sec5 --n-max 100 --s log2/log3
    mixquant dimension --spec sec2 --ns 5:1001

Exit codes: 0 success, 1 a reproduction case failed, 2 the command line or a
measure spec could not be parsed, 3 the request is outside a method's scope.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import asymptotics as asy
from . import catalog
from .atomizer import BudgetTooSmall, atomize
from .closed_form import ScopeError, closed_form, optimal_error, two_cantor_alloc
from .lloyd import solve
from .measures import AtomSet, Mixture, SelfSimilarMeasure, UniformSegment, voronoi_boundaries
from .oracle import certify, optimal_quantizer
from .repro import Runner, load_manifest, run_cases, select

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_SCOPE = 0, 1, 2, 3
LLOYD_CAP = 64


class SpecError(ValueError):
    """A measure spec that does not describe a valid measure."""


# --- measure specs -------------------------------------------------------


def _number(value, where):
    if isinstance(value, bool):
        raise SpecError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, str)):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise SpecError(f"{where}: cannot read {value!r} as a number") from None
    if isinstance(value, float):
        return Fraction(repr(value))  # the decimal as written, not the binary float
    raise SpecError(f"{where}: expected a number, got {value!r}")


def _pairs(value, where):
    if not isinstance(value, list) or not all(isinstance(p, list) and len(p) == 2 for p in value):
        raise SpecError(f"{where}: expected a list of [a, b] pairs")
    return [(_number(a, where), _number(b, where)) for a, b in value]


def parse_measure(obj, where="measure"):
    """Build a measure from the tagged-union spec tree."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise SpecError(f"{where}: expected an object with a 'type' field")
    kind = obj["type"]
    try:
        if kind == "uniform":
            return UniformSegment(_number(obj["lo"], where), _number(obj["hi"], where))
        if kind == "atoms":
            return AtomSet(tuple(_pairs(obj["atoms"], where)))
        if kind == "ifs":
            probs = [_number(p, where) for p in obj["probs"]]
            base = tuple(_number(b, where) for b in obj["base"])
            return SelfSimilarMeasure(tuple(_pairs(obj["maps"], where)), tuple(probs), base)
        if kind == "mixture":
            comps = []
            for i, item in enumerate(obj["components"]):
                sub = f"{where}.components[{i}]"
                comps.append((parse_measure(item["measure"], sub), _number(item["weight"], sub)))
            return Mixture(tuple(comps))
    except KeyError as exc:
        raise SpecError(f"{where}: missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"{where}: {exc}") from None
    raise SpecError(f"{where}: unknown type {kind!r} (expected uniform, atoms, ifs or mixture)")


def load_spec(ref: str):
    """``(measure_id, measure)`` from a file path or a bundled name like ``sec2``."""
    path = Path(ref)
    if path.is_file():
        text = path.read_text()
    else:
        name = path.name if path.suffix == ".json" else f"{ref}.json"
        bundled = resources.files("mixquant").joinpath("data").joinpath(name)
        if not bundled.is_file():
            raise SpecError(f"no spec file {ref!r} and no bundled measure of that name")
        text = bundled.read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{ref}: invalid JSON ({exc})") from None
    m = parse_measure(obj)
    return obj.get("id") or catalog.identify(m), m


# --- rendering -----------------------------------------------------------


def render(x) -> str:
    """Fractions as ``p/q (decimal)``, floats to 10 significant digits."""
    if isinstance(x, Fraction):
        exact = str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
        return f"{exact} ({float(x):.10g})"
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def emit(fmt: str, record: dict, rows: list | None = None, columns: list | None = None, out=None) -> None:
    """Write a record (text/json) or a table (csv) deterministically."""
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(_jsonable(record), indent=2) + "\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([render(v) if v is not None else "" for v in row])
    else:
        for key, value in record.items():
            if isinstance(value, list) and value and isinstance(value[0], dict):
                out.write(f"{key}:\n")
                for item in value:
                    out.write("  " + "  ".join(f"{k}={render(v)}" for k, v in item.items()) + "\n")
            elif isinstance(value, list):
                out.write(f"{key}: " + ", ".join(render(v) for v in value) + "\n")
            else:
                out.write(f"{key}: {render(value)}\n")


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Fraction):
        return render(value)
    if isinstance(value, float):
        return float(f"{value:.10g}") if math.isfinite(value) else str(value)
    return value


# --- commands ------------------------------------------------------------


def cmd_quantize(args) -> int:
    mid, m = load_spec(args.spec)
    if args.n < 1:
        raise ScopeError("n must be at least 1")
    record = {"measure": mid or args.spec, "n": args.n, "method": args.method}
    if args.method == "closed-form":
        res = closed_form(m, args.n)
        cps, err = list(res.codepoints), res.error
    elif args.method == "lloyd":
        runs = solve(m, args.n, args.starts, args.seed, **_lloyd_kw(args))
        done = [r for r in runs if r.converged]
        top = (done or runs)[0]
        cps, err = list(top.final.codepoints), top.final.error
        record["fixed_points"] = len(done)
        record["converged"] = top.converged
    else:
        atoms = atomize(m, args.atoms, depth=args.depth)
        if args.n > len(atoms):
            raise ScopeError(f"n={args.n} exceeds the {len(atoms)} atoms of the approximation")
        dp = optimal_quantizer(atoms, args.n)
        cps, err = list(dp.codepoints), dp.error
        record["atoms"] = len(atoms)
        record["bound"] = atoms.error_bound(dp.error)
    record["codepoints"] = cps
    record["boundaries"] = voronoi_boundaries(cps)
    record["error"] = err
    rows = [("codepoint", i + 1, x) for i, x in enumerate(cps)]
    rows += [("boundary", i + 1, b) for i, b in enumerate(record["boundaries"])]
    rows.append(("error", None, err))
    emit(args.format, record, rows, ["kind", "index", "value"])
    return EXIT_OK


def cmd_repro(args) -> int:
    cases = select(load_manifest(args.manifest), args.filter)
    if not cases:
        print(f"no reproduction case matches {args.filter!r}", file=sys.stderr)
        return EXIT_FAIL
    runner = Runner(seed=args.seed, starts=args.starts, atoms=args.atoms,
                    depth=12 if args.depth is None else args.depth, tol=args.tol)
    results = run_cases(cases, runner)
    table = []
    for r in results:
        table.append({
            "id": r.id,
            "status": "PASS" if r.passed else "FAIL",
            "measured": r.measured,
            "expected": r.expected,
            "margin": float(r.margin),
            "notes": "; ".join(r.notes),
            "anchor": r.anchor,
        })
    failed = [r for r in results if not r.passed]
    if args.format == "text":
        for row in table:
            print(f"{row['status']}  {row['id']:<20} measured {render(row['measured'])}  "
                  f"expected {render(row['expected'])}  margin {row['margin']:.3g}")
            if row["notes"]:
                print(f"      {row['notes']}")
            if row["status"] == "FAIL":
                print(f"      contradicts: {row['anchor']}")
        print(f"{len(results) - len(failed)}/{len(results)} cases passed")
    else:
        cols = list(table[0])
        emit(args.format, {"cases": table}, [list(r.values()) for r in table], cols)
    return EXIT_FAIL if failed else EXIT_OK


def _lloyd_kw(args) -> dict:
    return {} if args.tol is None else {"tol": args.tol}


def sweep_rows(mid, m, n_max: int, s: float, *, seed=0, starts=64, atoms=4096, depth=12, tol=None):
    """One row per ``n``: error, dimension estimate, scaled error, method, split."""
    rows = []
    for n in range(1, n_max + 1):
        split = ""
        try:
            v = optimal_error(m, n)
            method = "closed-form"
            if mid == "sec7" and n >= 2:
                a = two_cantor_alloc(n)
                split = f"({a.n1},{a.n2})"
        except ScopeError:
            if n > LLOYD_CAP:
                rows.append((n, None, None, None, "none", split))
                continue
            kw = {} if tol is None else {"tol": tol}
            run = next(r for r in solve(m, n, starts, seed, **kw) if r.converged)
            v = run.final.error
            cert = certify(m, n, v, budget=atoms, depth=depth)
            method = "lloyd+oracle" if cert.ok else "lloyd(uncertified)"
        seq = asy.AsymSeq(((n, v),))
        dim = seq.dim_estimates()[0]
        rows.append((n, v, dim, seq.coeffs(s)[0], method, split))
    return rows


def cmd_sweep(args) -> int:
    mid, m = load_spec(args.spec)
    if args.n_max < 2:
        raise ScopeError("sweep needs --n-max >= 2")
    rows = sweep_rows(mid, m, args.n_max, args.s, seed=args.seed, starts=args.starts,
                      atoms=args.atoms, depth=12 if args.depth is None else args.depth, tol=args.tol)
    cols = ["n", "V_n", "dim_estimate", "scaled_error", "method", "split"]
    if args.out:
        with open(args.out, "w", newline="") as fh:
            emit("csv", {}, rows, cols, out=fh)
        return EXIT_OK
    fmt = "csv" if args.format == "text" else args.format
    emit(fmt, {"rows": [dict(zip(cols, r)) for r in rows]}, rows, cols)
    return EXIT_OK


def _parse_ns(text: str) -> list:
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        return list(range(*parts))
    return [int(p) for p in text.split(",")]


def cmd_dimension(args) -> int:
    mid, m = load_spec(args.spec)
    if args.along:
        if mid != "sec7":
            raise ScopeError("--along F|G applies to the two-Cantor measure only")
        seq = asy.two_cantor_sequence(args.along, _parse_ns(args.ks))
    else:
        seq = asy.error_sequence(m, _parse_ns(args.ns))
    lower, upper = asy.dimension_estimate(seq)
    coeffs = seq.coeffs(args.s)
    record = {
        "measure": mid or args.spec,
        "entries": len(seq),
        "n_last": seq.ns[-1],
        "dimension_lower": lower,
        "dimension_upper": upper,
        "s": args.s,
        "scaled_error_last": coeffs[-1],
        "scaled_error_band": [min(coeffs[len(coeffs) // 2:]), max(coeffs[len(coeffs) // 2:])],
    }
    rows = [(n, v, d, c) for (n, v), d, c in zip(seq.entries, seq.dim_estimates(), coeffs)]
    emit(args.format, record, rows, ["n", "V_n", "dim_estimate", "scaled_error"])
    return EXIT_OK


# --- argument parsing ----------------------------------------------------


def parse_exponent(text: str) -> float:
    """``1``, ``0.63``, ``2/3`` or ``log2/log3``."""
    t = text.replace(" ", "")
    if t.startswith("log") and "/log" in t:
        a, b = t[3:].split("/log")
        return math.log(float(a)) / math.log(float(b))
    try:
        value = float(Fraction(t))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"cannot read exponent {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("exponent must be positive")
    return value


def _globals(parser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--format", choices=["json", "csv", "text"], default=d("text"))
    parser.add_argument("--seed", type=int, default=d(0), help="seed for Lloyd starts")
    parser.add_argument("--atoms", type=int, default=d(4096), help="atom budget for the oracle")
    parser.add_argument("--depth", type=int, default=d(None),
                        help="cylinder depth of self-similar parts when atomizing")
    parser.add_argument("--tol", type=float, default=d(None), help="Lloyd residual tolerance")
    parser.add_argument("--starts", type=int, default=d(64), help="Lloyd random starts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixquant", description="Optimal quantizers of 1-D mixtures.",
                                     allow_abbrev=False)
    _globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    _globals(common, suppress=True)

    q = sub.add_parser("quantize", parents=[common], allow_abbrev=False, help="optimal codebook for one n")
    q.add_argument("--spec", required=True, help="spec file or bundled name (sec2, sec3a, sec3b, sec5, sec7)")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--method", choices=["closed-form", "lloyd", "oracle"], default="closed-form")
    q.set_defaults(func=cmd_quantize)

    r = sub.add_parser("repro", parents=[common], allow_abbrev=False, help="run bundled reproduction cases")
    r.add_argument("filter", nargs="?", default="*", help="glob over case ids")
    r.add_argument("--manifest", default=None, help="alternative manifest file")
    r.set_defaults(func=cmd_repro)

    s = sub.add_parser("sweep", parents=[common], allow_abbrev=False, help="error table for n = 1 .. n_max")
    s.add_argument("--spec", required=True)
    s.add_argument("--n-max", type=int, required=True)
    s.add_argument("--s", type=parse_exponent, default=1.0, help="exponent of n^(2/s) V_n")
    s.add_argument("--out", default=None, help="write CSV here instead of stdout")
    s.set_defaults(func=cmd_sweep)

    d = sub.add_parser("dimension", parents=[common], allow_abbrev=False, help="dimension and coefficient diagnostics")
    d.add_argument("--spec", required=True)
    d.add_argument("--ns", default="2:201", help="range a:b[:step] or comma list")
    d.add_argument("--along", choices=["F", "G"], default=None, help="two-Cantor subsequence")
    d.add_argument("--ks", default="1:5", help="k values for --along")
    d.add_argument("--s", type=parse_exponent, default=1.0)
    d.set_defaults(func=cmd_dimension)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ScopeError, BudgetTooSmall) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCOPE


if __name__ == "__main__":
    sys.exit(main())
