"""Run the bundled reproduction manifest."""

from __future__ import annotations

import fnmatch
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from . import asymptotics as asy
from . import catalog
from .closed_form import (
    closed_form,
    optimal_error,
    small_n_table,
    uniform_plus_endpoint_optimal,
)
from .lloyd import best, solve
from .oracle import Certificate, all_optimal_counts
from .atomizer import atomize


@dataclass(frozen=True)
class ReproCase:
    id: str
    measure_id: str
    n: int | None
    method: str
    tolerance: float
    anchor: str
    origin: str
    check: str = "error"
    expected_codebooks: tuple = ()
    expected_error: str | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, obj: dict) -> "ReproCase":
        obj = dict(obj)
        known = {k: obj.pop(k) for k in list(obj) if k in cls.__dataclass_fields__}
        known["expected_codebooks"] = tuple(tuple(cb) for cb in known.get("expected_codebooks", ()))
        known.setdefault("tolerance", 0)
        known.setdefault("n", None)
        return cls(**known, extra=obj)


@dataclass(frozen=True)
class CaseResult:
    id: str
    passed: bool
    measured: object
    expected: object
    margin: float
    anchor: str
    notes: tuple = ()


def load_manifest(path=None) -> list:
    if path is None:
        text = resources.files("mixquant").joinpath("data").joinpath("manifest.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return sorted((ReproCase.from_json(c) for c in json.loads(text)["cases"]), key=lambda c: c.id)


def select(cases, pattern: str) -> list:
    return [c for c in cases if fnmatch.fnmatchcase(c.id, pattern)]


def num(text):
    """``"p/q"`` and integers stay exact; decimals such as ``"0.0106152"`` become floats."""
    if isinstance(text, str):
        return float(text) if any(c in text for c in ".eE") else Fraction(text)
    return text


def _close(measured, expected, tol) -> tuple:
    """``(ok, margin)``; zero tolerance demands exact equality."""
    if tol == 0:
        ok = measured == expected
        return ok, 0.0 if ok else -abs(float(measured) - float(expected))
    diff = abs(float(measured) - float(expected))
    return diff <= tol, tol - diff


def _match_codebooks(found: list, expected: tuple, tol) -> tuple:
    """Every expected codebook must equal one found codebook (and vice versa)."""
    margins = []
    for want in expected:
        want = [num(x) for x in want]
        scores = []
        for cb in found:
            if len(cb) != len(want):
                continue
            pairs = [_close(a, b, tol) for a, b in zip(cb, want)]
            scores.append((all(ok for ok, _ in pairs), min(m for _, m in pairs)))
        if not scores or not any(ok for ok, _ in scores):
            return False, min((m for _, m in scores), default=-math.inf)
        margins.append(max(m for ok, m in scores if ok))
    return len(found) == len(expected), min(margins, default=0.0)


class Runner:
    def __init__(self, *, seed: int = 0, starts: int = 64, atoms: int = 4096,
                 depth: int | None = 12, tol: float | None = None):
        self.seed, self.starts, self.atoms, self.depth = seed, starts, atoms, depth
        self.lloyd_kw = {} if tol is None else {"tol": tol}
        self._tables = {}

    def dp(self, measure_id: str, n: int):
        """``(atoms, DPResult)`` with one shared table per measure."""
        atoms, table = self._tables.get(measure_id, (None, []))
        if len(table) < n:
            atoms = atomize(catalog.MEASURES[measure_id], self.atoms, depth=self.depth)
            table = all_optimal_counts(atoms, max(n, 8), exact=False)
            self._tables[measure_id] = (atoms, table)
        return atoms, table[n - 1]

    def run(self, case: ReproCase) -> CaseResult:
        handler = getattr(self, "_" + case.check.replace("-", "_"))
        return handler(case, catalog.MEASURES[case.measure_id])

    def _result(self, case, ok, measured, expected, margin, notes=()):
        return CaseResult(case.id, bool(ok), measured, expected, margin, case.anchor, tuple(notes))

    def _certify(self, case, m, err, notes):
        if not case.extra.get("certify"):
            return True, math.inf
        atoms, dp = self.dp(case.measure_id, case.n)
        cert = Certificate(float(err), float(dp.error), atoms.error_bound(dp.error), len(atoms))
        notes.append(f"oracle {cert.dp_error:.10g} on {cert.atoms} atoms, bound {cert.bound:.3g}")
        return cert.ok, cert.margin

    def _error(self, case, m):
        notes = []
        if case.method == "closed-form":
            if case.measure_id in ("sec2", "sec5") and case.n <= 4:
                found = small_n_table(case.measure_id, case.n)
            else:
                found = [closed_form(m, case.n)]
        elif case.method == "lloyd":
            runs = solve(m, case.n, self.starts, self.seed, **self.lloyd_kw)
            top = runs[0].final.error
            found = [r.final for r in runs if r.converged and abs(r.final.error - top) < 1e-10]
        else:
            return self._oracle(case, m)
        err = found[0].error
        want = num(case.expected_error)
        ok_e, margin_e = _close(err, want, case.tolerance)
        ok_c, margin_c = _match_codebooks([r.codepoints for r in found], case.expected_codebooks, case.tolerance)
        ok_o, margin_o = self._certify(case, m, err, notes)
        if not ok_c:
            notes.append("codebooks differ: " + "; ".join(str([float(x) for x in r.codepoints]) for r in found))
        return self._result(case, ok_e and ok_c and ok_o, err, want, min(margin_e, margin_c, margin_o), notes)

    def _oracle(self, case, m):
        atoms, dp = self.dp(case.measure_id, case.n)
        bound = atoms.error_bound(dp.error)
        want = num(case.expected_error)
        diff = abs(dp.error - float(want))
        notes = [f"{len(atoms)} atoms, bound {bound:.3g}"]
        ok = diff <= bound
        if "rejected_error" in case.extra:
            bad = num(case.extra["rejected_error"])
            far = abs(dp.error - float(bad))
            notes.append(f"rejected value {bad} is {far:.3g} away")
            ok = ok and far > bound
        return self._result(case, ok, dp.error, want, bound - diff, notes)

    def _coefficient(self, case, m):
        s = float(num(case.extra.get("s", "1")))
        v = optimal_error(m, case.n)
        scaled = asy.AsymSeq(((case.n, v),)).coeffs(s)[0]
        want = num(case.expected_error)
        ok, margin = _close(scaled, want, case.tolerance)
        return self._result(case, ok, scaled, want, margin)

    def _fixed_points(self, case, m):
        runs = [r for r in solve(m, case.n, self.starts, self.seed, **self.lloyd_kw) if r.converged]
        top = runs[0].final.error
        tied = [r.final for r in runs if abs(r.final.error - top) < 1e-10]
        want = num(case.expected_error)
        ok_e, margin_e = _close(top, want, case.tolerance)
        ok_c, margin_c = _match_codebooks([r.codepoints for r in tied], case.expected_codebooks, case.tolerance)
        count = len(tied)
        notes = [f"{count} optimal fixed points among {len(runs)} distinct"]
        ok = ok_e and ok_c and count == case.extra["expected_count"]
        return self._result(case, ok, top, want, min(margin_e, margin_c), notes)

    def _formula(self, case, m):
        run = best(m, case.n, self.starts, self.seed, **self.lloyd_kw)
        ref = uniform_plus_endpoint_optimal(case.n)
        worst = max(abs(a - b) for a, b in zip(run.final.codepoints, ref.codepoints))
        notes = [f"max codepoint deviation {worst:.3g}"]
        ok_o, margin_o = self._certify(case, m, ref.error, notes)
        ok = worst <= case.tolerance and ok_o
        return self._result(case, ok, run.final.error, ref.error, min(case.tolerance - worst, margin_o), notes)

    def _subsequence_gap(self, case, m):
        s = asy.cantor_dimension(1 / 3)
        k_max, ex = case.extra["k_max"], case.extra["exhaustive_k_max"]
        f_seq = asy.two_cantor_sequence("F", range(1, k_max + 1), ex)
        g_seq = asy.two_cantor_sequence("G", range(1, k_max + 1), ex)
        tf, tg = f_seq.coeffs(s)[-1], g_seq.coeffs(s)[-1]
        gap = asy.subsequence_gap(f_seq, g_seq, s)
        checks = [
            _close(tf, num(case.extra["expected_f"]), case.tolerance),
            _close(tg, num(case.extra["expected_g"]), case.tolerance),
            _close(gap, num(case.extra["expected_gap"]), case.tolerance),
        ]
        notes = [f"F tail {tf:.10g}", f"G tail {tg:.10g}", f"k up to {k_max}"]
        ok = all(c[0] for c in checks) and gap > 0
        return self._result(case, ok, gap, num(case.extra["expected_gap"]), min(c[1] for c in checks), notes)


def run_cases(cases, runner: Runner) -> list:
    return [runner.run(c) for c in sorted(cases, key=lambda c: c.id)]
