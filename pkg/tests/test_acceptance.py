"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

from __future__ import annotations

import math
import subprocess
import sys
import time
from fractions import Fraction as F
from pathlib import Path

import numpy as np

from mixquant import asymptotics as asy
from mixquant.catalog import MEASURES, SEC2, SEC3A, SEC3B, SEC5, SEC7
from mixquant.closed_form import (
    closed_form,
    gl_cantor_optimal,
    gl_index_choices,
    optimal_error,
    small_n_table,
    uniform_plus_endpoint_optimal,
    uniform_plus_midpoint_pair,
    union_rule_optimal,
)
from mixquant.lloyd import solve
from mixquant.oracle import certify_all

BETA = math.log(2) / math.log(3)


def verdict(name: str, failures: list, detail: str = "") -> None:
    status = "PASS" if not failures else "FAIL"
    print(f"\n{status} {name}" + (f" ({detail})" if detail else ""))
    for f in failures:
        print(f"    - {f}")
    assert not failures, f"{name}: " + "; ".join(failures)


def _tied_best(m, n, starts=64, seed=0):
    runs = [r for r in solve(m, n, starts, seed) if r.converged]
    top = runs[0].final.error
    return [r.final for r in runs if abs(r.final.error - top) < 1e-10]


# --- 1 -------------------------------------------------------------------

EXACT = {
    ("sec2", 1): F(181, 1728), ("sec2", 2): F(17, 864), ("sec2", 4): F(17, 3456), ("sec2", 5): F(1, 384),
    ("sec5", 1): F(95, 864), ("sec5", 2): F(43, 1728), ("sec5", 3): F(89, 8640),
    ("sec5", 4): F(7, 1728), ("sec5", 5): F(1, 576),
    ("sec7", 3): F(43, 5760), ("sec7", 4): F(67, 51840),
}


def test_criterion_1_exact_fractions():
    t0 = time.perf_counter()
    failures = []
    for (mid, n), want in EXACT.items():
        got = closed_form(MEASURES[mid], n).error
        if not (isinstance(got, F) and got == want):
            failures.append(f"{mid} n={n}: got {got}, want {want}")
    elapsed = time.perf_counter() - t0
    if elapsed > 0.5:
        failures.append(f"took {elapsed:.3f} s")
    verdict("criterion 1: exact fractions", failures, f"{len(EXACT)} values in {1000 * elapsed:.1f} ms")


# --- 2 -------------------------------------------------------------------


def test_criterion_2_lloyd_decimals():
    t0 = time.perf_counter()
    failures = []

    (sec2,) = _tied_best(SEC2, 3)
    for got, want in zip(sec2.codepoints, (0.191074, 0.573223, 11 / 12)):
        if abs(got - want) > 1e-6:
            failures.append(f"sec2 n=3 codepoint {got} vs {want}")
    if abs(sec2.error - 0.0106152) > 1e-6:
        failures.append(f"sec2 n=3 error {sec2.error}")

    pair = sorted(_tied_best(SEC3B, 2), key=lambda r: r.codepoints)
    r5 = math.sqrt(5)
    want_pair = [((3 - r5) / 4, 3 * (3 - r5) / 4), (1 - 3 * (3 - r5) / 4, 1 - (3 - r5) / 4)]
    if len(pair) != 2:
        failures.append(f"sec3b n=2: {len(pair)} optimal fixed points, want 2")
    else:
        for got, want in zip(pair, want_pair):
            if max(abs(a - b) for a, b in zip(got.codepoints, want)) > 1e-6:
                failures.append(f"sec3b codebook {got.codepoints} vs {want}")
            if abs(got.error - 0.0191242) > 1e-6:
                failures.append(f"sec3b error {got.error}")

    worst = 0.0
    for n in range(2, 11):
        best = _tied_best(SEC3A, n)[0]
        ref = uniform_plus_endpoint_optimal(n).codepoints
        dev = max(abs(a - b) for a, b in zip(best.codepoints, ref))
        worst = max(worst, dev)
        if dev > 1e-9:
            failures.append(f"sec3a n={n}: deviation {dev:.3g}")

    elapsed = time.perf_counter() - t0
    if elapsed >= 10:
        failures.append(f"took {elapsed:.1f} s")
    verdict("criterion 2: Lloyd decimals", failures, f"surd deviation {worst:.2g}, {elapsed:.1f} s")


# --- 3 -------------------------------------------------------------------


def _criterion_3_claims():
    claims = {mid: {} for mid in ("sec2", "sec5", "sec7", "sec3a", "sec3b")}
    for (mid, n), v in EXACT.items():
        claims[mid][n] = v
    claims["sec2"][3] = small_n_table("sec2", 3)[0].error
    claims["sec7"][2] = F(11, 720)
    for n in range(2, 9):
        claims["sec3a"][n] = uniform_plus_endpoint_optimal(n).error
    claims["sec3b"][2] = uniform_plus_midpoint_pair()[0].error
    return claims


def test_criterion_3_oracle_sandwich():
    t0 = time.perf_counter()
    failures, count = [], 0
    for mid, claims in _criterion_3_claims().items():
        certs = certify_all(MEASURES[mid], claims, budget=4096, depth=12)
        for n, cert in sorted(certs.items()):
            count += 1
            if not cert.ok:
                failures.append(f"{mid} n={n}: claimed {cert.claimed:.10g}, oracle {cert.dp_error:.10g}, "
                                f"bound {cert.bound:.3g}")
        if mid == "sec7":
            cert = certs[2]
            if abs(cert.dp_error - 5 / 432) <= cert.bound:
                failures.append("sec7 n=2: oracle cannot rule out 5/432")
    elapsed = time.perf_counter() - t0
    if elapsed >= 30:
        failures.append(f"took {elapsed:.1f} s")
    verdict("criterion 3: oracle sandwich", failures, f"{count} pairs in {elapsed:.1f} s")


# --- 4 -------------------------------------------------------------------


def _union_candidates(mid, n):
    """Every admissible union-rule codebook (one per choice of refined words for sec5)."""
    if mid == "sec2":
        yield union_rule_optimal(SEC2, n)
        return
    for idx in gl_index_choices(n - 3):
        yield union_rule_optimal(SEC5, n, pick=idx.I)


def test_criterion_4_union_rule():
    t0 = time.perf_counter()
    failures = []
    for mid, m in (("sec2", SEC2), ("sec5", SEC5)):
        claims = {}
        for n in range(5, 13):
            fixed = _tied_best(m, n)
            cf = union_rule_optimal(m, n)
            claims[n] = cf.error
            if any(abs(r.error - float(cf.error)) > 1e-10 for r in fixed):
                failures.append(f"{mid} n={n}: Lloyd error {fixed[0].error:.12g} vs {float(cf.error):.12g}")
                continue
            for r in fixed:
                got = np.asarray(r.codepoints)
                if not any(np.max(np.abs(got - np.asarray(c.codepoints, dtype=float))) <= 1e-8
                           for c in _union_candidates(mid, n)):
                    failures.append(f"{mid} n={n}: Lloyd codebook {r.codepoints} is no union-rule set")
        for n, cert in certify_all(m, claims, budget=4096, depth=12).items():
            if not cert.ok:
                failures.append(f"{mid} n={n}: outside oracle bound (margin {cert.margin:.3g})")
    elapsed = time.perf_counter() - t0
    verdict("criterion 4: union rule", failures, f"{elapsed:.1f} s")


# --- 5 -------------------------------------------------------------------


def _dim_check(label, seq, target, tol, lines, failures):
    lo, hi = asy.dimension_estimate(seq)
    off = max(abs(lo - target), abs(hi - target))
    lines.append(f"{label} dimension in [{lo:.4f}, {hi:.4f}], target {target:.4f} +- {tol}")
    if off > tol:
        failures.append(f"{label} dimension off by {off:.4f} (> {tol})")


def test_criterion_5_asymptotics():
    t0 = time.perf_counter()
    failures, lines = [], []

    c2 = asy.AsymSeq(((1000, optimal_error(SEC2, 1000)),)).coeffs(1)[0]
    lines.append(f"sec2 n^2 V_n at n=1000: {c2:.8f} vs 1/96 = {1 / 96:.8f}")
    if abs(c2 - 1 / 96) > 1e-4:
        failures.append(f"sec2 coefficient off by {abs(c2 - 1 / 96):.3g}")

    f_seq = asy.two_cantor_sequence("F", range(1, 5))
    g_seq = asy.two_cantor_sequence("G", range(1, 5))
    tf, tg = f_seq.coeffs(BETA)[-1], g_seq.coeffs(BETA)[-1]
    lines.append(f"sec7 F(4) scaled {tf:.7f} vs 1/144 = {1 / 144:.7f}")
    lines.append(f"sec7 G(4) scaled {tg:.7f} vs 0.0139496")
    if abs(tf - 1 / 144) > 1e-3:
        failures.append(f"sec7 F tail at k=4 off by {abs(tf - 1 / 144):.4f}")
    if abs(tg - 0.0139496) > 1e-3:
        failures.append(f"sec7 G tail at k=4 off by {abs(tg - 0.0139496):.4f}")
    try:
        gap = asy.subsequence_gap(f_seq, g_seq, BETA)
        lines.append(f"sec7 gap at k=4: {gap:.7f}")
        if not gap > 0:
            failures.append("sec7 gap is not positive")
    except asy.TailUnstable as exc:
        failures.append(f"sec7 gap at k=4 undefined: {exc}")

    _dim_check("sec2", asy.error_sequence(SEC2, range(5, 1001)), 1.0, 0.02, lines, failures)
    _dim_check("sec5", asy.error_sequence(SEC5, [2**k + 3 for k in range(1, 15)]), BETA, 0.02, lines, failures)
    _dim_check("sec7 along F", f_seq, BETA, 0.02, lines, failures)

    elapsed = time.perf_counter() - t0
    if elapsed >= 5:
        failures.append(f"took {elapsed:.1f} s")
    print()
    for line in lines:
        print("    " + line)
    verdict("criterion 5: asymptotics", failures, f"{elapsed:.2f} s")


# --- 6 -------------------------------------------------------------------


def test_criterion_6_property_suite_standalone():
    here = Path(__file__).parent
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", str(here / "test_properties.py")],
        capture_output=True, text=True, cwd=here.parent,
    )
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-300:]
    verdict("criterion 6: property suite", [] if proc.returncode == 0 else [summary], summary)
