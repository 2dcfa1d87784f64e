"""Lloyd iteration on the true measure, with seeded multi-start.

Each step moves every codepoint to the centroid of its Voronoi cell, the
cells being cut at midpoints (an atom on a cut belongs to the left cell).
Integrals are exact per step; self-similar parts are resolved by cylinder
descent, never by sampling.  Distinct fixed points reached from different
starts are kept, which is how non-unique optimal sets show up.
"""

from __future__ import annotations

import logging
import math
from bisect import bisect_right
from dataclasses import dataclass
from itertools import accumulate
from typing import Sequence

import numpy as np

from .measures import (
    DEFAULT_DEPTH,
    AtomSet,
    Measure,
    Mixture,
    UniformSegment,
    as_float,
    cell_moments,
    distortion,
    support_hull,
)
from .results import QuantResult

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-11
MAX_ITER = 100_000
DEDUPE_TOL = 1e-8
MIN_GAP = 1e-9


class EmptyCell(ValueError):
    def __init__(self, index: int):
        super().__init__(f"Voronoi cell {index} carries no mass")
        self.index = index


@dataclass(frozen=True)
class LloydRun:
    start: tuple
    trajectory_len: int
    final: QuantResult
    converged: bool
    residual: float


class _Piecewise:
    """Float mixture of uniform segments and atoms with a fast cell integrator.

    Plain Python beats numpy here: codebooks are short and a Lloyd run
    takes hundreds of steps.
    """

    def __init__(self, segs, atoms):
        self.segs = [(lo, hi, w / (hi - lo)) for lo, hi, w in segs]  # density per segment
        atoms = sorted(atoms)
        self.ax = [x for x, _ in atoms]
        self.a0 = [0.0] + list(accumulate(w for _, w in atoms))
        self.a1 = [0.0] + list(accumulate(w * x for x, w in atoms))

    @classmethod
    def build(cls, m):
        segs, atoms = [], []

        def walk(node, w):
            if isinstance(node, UniformSegment):
                segs.append((float(node.lo), float(node.hi), float(w)))
            elif isinstance(node, AtomSet):
                atoms.extend((float(x), float(w * q)) for x, q in node.atoms)
            elif isinstance(node, Mixture):
                for comp, q in node.components:
                    walk(comp, w * q)
            else:
                raise TypeError

        try:
            walk(m, 1)
        except TypeError:
            return None
        return cls(segs, atoms)

    def _upto(self, c):
        m0 = m1 = 0.0
        for lo, hi, d in self.segs:
            if c > lo:
                t = hi if c > hi else c
                m0 += d * (t - lo)
                m1 += d * (t * t - lo * lo) / 2
        k = bisect_right(self.ax, c)  # atoms on a cut go left
        return m0 + self.a0[k], m1 + self.a1[k]

    def step(self, codebook):
        out, p0, p1 = [], 0.0, 0.0
        cuts = [(u + v) / 2 for u, v in zip(codebook, codebook[1:])]
        cuts.append(math.inf)
        for i, c in enumerate(cuts):
            c0, c1 = self._upto(c)
            mass = c0 - p0
            if mass <= 0:
                raise EmptyCell(i)
            out.append((c1 - p1) / mass)
            p0, p1 = c0, c1
        return out


def lloyd_step(m: Measure, codebook: Sequence, *, depth: int = DEFAULT_DEPTH, _flat=None) -> list:
    """Replace each codepoint by the centroid of its Voronoi cell."""
    if _flat is not None:
        return _flat.step(codebook)
    cells = cell_moments(m, codebook, depth=depth)
    out = []
    for i, cell in enumerate(cells):
        if cell.m0 <= 0:
            raise EmptyCell(i)
        out.append(cell.m1 / cell.m0)
    return out


def iterate(m: Measure, start: Sequence, *, tol: float = RESIDUAL_TOL,
            max_iter: int = MAX_ITER, depth: int = DEFAULT_DEPTH,
            rng: np.random.Generator | None = None, max_repairs: int = 200):
    """Run Lloyd from ``start``; return ``(codebook, steps, converged, residual)``.

    ``m`` should already be a float measure for speed.  Without ``rng`` an
    empty cell raises :class:`EmptyCell`.  With ``rng`` the codepoint owning
    the empty cell is redrawn uniformly on the support hull, at most
    ``max_repairs`` times per run.
    """
    cb = [float(a) for a in start]
    flat = _Piecewise.build(m)
    lo, hi = (float(v) for v in support_hull(m))
    residual = float("inf")
    repairs = 0
    for step in range(1, max_iter + 1):
        try:
            new = lloyd_step(m, cb, depth=depth, _flat=flat)
        except EmptyCell as exc:
            if rng is None or repairs >= max_repairs:
                raise
            repairs += 1
            cb[exc.index] = float(rng.uniform(lo, hi))
            cb.sort()
            continue
        residual = max(abs(u - v) for u, v in zip(new, cb))
        cb = new
        if residual < tol:
            return cb, step, True, residual
    return cb, max_iter, False, residual


def random_start(rng: np.random.Generator, lo: float, hi: float, n: int) -> list:
    """Sorted uniform draw on ``[lo, hi]`` with no two points closer than MIN_GAP."""
    while True:
        pts = np.sort(rng.uniform(lo, hi, size=n))
        if n == 1 or np.min(np.diff(pts)) >= MIN_GAP:
            return pts.tolist()


def solve(m: Measure, n: int, starts: int = 64, seed: int = 0, *,
          tol: float = RESIDUAL_TOL, max_iter: int = MAX_ITER,
          depth: int = DEFAULT_DEPTH, measure_id: str | None = None) -> list:
    """Multi-start Lloyd; distinct fixed points first, best error first.

    Empty cells met along the way are repaired by redrawing the offending
    codepoint (see :func:`iterate`).  Runs that never converge are reported
    after the fixed points with ``converged=False``.
    """
    if n < 1 or starts < 1:
        raise ValueError("need n >= 1 and starts >= 1")
    fm = as_float(m)
    lo, hi = (float(v) for v in support_hull(fm))
    rng = np.random.default_rng(seed)
    runs = []
    for _ in range(starts):
        start = random_start(rng, lo, hi, n)
        try:
            cb, steps, ok, res = iterate(fm, start, tol=tol, max_iter=max_iter, depth=depth, rng=rng)
        except EmptyCell:
            log.warning("start abandoned: empty cells kept reappearing")
            continue
        if len(set(cb)) < n:
            continue
        err = float(distortion(fm, cb, depth=depth))
        runs.append(LloydRun(tuple(start), steps, QuantResult(tuple(cb), err, "lloyd", measure_id), ok, res))
    return _dedupe(runs)


def _dedupe(runs):
    fixed, loose = [], []
    for run in sorted(runs, key=lambda r: (r.final.error, r.final.codepoints)):
        if not run.converged:
            loose.append(run)
            continue
        cb = np.asarray(run.final.codepoints)
        if any(np.max(np.abs(cb - np.asarray(f.final.codepoints))) < DEDUPE_TOL for f in fixed):
            continue
        fixed.append(run)
    fixed.sort(key=lambda r: (round(r.final.error, 14), r.final.codepoints))
    return fixed + loose


def best(m: Measure, n: int, starts: int = 64, seed: int = 0, **kw) -> LloydRun:
    """Lowest-error converged run of :func:`solve`."""
    for run in solve(m, n, starts, seed, **kw):
        if run.converged:
            return run
    raise RuntimeError(f"no Lloyd run converged for n={n}")
