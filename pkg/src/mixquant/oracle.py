"""Exact optimal quantizers for finitely supported measures.

Optimal clusters of a scalar distribution are contiguous runs of sorted
atoms, so the optimal ``n``-cluster cost satisfies

    best[c][j] = min_i  best[c-1][i] + cost(i, j)

where ``cost(i, j)`` is the weighted within-cluster sum of squares of atoms
``i .. j-1``, available in O(1) from prefix sums.  The float path evaluates
one layer as a handful of blocked numpy reductions; the exact path runs the
same recurrence on Fractions and is meant for small inputs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .atomizer import AtomList, atomize
from .measures import AtomSet

TIE_TOL = 1e-12
EXACT_LIMIT = 256
_BLOCK = 512


class NTooLarge(UserWarning):
    """More codepoints requested than there are distinct atoms."""


@dataclass(frozen=True)
class DPResult:
    codepoints: tuple
    partition: tuple  # half-open atom index ranges (start, stop)
    error: object
    n: int
    saturated: bool = field(default=False)


def _unpack(atoms):
    if isinstance(atoms, AtomList):
        return list(atoms.positions), list(atoms.weights)
    if isinstance(atoms, AtomSet):
        return [x for x, _ in atoms.atoms], [w for _, w in atoms.atoms]
    xs, ws = zip(*atoms)
    return list(xs), list(ws)


def optimal_quantizer(atoms, n: int, *, exact: bool | None = None) -> DPResult:
    """Globally optimal ``n``-point codebook for a finite weighted atom list."""
    return all_optimal_counts(atoms, n, exact=exact)[-1]


def all_optimal_counts(atoms, n_max: int, *, exact: bool | None = None) -> list:
    """Optimal codebooks for every ``n`` in ``1 .. n_max`` from one DP table.

    Ties between equal-cost splits go to the smallest split index, i.e. to
    the partition whose clusters end as early as possible.  Exact mode is
    used by default when every position and weight is a Fraction and there
    are at most ``EXACT_LIMIT`` atoms.
    """
    if n_max < 1:
        raise ValueError("n must be at least 1")
    xs, ws = _unpack(atoms)
    if any(a >= b for a, b in zip(xs, xs[1:])):
        raise ValueError("atom positions must be strictly increasing")
    k = len(xs)
    if exact is None:
        exact = len(xs) <= EXACT_LIMIT and all(
            isinstance(v, (int, Fraction)) for v in xs + ws
        )
    layers = min(n_max, k)
    if exact:
        tables = _exact_tables(xs, ws, layers)
    else:
        tables = _float_tables(xs, ws, layers)
    results = [_backtrack(xs, ws, tables, c, exact) for c in range(1, layers + 1)]
    if n_max > k:
        warnings.warn(f"n={n_max} exceeds the {k} distinct atoms", NTooLarge, stacklevel=2)
        saturated = DPResult(tuple(xs), tuple((i, i + 1) for i in range(k)), 0 * ws[0], k, True)
        results.extend(saturated for _ in range(n_max - k))
    return results


def _exact_tables(xs, ws, layers):
    k = len(xs)
    s0, s1, s2 = [0], [0], [0]
    for x, w in zip(xs, ws):
        s0.append(s0[-1] + w)
        s1.append(s1[-1] + w * x)
        s2.append(s2[-1] + w * x * x)

    def cost(i, j):
        m0, m1 = s0[j] - s0[i], s1[j] - s1[i]
        return s2[j] - s2[i] - m1 * m1 / m0

    best = [[cost(0, j) if j else None for j in range(k + 1)]]
    arg = [[0] * (k + 1)]
    for c in range(2, layers + 1):
        prev, row, choice = best[-1], [None] * (k + 1), [0] * (k + 1)
        for j in range(c, k + 1):
            top, where = None, None
            for i in range(c - 1, j):
                v = prev[i] + cost(i, j)
                if top is None or v < top:
                    top, where = v, i
            row[j], choice[j] = top, where
        best.append(row)
        arg.append(choice)
    return best, arg


def _float_tables(xs, ws, layers):
    x = np.asarray([float(v) for v in xs])
    w = np.asarray([float(v) for v in ws])
    x = x - np.dot(w, x) / w.sum()  # centring keeps cost() well conditioned
    k = len(x)
    s0 = np.concatenate([[0.0], np.cumsum(w)])
    s1 = np.concatenate([[0.0], np.cumsum(w * x)])
    s2 = np.concatenate([[0.0], np.cumsum(w * x * x)])

    first = np.full(k + 1, np.inf)
    j = np.arange(1, k + 1)
    first[1:] = s2[j] - s1[j] ** 2 / s0[j]
    best, arg = [first], [np.zeros(k + 1, dtype=np.int64)]
    idx = np.arange(k + 1)
    for c in range(2, layers + 1):
        prev = best[-1]
        row = np.full(k + 1, np.inf)
        choice = np.zeros(k + 1, dtype=np.int64)
        for start in range(c, k + 1, _BLOCK):
            stop = min(start + _BLOCK, k + 1)
            cols = idx[start:stop]
            rows = idx[c - 1 : stop - 1]  # split points i < j only
            m0 = s0[cols][None, :] - s0[rows][:, None]
            m1 = s1[cols][None, :] - s1[rows][:, None]
            vals = s2[cols][None, :] - s2[rows][:, None]
            with np.errstate(divide="ignore", invalid="ignore"):
                m1 *= m1
                m1 /= m0
            vals -= m1
            vals += prev[rows][:, None]
            vals[rows[:, None] >= cols[None, :]] = np.inf
            low = vals.min(axis=0)
            pick = np.argmax(vals <= low + TIE_TOL, axis=0)
            row[cols] = vals[pick, np.arange(len(cols))]
            choice[cols] = rows[pick]
        best.append(row)
        arg.append(choice)
    return best, arg


def _backtrack(xs, ws, tables, c, exact):
    best, arg = tables
    k = len(xs)
    bounds, j = [], k
    for layer in range(c, 0, -1):
        i = int(arg[layer - 1][j]) if layer > 1 else 0
        bounds.append((i, j))
        j = i
    bounds.reverse()
    codepoints, error = [], 0 if exact else 0.0
    for i, j in bounds:
        wsum = sum(ws[i:j])
        if exact:
            centre = sum(w * x for x, w in zip(xs[i:j], ws[i:j])) / wsum
            error += sum(w * (x - centre) ** 2 for x, w in zip(xs[i:j], ws[i:j]))
        else:
            xa = np.asarray([float(v) for v in xs[i:j]])
            wa = np.asarray([float(v) for v in ws[i:j]])
            centre = float(np.dot(wa, xa) / wa.sum())
            error += float(np.dot(wa, (xa - centre) ** 2))
        codepoints.append(centre)
    return DPResult(tuple(codepoints), tuple(bounds), error, c)


def atom_distortion(atoms, codebook: Sequence) -> float:
    """Distortion of an arbitrary codebook on a finite atom list (float)."""
    xs, ws = _unpack(atoms)
    x = np.asarray([float(v) for v in xs])[:, None]
    w = np.asarray([float(v) for v in ws])
    cb = np.asarray([float(v) for v in codebook])[None, :]
    return float(np.dot(w, ((x - cb) ** 2).min(axis=1)))


@dataclass(frozen=True)
class Certificate:
    """Two-sided check of a claimed error against the oracle on an atomization."""

    claimed: float
    dp_error: float
    bound: float
    atoms: int

    @property
    def ok(self) -> bool:
        return abs(self.claimed - self.dp_error) <= self.bound

    @property
    def margin(self) -> float:
        return self.bound - abs(self.claimed - self.dp_error)


def certify(m, n: int, claimed, *, budget: int = 4096, depth: int | None = 12) -> Certificate:
    """Compare ``claimed`` with the DP optimum on ``atomize(m, budget, depth=depth)``.

    ``depth`` only affects self-similar parts.
    """
    return certify_all(m, {n: claimed}, budget=budget, depth=depth)[n]


def certify_all(m, claims: dict, *, budget: int = 4096, depth: int | None = 12) -> dict:
    """:func:`certify` for several ``n`` at once, sharing one DP table."""
    atoms = atomize(m, budget, depth=depth)
    table = all_optimal_counts(atoms, max(claims), exact=False)
    return {
        n: Certificate(float(v), float(table[n - 1].error), atoms.error_bound(table[n - 1].error), len(atoms))
        for n, v in claims.items()
    }
