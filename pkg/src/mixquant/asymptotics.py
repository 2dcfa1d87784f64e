"""Finite-n diagnostics for quantization dimension and coefficient.

Both quantities are limits, so everything here is a statistic of a finite
sequence of ``(n, V_n)`` pairs.  No function claims to compute a limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .closed_form import optimal_error, split_error, two_cantor_alloc
from .measures import Measure


class TailUnstable(ValueError):
    """The last two scaled values of a sequence differ by more than 1%."""


TAIL_REL_TOL = 0.01


def _log(x) -> float:
    # Fractions with huge terms would underflow float(); split the logs.
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


@dataclass(frozen=True)
class AsymSeq:
    entries: tuple  # (n, V_n) pairs, n increasing

    def __post_init__(self):
        entries = tuple((int(n), v) for n, v in self.entries)
        if any(v <= 0 for _, v in entries):
            raise ValueError("errors must be positive")
        if any(a[0] >= b[0] for a, b in zip(entries, entries[1:])):
            raise ValueError("n must be strictly increasing")
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    @property
    def ns(self) -> list:
        return [n for n, _ in self.entries]

    def dim_estimates(self) -> list:
        """``2 log n / (-log V_n)`` per entry."""
        return [2 * math.log(n) / -_log(v) for n, v in self.entries]

    def coeffs(self, s: float) -> list:
        """``n^(2/s) V_n`` per entry, evaluated in log space."""
        return [math.exp(2 / s * math.log(n) + _log(v)) for n, v in self.entries]


def error_sequence(m: Measure, ns: Iterable[int]) -> AsymSeq:
    """Closed-form errors of ``m`` at each ``n``."""
    return AsymSeq(tuple((n, optimal_error(m, n)) for n in ns))


def dimension_estimate(seq: AsymSeq) -> tuple:
    """``(lower, upper)``: min and max of the estimate over the tail half.

    A finite stand-in for liminf and limsup; tail means the last
    ``ceil(len / 2)`` entries.
    """
    if len(seq) < 3:
        raise ValueError("need at least 3 entries")
    tail = seq.dim_estimates()[len(seq) // 2:]
    return min(tail), max(tail)


def coefficient_sequence(seq: AsymSeq, s: float) -> list:
    if s <= 0:
        raise ValueError("s must be positive")
    return list(zip(seq.ns, seq.coeffs(s)))


def _tail(seq: AsymSeq, s: float) -> float:
    vals = seq.coeffs(s)
    if len(vals) < 2:
        raise TailUnstable("need at least two entries to judge the tail")
    last, prev = vals[-1], vals[-2]
    if abs(last - prev) > TAIL_REL_TOL * abs(last):
        raise TailUnstable(f"last two scaled values {prev:.6g} and {last:.6g} differ by more than 1%")
    return last


def subsequence_gap(seq_a: AsymSeq, seq_b: AsymSeq, s: float) -> float:
    """Distance between the tails of two scaled subsequences.

    A gap that stays clearly positive is evidence that ``n^(2/s) V_n`` has
    more than one accumulation point.
    """
    return abs(_tail(seq_a, s) - _tail(seq_b, s))


def cantor_dimension(ratio: float, maps: int = 2) -> float:
    """Similarity dimension ``log(maps) / -log(ratio)``."""
    return math.log(maps) / -math.log(ratio)


def f_index(k: int) -> int:
    return 2 ** (6 * k - 4) + 2 ** (5 * k - 4)


def g_index(k: int) -> int:
    return 2 ** (6 * k - 4) + 2 ** (6 * k - 5) + 2 ** (5 * k - 3)



def f_split(k: int) -> tuple:
    return 2 ** (6 * k - 4), 2 ** (5 * k - 4)


def g_split(k: int) -> tuple:
    return 2 ** (6 * k - 4) + 2 ** (6 * k - 5), 2 ** (5 * k - 3)


_SUBSEQ = {"F": (f_index, f_split), "G": (g_index, g_split)}


def two_cantor_sequence(which: str, ks: Iterable[int], exhaustive_k_max: int = 4) -> AsymSeq:
    """Errors of the two-Cantor mixture along ``F(k)`` or ``G(k)``.

    Up to ``exhaustive_k_max`` the split comes from the exhaustive search;
    beyond that (``n`` past about 10^6) the known split schedule is used,
    which the search reproduces wherever it is feasible.
    """
    index, split = _SUBSEQ[which]
    entries = []
    for k in ks:
        n = index(k)
        if k <= exhaustive_k_max:
            entries.append((n, two_cantor_alloc(n).error))
        else:
            entries.append((n, split_error(*split(k))))
    return AsymSeq(tuple(entries))
