"""Optimal codebooks that are known in closed form.

Nothing here iterates.  Rational inputs give :class:`~fractions.Fraction`
codepoints and errors; the two families whose answers involve square roots
return floats.  Anything outside the proven families raises a subclass of
:class:`ScopeError` naming the violated precondition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable

import numpy as np

from . import catalog
from .measures import (
    AtomSet,
    Measure,
    Mixture,
    SelfSimilarMeasure,
    UniformSegment,
    as_number,
    cylinder,
    distortion,
    moments,
)
from .results import QuantResult

PROVENANCE = "closed-form"


class ScopeError(ValueError):
    """A closed-form constructor was asked for something it does not cover."""


class UnsupportedIFS(ScopeError):
    pass


class OutOfTheoremRange(ScopeError):
    pass


class NOutOfRange(ScopeError):
    pass


def _result(points, error, measure_id=None) -> QuantResult:
    return QuantResult(tuple(sorted(points)), error, PROVENANCE, measure_id)


def uniform_optimal(lo, hi, n: int, measure_id: str | None = None) -> QuantResult:
    """Equally spaced cell centres; error ``(hi - lo)**2 / (12 n**2)``."""
    lo, hi = as_number(lo), as_number(hi)
    if not lo < hi:
        raise ValueError("need lo < hi")
    if n < 1:
        raise NOutOfRange("n must be at least 1")
    width = hi - lo
    points = [lo + (2 * i - 1) * width / (2 * n) for i in range(1, n + 1)]
    return _result(points, width * width / (12 * n * n), measure_id)


# --- self-similar (two-map Cantor) measures ------------------------------


@dataclass(frozen=True)
class GLIndex:
    """Level ``ell`` with ``2**ell <= n < 2**(ell+1)`` and the refined words ``I``."""

    ell: int
    I: tuple

    @property
    def n(self) -> int:
        return 2**self.ell + len(self.I)


def _level(n: int) -> int:
    return n.bit_length() - 1


def gl_index(n: int, pick="lex") -> GLIndex:
    """Index for ``n`` points; ``pick`` is ``"lex"`` or an explicit word set."""
    if n < 1:
        raise NOutOfRange("n must be at least 1")
    ell = _level(n)
    extra = n - 2**ell
    words = ["".join(w) for w in product("12", repeat=ell)]
    if pick == "lex":
        chosen = tuple(words[:extra])
    else:
        chosen = tuple(sorted(set(pick)))
        if len(chosen) != extra or any(w not in words for w in chosen):
            raise ValueError(f"need {extra} distinct words of length {ell}, got {pick!r}")
    return GLIndex(ell, chosen)


def gl_index_choices(n: int) -> Iterable[GLIndex]:
    """Every admissible index for ``n`` (exponential in ``n``; small n only)."""
    ell = _level(n)
    words = ["".join(w) for w in product("12", repeat=ell)]
    for chosen in combinations(words, n - 2**ell):
        yield GLIndex(ell, chosen)


def _check_gl_scope(m) -> None:
    if not isinstance(m, SelfSimilarMeasure) or len(m.maps) != 2:
        raise UnsupportedIFS("closed form covers two-map IFS measures only")
    (s1, _), (s2, _) = m.maps
    if s1 != s2:
        raise UnsupportedIFS(f"contraction ratios differ ({s1} vs {s2})")
    if any(p != Fraction(1, 2) for p in m.probs):
        raise UnsupportedIFS(f"probabilities must be (1/2, 1/2), got {m.probs}")


def gl_error(m: SelfSimilarMeasure, n: int):
    """Optimal ``n``-point error of an equal-weight, equal-ratio Cantor measure."""
    _check_gl_scope(m)
    if n < 1:
        raise NOutOfRange("n must be at least 1")
    s = m.maps[0][0]
    ell = _level(n)
    # unrefined level-ell cylinders keep (s^2/2)^ell V each, refined ones s^2 times that
    return (s * s / 2) ** ell * moments(m).variance * (2 ** (ell + 1) - n + s * s * (n - 2**ell))


def gl_cantor_optimal(m: SelfSimilarMeasure, n: int, pick="lex",
                      measure_id: str | None = None) -> QuantResult:
    """Cylinder-centroid codebook at level ``ell(n)`` with the words ``I`` split once."""
    _check_gl_scope(m)
    idx = gl_index(n, pick)
    refined = set(idx.I)
    points = []
    for letters in product("12", repeat=idx.ell):
        w = "".join(letters)
        if w in refined:
            points += [cylinder(m, w + "1").centroid, cylinder(m, w + "2").centroid]
        else:
            points.append(cylinder(m, w).centroid)
    return _result(points, gl_error(m, n), measure_id)


def _component_optimal(m: Measure, n: int) -> QuantResult:
    if isinstance(m, UniformSegment):
        return uniform_optimal(m.lo, m.hi, n)
    return gl_cantor_optimal(m, n)


# --- uniform or Cantor plus three atoms ----------------------------------


def union_rule_optimal(mix: Mixture, n: int, pick="lex") -> QuantResult:
    """Optimal set of the continuous part for ``n - |D|`` points, plus the atoms ``D``."""
    key = catalog.identify(mix)
    if key not in ("sec2", "sec5"):
        raise ScopeError("the union rule is established only for the sec2 and sec5 mixtures")
    if n < 5:
        raise OutOfTheoremRange(f"the union rule needs n >= 5, got n={n}; use small_n_table")
    (cont, w), (atoms, _) = mix.components
    k = len(atoms.atoms)
    if isinstance(cont, UniformSegment):
        part = uniform_optimal(cont.lo, cont.hi, n - k)
    else:
        part = gl_cantor_optimal(cont, n - k, pick)
    return _result(list(part.codepoints) + atoms.positions, w * part.error, key)


def _sec2_three():
    r2 = math.sqrt(2)
    return (0.25 - r2 / 24, 0.75 - r2 / 8, 11 / 12)


F = Fraction
_SMALL = {
    ("sec2", 1): [((F(13, 24),), F(181, 1728))],
    ("sec2", 2): [((F(1, 4), F(5, 6)), F(17, 864))],
    ("sec2", 3): [(_sec2_three(), None)],
    ("sec2", 4): [
        ((F(1, 8), F(3, 8), F(3, 4), F(1)), F(17, 3456)),
        ((F(1, 8), F(3, 8), F(2, 3), F(11, 12)), F(17, 3456)),
    ],
    ("sec5", 1): [((F(13, 24),), F(95, 864))],
    ("sec5", 2): [((F(1, 4), F(5, 6)), F(43, 1728))],
    ("sec5", 3): [((F(1, 12), F(31, 60), F(11, 12)), F(89, 8640))],
    ("sec5", 4): [
        ((F(1, 12), F(5, 12), F(3, 4), F(1)), F(7, 1728)),
        ((F(1, 12), F(5, 12), F(2, 3), F(11, 12)), F(7, 1728)),
    ],
}


def small_n_table(mixture_id: str, n: int) -> list:
    """Every known optimal codebook for ``n <= 4`` on ``sec2`` or ``sec5``."""
    if mixture_id not in ("sec2", "sec5"):
        raise ScopeError(f"no small-n table for {mixture_id!r}")
    if not 1 <= n <= 4:
        raise NOutOfRange(f"small-n table covers 1 <= n <= 4, got n={n}")
    out = []
    for points, err in _SMALL[(mixture_id, n)]:
        if err is None:
            err = float(distortion(catalog.MEASURES[mixture_id], points))
        out.append(_result(points, err, mixture_id))
    return out


# --- uniform on [0, 1] plus one atom -------------------------------------


def uniform_plus_endpoint_optimal(n: int) -> QuantResult:
    """Unique optimal set of ``1/2 U[0,1] + 1/2 delta_1`` for ``n >= 2``.

    With ``r = sqrt(n^2 - n + 1)`` the codepoints are
    ``(2i - 1)(2n - 1 - r) / (2 (n - 1) n)``.
    """
    if n < 2:
        raise NOutOfRange("formula needs n >= 2; for n = 1 use the mean 3/4")
    r = math.sqrt(n * n - n + 1)
    step = (2 * n - 1 - r) / (2 * (n - 1) * n)
    points = [(2 * i - 1) * step for i in range(1, n + 1)]
    error = (4 * n * n - 4 * (r + 1) * n + 2 * r + 7) / (12 * (r + 2 * n - 1) ** 2)
    return _result(points, error, "sec3a")


def uniform_plus_midpoint_pair() -> list:
    """The two optimal 2-point sets of ``1/2 U[0,1] + 1/2 delta_{1/2}``.

    They are mirror images under ``x -> 1 - x`` and share one error.
    """
    r5 = math.sqrt(5)
    left = ((3 - r5) / 4, 3 * (3 - r5) / 4)
    right = (1 - left[1], 1 - left[0])
    return [_result(cb, float(distortion(catalog.SEC3B, cb)), "sec3b") for cb in (left, right)]


# --- two Cantor measures on disjoint intervals ---------------------------


@dataclass(frozen=True)
class SplitAlloc:
    n1: int
    n2: int
    error: object


def _sec7_parts():
    (p1, _), (p2, _) = catalog.SEC7.components
    return p1, p2


def split_error(n1: int, n2: int):
    """``(V_n1(P1) + V_n2(P2)) / 2`` for the two-Cantor mixture."""
    p1, p2 = _sec7_parts()
    return (gl_error(p1, n1) + gl_error(p2, n2)) / 2


def _gl_error_array(m: SelfSimilarMeasure, ns: np.ndarray) -> np.ndarray:
    s = float(m.maps[0][0])
    ell = np.frexp(ns.astype(float))[1] - 1
    low = np.exp2(ell)
    return (s * s / 2) ** ell * float(moments(m).variance) * (2 * low - ns + s * s * (ns - low))


def two_cantor_alloc(n: int) -> SplitAlloc:
    """Best split ``n = n1 + n2`` by exhaustive search; ties go to the larger ``n1``.

    All ``n - 1`` splits are scored in floating point; the near-minimal ones
    are then compared exactly.
    """
    if n < 2:
        raise NOutOfRange("need n >= 2 (one point per component)")
    p1, p2 = _sec7_parts()
    n1 = np.arange(1, n, dtype=np.int64)
    approx = _gl_error_array(p1, n1) + _gl_error_array(p2, n - n1)
    near = n1[approx <= approx.min() * (1 + 1e-9)]
    best = None
    for k in sorted(int(v) for v in near):
        err = split_error(k, n - k)
        if best is None or err <= best.error:
            best = SplitAlloc(k, n - k, err)
    return best


def two_cantor_optimal(n: int) -> QuantResult:
    """Union of the optimal sets of both components at the best split."""
    alloc = two_cantor_alloc(n)
    p1, p2 = _sec7_parts()
    pts = gl_cantor_optimal(p1, alloc.n1).codepoints + gl_cantor_optimal(p2, alloc.n2).codepoints
    return _result(pts, alloc.error, "sec7")


# --- dispatcher ----------------------------------------------------------


def closed_form(m: Measure, n: int) -> QuantResult:
    """Pick the applicable closed form for ``(m, n)`` or raise :class:`ScopeError`."""
    if n < 1:
        raise NOutOfRange("n must be at least 1")
    key = catalog.identify(m)
    if n == 1:
        mo = moments(m)
        return _result([mo.mean], mo.variance, key)
    if isinstance(m, (UniformSegment, SelfSimilarMeasure)):
        return _component_optimal(m, n)
    if isinstance(m, AtomSet) and n >= len(m.atoms):
        if n > len(m.atoms):
            raise NOutOfRange(f"only {len(m.atoms)} atoms")
        return _result(m.positions, 0 * m.atoms[0][1], key)
    if key in ("sec2", "sec5"):
        return small_n_table(key, n)[0] if n <= 4 else union_rule_optimal(m, n)
    if key == "sec3a":
        return uniform_plus_endpoint_optimal(n)
    if key == "sec3b" and n == 2:
        return uniform_plus_midpoint_pair()[0]
    if key == "sec7":
        return two_cantor_optimal(n)
    raise ScopeError(f"no closed form known for this measure at n={n}")


def optimal_error(m: Measure, n: int):
    """The error of :func:`closed_form` without building the codebook.

    Large ``n`` on self-similar parts would otherwise enumerate every
    cylinder of the level.
    """
    key = catalog.identify(m)
    if n >= 5 and key in ("sec2", "sec5"):
        (cont, w), (atoms, _) = m.components
        k = len(atoms.atoms)
        if isinstance(cont, UniformSegment):
            return w * (cont.hi - cont.lo) ** 2 / (12 * (n - k) ** 2)
        return w * gl_error(cont, n - k)
    if n >= 2 and key == "sec7":
        return two_cantor_alloc(n).error
    if n >= 2 and isinstance(m, SelfSimilarMeasure):
        return gl_error(m, n)
    return closed_form(m, n).error
