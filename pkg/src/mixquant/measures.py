"""One-dimensional probability measures and exact integrals against them.

Four kinds of measure are supported: a uniform segment, a finite set of
weighted atoms, the invariant measure of a contracting affine iterated
function system, and finite mixtures of these.  Every quantity is computed
from the zeroth, first and second raw moments of the measure restricted to a
half-line, so a result is an exact :class:`~fractions.Fraction` whenever the
measure parameters and the query points are rational, and an ordinary float
otherwise.

Self-similar measures are integrated over a half-line by descending the
cylinder tree.  Whole cylinders are summed in closed form; only the (at most
one) cylinder per level that straddles the cut point is refined.  Descent
stops when the cut falls in a gap or at ``depth`` levels, in which case the
straddling cylinder's mass is reported as ``unresolved``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple, Sequence, Union

Number = Union[Fraction, float]

DEFAULT_DEPTH = 40
MASS_TOL = 1e-12


class ZeroMass(ValueError):
    """Raised when a conditional quantity is requested on a null set."""


def as_number(x) -> Number:
    """Coerce ints, strings like ``"1/3"`` and Fractions to Fraction.

    Floats are passed through unchanged so that float inputs stay on the
    float path.
    """
    if isinstance(x, float):
        return x
    if isinstance(x, (int, Fraction, str)):
        return Fraction(x)
    return float(x)


@dataclass(frozen=True)
class UniformSegment:
    lo: Number
    hi: Number

    def __post_init__(self):
        object.__setattr__(self, "lo", as_number(self.lo))
        object.__setattr__(self, "hi", as_number(self.hi))
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class AtomSet:
    """Finitely many atoms given as ``(position, weight)`` pairs."""

    atoms: tuple

    def __post_init__(self):
        atoms = tuple((as_number(x), as_number(w)) for x, w in self.atoms)
        if not atoms:
            raise ValueError("an atom set needs at least one atom")
        if any(w <= 0 for _, w in atoms):
            raise ValueError("atom weights must be positive")
        if any(a[0] >= b[0] for a, b in zip(atoms, atoms[1:])):
            raise ValueError("atom positions must be strictly increasing")
        _check_total(sum(w for _, w in atoms), "atom weights")
        object.__setattr__(self, "atoms", atoms)

    @property
    def positions(self) -> list:
        return [x for x, _ in self.atoms]


@dataclass(frozen=True)
class SelfSimilarMeasure:
    """Invariant measure of the IFS ``S_i(x) = ratio_i * x + offset_i``.

    ``base`` is an interval mapped into itself by every ``S_i``; the images
    ``S_i(base)`` must have pairwise disjoint interiors.  Words over the
    alphabet ``"1" .. str(len(maps))`` index the cylinders ``S_w(base)``.
    """

    maps: tuple
    probs: tuple
    base: tuple

    def __post_init__(self):
        maps = tuple((as_number(s), as_number(c)) for s, c in self.maps)
        probs = tuple(as_number(p) for p in self.probs)
        base = tuple(as_number(b) for b in self.base)
        if len(maps) != len(probs) or not 2 <= len(maps) <= 9:
            raise ValueError("need between 2 and 9 maps, one probability each")
        if any(not 0 < s < 1 for s, _ in maps):
            raise ValueError("contraction ratios must lie in (0, 1)")
        if any(p <= 0 for p in probs):
            raise ValueError("probabilities must be positive")
        _check_total(sum(probs), "IFS probabilities")
        lo, hi = base
        if not lo < hi:
            raise ValueError("base interval must be non-degenerate")
        images = sorted((s * lo + c, s * hi + c) for s, c in maps)
        if images[0][0] < lo or images[-1][1] > hi:
            raise ValueError("every map must send the base interval into itself")
        if any(a[1] > b[0] for a, b in zip(images, images[1:])):
            raise ValueError("cylinder images must not overlap")
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "base", base)

    @cached_property
    def mean(self) -> Number:
        # fixed point of mu = sum p_i (s_i mu + c_i)
        num = sum(p * c for p, (s, c) in zip(self.probs, self.maps))
        return num / (1 - sum(p * s for p, (s, c) in zip(self.probs, self.maps)))

    @cached_property
    def second_moment(self) -> Number:
        mu = self.mean
        num = sum(p * (2 * s * c * mu + c * c) for p, (s, c) in zip(self.probs, self.maps))
        return num / (1 - sum(p * s * s for p, (s, c) in zip(self.probs, self.maps)))

    @property
    def alphabet(self) -> str:
        return "".join(str(i + 1) for i in range(len(self.maps)))


@dataclass(frozen=True)
class Mixture:
    """Convex combination given as ``(measure, weight)`` pairs."""

    components: tuple

    def __post_init__(self):
        comps = tuple((m, as_number(w)) for m, w in self.components)
        if not comps:
            raise ValueError("a mixture needs at least one component")
        if any(not 0 < w <= 1 for _, w in comps):
            raise ValueError("mixture weights must lie in (0, 1]")
        _check_total(sum(w for _, w in comps), "mixture weights")
        object.__setattr__(self, "components", comps)

    @property
    def weights(self) -> list:
        return [w for _, w in self.components]


Measure = Union[UniformSegment, AtomSet, SelfSimilarMeasure, Mixture]


def _check_total(total, what):
    if isinstance(total, Fraction):
        ok = total == 1
    else:
        ok = abs(total - 1) <= MASS_TOL
    if not ok:
        raise ValueError(f"{what} must sum to 1, got {total}")


class Moments(NamedTuple):
    mean: Number
    second_moment: Number
    variance: Number


class RawMoments(NamedTuple):
    """Integrals of ``1, x, x**2`` over a set, plus unresolved IFS mass."""

    m0: Number
    m1: Number
    m2: Number
    unresolved: Number = 0

    def __add__(self, other):
        return RawMoments(*(a + b for a, b in zip(self, other)))

    def __sub__(self, other):
        # unresolved mass only ever accumulates
        return RawMoments(
            self.m0 - other.m0, self.m1 - other.m1, self.m2 - other.m2,
            self.unresolved + other.unresolved,
        )

    def scale(self, w):
        return RawMoments(w * self.m0, w * self.m1, w * self.m2, w * self.unresolved)

    def sq_error(self, point):
        """Integral of ``(x - point)**2`` over the set."""
        return self.m2 - 2 * point * self.m1 + point * point * self.m0


class Cylinder(NamedTuple):
    interval: tuple
    prob: Number
    centroid: Number


ZERO = RawMoments(0, 0, 0, 0)


def moments(m: Measure) -> Moments:
    """Exact mean, second moment and variance of ``m``."""
    if isinstance(m, UniformSegment):
        mean = (m.lo + m.hi) / 2
        second = (m.lo * m.lo + m.lo * m.hi + m.hi * m.hi) / 3
    elif isinstance(m, AtomSet):
        mean = sum(w * x for x, w in m.atoms)
        second = sum(w * x * x for x, w in m.atoms)
    elif isinstance(m, SelfSimilarMeasure):
        mean, second = m.mean, m.second_moment
    elif isinstance(m, Mixture):
        parts = [(w, moments(c)) for c, w in m.components]
        mean = sum(w * mo.mean for w, mo in parts)
        second = sum(w * mo.second_moment for w, mo in parts)
    else:
        raise TypeError(f"not a measure: {m!r}")
    return Moments(mean, second, second - mean * mean)


def support_hull(m: Measure) -> tuple:
    """Smallest closed interval carrying all of the mass of ``m``."""
    if isinstance(m, UniformSegment):
        return (m.lo, m.hi)
    if isinstance(m, AtomSet):
        return (m.atoms[0][0], m.atoms[-1][0])
    if isinstance(m, SelfSimilarMeasure):
        # the fixed points of the extreme maps bound the attractor
        fixed = [c / (1 - s) for s, c in m.maps]
        return (min(fixed), max(fixed))
    hulls = [support_hull(c) for c, _ in m.components]
    return (min(h[0] for h in hulls), max(h[1] for h in hulls))


def cumulative(m: Measure, x, *, inclusive: bool = True, depth: int = DEFAULT_DEPTH) -> RawMoments:
    """Raw moments of ``m`` on ``(-inf, x]`` (or ``(-inf, x)``)."""
    if isinstance(m, UniformSegment):
        if x <= m.lo:
            return ZERO
        t = min(x, m.hi)
        width = m.hi - m.lo
        return RawMoments(
            (t - m.lo) / width,
            (t * t - m.lo * m.lo) / (2 * width),
            (t ** 3 - m.lo ** 3) / (3 * width),
        )
    if isinstance(m, AtomSet):
        acc = [0, 0, 0]
        for pos, w in m.atoms:
            if pos < x or (inclusive and pos == x):
                acc[0] += w
                acc[1] += w * pos
                acc[2] += w * pos * pos
        return RawMoments(*acc)
    if isinstance(m, SelfSimilarMeasure):
        return _ifs_cumulative(m, x, depth)
    if isinstance(m, Mixture):
        total = ZERO
        for comp, w in m.components:
            total = total + cumulative(comp, x, inclusive=inclusive, depth=depth).scale(w)
        return total
    raise TypeError(f"not a measure: {m!r}")


def _whole(m: SelfSimilarMeasure, a, b, p) -> RawMoments:
    # image of m under x -> a x + b, carrying mass p
    mu, m2 = m.mean, m.second_moment
    return RawMoments(p, p * (a * mu + b), p * (a * a * m2 + 2 * a * b * mu + b * b))


def _ifs_cumulative(m: SelfSimilarMeasure, x, depth: int) -> RawMoments:
    # descend on images of the attractor hull, which can be tighter than the base
    lo, hi = support_hull(m)
    total = ZERO
    a, b, p = 1, 0, 1  # affine map S_w = a*x + b of the straddling cylinder
    if x <= lo:
        return ZERO
    if x >= hi:
        return _whole(m, a, b, p)
    for _ in range(depth):
        straddle = None
        for (s, c), q in zip(m.maps, m.probs):
            ca, cb, cp = a * s, a * c + b, p * q
            clo, chi = ca * lo + cb, ca * hi + cb
            if x >= chi:
                total = total + _whole(m, ca, cb, cp)
            elif x > clo:
                straddle = (ca, cb, cp)
        if straddle is None:
            return total
        a, b, p = straddle
    # out of depth: split the straddling cylinder's mass linearly
    clo, chi = a * lo + b, a * hi + b
    frac = (x - clo) / (chi - clo)
    part = _whole(m, a, b, p).scale(frac)
    return total + RawMoments(part.m0, part.m1, part.m2, p)


def raw_moments(m: Measure, interval, *, lo_closed: bool = True, hi_closed: bool = True,
                depth: int = DEFAULT_DEPTH) -> RawMoments:
    """Raw moments of ``m`` restricted to an interval.

    Openness of the endpoints only matters for atoms.
    """
    lo, hi = interval
    if lo > hi:
        raise ValueError(f"interval endpoints out of order: [{lo}, {hi}]")
    upper = cumulative(m, hi, inclusive=hi_closed, depth=depth)
    lower = cumulative(m, lo, inclusive=not lo_closed, depth=depth)
    return upper - lower


def mass(m: Measure, interval, *, depth: int = DEFAULT_DEPTH) -> Number:
    """Probability of the closed interval under ``m``.

    Use :func:`raw_moments` to obtain the unresolved-mass error bracket for
    self-similar components.
    """
    return raw_moments(m, interval, depth=depth).m0


def sq_error_integral(m: Measure, interval, point, *, depth: int = DEFAULT_DEPTH) -> Number:
    """Integral of ``(x - point)**2`` over the closed interval."""
    return raw_moments(m, interval, depth=depth).sq_error(point)


def conditional_mean(m: Measure, interval, *, depth: int = DEFAULT_DEPTH) -> Number:
    """Centroid of ``m`` restricted to the closed interval."""
    r = raw_moments(m, interval, depth=depth)
    if r.m0 == 0:
        raise ZeroMass(f"interval {interval} carries no mass")
    return r.m1 / r.m0


def cylinder(m: SelfSimilarMeasure, word: str) -> Cylinder:
    """Interval ``S_w(base)``, its probability and its centroid ``S_w(mean)``."""
    a, b, p = 1, 0, 1
    for letter in word:
        i = int(letter) - 1
        if not 0 <= i < len(m.maps):
            raise ValueError(f"letter {letter!r} outside alphabet {m.alphabet!r}")
        s, c = m.maps[i]
        a, b, p = a * s, a * c + b, p * m.probs[i]
    lo, hi = m.base
    return Cylinder((a * lo + b, a * hi + b), p, a * m.mean + b)


def voronoi_boundaries(codebook: Sequence) -> list:
    """Midpoints between consecutive codepoints of a sorted codebook."""
    return [(u + v) / 2 for u, v in zip(codebook, codebook[1:])]


def cell_moments(m: Measure, codebook: Sequence, *, depth: int = DEFAULT_DEPTH) -> list:
    """Raw moments of every Voronoi cell of a sorted codebook.

    Cell ``i`` is ``(b_{i-1}, b_i]``, so an atom sitting exactly on a
    boundary is assigned to the cell on its left.
    """
    cuts = [cumulative(m, b, inclusive=True, depth=depth) for b in voronoi_boundaries(codebook)]
    full = moments(m)
    cuts.append(RawMoments(1, full.mean, full.second_moment))
    cells, prev = [], ZERO
    for cut in cuts:
        cells.append(cut - prev)
        prev = cut
    return cells


def distortion(m: Measure, codebook: Sequence, *, depth: int = DEFAULT_DEPTH) -> Number:
    """Expected squared distance from an ``m``-distributed point to the codebook."""
    codebook = sorted(codebook)
    cells = cell_moments(m, codebook, depth=depth)
    return sum(c.sq_error(a) for c, a in zip(cells, codebook))


def is_close(a, b, tol: float) -> bool:
    """Exact comparison for two Fractions, absolute tolerance otherwise."""
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b or abs(a - b) <= tol
    return math.isclose(float(a), float(b), rel_tol=0.0, abs_tol=tol)


def as_float(m: Measure) -> Measure:
    """Copy of ``m`` with every parameter converted to float."""
    if isinstance(m, UniformSegment):
        return UniformSegment(float(m.lo), float(m.hi))
    if isinstance(m, AtomSet):
        return AtomSet(tuple((float(x), float(w)) for x, w in m.atoms))
    if isinstance(m, SelfSimilarMeasure):
        return SelfSimilarMeasure(
            tuple((float(s), float(c)) for s, c in m.maps),
            tuple(float(p) for p in m.probs),
            tuple(float(b) for b in m.base),
        )
    return Mixture(tuple((as_float(c), float(w)) for c, w in m.components))
