"""Finite atom approximations of measures.

Each piece of a measure (an equal-mass bin of a uniform segment, a cylinder
of a self-similar measure) is collapsed onto its own centroid with its own
mass.  That keeps the mean exact and lowers the second moment by exactly
the within-piece variance, which is the squared Wasserstein-2 distance of
this particular coupling.  ``AtomList.w2_sq`` records that gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .measures import (
    AtomSet,
    Measure,
    Mixture,
    SelfSimilarMeasure,
    UniformSegment,
    cylinder,
    moments,
)


class BudgetTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class AtomList:
    positions: tuple
    weights: tuple
    source: str
    resolution: int
    w2_sq: object

    def __post_init__(self):
        if len(self.positions) != len(self.weights):
            raise ValueError("positions and weights differ in length")

    def __len__(self):
        return len(self.positions)

    @property
    def atoms(self) -> list:
        return list(zip(self.positions, self.weights))

    @property
    def w2(self) -> float:
        return math.sqrt(self.w2_sq)

    def error_bound(self, v_atoms) -> float:
        """Bound on ``|V_n(source) - V_n(atoms)|`` given ``V_n(atoms)``.

        The L2 triangle inequality gives ``|sqrt(V_n(P)) - sqrt(V_n(Q))| <= W``
        for any coupling cost ``W``; squaring out around ``V_n(Q)`` yields
        ``2 W sqrt(V_n(Q)) + W**2``.
        """
        w = self.w2
        return 2 * w * math.sqrt(max(float(v_atoms), 0.0)) + w * w

    def as_measure(self) -> AtomSet:
        return AtomSet(tuple(zip(self.positions, self.weights)))


def atomize(m: Measure, budget: int, *, depth: int | None = None) -> AtomList:
    """Approximate ``m`` by at most ``budget`` weighted atoms.

    ``depth`` overrides the cylinder depth chosen for self-similar pieces.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    pairs, w2_sq, res = _atoms(m, budget, depth)
    merged: dict = {}
    for x, w in pairs:
        merged[x] = merged.get(x, 0) + w
    xs = sorted(merged)
    return AtomList(
        positions=tuple(xs),
        weights=tuple(merged[x] for x in xs),
        source=type(m).__name__,
        resolution=res,
        w2_sq=w2_sq,
    )


def _atoms(m, budget, depth):
    if isinstance(m, AtomSet):
        return list(m.atoms), 0, len(m.atoms)
    if isinstance(m, UniformSegment):
        width = (m.hi - m.lo) / budget
        pairs = [(m.lo + (i + Fraction(1, 2)) * width, Fraction(1, budget)) for i in range(budget)]
        return pairs, width * width / 12, budget
    if isinstance(m, SelfSimilarMeasure):
        k = depth if depth is not None else _max_depth(len(m.maps), budget)
        pairs = []
        for letters in product(m.alphabet, repeat=k):
            cyl = cylinder(m, "".join(letters))
            pairs.append((cyl.centroid, cyl.prob))
        # each depth-k cylinder keeps variance s_w^2 V
        shrink = sum(p * s * s for p, (s, _) in zip(m.probs, m.maps))
        return pairs, moments(m).variance * shrink ** k, k
    if isinstance(m, Mixture):
        pairs, gap, res = [], 0, 0
        for comp, w in m.components:
            share = max(1, int(budget * w))
            if isinstance(comp, AtomSet) and len(comp.atoms) > share:
                raise BudgetTooSmall(
                    f"{len(comp.atoms)} atoms do not fit in a budget share of {share}"
                )
            sub, sub_gap, sub_res = _atoms(comp, share, depth)
            pairs.extend((x, w * q) for x, q in sub)
            gap += w * sub_gap
            res = max(res, sub_res)
        return pairs, gap, res
    raise TypeError(f"not a measure: {m!r}")


def _max_depth(n_maps: int, budget: int) -> int:
    k = 0
    while n_maps ** (k + 1) <= budget:
        k += 1
    return k
