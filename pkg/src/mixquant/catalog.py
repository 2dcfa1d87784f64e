"""The five reference mixtures, built in code.

The bundled JSON files under ``data/`` describe the same objects; a test
checks that parsing them reproduces these values exactly.
"""

from __future__ import annotations

from fractions import Fraction as F

from .measures import AtomSet, Measure, Mixture, SelfSimilarMeasure, UniformSegment

HALF = F(1, 2)

#: three equally likely atoms at 2/3, 5/6 and 1
TRIPLE = AtomSet(((F(2, 3), F(1, 3)), (F(5, 6), F(1, 3)), (F(1), F(1, 3))))

#: middle-thirds Cantor measure scaled onto [0, 1/2]
CANTOR_HALF = SelfSimilarMeasure(((F(1, 3), F(0)), (F(1, 3), F(1, 3))), (HALF, HALF), (F(0), HALF))

#: ratio-1/3 Cantor measure on [0, 1/3]
CANTOR_LEFT = SelfSimilarMeasure(((F(1, 3), F(0)), (F(1, 3), F(2, 9))), (HALF, HALF), (F(0), F(1, 3)))

#: ratio-1/4 Cantor measure on [2/3, 1]
CANTOR_RIGHT = SelfSimilarMeasure(((F(1, 4), HALF), (F(1, 4), F(3, 4))), (HALF, HALF), (F(2, 3), F(1)))

SEC2 = Mixture(((UniformSegment(0, HALF), HALF), (TRIPLE, HALF)))
SEC3A = Mixture(((UniformSegment(0, 1), HALF), (AtomSet(((F(1), F(1)),)), HALF)))
SEC3B = Mixture(((UniformSegment(0, 1), HALF), (AtomSet(((HALF, F(1)),)), HALF)))
SEC5 = Mixture(((CANTOR_HALF, HALF), (TRIPLE, HALF)))
SEC7 = Mixture(((CANTOR_LEFT, HALF), (CANTOR_RIGHT, HALF)))

MEASURES: dict[str, Measure] = {
    "sec2": SEC2,
    "sec3a": SEC3A,
    "sec3b": SEC3B,
    "sec5": SEC5,
    "sec7": SEC7,
}


def identify(m: Measure) -> str | None:
    """Catalog id of ``m`` if it equals one of the reference mixtures."""
    for key, ref in MEASURES.items():
        if m == ref:
            return key
    return None
