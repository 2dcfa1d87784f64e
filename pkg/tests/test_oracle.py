from __future__ import annotations

import warnings
from fractions import Fraction as F

import numpy as np
import pytest

from mixquant.atomizer import atomize
from mixquant.catalog import SEC2, SEC5, SEC7, TRIPLE
from mixquant.measures import UniformSegment
from mixquant.oracle import (
    NTooLarge,
    all_optimal_counts,
    atom_distortion,
    certify,
    optimal_quantizer,
)


def test_three_atoms_single_codepoint():
    res = optimal_quantizer(TRIPLE, 1)
    assert res.codepoints == (F(5, 6),)
    assert res.error == F(1, 54)


def test_three_atoms_all_counts():
    errs = [r.error for r in all_optimal_counts(TRIPLE, 3)]
    assert errs[0] == F(1, 54) and errs[1] > 0 and errs[2] == 0


def test_too_many_codepoints_warns_and_saturates():
    with pytest.warns(NTooLarge):
        res = optimal_quantizer(TRIPLE, 5)
    assert res.saturated and res.error == 0
    assert len(res.codepoints) == 3


def test_uniform_n5():
    res = optimal_quantizer(atomize(UniformSegment(0, F(1, 2)), 10_000), 5)
    assert res.error == pytest.approx(1 / 1200, abs=1e-8)


def test_sec2_n2():
    atoms = atomize(SEC2, 4096)
    res = optimal_quantizer(atoms, 2)
    assert abs(res.error - 17 / 864) <= atoms.error_bound(res.error)
    assert res.codepoints == pytest.approx((0.25, 5 / 6), abs=1e-3)


def test_sec5_n3():
    atoms = atomize(SEC5, 4096, depth=12)
    res = optimal_quantizer(atoms, 3)
    assert abs(res.error - 89 / 8640) <= atoms.error_bound(res.error)
    assert res.codepoints == pytest.approx((1 / 12, 31 / 60, 11 / 12), abs=1e-3)


def test_sec7_n2_favours_the_proof_value():
    atoms = atomize(SEC7, 2048)
    res = optimal_quantizer(atoms, 2)
    bound = atoms.error_bound(res.error)
    assert abs(res.error - 11 / 720) <= bound
    assert abs(res.error - 5 / 432) > bound


def test_error_monotone_and_structure():
    atoms = atomize(SEC2, 512)
    table = all_optimal_counts(atoms, 12)
    errs = [r.error for r in table]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    xs = np.asarray([float(x) for x in atoms.positions])
    ws = np.asarray([float(w) for w in atoms.weights])
    for r in table:
        assert [a for a, _ in r.partition][0] == 0 and r.partition[-1][1] == len(xs)
        assert all(a[1] == b[0] for a, b in zip(r.partition, r.partition[1:]))
        assert all(a < b for a, b in zip(r.codepoints, r.codepoints[1:]))
        for (i, j), c in zip(r.partition, r.codepoints):
            assert c == pytest.approx(np.dot(ws[i:j], xs[i:j]) / ws[i:j].sum(), abs=1e-13)
        assert atom_distortion(atoms, r.codepoints) == pytest.approx(r.error, abs=1e-13)


def test_exact_and_float_modes_agree():
    atoms = atomize(SEC2, 96)
    assert len(atoms) <= 256
    exact = all_optimal_counts(atoms, 6, exact=True)
    fl = all_optimal_counts(atoms, 6, exact=False)
    for a, b in zip(exact, fl):
        assert a.partition == b.partition
        assert float(a.error) == pytest.approx(b.error, abs=1e-14)


def test_exact_mode_chosen_for_small_rational_input():
    res = optimal_quantizer(atomize(SEC2, 60), 3)
    assert isinstance(res.error, F)


def test_ties_go_to_earliest_boundary():
    # four equal atoms: any 2-split is [2,2]; three codepoints tie between
    # {0},{1},{2,3} and {0,1},{2},{3}... the DP must pick the earliest cut
    atoms = [(F(0), F(1, 4)), (F(1), F(1, 4)), (F(2), F(1, 4)), (F(3), F(1, 4))]
    res = optimal_quantizer(atoms, 3)
    assert res.partition == ((0, 1), (1, 2), (2, 4))


def test_certify_sec7_n4():
    cert = certify(SEC7, 4, F(67, 51840))
    assert cert.ok and cert.margin > 0
