from __future__ import annotations

import math
from fractions import Fraction as F

import pytest

from mixquant import asymptotics as asy
from mixquant.catalog import SEC2, SEC5, SEC7
from mixquant.closed_form import closed_form, two_cantor_alloc

BETA = math.log(2) / math.log(3)


def test_plumbing_identity():
    seq = asy.error_sequence(SEC5, range(1, 30))
    assert [v for _, v in seq.entries] == [closed_form(SEC5, n).error for n in range(1, 30)]


def test_sequence_validation():
    with pytest.raises(ValueError):
        asy.AsymSeq(((2, 0.1), (2, 0.05)))
    with pytest.raises(ValueError):
        asy.AsymSeq(((2, 0.0),))
    with pytest.raises(ValueError):
        asy.dimension_estimate(asy.AsymSeq(((2, 0.1), (3, 0.05))))
    with pytest.raises(ValueError):
        asy.coefficient_sequence(asy.AsymSeq(((2, 0.1),)), 0)


def test_tail_estimates_lie_in_bracket():
    seq = asy.error_sequence(SEC2, range(5, 400))
    lo, hi = asy.dimension_estimate(seq)
    tail = seq.dim_estimates()[len(seq) // 2:]
    assert all(lo <= d <= hi for d in tail)
    assert lo < hi


def test_sec2_coefficient_at_1000():
    ((_, c),) = asy.coefficient_sequence(asy.error_sequence(SEC2, [1000]), 1)
    assert abs(c - 1 / 96) < 1e-4


def test_sec2_arithmetic_subsequences_agree():
    a = asy.error_sequence(SEC2, range(1000, 100_001, 1000))
    b = asy.error_sequence(SEC2, range(1005, 100_006, 1000))
    assert asy.subsequence_gap(a, b, 1) < 1e-3


def test_sec5_subsequences_disagree():
    a = asy.error_sequence(SEC5, [2**k + 3 for k in range(2, 30)])
    b = asy.error_sequence(SEC5, [3 * 2 ** (k - 1) + 3 for k in range(2, 30)])
    gap = asy.subsequence_gap(a, b, BETA)
    lim_a = 1 / 64
    lim_b = lim_a * 10 / 162 * 3 ** (2 / BETA)
    assert a.coeffs(BETA)[-1] == pytest.approx(lim_a, rel=1e-6)
    assert b.coeffs(BETA)[-1] == pytest.approx(lim_b, rel=1e-6)
    assert gap == pytest.approx(lim_b - lim_a, rel=1e-5) and gap > 0


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_two_cantor_subsequence_errors(k):
    vf = asy.two_cantor_sequence("F", [k]).entries[0][1]
    vg = asy.two_cantor_sequence("G", [k]).entries[0][1]
    assert vf == F(1, 240) * (F(2) ** (17 - 20 * k) + 5 * F(3) ** (7 - 12 * k))
    assert vg == F(1, 15) * F(2) ** (9 - 20 * k) + F(5, 16) * F(81) ** (1 - 3 * k)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_scheduled_split_matches_search(k):
    for index, split in ((asy.f_index, asy.f_split), (asy.g_index, asy.g_split)):
        a = two_cantor_alloc(index(k))
        assert (a.n1, a.n2) == split(k)


def test_two_cantor_band():
    ns = range(6, 2**11)
    vals = asy.error_sequence(SEC7, ns).coeffs(BETA)
    assert all(0.005 < v < 0.2 for v in vals)
    tops = []
    for k in range(3, 11):
        tops.append(max(v for n, v in zip(ns, vals) if 2**k <= n < 2 ** (k + 1)))
    assert all(a >= b for a, b in zip(tops, tops[1:]))


def test_short_subsequences_are_unstable():
    f = asy.two_cantor_sequence("F", range(1, 5))
    g = asy.two_cantor_sequence("G", range(1, 5))
    with pytest.raises(asy.TailUnstable):
        asy.subsequence_gap(f, g, BETA)


def test_long_subsequences_settle():
    f = asy.two_cantor_sequence("F", range(1, 13))
    g = asy.two_cantor_sequence("G", range(1, 13))
    assert asy.subsequence_gap(f, g, BETA) == pytest.approx(0.0070052, abs=1e-3)


def test_huge_fractions_do_not_overflow():
    seq = asy.two_cantor_sequence("F", [40])
    assert math.isfinite(seq.dim_estimates()[0])
    assert math.isfinite(seq.coeffs(BETA)[0])


def test_cantor_dimension():
    assert asy.cantor_dimension(1 / 3) == pytest.approx(BETA)
    assert asy.cantor_dimension(1 / 4) == pytest.approx(0.5)
