import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from resodisc.besselkit import BesselZeroTable, zero_table
from resodisc.disc_spectrum import (
    RADIAL_MODE_NOTE,
    bourget_check,
    eigenvalue_gaps,
    enumerate_eigenvalues,
    mode_from_indices,
    mode_from_rank,
)
from resodisc.square_spectrum import count_representations, find_multiplicity, multiplicities_upto


def _oracle_order(count, n_max=40, m_max=40):
    pool = sorted((special.jn_zeros(n, m_max)[m - 1], n, m) for n in range(n_max) for m in range(1, m_max + 1))
    return [(n, m) for _, n, m in pool[:count]]


def test_first_six_ranks_of_unit_disc():
    modes = enumerate_eigenvalues(1.0, 6)
    assert [(m.n, m.m) for m in modes] == [(0, 1), (1, 1), (2, 1), (0, 2), (3, 1), (1, 2)]
    assert modes[0].lam == pytest.approx(5.78, abs=0.01)
    assert modes[1].lam == pytest.approx(14.68, abs=0.01)
    assert [m.rank for m in modes] == [1, 2, 3, 4, 5, 6]


def test_ordering_matches_scipy_oracle():
    got = [(m.n, m.m) for m in enumerate_eigenvalues(1.0, 120)]
    assert got == _oracle_order(120)


def test_radius_scaling():
    unit = enumerate_eigenvalues(1.0, 20)
    scaled = enumerate_eigenvalues(2.5, 20)
    for u, s in zip(unit, scaled):
        assert (u.n, u.m) == (s.n, s.m)
        assert s.lam == pytest.approx(u.lam / 6.25, rel=1e-15)


def test_multiplicity_annotations():
    modes = enumerate_eigenvalues(1.0, 30)
    assert modes[0].is_principal and modes[0].multiplicity == 1 and modes[0].note == ""
    for mode in modes[1:]:
        if mode.n == 0:
            assert mode.multiplicity == 1 and mode.note == RADIAL_MODE_NOTE
        else:
            assert mode.multiplicity == 2 and mode.note == ""


def test_strictly_increasing_gaps():
    assert min(eigenvalue_gaps(enumerate_eigenvalues(1.0, 200))) > 1e-4


def test_mode_lookup_consistent():
    for k in (1, 4, 6, 17, 40):
        by_rank = mode_from_rank(k, 1.0)
        assert mode_from_indices(by_rank.n, by_rank.m, 1.0) == by_rank


@pytest.mark.parametrize("args", [(1.0, 0), (0.0, 3), (-1.0, 3)])
def test_enumerate_rejects_bad_arguments(args):
    with pytest.raises(ValueError):
        enumerate_eigenvalues(*args)


def test_bourget_clean_and_detects_planted_pair():
    table = zero_table(6, 6)
    assert bourget_check(table, 1e-6) == []
    planted = dict(table.entries)
    planted[(5, 1)] = planted[(1, 3)] + 1e-9
    assert bourget_check(BesselZeroTable(planted), 1e-6) == [((1, 3), (5, 1))]


@pytest.mark.parametrize("N,count", [(50, 3), (65, 4), (325, 6), (2, 1), (5, 2)])
def test_square_worked_examples(N, count):
    assert count_representations(N).multiplicity == count


def test_square_pairs_listed():
    assert count_representations(325).pairs == ((1, 18), (6, 17), (10, 15), (15, 10), (17, 6), (18, 1))
    assert count_representations(50).has_diagonal
    assert not count_representations(65).has_diagonal
    assert count_representations(3).multiplicity == 0


def test_sieve_matches_direct_count():
    counts = multiplicities_upto(3000)
    for N in range(1, 3001):
        assert counts[N] == count_representations(N).multiplicity


@settings(max_examples=200, deadline=None)
@given(N=st.integers(1, 200000))
def test_parity_tracks_diagonal(N):
    rep = count_representations(N)
    assert (rep.multiplicity % 2 == 1) == rep.has_diagonal
    assert all(n * n + m * m == N for n, m in rep.pairs)


def test_find_multiplicity():
    assert 325 in find_multiplicity(6, 400)
    assert find_multiplicity(1, 50) == [2, 8, 18, 32]
    with pytest.raises(ValueError):
        count_representations(0)
