from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasiprob.scenario import (
    Behavior,
    NormalizationError,
    QuasiDistribution,
    Scenario,
    ScenarioError,
    ScenarioSizeError,
    atom_assignment,
    atom_index,
    marginal_map,
    marginals,
    no_signalling_report,
)

from conftest import S2222, random_jqpd


def test_labels_and_sizes():
    sc = Scenario.from_label("3322")
    assert sc.atom_count == 2**6
    assert sc.table_size == 9 * 4
    assert sc.label() == "3,2;3,2"
    assert str(sc) == "3322"
    assert Scenario.nn22(4) == Scenario.from_label("4422")


def test_atom_index_is_mixed_radix_with_first_digit_most_significant():
    sc = Scenario(((2, 3), (1, 2)))
    assert atom_index(sc, [(0, 0), (1,)]) == 1
    assert atom_index(sc, [(0, 1), (0,)]) == 2
    assert atom_index(sc, [(1, 0), (0,)]) == 6
    for i in range(sc.atom_count):
        assert atom_index(sc, atom_assignment(sc, i)) == i


def test_invalid_assignment():
    with pytest.raises(ScenarioError):
        atom_index(S2222, [(0, 2), (0, 0)])
    with pytest.raises(ScenarioError):
        atom_assignment(S2222, 16)


def test_atom_cap():
    big = Scenario.nn22(13)
    with pytest.raises(ScenarioSizeError):
        QuasiDistribution.uniform(big)


def test_behavior_rejects_bad_rows():
    with pytest.raises(NormalizationError):
        Behavior(S2222, (Fraction(1, 4),) * 15 + (Fraction(1, 2),))
    with pytest.raises(ScenarioError):
        Behavior(S2222, (Fraction(1, 4),) * 15)


def test_point_mass_marginals_are_deterministic():
    idx = atom_index(S2222, [(0, 1), (1, 1)])
    b = marginals(QuasiDistribution.point_mass(S2222, idx))
    assert b.prob((0, 0), (0, 1)) == 1
    assert b.prob((1, 0), (1, 1)) == 1
    assert b.prob((1, 1), (1, 1)) == 1
    assert sum(b.table) == 4


def test_marginal_map_rows_have_equal_counts():
    m = marginal_map(S2222)
    assert m.shape == (16, 16)
    # each table entry fixes two of the four atom digits
    assert set(m.row_counts()) == {4}


def test_marginal_map_matches_marginals(rng):
    for _ in range(10):
        p = random_jqpd(Scenario.from_label("3322"), rng)
        assert marginal_map(p.scenario).apply(p.values) == marginals(p).table


def test_signalling_detected():
    table = [Fraction(1, 4)] * 16
    # shift weight in Bob's (1,1) block so Alice's marginal at x=1 changes
    table[12], table[13], table[14], table[15] = (Fraction(1, 2), Fraction(1, 2), 0, 0)
    report = no_signalling_report(Behavior(S2222, tuple(table)))
    assert not report.satisfied
    assert report.max_discrepancy == Fraction(1, 2)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=16, max_size=16).filter(lambda w: sum(w) > 0))
def test_marginals_of_any_jqpd_are_no_signalling(weights):
    total = sum(weights)
    p = QuasiDistribution(S2222, tuple(Fraction(w, total) for w in weights))
    report = no_signalling_report(marginals(p))
    assert report.satisfied and report.max_discrepancy == 0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_tripartite_marginals_no_signalling(seed):
    p = random_jqpd(Scenario(((2, 2), (2, 2), (2, 2))), np.random.default_rng(seed))
    assert no_signalling_report(marginals(p)).satisfied


def test_quasi_distribution_parts():
    values = [Fraction(0)] * 16
    values[0], values[1], values[2] = Fraction(3, 2), Fraction(-1, 2), Fraction(0)
    p = QuasiDistribution(S2222, tuple(values))
    assert p.mass == 2
    assert p.positive_part - p.negative_part == 1
    assert not p.is_proper()
