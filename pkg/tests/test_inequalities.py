import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasiprob.boxes import correlation_box, isotropic, pr_box, pr_n_box, pr_n_sign_matrix, uniform
from quasiprob.inequalities import (
    ChshFacet,
    Inn22Facet,
    NonViolatingError,
    aligned_witness,
    chsh,
    chsh_minus_position,
    correlator,
    mass_bound_residual,
    f_mn,
    facet_decomposition,
    inn22_atom_coefficients,
    inn22_table,
    inn22_value,
    inn22_value_from_jqpd,
    tsirelson_compatible,
)
from quasiprob.mass import min_mass
from quasiprob.scenario import QuasiDistribution, Scenario, marginals

from conftest import S2222, random_jqpd

FACETS = [ChshFacet(m, n, s) for m in (0, 1) for n in (0, 1) for s in (1, -1)]


def test_pr_box_correlators_and_chsh():
    pr = pr_box()
    assert [correlator(pr, i, j) for i in (0, 1) for j in (0, 1)] == [1, 1, 1, -1]
    r = chsh(pr)
    assert r.s(0, 0) == 4 and r.max_abs == 4


def test_deterministic_atoms_give_plus_minus_two():
    for atom in itertools.product((0, 1), repeat=4):
        idx = int("".join(map(str, atom)), 2)
        p = QuasiDistribution.point_mass(S2222, idx)
        r = chsh(marginals(p), p)
        for m, n in itertools.product((0, 1), repeat=2):
            assert r.s(m, n) == 2 * (-1) ** f_mn(atom, m, n)


def test_minus_sign_placement():
    assert chsh_minus_position(0, 0) == (1, 1)
    assert chsh_minus_position(1, 0) == (1, 0)


def test_uniform_box_has_zero_chsh():
    assert chsh(uniform(S2222)).max_abs == 0


def test_tsirelson_sandwich():
    assert tsirelson_compatible(4 * Fraction(5, 8))
    assert not tsirelson_compatible(4 * Fraction(3, 4))
    # 1/sqrt(2) lies between 707/1000 and 708/1000
    assert tsirelson_compatible(4 * Fraction(707, 1000))
    assert not tsirelson_compatible(4 * Fraction(708, 1000))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_mass_identity_on_every_facet(seed):
    p = random_jqpd(S2222, np.random.default_rng(seed))
    for facet in FACETS:
        d = facet_decomposition(p, facet)
        assert d.normalization == 1
        assert d.mass == p.mass
        assert d.chsh_identity_gap() == 0


def test_facet_value_matches_chsh():
    p, b = isotropic(Fraction(3, 4))
    for facet in FACETS:
        d = facet_decomposition(p, facet)
        assert d.value == facet.sign * chsh(b).s(facet.m, facet.n)


def test_inn22_table_shape():
    t = inn22_table(3)
    assert t.alice == (-2, -1, 0)
    assert t.bob == (-1, 0, 0)
    assert t.joint == ((1, 1, 1), (1, 1, -1), (1, -1, 0))
    with pytest.raises(ValueError):
        inn22_table(1)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_inn22_atom_values_range(n):
    k = n * (n - 1) // 2
    coeff = inn22_atom_coefficients(n)
    assert coeff.max() == 0 and coeff.min() == -k
    assert set(coeff.tolist()) == set(range(-k, 1))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_pr_n_value(n):
    b = pr_n_box(n)
    assert inn22_value(b, n) == Fraction(n - 1, 2)


def test_inn22_two_is_chsh():
    # for N = 2 the inequality is CHSH rescaled: I = (S - 2) / 4
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = random_jqpd(S2222, rng)
        b = marginals(p)
        assert inn22_value(b, 2) == (chsh(b).s(0, 0) - 2) / 4


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_inn22_from_jqpd_matches_marginals(seed):
    p = random_jqpd(Scenario.nn22(3), np.random.default_rng(seed))
    assert inn22_value_from_jqpd(p, 3) == inn22_value(marginals(p), 3)


def test_inn22_decomposition_value_is_weighted():
    p = random_jqpd(Scenario.nn22(3), np.random.default_rng(11))
    d = facet_decomposition(p, Inn22Facet(3))
    assert d.value == inn22_value(marginals(p), 3)
    assert d.k == 3


def test_mass_bound_residual_vanishes_for_aligned_witness():
    b = pr_n_box(4)
    w = aligned_witness(b, 4)
    assert w is not None and w.mass == min_mass(b).m_star
    assert mass_bound_residual(w, 4) == 0


def test_mass_bound_residual_formula():
    b = pr_n_box(3)
    w = min_mass(b).witness
    d = facet_decomposition(w, Inn22Facet(3))
    expected = 2 * d.p_minus + 2 * sum(j * q for j, q in enumerate(d.q_plus, start=1))
    assert mass_bound_residual(w, 3) == expected


def test_mass_bound_residual_needs_violation():
    with pytest.raises(NonViolatingError):
        mass_bound_residual(QuasiDistribution.uniform(Scenario.nn22(3)), 3)
