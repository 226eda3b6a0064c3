from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from quasiprob.boxes import (
    all_deterministic,
    correlation_box,
    is_rank_one,
    isotropic,
    pr_box,
    pr_n_sign_matrix,
    sign_matrix_from_index,
)
from quasiprob.inequalities import chsh
from quasiprob.mass import (
    SignallingError,
    certify_correlation_mass,
    correlation_mass,
    has_jqpd,
    lift_correlation_witness,
    local_feasible,
    min_mass,
    verify_witness,
)
from quasiprob.scenario import Behavior, Scenario, marginal_map, marginals

from conftest import S2222, random_behavior, random_ns_jqpd


def float_mass(behavior):
    """Independent oracle: the split-variable LP in floating point."""
    A = marginal_map(behavior.scenario).toarray().astype(float)
    A = np.vstack([A, np.ones(A.shape[1])])
    q = np.array([float(v) for v in behavior.table] + [1.0])
    res = linprog(np.ones(2 * A.shape[1]), A_eq=np.hstack([A, -A]), b_eq=q,
                  bounds=(0, None), method="highs")
    assert res.status == 0
    return res.fun


def test_pr_box_mass_is_two():
    r = min_mass(pr_box())
    assert r.m_star == 2
    assert r.positive_part == Fraction(3, 2) and r.negative_part == Fraction(1, 2)
    assert verify_witness(r, pr_box())


@pytest.mark.parametrize("bits", [(a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)])
def test_every_pr_variant_has_mass_two(bits):
    assert min_mass(pr_box(*bits)).m_star == 2


def test_deterministic_boxes_have_mass_one():
    for b in all_deterministic(S2222):
        assert min_mass(b).m_star == 1


def test_matches_float_oracle_on_random_behaviors(rng):
    for _ in range(120):
        b = random_behavior(S2222, rng)
        r = min_mass(b)
        assert abs(float(r.m_star) - float_mass(b)) < 1e-9
        assert verify_witness(r, b)


def test_matches_float_oracle_in_3322(rng):
    sc = Scenario.from_label("3322")
    for _ in range(5):
        b = random_behavior(sc, rng)
        assert abs(float(min_mass(b).m_star) - float_mass(b)) < 1e-9


def test_mass_is_chsh_bound(rng):
    for _ in range(50):
        b = marginals(random_ns_jqpd(rng))
        s = chsh(b).max_abs
        assert min_mass(b).m_star == max(Fraction(1), s / 2)


def test_chsh_bound_needs_nonnegative_tables():
    # a formal behavior (negative entries) can cost more than |S|/2
    values = [Fraction(0)] * 16
    values[0], values[1], values[14] = Fraction(1), Fraction(1), Fraction(-1)
    from quasiprob.scenario import QuasiDistribution

    b = marginals(QuasiDistribution(S2222, tuple(values)))
    assert any(v < 0 for v in b.table)
    assert chsh(b).max_abs == 2
    assert min_mass(b).m_star == 3


def test_signalling_rejected():
    table = list(pr_box().table)
    # move P(1,1|0,0) onto P(0,0|0,0): Bob's marginal at y=0 now depends on x
    table[0] += table[3]
    table[3] = Fraction(0)
    b = Behavior(S2222, tuple(table))
    assert not has_jqpd(b)
    with pytest.raises(SignallingError) as exc:
        min_mass(b)
    assert exc.value.report.max_discrepancy == Fraction(1, 2)


def test_perturbed_witness_fails_verification():
    r = min_mass(pr_box())
    values = list(r.witness.values)
    values[0] += Fraction(1, 7)
    values[1] -= Fraction(1, 7)
    from quasiprob.mass import MassResult
    from quasiprob.scenario import QuasiDistribution

    bad = MassResult(r.m_star, QuasiDistribution.unchecked(S2222, values), r.positive_part, r.negative_part)
    assert not verify_witness(bad, pr_box())


def test_local_feasibility_matches_mass(rng):
    for x in (0, Fraction(1, 2), Fraction(3, 4)):
        _, b = isotropic(x)
        assert local_feasible(b) == (min_mass(b).m_star == 1)


@pytest.mark.parametrize("n", [2, 3])
def test_locality_is_rank_one_exhaustively(n):
    for idx in range(2 ** (n * n)):
        c = sign_matrix_from_index(n, idx)
        assert local_feasible(correlation_box(n, c)) == is_rank_one(c)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**9 - 1))
def test_correlation_lp_agrees_with_full_lp_n3(idx):
    c = sign_matrix_from_index(3, idx)
    cm = correlation_mass(c)
    assert cm.m_star == min_mass(correlation_box(3, c)).m_star
    assert certify_correlation_mass(c, cm)
    w = lift_correlation_witness(3, cm)
    assert w.mass == cm.m_star
    assert marginals(w) == correlation_box(3, c)


@pytest.mark.parametrize("variant,expected", [(0, Fraction(7, 3)), (1, Fraction(12, 5))])
def test_pr4_classes_from_both_formulations(variant, expected):
    c = pr_n_sign_matrix(4, variant)
    assert correlation_mass(c).m_star == expected
    assert min_mass(correlation_box(4, c)).m_star == expected


def test_column_generation_agrees_with_full_pattern_set():
    for variant in (0, 3, 17):
        c = pr_n_sign_matrix(5, variant)
        full = correlation_mass(c, generate_columns=False)
        gen = correlation_mass(c, generate_columns=True, rule="dantzig")
        assert full.m_star == gen.m_star
        assert certify_correlation_mass(c, gen)


def test_certificate_rejects_wrong_value():
    c = pr_n_sign_matrix(4, 1)
    cm = correlation_mass(c)
    from dataclasses import replace

    assert not certify_correlation_mass(c, replace(cm, m_star=cm.m_star - Fraction(1, 100)))


def test_correlation_mass_is_at_most_n(rng):
    for n in (3, 4, 5):
        for _ in range(5):
            c = np.where(rng.integers(0, 2, (n, n)) == 1, -1, 1)
            assert 1 <= correlation_mass(c).m_star <= n
