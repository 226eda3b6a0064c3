import csv
import itertools
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from quasiprob.boxes import (
    SCENARIO_CLONE,
    all_deterministic,
    clone_selector,
    cloned_isotropic,
    correlation_box,
    deterministic,
    is_rank_one,
    isotropic,
    make_box,
    pr_box,
    pr_n_box,
    pr_n_free_entries,
    pr_n_sign_matrix,
    sign_matrix_from_index,
    sign_matrix_index,
)
from quasiprob.inequalities import chsh, inn22_table, inn22_value
from quasiprob.mass import min_mass
from quasiprob.scenario import ScenarioError, marginals, no_signalling_report

from conftest import S2222

FIXTURE = Path(__file__).parent / "fixtures" / "clone_selector.csv"


def test_deterministic_zero_assignment():
    b = deterministic(S2222, [(0, 0), (0, 0)])
    for x, y in itertools.product((0, 1), repeat=2):
        assert b.prob((x, y), (0, 0)) == 1
    assert len(all_deterministic(S2222)) == 16


def test_pr_variants_are_distinct_and_no_signalling():
    boxes = {pr_box(a, b, c) for a, b, c in itertools.product((0, 1), repeat=3)}
    assert len(boxes) == 8
    for b in boxes:
        assert no_signalling_report(b).satisfied
    with pytest.raises(ValueError):
        pr_box(2)


@pytest.mark.parametrize("x", [0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1])
def test_isotropic_family(x):
    x = Fraction(x)
    p, b = isotropic(x)
    assert chsh(b).s(0, 0) == 4 * x
    assert min_mass(b).m_star == max(Fraction(1), 2 * x)


def test_isotropic_endpoints():
    assert isotropic(1)[1] == pr_box()
    assert isotropic(0)[1] == make_box("uniform")
    with pytest.raises(ValueError):
        isotropic(Fraction(5, 4))


def test_correlation_box_two_is_pr_box():
    assert correlation_box(2, [[1, 1], [1, -1]]) == pr_box()


def test_sign_matrix_index_round_trip():
    for idx in (0, 1, 2**9 - 1, 300):
        assert sign_matrix_index(sign_matrix_from_index(3, idx)) == idx


@pytest.mark.parametrize("n", [2, 3, 4])
def test_rank_one_count(n):
    count = sum(is_rank_one(sign_matrix_from_index(n, i)) for i in range(2 ** (n * n)))
    assert count == 2 ** (2 * n - 1)


def _inn22_of_all(n):
    # I = sum J_xy (1 + c_xy)/4 + sum alice/2 + sum bob/2 for uniform marginals
    t = inn22_table(n)
    J = np.array(t.joint)
    idx = np.arange(2 ** (n * n))
    bits = ((idx[:, None] >> np.arange(n * n)) & 1).reshape(-1, n, n)
    c = 1 - 2 * bits
    return (np.einsum("xy,bxy->b", J, 1 + c) + 2 * (sum(t.alice) + sum(t.bob)) + 0) / 4


@pytest.mark.parametrize("n", [2, 3, 4])
def test_pr_n_attains_the_maximum_violation(n):
    values = _inn22_of_all(n)
    assert values.max() == (n - 1) / 2
    assert inn22_value(pr_n_box(n), n) == values.max()
    # spot check the vectorized formula against the exact evaluator
    for i in (0, 5, 2 ** (n * n) - 1):
        assert inn22_value(correlation_box(n, sign_matrix_from_index(n, i)), n) == Fraction(values[i]).limit_denominator()


def test_pr_n_variants():
    assert pr_n_free_entries(4) == [(2, 3), (3, 2), (3, 3)]
    assert not np.array_equal(pr_n_sign_matrix(4, 0), pr_n_sign_matrix(4, 1))
    with pytest.raises(ValueError):
        pr_n_sign_matrix(4, 8)
    with pytest.raises(ValueError):
        pr_n_sign_matrix(9)


def test_clone_selector_fixture():
    with FIXTURE.open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 64
    for r in rows:
        bits = [int(r[k]) for k in ("a0", "a1", "b0", "b1", "c0", "c1")]
        assert clone_selector(*bits) == int(r["f"])
    assert sum(int(r["f"]) == 0 for r in rows) == 16


@pytest.mark.parametrize("x", [0, Fraction(1, 2), Fraction(3, 4), 1])
def test_cloned_isotropic_pairs(x):
    p = cloned_isotropic(x)
    assert sum(p.values) == 1
    b = marginals(p)
    _, target = isotropic(x)
    for xs, y in itertools.product((0, 1), repeat=2):
        assert np.array_equal(b.sub_marginal((0, 1), (xs, y), (xs, y, 0)), target.block((xs, y)))
        assert np.array_equal(b.sub_marginal((0, 2), (xs, y), (xs, 0, y)), target.block((xs, y)))
    assert b.sub_marginal((0, 1, 2), (0, 0, 1))[0, 1, 1] == (1 - 2 * Fraction(x)) / 8
    assert p.scenario == SCENARIO_CLONE


def test_make_box_dispatch():
    assert make_box("pr") == pr_box()
    assert make_box("prn", n=3) == pr_n_box(3)
    with pytest.raises(ScenarioError):
        make_box("nope")
