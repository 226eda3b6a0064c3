from fractions import Fraction

import pytest

from quasiprob.cloning import SWEEP_GRID, clone_report, pr_clone_signalling_witness, sweep_csv


@pytest.mark.parametrize("x", SWEEP_GRID)
def test_sweep_invariants(x):
    r = clone_report(x)
    assert r.ns_discrepancy == 0
    assert r.jqpd_exists
    assert r.pair_marginals_match
    assert r.exhibited_marginal == (1 - 2 * x) / 8
    assert r.proper == (x <= Fraction(1, 2))
    if x > Fraction(1, 2):
        assert r.min_observable_marginal == (1 - 2 * x) / 8


def test_three_quarters():
    r = clone_report(Fraction(3, 4))
    assert r.min_observable_marginal == Fraction(-1, 16)
    assert r.min_event.label() == "a0=0,b0=1,b'1=1"
    assert not r.proper


def test_boundary_is_proper():
    r = clone_report(Fraction(1, 2))
    assert r.min_observable_marginal == 0 and r.proper


def test_signalling_witness():
    w = pr_clone_signalling_witness()
    assert w.hypothetical[1][1] == 1
    assert w.hypothetical[0][1] == 0
    assert w.total_variation == 1
    assert w.static_is_setting_independent


def test_report_text_and_csv():
    text = clone_report(Fraction(3, 4)).to_text()
    assert "min_observable_marginal = -1/16" in text
    lines = sweep_csv(grid=(Fraction(0), Fraction(1))).splitlines()
    assert lines[0].startswith("x,min_observable_marginal")
    assert lines[2].startswith("1/1,-1/8")
