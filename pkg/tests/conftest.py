from fractions import Fraction

import numpy as np
import pytest

from quasiprob.scenario import QuasiDistribution, Scenario, marginals

S2222 = Scenario.from_label("2222")


def random_jqpd(scenario: Scenario, rng: np.random.Generator, spread: int = 6) -> QuasiDistribution:
    """Signed integer weights shifted so they sum to one, then scaled."""
    while True:
        w = rng.integers(-spread, spread + 1, size=scenario.atom_count)
        total = int(w.sum())
        if total > 0:
            break
    return QuasiDistribution(scenario, tuple(Fraction(int(v), total) for v in w))


def random_behavior(scenario: Scenario, rng: np.random.Generator):
    return marginals(random_jqpd(scenario, rng))


@pytest.fixture
def rng():
    return np.random.default_rng(20260417)


def vertex_witnesses():
    """Signed jqpds reproducing the 24 vertices of the 2222 polytope."""
    from quasiprob.boxes import pr_box
    from quasiprob.mass import min_mass

    out = [QuasiDistribution.point_mass(S2222, i) for i in range(16)]
    for a in (0, 1):
        for b in (0, 1):
            for c in (0, 1):
                out.append(min_mass(pr_box(a, b, c)).witness)
    return out


_WITNESSES = []


def random_ns_jqpd(rng: np.random.Generator, k: int = 4) -> QuasiDistribution:
    """Random mixture of vertex witnesses: signed, with a proper behavior."""
    if not _WITNESSES:
        _WITNESSES.extend(vertex_witnesses())
    picks = rng.choice(len(_WITNESSES), size=k, replace=False)
    w = rng.integers(1, 20, size=k)
    total = int(w.sum())
    values = [Fraction(0)] * 16
    for p, wt in zip(picks, w):
        for i, v in enumerate(_WITNESSES[p].values):
            values[i] += Fraction(int(wt), total) * v
    return QuasiDistribution(S2222, tuple(values))


# one line per acceptance criterion, repeated at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
