"""Tripartite cloning of the isotropic box.

The cloned jqpd lives on atoms ``a0 a1 b0 b1 b'0 b'1``.  Its observable
marginals are what Feynman's criterion is applied to; the no-signalling
report and the operational witness for a hypothetical perfect PR clone are
kept as separate records because they answer different questions.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .boxes import SCENARIO_CLONE, cloned_isotropic, isotropic
from .mass import has_jqpd
from .scenario import QuasiDistribution, marginals, no_signalling_report

SWEEP_GRID = tuple(Fraction(k, 16) for k in range(17))
PARTY_NAMES = ("a", "b", "b'")


@dataclass(frozen=True)
class MarginalEvent:
    # (party, setting, outcome) triples
    terms: tuple[tuple[int, int, int], ...]

    def label(self) -> str:
        return ",".join(f"{PARTY_NAMES[p]}{x}={o}" for p, x, o in self.terms)


@dataclass(frozen=True)
class CloneReport:
    x: Fraction
    min_observable_marginal: Fraction
    min_event: MarginalEvent
    ns_discrepancy: Fraction
    jqpd_exists: bool
    proper: bool
    # (y, y', c) -> P(b_y xor b'_y' = c), identical for both Alice settings
    xor_statistics: dict
    pair_marginals_match: bool
    exhibited_marginal: Fraction

    def to_text(self) -> str:
        lines = [
            f"x = {_fmt(self.x)}",
            f"min_observable_marginal = {_fmt(self.min_observable_marginal)}",
            f"min_event = {self.min_event.label()}",
            f"P(a0=0,b0=1,b'1=1) = {_fmt(self.exhibited_marginal)}",
            f"ns_discrepancy = {_fmt(self.ns_discrepancy)}",
            f"jqpd_exists = {str(self.jqpd_exists).lower()}",
            f"proper = {str(self.proper).lower()}",
            f"pair_marginals_match = {str(self.pair_marginals_match).lower()}",
        ]
        for (y, yp, c), v in sorted(self.xor_statistics.items()):
            lines.append(f"P(b{y} xor b'{yp} = {c}) = {_fmt(v)}")
        return "\n".join(lines) + "\n"


def _fmt(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def observable_marginals(jqpd: QuasiDistribution):
    """Yield ``(event, value)`` for every party subset, setting and outcome.

    Each party contributes at most one of its settings, so these are the
    marginals an experiment could estimate.
    """
    arr = jqpd.array()
    sc = jqpd.scenario
    n = sc.n_parties
    for size in range(1, n + 1):
        for parties in itertools.combinations(range(n), size):
            for settings in itertools.product(
                *(range(sc.parties[p].n_settings) for p in parties)
            ):
                keep = [sc.digit_offset[p] + x for p, x in zip(parties, settings)]
                drop = tuple(d for d in range(arr.ndim) if d not in keep)
                block = np.asarray(arr.sum(axis=drop) if drop else arr)
                for outs in itertools.product(
                    *(range(sc.parties[p].n_outcomes) for p in parties)
                ):
                    event = MarginalEvent(tuple(zip(parties, settings, outs)))
                    yield event, Fraction(block[outs])


def xor_statistics(behavior, alice_setting: int) -> dict:
    out = {}
    for y, yp in itertools.product((0, 1), repeat=2):
        blk = behavior.block((alice_setting, y, yp)).sum(axis=0)
        same = blk[0, 0] + blk[1, 1]
        out[(y, yp, 0)] = Fraction(same)
        out[(y, yp, 1)] = 1 - Fraction(same)
    return out


def pair_marginals(behavior):
    """The (A, B) and (A, B') bipartite tables as nested dicts."""
    ab, abp = {}, {}
    for x, y in itertools.product((0, 1), repeat=2):
        # the third party's setting is irrelevant by no-signalling; use y
        ab[(x, y)] = behavior.sub_marginal((0, 1), (x, y), (x, y, y))
        abp[(x, y)] = behavior.sub_marginal((0, 2), (x, y), (x, y, y))
    return ab, abp


def clone_report(x) -> CloneReport:
    x = Fraction(x)
    jqpd = cloned_isotropic(x)
    behavior = marginals(jqpd)
    _, target = isotropic(x)
    ab, abp = pair_marginals(behavior)
    match = all(
        np.array_equal(ab[k], target.block(k)) and np.array_equal(abp[k], target.block(k))
        for k in ab
    )
    best_event, best = None, None
    for event, v in observable_marginals(jqpd):
        if best is None or v < best:
            best_event, best = event, v
    xor0, xor1 = xor_statistics(behavior, 0), xor_statistics(behavior, 1)
    if xor0 != xor1:
        raise AssertionError("B-B' statistics depend on Alice's setting")
    exhibited = Fraction(behavior.sub_marginal((0, 1, 2), (0, 0, 1))[0, 1, 1])
    report = no_signalling_report(behavior)
    return CloneReport(
        x=x,
        min_observable_marginal=best,
        min_event=best_event,
        ns_discrepancy=report.max_discrepancy,
        jqpd_exists=has_jqpd(behavior),
        proper=best >= 0,
        xor_statistics=xor0,
        pair_marginals_match=match,
        exhibited_marginal=exhibited,
    )


@dataclass(frozen=True)
class SignallingWitness:
    # alice setting -> {c: P(b xor b' = c | x, y=0, y'=1)}
    hypothetical: dict
    total_variation: Fraction
    # alice setting -> P(b0 xor b'1 = 1) from the static cloned jqpd at x = 1
    static: dict

    @property
    def static_is_setting_independent(self) -> bool:
        return len(set(self.static.values())) == 1


def pr_clone_signalling_witness(y: int = 0, yp: int = 1) -> SignallingWitness:
    """Compare a perfect PR clone with the static cloned jqpd.

    A perfect clone obeys ``a ^ b = x y`` and ``a ^ b' = x y'`` outcome by
    outcome, so ``b ^ b' = x (y ^ y')`` and Bob's pair reads Alice's setting
    whenever ``y != y'``.  The static jqpd at x = 1 only reproduces the pair
    marginals, and its ``b ^ b'`` statistics do not depend on Alice's setting.
    """
    hypothetical = {}
    for x in (0, 1):
        dist = {0: Fraction(0), 1: Fraction(0)}
        for a in (0, 1):
            b = a ^ (x & y)
            bp = a ^ (x & yp)
            dist[b ^ bp] += Fraction(1, 2)
        hypothetical[x] = dist
    tv = sum(abs(hypothetical[0][c] - hypothetical[1][c]) for c in (0, 1)) / 2
    behavior = marginals(cloned_isotropic(1))
    static = {x: xor_statistics(behavior, x)[(y, yp, 1)] for x in (0, 1)}
    return SignallingWitness(hypothetical, tv, static)


def sweep_csv(grid=SWEEP_GRID, decimals: int | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = [
        "x",
        "min_observable_marginal",
        "min_event",
        "exhibited_marginal",
        "ns_discrepancy",
        "jqpd_exists",
        "proper",
    ]
    if decimals is not None:
        header.append("min_observable_marginal_decimal")
    w.writerow(header)
    for x in grid:
        r = clone_report(x)
        row = [
            _fmt(r.x),
            _fmt(r.min_observable_marginal),
            r.min_event.label(),
            _fmt(r.exhibited_marginal),
            _fmt(r.ns_discrepancy),
            str(r.jqpd_exists).lower(),
            str(r.proper).lower(),
        ]
        if decimals is not None:
            row.append(f"{float(r.min_observable_marginal):.{decimals}f}")
        w.writerow(row)
    return buf.getvalue()


__all__ = [
    "SCENARIO_CLONE",
    "CloneReport",
    "MarginalEvent",
    "SignallingWitness",
    "clone_report",
    "observable_marginals",
    "pr_clone_signalling_witness",
    "sweep_csv",
]
