"""CHSH and I_NN22 evaluation and the facet decompositions of the mass."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .lp import LpStatus, solve_integer_lp
from .mass import _integer_rows, _reduced_system, _require_ns
from .scenario import (
    Behavior,
    QuasiDistribution,
    Scenario,
    ScenarioError,
    atom_digits,
    marginals,
)


def _require_binary_bipartite(behavior: Behavior):
    sc = behavior.scenario
    if sc.n_parties != 2 or any(p.n_outcomes != 2 for p in sc.parties):
        raise ScenarioError(f"need a bipartite binary-outcome behavior, got {sc}")


def correlator(behavior: Behavior, i: int, j: int) -> Fraction:
    """``P(A_i = B_j) - P(A_i != B_j)``."""
    _require_binary_bipartite(behavior)
    a, b = behavior.scenario.parties
    if not (0 <= i < a.n_settings and 0 <= j < b.n_settings):
        raise ScenarioError(f"setting pair ({i}, {j}) out of range")
    blk = behavior.block((i, j))
    return blk[0, 0] + blk[1, 1] - blk[0, 1] - blk[1, 0]


# -- CHSH ------------------------------------------------------------------------


def f_mn(atom, m: int, n: int) -> int:
    """Selector bit ``(a0^a1)(b0^b1) ^ a_n ^ b_m`` of atom ``(a0, a1, b0, b1)``."""
    a0, a1, b0, b1 = atom
    return ((a0 ^ a1) & (b0 ^ b1)) ^ (a0, a1)[n] ^ (b0, b1)[m]


def chsh_minus_position(m: int, n: int) -> tuple[int, int]:
    """Setting pair whose correlator carries the minus sign in ``S_{m,n}``.

    With this placement ``S_{m,n}`` of a deterministic atom equals
    ``2 (-1)^f_mn``, which pins the (m, n) labelling.
    """
    return 1 - n, 1 - m


@dataclass(frozen=True)
class ChshReport:
    # keyed by (m, n, sign); sign -1 is the negated expression
    values: dict
    max_abs: Fraction

    def s(self, m: int, n: int) -> Fraction:
        return self.values[(m, n, 1)]


def chsh(behavior: Behavior, jqpd: QuasiDistribution | None = None) -> ChshReport:
    """All eight CHSH expressions of a 2222 behavior.

    When ``jqpd`` is given, each value is recomputed from atom weights and
    must agree with the correlator form.
    """
    _require_binary_bipartite(behavior)
    if any(p.n_settings != 2 for p in behavior.scenario.parties):
        raise ScenarioError("CHSH needs the 2222 scenario")
    E = {(x, y): correlator(behavior, x, y) for x in (0, 1) for y in (0, 1)}
    values = {}
    for m, n in itertools.product((0, 1), repeat=2):
        minus = chsh_minus_position(m, n)
        s = sum((-E[k] if k == minus else E[k]) for k in E)
        if jqpd is not None:
            atom_form = 2 * sum(
                (-v if f_mn(atom, m, n) else v)
                for atom, v in zip(itertools.product((0, 1), repeat=4), jqpd.values)
            )
            if atom_form != s:
                raise ValueError(
                    f"S_{m}{n}: atom form {atom_form} disagrees with correlators {s}"
                )
        values[(m, n, 1)] = s
        values[(m, n, -1)] = -s
    return ChshReport(values, max(abs(v) for v in values.values()))


def tsirelson_compatible(s) -> bool:
    """``|S| <= 2 sqrt 2``, decided as ``S^2 <= 8``."""
    s = Fraction(s)
    return s * s <= 8


# -- facet decompositions ---------------------------------------------------------------


@dataclass(frozen=True)
class ChshFacet:
    m: int
    n: int
    sign: int = 1

    def label(self) -> str:
        return f"chsh(m={self.m},n={self.n},{'+' if self.sign > 0 else '-'})"


@dataclass(frozen=True)
class Inn22Facet:
    n: int

    def label(self) -> str:
        return f"inn22(N={self.n})"


@dataclass(frozen=True)
class FacetDecomposition:
    label: str
    p_plus: Fraction
    p_minus: Fraction
    # index j-1 holds class j; CHSH facets have a single q class
    q_plus: tuple[Fraction, ...]
    q_minus: tuple[Fraction, ...]
    value: Fraction

    @property
    def k(self) -> int:
        return len(self.q_plus)

    @property
    def normalization(self) -> Fraction:
        return self.p_plus - self.p_minus + sum(self.q_plus) - sum(self.q_minus)

    @property
    def mass(self) -> Fraction:
        return self.p_plus + self.p_minus + sum(self.q_plus) + sum(self.q_minus)

    def chsh_identity_gap(self) -> Fraction:
        """``M - (S/2 + 2(p- + q+))``; zero for every jqpd."""
        return self.mass - (self.value / 2 + 2 * (self.p_minus + self.q_plus[0]))


def _split(values, classes, n_classes):
    plus = [Fraction(0)] * n_classes
    minus = [Fraction(0)] * n_classes
    for v, c in zip(values, classes):
        if v > 0:
            plus[c] += v
        elif v < 0:
            minus[c] -= v
    return plus, minus


def facet_decomposition(jqpd: QuasiDistribution, facet) -> FacetDecomposition:
    """Group atom weights by their coefficient in ``facet`` and split signs."""
    sc = jqpd.scenario
    if isinstance(facet, ChshFacet):
        if sc != Scenario.from_label("2222"):
            raise ScenarioError("CHSH facets need a 2222 jqpd")
        atoms = itertools.product((0, 1), repeat=4)
        flip = 0 if facet.sign > 0 else 1
        classes = [f_mn(a, facet.m, facet.n) ^ flip for a in atoms]
        plus, minus = _split(jqpd.values, classes, 2)
        value = 2 * (plus[0] - minus[0] - plus[1] + minus[1])
        return FacetDecomposition(
            facet.label(), plus[0], minus[0], (plus[1],), (minus[1],), value
        )
    if isinstance(facet, Inn22Facet):
        if sc != Scenario.nn22(facet.n):
            raise ScenarioError(f"I_NN22 facet with N={facet.n} needs an NN22 jqpd")
        coeff = inn22_atom_coefficients(facet.n)
        k = inn22_table(facet.n).k
        plus, minus = _split(jqpd.values, (-coeff).tolist(), k + 1)
        value = sum(j * (minus[j] - plus[j]) for j in range(1, k + 1))
        return FacetDecomposition(
            facet.label(), plus[0], minus[0], tuple(plus[1:]), tuple(minus[1:]), value
        )
    raise TypeError(f"unknown facet {facet!r}")


# -- I_NN22 ---------------------------------------------------------------------


@dataclass(frozen=True)
class Inn22Table:
    n: int
    alice: tuple[int, ...]  # coefficient of p(a_x = 0), x = 0..N-1
    bob: tuple[int, ...]  # coefficient of p(b_y = 0)
    joint: tuple[tuple[int, ...], ...]  # joint[x][y] for p(a_x = 0, b_y = 0)

    @property
    def k(self) -> int:
        return self.n * (self.n - 1) // 2


@lru_cache(maxsize=None)
def inn22_table(n: int) -> Inn22Table:
    """Coefficient table: first row all ones, a -1 band below, zeros after."""
    if n < 2:
        raise ValueError("I_NN22 needs N >= 2")
    alice = tuple(-(n - 1 - x) for x in range(n))
    bob = (-1,) + (0,) * (n - 1)
    joint = tuple(
        tuple(1 if x + y < n else (-1 if x + y == n else 0) for y in range(n))
        for x in range(n)
    )
    return Inn22Table(n, alice, bob, joint)


def _require_nn22(behavior: Behavior, n: int):
    if behavior.scenario != Scenario.nn22(n):
        raise ScenarioError(f"expected the {n}{n}22 scenario, got {behavior.scenario}")


def inn22_value(behavior: Behavior, n: int) -> Fraction:
    """Inner product of the table with p(a_x=0), p(b_y=0), p(a_x=0, b_y=0)."""
    _require_nn22(behavior, n)
    t = inn22_table(n)
    total = Fraction(0)
    for x in range(n):
        for y in range(n):
            blk = behavior.block((x, y))
            if t.joint[x][y]:
                total += t.joint[x][y] * blk[0, 0]
            if y == 0 and t.alice[x]:
                total += t.alice[x] * (blk[0, 0] + blk[0, 1])
            if x == 0 and t.bob[y]:
                total += t.bob[y] * (blk[0, 0] + blk[1, 0])
    return total


@lru_cache(maxsize=None)
def inn22_atom_coefficients(n: int) -> np.ndarray:
    """Value of the inequality on every deterministic atom (0, -1, ..., -k)."""
    t = inn22_table(n)
    d = atom_digits(Scenario.nn22(n))
    a0 = (d[:, :n] == 0).astype(np.int64)
    b0 = (d[:, n:] == 0).astype(np.int64)
    J = np.array(t.joint, dtype=np.int64)
    out = a0 @ np.array(t.alice) + b0 @ np.array(t.bob)
    out += np.einsum("ix,xy,iy->i", a0, J, b0)
    out.setflags(write=False)
    return out


def inn22_value_from_jqpd(jqpd: QuasiDistribution, n: int) -> Fraction:
    coeff = inn22_atom_coefficients(n)
    return sum((int(c) * v for c, v in zip(coeff, jqpd.values) if c), Fraction(0))


class NonViolatingError(ValueError):
    """The behavior does not violate the inequality."""


def mass_bound_residual(jqpd: QuasiDistribution, n: int, weighted: bool = True) -> Fraction:
    """``M - (2 I + 1 - 2 sum_{j>=2} (j-1) q_j-)`` for a violating jqpd.

    ``weighted`` reads the inequality value off the decomposition as
    ``sum_j j (q_j- - q_j+)``, which equals ``inn22_value`` of the marginals;
    the unweighted reading ``sum_j (q_j- - q_j+)`` is available for
    comparison.  The residual works out to ``2 p- + 2 sum_j j q_j+`` in the
    weighted reading, so it vanishes exactly when the witness puts negative
    weight only on penalized atoms and positive weight only on the rest.
    """
    dec = facet_decomposition(jqpd, Inn22Facet(n))
    i_value = inn22_value(marginals(jqpd), n)
    if i_value <= 0:
        raise NonViolatingError(f"I_NN22 = {i_value} is not a violation")
    if not weighted:
        i_value = sum(dec.q_minus) - sum(dec.q_plus)
    tail = sum((j - 1) * dec.q_minus[j - 1] for j in range(2, dec.k + 1))
    return dec.mass - (2 * i_value + 1 - 2 * tail)


def aligned_witness(behavior: Behavior, n: int) -> QuasiDistribution | None:
    """Least-mass jqpd that is >= 0 on zero-coefficient atoms and <= 0 elsewhere.

    Returns None when no such jqpd exists.  Its mass equals ``M*`` exactly
    when some minimal witness has zero ``mass_bound_residual``.
    """
    _require_nn22(behavior, n)
    _require_ns(behavior)
    sc = behavior.scenario
    system = _reduced_system(sc)
    q = list(behavior.table) + [Fraction(1)]
    A, b = _integer_rows(system.matrix, [q[i] for i in system.rows])
    sign = np.where(inn22_atom_coefficients(n) == 0, 1, -1)
    # substitute p = sign * u with u >= 0; the mass is then sum(u)
    outcome, _ = solve_integer_lp(
        A * sign[None, :], b, np.ones(sc.atom_count, dtype=np.int64)
    )
    if outcome.status is not LpStatus.OPTIMAL:
        return None
    values = tuple(int(s) * u for s, u in zip(sign, outcome.values))
    return QuasiDistribution(sc, values)
