"""Minimal probability mass of a behavior.

``min_mass`` solves

    minimize  sum(p+ + p-)
    s.t.      A (p+ - p-) = q,   sum(p+ - p-) = 1,   p+, p- >= 0

exactly.  The equality system is first reduced to an independent set of
rows; the dependent rows give linear consistency checks on ``q`` which are
exactly the no-signalling conditions, so ``has_jqpd`` is a rank test and
needs no LP.

``correlation_mass`` is a smaller LP for correlation boxes (uniform
marginals, ``P(a=b|x,y) = (1 + c_xy)/2``).  Averaging any jqpd of such a box
with its image under a global outcome flip shows the optimum only depends
on the correlators, so it is enough to decompose the sign matrix ``C`` as
``sum_k lam_k s_k t_k^T`` over pairs of sign vectors with ``sum lam_k = 1``
and minimize ``sum |lam_k|``.  Every such decomposition lifts back to a
full jqpd with the same mass by splitting ``lam_k`` evenly between the atoms
``(s_k, t_k)`` and ``(-s_k, -t_k)``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .lp import LpStatus, SimplexTableau, solve_integer_lp
from .scenario import (
    Behavior,
    QuasiDistribution,
    Scenario,
    marginal_map,
    no_signalling_report,
)

log = logging.getLogger(__name__)


class SignallingError(ValueError):
    """The behavior violates no-signalling, so no jqpd reproduces it."""

    def __init__(self, report):
        self.report = report
        super().__init__(
            f"behavior is signalling (max discrepancy {report.max_discrepancy} "
            f"at {report.worst_context})"
        )


@dataclass(frozen=True)
class MassResult:
    m_star: Fraction
    witness: QuasiDistribution
    positive_part: Fraction
    negative_part: Fraction
    # atoms where both split parts came back positive; always empty for a
    # basic solution, kept as a flag rather than repaired
    overlap_atoms: tuple[int, ...] = ()


# -- exact row reduction --------------------------------------------------------


@dataclass(frozen=True)
class _ReducedSystem:
    rows: np.ndarray  # indices into the stacked [A; 1] rows
    matrix: np.ndarray  # independent rows, int
    checks: np.ndarray  # left null vectors over the stacked rows, int


def _primitive(v: np.ndarray) -> np.ndarray:
    g = 0
    for x in v:
        g = math.gcd(g, int(x))
        if g == 1:
            break
    return v // g if g > 1 else v


def independent_rows(M: np.ndarray) -> tuple[list[int], list[np.ndarray]]:
    """Greedy row basis of integer matrix ``M`` and a basis of its left kernel.

    Rows are scanned in order and kept when independent of the rows kept so
    far.  Each dependent row yields a left null vector (over all rows).
    """
    m, n = M.shape
    basis = []  # (pivot column, reduced row, combination over original rows)
    kept, null = [], []
    for i in range(m):
        v = M[i].astype(object)
        comb = np.zeros(m, dtype=object)
        comb[i] = 1
        for p, row, rcomb in basis:
            if v[p] != 0:
                a, b = row[p], v[p]
                v = a * v - b * row
                comb = a * comb - b * rcomb
        nz = np.flatnonzero(v != 0)
        if nz.size:
            both = _primitive(np.concatenate([v, comb]))
            basis.append((int(nz[0]), both[:n], both[n:]))
            kept.append(i)
        else:
            null.append(_primitive(comb))
    return kept, null


@lru_cache(maxsize=None)
def _reduced_system(scenario: Scenario) -> _ReducedSystem:
    amap = marginal_map(scenario)
    full = np.vstack([amap.toarray().astype(np.int64), np.ones((1, scenario.atom_count), np.int64)])
    kept, null = independent_rows(full)
    checks = np.array(null, dtype=object).reshape(len(null), full.shape[0])
    return _ReducedSystem(np.array(kept), full[kept], checks)


def _stacked_rhs(behavior: Behavior) -> list[Fraction]:
    return list(behavior.table) + [Fraction(1)]


def has_jqpd(behavior: Behavior) -> bool:
    """True iff ``A p = q, sum p = 1`` has a (signed) solution."""
    system = _reduced_system(behavior.scenario)
    q = np.array(_stacked_rhs(behavior), dtype=object)
    if system.checks.size == 0:
        return True
    return all(v == 0 for v in system.checks.dot(q))


def _require_ns(behavior: Behavior):
    if not has_jqpd(behavior):
        raise SignallingError(no_signalling_report(behavior))


def _integer_rows(matrix: np.ndarray, rhs: list[Fraction]):
    scale = np.array([math.lcm(1, r.denominator) for r in rhs], dtype=object)
    A = matrix.astype(object) * scale[:, None]
    b = np.array([int(r * s) for r, s in zip(rhs, scale)], dtype=object)
    return A, b


def min_mass(behavior: Behavior) -> MassResult:
    """Exact minimal mass ``M*`` and a Bland-rule basic optimal witness."""
    sc = behavior.scenario
    sc.check_materializable()
    _require_ns(behavior)
    system = _reduced_system(sc)
    q = _stacked_rhs(behavior)
    rhs = [q[i] for i in system.rows]
    A, b = _integer_rows(system.matrix, rhs)
    n = sc.atom_count
    M = np.hstack([A, -A])
    c = np.ones(2 * n, dtype=np.int64)
    outcome, _ = solve_integer_lp(M, b, c)
    if outcome.status is not LpStatus.OPTIMAL:
        # the rank test above makes this unreachable for consistent input
        raise RuntimeError(f"mass LP ended with status {outcome.status.value}")
    x = outcome.values
    plus, minus = x[:n], x[n:]
    overlap = tuple(i for i in range(n) if plus[i] > 0 and minus[i] > 0)
    if overlap:
        log.warning("atoms %s carry both positive and negative parts", overlap)
    values = tuple(a - b for a, b in zip(plus, minus))
    witness = QuasiDistribution(sc, values)
    return MassResult(
        outcome.objective,
        witness,
        witness.positive_part,
        witness.negative_part,
        overlap,
    )


def local_feasible(behavior: Behavior) -> bool:
    """True iff a proper joint distribution reproduces the behavior."""
    sc = behavior.scenario
    sc.check_materializable()
    _require_ns(behavior)
    system = _reduced_system(sc)
    q = _stacked_rhs(behavior)
    A, b = _integer_rows(system.matrix, [q[i] for i in system.rows])
    outcome, _ = solve_integer_lp(A, b, np.zeros(sc.atom_count, dtype=np.int64))
    return outcome.optimal


def verify_witness(result: MassResult, behavior: Behavior) -> bool:
    """Recheck marginals, normalization and mass of a witness exactly."""
    w = result.witness
    if w.scenario != behavior.scenario:
        return False
    if sum(w.values) != 1:
        return False
    if marginal_map(w.scenario).apply(w.values) != behavior.table:
        return False
    if w.mass != result.m_star:
        return False
    return (
        result.positive_part == w.positive_part
        and result.negative_part == w.negative_part
    )


# -- correlation boxes ---------------------------------------------------------


@dataclass(frozen=True)
class CorrelationMass:
    m_star: Fraction
    # (s, t, weight): sign vectors as tuples of +-1 with s[0] == +1
    terms: tuple[tuple[tuple[int, ...], tuple[int, ...], Fraction], ...]
    columns: int
    pivots: int
    # optimal dual: N*N correlation multipliers (row-major), then normalization
    duals: tuple[Fraction, ...] = ()


@lru_cache(maxsize=None)
def sign_vectors(n: int, pinned: bool = False) -> np.ndarray:
    """All vectors in {+1,-1}^n (first entry +1 when ``pinned``), ordered."""
    rows = np.array(list(itertools.product((1, -1), repeat=n)), dtype=np.int64)
    return rows[rows[:, 0] == 1] if pinned else rows


def _pattern_columns(s: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Constraint columns for patterns (rows of s, t): flattened s t^T then 1."""
    outer = (s[:, :, None] * t[:, None, :]).reshape(len(s), -1)
    return np.hstack([outer, np.ones((len(s), 1), dtype=np.int64)]).T


def correlation_mass(
    sign_matrix,
    generate_columns: bool | None = None,
    rule: str = "bland",
    seed_patterns=None,
) -> CorrelationMass:
    """Exact ``M*`` of the correlation box with the given +-1 matrix.

    For small ``N`` the LP carries every pattern; beyond that (or when
    ``generate_columns`` is set) patterns are priced in on demand, with an
    exhaustive search over ``s`` certifying that no pattern is missing.
    ``seed_patterns`` (pairs of sign vectors, e.g. the support of an
    approximate solution) are added to the starting columns; they only
    affect speed, never the value.
    """
    C = np.asarray(sign_matrix, dtype=np.int64)
    n = C.shape[0]
    if C.shape != (n, n) or not np.all(np.abs(C) == 1):
        raise ValueError("sign matrix must be square with entries +-1")
    rhs = np.concatenate([C.reshape(-1), [1]]).astype(np.int64)
    S = sign_vectors(n, pinned=True)
    if generate_columns is None:
        generate_columns = n > 5 or bool(seed_patterns)
    if not generate_columns:
        T = sign_vectors(n)
        ss = np.repeat(S, len(T), axis=0)
        tt = np.tile(T, (len(S), 1))
    else:
        # starting set spans the constraint rows
        u = np.ones((n, n), dtype=np.int64)
        for i in range(1, n):
            u[i, i] = -1
        ss = np.vstack([np.repeat(u, n, axis=0), u[:1]])
        tt = np.vstack([np.tile(u, (n, 1)), -u[:1]])
        if seed_patterns:
            base = {(tuple(a), tuple(b)) for a, b in zip(ss, tt)}
            extra = []
            for a, b in seed_patterns:
                a, b = np.asarray(a, np.int64), np.asarray(b, np.int64)
                if a[0] < 0:
                    a, b = -a, -b
                key = (tuple(a), tuple(b))
                if key not in base:
                    base.add(key)
                    extra.append((a, b))
            if extra:
                ss = np.vstack([ss, [a for a, _ in extra]])
                tt = np.vstack([tt, [b for _, b in extra]])
    k = len(ss)
    cols = _pattern_columns(ss, tt)
    tab = SimplexTableau(np.hstack([cols, -cols]), rhs, np.ones(2 * k, np.int64), rule)
    pairs = [(i, k + i) for i in range(k)]
    _solve_master(tab)
    if generate_columns:
        seen = {(tuple(a), tuple(b)) for a, b in zip(ss, tt)}
        while True:
            new = _price(tab, S, n, seen)
            if not new:
                break
            ns = np.array([a for a, _ in new])
            nt = np.array([b for _, b in new])
            ncols = _pattern_columns(ns, nt)
            base, k = tab.n, len(new)
            tab.add_columns(np.hstack([ncols, -ncols]), np.ones(2 * k, np.int64))
            pairs.extend((base + j, base + k + j) for j in range(k))
            ss = np.vstack([ss, ns])
            tt = np.vstack([tt, nt])
            _solve_master(tab)
    x = tab.values()
    weights = {}
    for idx, (i, j) in enumerate(pairs):
        w = x[i] - x[j]
        if w != 0:
            key = (tuple(int(v) for v in ss[idx]), tuple(int(v) for v in tt[idx]))
            weights[key] = weights.get(key, Fraction(0)) + w
    terms = tuple((s, t, w) for (s, t), w in sorted(weights.items()) if w != 0)
    return CorrelationMass(
        tab.objective_value(), terms, len(pairs), tab.pivots, tuple(tab.duals())
    )


def _solve_master(tab: SimplexTableau):
    status = tab.solve()
    if status is not LpStatus.OPTIMAL:
        raise RuntimeError(f"correlation LP ended with status {status.value}")


def _price(tab: SimplexTableau, S: np.ndarray, n: int, seen: set, limit: int = 16):
    """Patterns whose reduced cost is negative under the current duals."""
    y = tab.duals()
    den = math.lcm(*(v.denominator for v in y))
    Y = np.array([int(v * den) for v in y[:-1]], dtype=object).reshape(n, n)
    y0 = int(y[-1] * den)
    V = S.astype(object).dot(Y)  # row k holds Y^T s_k
    best = np.abs(V).sum(axis=1)
    # with t = sign(Y^T s): the plus column of (s, t) prices at 1 - best - y0,
    # the minus column of (s, -t) at 1 - best + y0
    scored = []
    for k in np.flatnonzero(best + abs(y0) > den):
        t = np.where(V[k] >= 0, 1, -1).astype(np.int64)
        for tv, gain in ((t, best[k] + y0), (-t, best[k] - y0)):
            if gain > den:
                scored.append((-gain, int(k), tv))
    scored.sort(key=lambda e: (e[0], e[1]))
    new = []
    for _, k, tv in scored:
        key = (tuple(S[k]), tuple(tv))
        if key not in seen:
            seen.add(key)
            new.append((S[k], tv))
            if len(new) == limit:
                break
    return new


def certify_correlation_mass(sign_matrix, cm: CorrelationMass) -> bool:
    """Check optimality of ``cm`` independently of the simplex run.

    The primal terms must reproduce the box with total weight one and mass
    ``m_star``; the dual must be feasible on every pattern and attain the
    same value, so ``m_star`` is both an upper and a lower bound.
    """
    C = np.asarray(sign_matrix, dtype=np.int64)
    n = C.shape[0]
    acc = np.zeros((n, n), dtype=object)
    total = Fraction(0)
    for s, t, w in cm.terms:
        acc = acc + w * np.outer(s, t).astype(object)
        total += w
    if total != 1 or not np.array_equal(acc, C.astype(object)):
        return False
    if sum((abs(w) for *_, w in cm.terms), Fraction(0)) != cm.m_star:
        return False
    if len(cm.duals) != n * n + 1:
        return False
    den = math.lcm(*(v.denominator for v in cm.duals))
    Y = np.array([int(v * den) for v in cm.duals[:-1]], dtype=object).reshape(n, n)
    y0 = int(cm.duals[-1] * den)
    if Fraction(int((Y * C.astype(object)).sum()) + y0, den) != cm.m_star:
        return False
    # max over t of |s^T Y t + y0| is |Y^T s|_1 + |y0| in the worst sign
    V = sign_vectors(n, pinned=True).astype(object).dot(Y)
    worst = np.abs(V).sum(axis=1).max() + abs(y0)
    return bool(worst <= den)


def lift_correlation_witness(n: int, cm: CorrelationMass) -> QuasiDistribution:
    """Full jqpd over the NN22 atoms with mass ``cm.m_star``."""
    sc = Scenario.nn22(n)
    values = [Fraction(0)] * sc.atom_count
    for s, t, w in cm.terms:
        for sign in (1, -1):
            bits = [(1 - sign * v) // 2 for v in (*s, *t)]
            idx = 0
            for bit in bits:
                idx = 2 * idx + bit
            values[idx] += w / 2
    return QuasiDistribution(sc, tuple(values))
