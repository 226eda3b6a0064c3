"""Constructors for canonical behaviors and quasi-distributions."""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence

import numpy as np

from .inequalities import f_mn
from .scenario import (
    Behavior,
    QuasiDistribution,
    Scenario,
    ScenarioError,
    atom_index,
    marginals,
)

SCENARIO_2222 = Scenario.from_label("2222")
SCENARIO_CLONE = Scenario(((2, 2), (2, 2), (2, 2)))
HALF = Fraction(1, 2)


def _check_unit(x) -> Fraction:
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise ValueError(f"parameter {x} outside [0, 1]")
    return x


def deterministic(scenario: Scenario, assignment: Sequence[Sequence[int]]) -> Behavior:
    """Behavior of the point mass on one atom."""
    idx = atom_index(scenario, assignment)
    return marginals(QuasiDistribution.point_mass(scenario, idx))


def all_deterministic(scenario: Scenario) -> list[Behavior]:
    return [
        marginals(QuasiDistribution.point_mass(scenario, i))
        for i in range(scenario.atom_count)
    ]


def uniform(scenario: Scenario) -> Behavior:
    p = Fraction(1, len(scenario.joint_outcomes))
    return Behavior(scenario, (p,) * scenario.table_size)


def pr_box(alpha: int = 0, beta: int = 0, gamma: int = 0) -> Behavior:
    """``P(a,b|x,y) = 1/2`` iff ``a ^ b == x*y ^ alpha*x ^ beta*y ^ gamma``."""
    for bit in (alpha, beta, gamma):
        if bit not in (0, 1):
            raise ValueError("PR box variant bits must be 0 or 1")

    def entry(s, o):
        (x, y), (a, b) = s, o
        return HALF if a ^ b == (x & y) ^ (alpha & x) ^ (beta & y) ^ gamma else 0

    return Behavior.from_function(SCENARIO_2222, entry)


def isotropic_jqpd(x) -> QuasiDistribution:
    x = _check_unit(x)
    hi = Fraction(1, 16) + x / 8
    lo = Fraction(1, 16) - x / 8
    values = [
        hi if f_mn(atom, 0, 0) == 0 else lo
        for atom in itertools.product((0, 1), repeat=4)
    ]
    return QuasiDistribution(SCENARIO_2222, tuple(values))


def isotropic(x) -> tuple[QuasiDistribution, Behavior]:
    """Isotropic family: uniform at 0, local boundary at 1/2, PR box at 1."""
    jqpd = isotropic_jqpd(x)
    return jqpd, marginals(jqpd)


# -- NN22 correlation boxes ---------------------------------------------------------


def check_sign_matrix(c) -> np.ndarray:
    c = np.asarray(c, dtype=np.int64)
    if c.ndim != 2 or c.shape[0] != c.shape[1] or not np.all(np.abs(c) == 1):
        raise ValueError("sign matrix must be N x N with entries +-1")
    return c


def correlation_box(n: int, sign_matrix) -> Behavior:
    """Uniform marginals with ``P(a=b|x,y) = (1 + c_xy)/2``."""
    c = check_sign_matrix(sign_matrix)
    if c.shape[0] != n:
        raise ValueError(f"sign matrix is {c.shape}, expected {n}x{n}")
    scenario = Scenario.nn22(n)

    def entry(s, o):
        (x, y), (a, b) = s, o
        same = c[x, y] == 1
        return HALF if (a == b) == same else 0

    return Behavior.from_function(scenario, entry)


def sign_matrix_from_index(n: int, index: int) -> np.ndarray:
    """Bit ``k`` (row-major) set means entry ``k`` is -1."""
    bits = (index >> np.arange(n * n)) & 1
    return (1 - 2 * bits).reshape(n, n).astype(np.int64)


def sign_matrix_index(c) -> int:
    c = check_sign_matrix(c)
    bits = (c.reshape(-1) == -1).astype(np.int64)
    return int((bits << np.arange(bits.size)).sum())


def is_rank_one(sign_matrix) -> bool:
    """``c_xy = u_x v_y`` for some sign vectors ``u``, ``v``."""
    c = check_sign_matrix(sign_matrix)
    u = c[:, 0]
    v = c[0, :] * u[0]
    return bool(np.array_equal(np.outer(u, v), c))


def pr_n_free_entries(n: int) -> list[tuple[int, int]]:
    """0-based cells where the inequality table has a zero joint coefficient."""
    return [(x, y) for x in range(n) for y in range(n) if x + y > n]


def pr_n_sign_matrix(n: int, variant: int = 0) -> np.ndarray:
    """-1 on the anti-diagonal ``x + y == N`` (0-based), +1 above it.

    Cells below that anti-diagonal carry no weight in the inequality; they
    are +1 by default and bit ``k`` of ``variant`` flips the ``k``-th of them.
    """
    if not 2 <= n <= 8:
        raise ValueError("PR_N boxes are supported for 2 <= N <= 8")
    c = np.ones((n, n), dtype=np.int64)
    for x in range(n):
        y = n - x
        if 0 <= y < n:
            c[x, y] = -1
    free = pr_n_free_entries(n)
    if not 0 <= variant < 2 ** len(free):
        raise ValueError(f"variant must be below {2 ** len(free)}")
    for k, (x, y) in enumerate(free):
        if variant >> k & 1:
            c[x, y] = -1
    return c


def pr_n_box(n: int, variant: int = 0) -> Behavior:
    return correlation_box(n, pr_n_sign_matrix(n, variant))


# -- tripartite clone ---------------------------------------------------------------


def clone_selector(a0, a1, b0, b1, c0, c1) -> int:
    """Selector over atoms ``a0 a1 b0 b1 b'0 b'1`` of the perfectly cloned box."""
    return (
        ((a0 ^ a1) & ((b0 & c0) ^ (b1 & c1)))
        ^ a0
        ^ (b0 & c0)
        ^ ((a0 ^ 1) & (a1 ^ 1) & (b0 ^ c0))
        ^ (a1 & (a0 ^ 1) & (b1 ^ c1))
    )


def cloned_isotropic(x) -> QuasiDistribution:
    """64-atom jqpd whose (A,B) and (A,B') marginals both equal ``isotropic(x)``."""
    x = _check_unit(x)
    hi = (6 * x + 1) / 64
    lo = (1 - 2 * x) / 64
    values = [
        hi if clone_selector(*bits) == 0 else lo
        for bits in itertools.product((0, 1), repeat=6)
    ]
    return QuasiDistribution(SCENARIO_CLONE, tuple(values))


def make_box(kind: str, **params) -> Behavior:
    """Dispatch used by the command line."""
    if kind == "pr":
        return pr_box(params.get("alpha", 0), params.get("beta", 0), params.get("gamma", 0))
    if kind == "isotropic":
        return isotropic(params["x"])[1]
    if kind == "uniform":
        return uniform(params.get("scenario", SCENARIO_2222))
    if kind == "deterministic":
        return deterministic(params["scenario"], params["assignment"])
    if kind == "correlation":
        c = params["sign_matrix"]
        return correlation_box(len(c), c)
    if kind == "prn":
        return pr_n_box(params["n"], params.get("variant", 0))
    if kind == "clone":
        return marginals(cloned_isotropic(params["x"]))
    raise ScenarioError(f"unknown box kind {kind!r}")
