"""Exact linear programming over the rationals.

Problems are in standard form: minimize ``c.x`` subject to ``A x = b`` and
``x >= 0``.  The solver is a two-phase primal simplex with Bland's pivot
rule, run on a fraction-free (Bareiss) integer tableau: with ``d`` the
absolute determinant of the current basis, the tableau holds
``d * B^-1 [A | I | b]`` and every entry stays an integer.  Each pivot is
followed by exact division, so intermediate growth is bounded by the size
of basis minors rather than by accumulated denominators.

Bland's rule is the default.  ``rule="dantzig"`` picks the most negative
reduced cost instead and falls back to Bland's rule during long runs of
degenerate pivots; it needs far fewer pivots on large column sets.

Arrays use ``int64`` while entries are small enough that products cannot
overflow, and switch to Python integers (``object`` dtype) otherwise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

_SAFE = 2**30
_STALL_LIMIT = 50


class LpStructureError(ValueError):
    """Dimensions of the problem data do not agree."""


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LpProblem:
    objective: tuple[Fraction, ...]
    matrix: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[Fraction, ...]

    def __post_init__(self):
        obj = tuple(Fraction(v) for v in self.objective)
        mat = tuple(tuple(Fraction(v) for v in row) for row in self.matrix)
        rhs = tuple(Fraction(v) for v in self.rhs)
        if len(mat) != len(rhs):
            raise LpStructureError(f"{len(mat)} rows but {len(rhs)} right-hand sides")
        for i, row in enumerate(mat):
            if len(row) != len(obj):
                raise LpStructureError(
                    f"row {i} has {len(row)} entries, objective has {len(obj)}"
                )
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "rhs", rhs)


@dataclass(frozen=True)
class LpOutcome:
    status: LpStatus
    values: tuple[Fraction, ...] | None = None
    objective: Fraction | None = None
    basis: tuple[int, ...] | None = None
    duals: tuple[Fraction, ...] | None = None

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def _lcm_denominators(values) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, Fraction(v).denominator)
    return out


def _to_integers(values: Sequence[Fraction], scale: int) -> list[int]:
    return [int(Fraction(v) * scale) for v in values]


def _fits(arr: np.ndarray) -> bool:
    if arr.size == 0:
        return True
    if arr.dtype == object:
        return max(abs(int(arr.max())), abs(int(arr.min()))) <= _SAFE
    return int(np.abs(arr).max()) <= _SAFE


class SimplexTableau:
    """Fraction-free simplex tableau for ``min c.x, A x = b, x >= 0``.

    ``A``, ``b`` and ``c`` must be integer arrays.  Columns can be appended
    after solving (``add_columns``) and the solve resumed from the current
    basis, which is what column generation needs.
    """

    def __init__(self, A, b, c, rule: str = "bland"):
        if rule not in ("bland", "dantzig"):
            raise ValueError(f"unknown pivot rule {rule!r}")
        self.rule = rule
        self._stall = 0
        A = np.asarray(A)
        b = np.asarray(b)
        c = np.asarray(c)
        m, n = A.shape
        if b.shape != (m,) or c.shape != (n,):
            raise LpStructureError(
                f"matrix {A.shape}, rhs {b.shape}, objective {c.shape} do not agree"
            )
        big = not (_fits(A) and _fits(b) and _fits(c))
        dtype = object if big else np.int64
        self.flip = np.where(b < 0, -1, 1).astype(np.int64)
        A = A.astype(dtype) * self.flip[:, None]
        b = b.astype(dtype) * self.flip
        self.m, self.n = m, n
        self.cost = list(int(v) for v in c)
        # columns: originals, then m artificials, then rhs; last row is the objective
        T = np.zeros((m + 1, n + m + 1), dtype=dtype)
        T[:m, :n] = A
        T[:m, n : n + m] = np.eye(m, dtype=np.int64)
        T[:m, -1] = b
        T[m, :n] = -A.sum(axis=0)
        T[m, -1] = -b.sum()
        self.T = T
        self.d = 1
        self.basis = list(range(n, n + m))
        self.phase = 1
        self.pivots = 0

    # -- low level ---------------------------------------------------------

    def _pivot(self, r: int, s: int):
        T = self.T
        piv = int(T[r, s])
        if T.dtype != object and (abs(piv) > _SAFE or not _fits(T)):
            T = T.astype(object)
        col = T[:, s, None]
        row = T[r].copy()
        new = T * piv
        new -= col * row
        if self.d != 1:
            new //= self.d
        new[r] = row
        if piv < 0:
            np.negative(new, out=new)
            piv = -piv
        # entries stay below 2^61 here; widen before anything multiplies them
        if new.dtype != object and not _fits(new):
            new = new.astype(object)
        self.T = new
        self.d = piv
        self.basis[r] = s
        self.pivots += 1

    def _entering(self, limit: int) -> int | None:
        z = self.T[self.m, :limit]
        neg = np.flatnonzero(z < 0)
        if not neg.size:
            return None
        if self.rule == "dantzig" and self._stall < _STALL_LIMIT:
            return int(neg[np.argmin(z[neg])])
        return int(neg[0])

    def _leaving(self, s: int) -> int | None:
        T = self.T
        col = T[: self.m, s]
        rhs = T[: self.m, -1]
        cand = np.flatnonzero(col > 0)
        if cand.size == 0:
            return None
        best = None
        for i in cand:
            num, den = int(rhs[i]), int(col[i])
            if best is None:
                best = (i, num, den)
                continue
            _, bn, bd = best
            lhs, rhs_ = num * bd, bn * den
            if lhs < rhs_ or (lhs == rhs_ and self.basis[i] < self.basis[best[0]]):
                best = (i, num, den)
        return int(best[0])

    def _run(self, limit: int) -> LpStatus:
        while True:
            s = self._entering(limit)
            if s is None:
                return LpStatus.OPTIMAL
            r = self._leaving(s)
            if r is None:
                return LpStatus.UNBOUNDED
            # a run of degenerate pivots hands control to Bland's rule until
            # the objective moves again, which rules out cycling
            self._stall = self._stall + 1 if self.T[r, -1] == 0 else 0
            self._pivot(r, s)

    def _start_phase_two(self):
        m, n = self.m, self.n
        # drive zero-level artificials out wherever an original column allows it
        for r in range(m):
            if self.basis[r] >= n:
                nz = np.flatnonzero(self.T[r, :n] != 0)
                if nz.size:
                    self._pivot(r, int(nz[0]))
        T = self.T
        cb = np.array(
            [self.cost[j] if j < n else 0 for j in self.basis], dtype=object
        )
        obj = -(cb[:, None] * T[:m].astype(object)).sum(axis=0)
        obj[:n] += np.array(self.cost, dtype=object) * self.d
        if T.dtype != object and _fits(obj):
            obj = obj.astype(np.int64)
        elif T.dtype != object:
            self.T = T = T.astype(object)
        T[m] = obj
        self.phase = 2

    # -- public ------------------------------------------------------------

    def solve(self) -> LpStatus:
        if self.phase == 1:
            self._run(self.n)
            if self.T[self.m, -1] != 0:
                return LpStatus.INFEASIBLE
            self._start_phase_two()
        return self._run(self.n)

    def add_columns(self, A_new, c_new):
        """Append columns (integer data) to a phase-two tableau."""
        if self.phase != 2:
            raise RuntimeError("columns can only be added after phase one")
        A_new = np.asarray(A_new).reshape(self.m, -1)
        k = A_new.shape[1]
        m, n = self.m, self.n
        T = self.T
        A_new = A_new.astype(object) * self.flip[:, None]
        # d B^-1 sits in the artificial block
        binv = T[:m, n : n + m].astype(object)
        body = binv.dot(A_new)
        zart = T[m, n : n + m].astype(object)
        z = np.array(c_new, dtype=object) * self.d + zart.dot(A_new)
        block = np.vstack([body, z[None, :]])
        if T.dtype != object and not _fits(block):
            T = T.astype(object)
        block = block.astype(T.dtype)
        self.T = np.hstack([T[:, :n], block, T[:, n:]])
        self.basis = [j + k if j >= n else j for j in self.basis]
        self.cost.extend(int(v) for v in c_new)
        self.n = n + k

    def values(self) -> list[Fraction]:
        x = [Fraction(0)] * self.n
        for r, j in enumerate(self.basis):
            if j < self.n:
                x[j] = Fraction(int(self.T[r, -1]), self.d)
        return x

    def objective_value(self) -> Fraction:
        return Fraction(-int(self.T[self.m, -1]), self.d)

    def duals(self) -> list[Fraction]:
        """Dual prices ``y`` with ``c - A^T y >= 0`` at optimality."""
        zart = self.T[self.m, self.n : self.n + self.m]
        return [
            Fraction(-int(z) * int(f), self.d) for z, f in zip(zart, self.flip)
        ]


def solve_integer_lp(A, b, c, rule: str = "bland") -> tuple[LpOutcome, SimplexTableau]:
    tab = SimplexTableau(A, b, c, rule)
    status = tab.solve()
    if status is not LpStatus.OPTIMAL:
        return LpOutcome(status), tab
    return (
        LpOutcome(
            status,
            tuple(tab.values()),
            tab.objective_value(),
            tuple(tab.basis),
            tuple(tab.duals()),
        ),
        tab,
    )


def solve_lp(problem: LpProblem) -> LpOutcome:
    """Solve ``problem`` exactly; rows are rescaled to integers internally."""
    m, n = len(problem.matrix), len(problem.objective)
    rows = []
    rhs = []
    for row, b in zip(problem.matrix, problem.rhs):
        scale = _lcm_denominators((*row, b))
        rows.append(_to_integers(row, scale))
        rhs.append(int(b * scale))
    cscale = _lcm_denominators(problem.objective)
    cost = _to_integers(problem.objective, cscale)
    A = np.array(rows, dtype=object).reshape(m, n)
    b = np.array(rhs, dtype=object).reshape(m)
    c = np.array(cost, dtype=object).reshape(n)
    outcome, _ = solve_integer_lp(A, b, c)
    if not outcome.optimal:
        return outcome
    row_scale = [
        _lcm_denominators((*row, bb)) for row, bb in zip(problem.matrix, problem.rhs)
    ]
    duals = tuple(y * s / cscale for y, s in zip(outcome.duals, row_scale))
    return LpOutcome(
        outcome.status,
        outcome.values,
        outcome.objective / cscale,
        outcome.basis,
        duals,
    )
