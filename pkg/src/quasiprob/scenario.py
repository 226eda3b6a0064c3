"""Scenarios, atoms, behaviors and quasi-distributions.

An atom assigns one outcome to every (party, setting) pair.  Atoms are
numbered in mixed radix with the first listed party's first setting as the
most significant digit, so for the 2222 scenario the index reads
``a0 a1 b0 b1`` in binary.

Behavior tables are flat tuples ordered by joint setting (lexicographic)
and then joint outcome (lexicographic); the rows of the marginal map use
the same order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

MAX_ATOMS = 2**32
MAX_MATERIALIZED_ATOMS = 2**24


class ScenarioError(ValueError):
    """Invalid scenario, assignment or table shape."""


class ScenarioSizeError(ScenarioError):
    """The scenario has more atoms than the library will handle."""


class NormalizationError(ValueError):
    """A table or distribution does not sum to one."""


@dataclass(frozen=True)
class PartySpec:
    n_settings: int
    n_outcomes: int


@dataclass(frozen=True)
class Scenario:
    parties: tuple[PartySpec, ...]

    def __post_init__(self):
        parties = tuple(
            p if isinstance(p, PartySpec) else PartySpec(*p) for p in self.parties
        )
        object.__setattr__(self, "parties", parties)
        if not parties:
            raise ScenarioError("a scenario needs at least one party")
        for p in parties:
            if p.n_settings < 1 or p.n_outcomes < 2:
                raise ScenarioError(f"bad party spec {p}")
        if self.atom_count > MAX_ATOMS:
            raise ScenarioSizeError(f"{self.atom_count} atoms exceeds 2^32")

    @classmethod
    def from_label(cls, label: str) -> "Scenario":
        """Parse a bipartite label such as ``"2222"`` or ``"4422"``."""
        if len(label) != 4 or not label.isdigit():
            raise ScenarioError(f"expected a four digit label, got {label!r}")
        nx, ny, na, nb = (int(ch) for ch in label)
        return cls(((nx, na), (ny, nb)))

    @classmethod
    def bipartite(cls, nx: int, ny: int, na: int = 2, nb: int = 2) -> "Scenario":
        return cls(((nx, na), (ny, nb)))

    @classmethod
    def nn22(cls, n: int) -> "Scenario":
        return cls(((n, 2), (n, 2)))

    @property
    def n_parties(self) -> int:
        return len(self.parties)

    @cached_property
    def atom_count(self) -> int:
        return math.prod(p.n_outcomes**p.n_settings for p in self.parties)

    @cached_property
    def radix(self) -> tuple[int, ...]:
        """Outcome count of every atom digit, most significant first."""
        return tuple(p.n_outcomes for p in self.parties for _ in range(p.n_settings))

    @cached_property
    def digit_offset(self) -> tuple[int, ...]:
        """Position of each party's first setting among the atom digits."""
        offsets, pos = [], 0
        for p in self.parties:
            offsets.append(pos)
            pos += p.n_settings
        return tuple(offsets)

    @cached_property
    def joint_settings(self) -> tuple[tuple[int, ...], ...]:
        return tuple(itertools.product(*(range(p.n_settings) for p in self.parties)))

    @cached_property
    def joint_outcomes(self) -> tuple[tuple[int, ...], ...]:
        return tuple(itertools.product(*(range(p.n_outcomes) for p in self.parties)))

    @property
    def table_size(self) -> int:
        return len(self.joint_settings) * len(self.joint_outcomes)

    def row_index(self, settings: Sequence[int], outcomes: Sequence[int]) -> int:
        s = 0
        for p, x in zip(self.parties, settings):
            if not 0 <= x < p.n_settings:
                raise ScenarioError(f"setting {x} out of range for {p}")
            s = s * p.n_settings + x
        o = 0
        for p, a in zip(self.parties, outcomes):
            if not 0 <= a < p.n_outcomes:
                raise ScenarioError(f"outcome {a} out of range for {p}")
            o = o * p.n_outcomes + a
        return s * len(self.joint_outcomes) + o

    def atom_shape(self) -> tuple[int, ...]:
        return self.radix

    def label(self) -> str:
        """Header form used by the text format, e.g. ``2,2;2,2``."""
        return ";".join(f"{p.n_settings},{p.n_outcomes}" for p in self.parties)

    def __str__(self):
        if self.n_parties == 2 and all(
            p.n_settings < 10 and p.n_outcomes < 10 for p in self.parties
        ):
            a, b = self.parties
            return f"{a.n_settings}{b.n_settings}{a.n_outcomes}{b.n_outcomes}"
        return self.label()

    def check_materializable(self):
        if self.atom_count > MAX_MATERIALIZED_ATOMS:
            raise ScenarioSizeError(
                f"{self.atom_count} atoms exceeds the 2^24 per-atom vector cap"
            )


# -- atoms -----------------------------------------------------------------


def atom_assignment(scenario: Scenario, index: int) -> tuple[tuple[int, ...], ...]:
    """Per-party, per-setting outcomes of atom ``index``."""
    if not 0 <= index < scenario.atom_count:
        raise ScenarioError(f"atom index {index} out of range")
    digits = []
    for r in reversed(scenario.radix):
        index, d = divmod(index, r)
        digits.append(d)
    digits.reverse()
    out, pos = [], 0
    for p in scenario.parties:
        out.append(tuple(digits[pos : pos + p.n_settings]))
        pos += p.n_settings
    return tuple(out)


def atom_index(scenario: Scenario, assignment: Sequence[Sequence[int]]) -> int:
    if len(assignment) != scenario.n_parties:
        raise ScenarioError("assignment must list every party")
    idx = 0
    for p, outs in zip(scenario.parties, assignment):
        if len(outs) != p.n_settings:
            raise ScenarioError(f"party {p} needs {p.n_settings} outcomes")
        for a in outs:
            if not 0 <= a < p.n_outcomes:
                raise ScenarioError(f"outcome {a} out of range for {p}")
            idx = idx * p.n_outcomes + a
    return idx


@lru_cache(maxsize=None)
def atom_digits(scenario: Scenario) -> np.ndarray:
    """``(atom_count, n_digits)`` array with every atom's outcome digits."""
    scenario.check_materializable()
    grids = np.indices(scenario.radix).reshape(len(scenario.radix), -1)
    return grids.T.copy()


# -- marginal map ------------------------------------------------------------


@dataclass(frozen=True)
class MarginalMap:
    """0/1 matrix ``A`` with ``q = A p``, stored row-wise as column lists."""

    scenario: Scenario
    rows: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), self.scenario.atom_count

    def toarray(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.int8)
        for i, cols in enumerate(self.rows):
            out[i, cols] = 1
        return out

    def row_counts(self) -> list[int]:
        return [len(r) for r in self.rows]

    def apply(self, values: Sequence[Fraction]) -> tuple[Fraction, ...]:
        vec = np.asarray(values, dtype=object)
        return tuple(Fraction(vec[cols].sum()) for cols in self.rows)


@lru_cache(maxsize=None)
def marginal_map(scenario: Scenario) -> MarginalMap:
    digits = atom_digits(scenario)
    rows = []
    for settings in scenario.joint_settings:
        cols = [scenario.digit_offset[k] + x for k, x in enumerate(settings)]
        sub = digits[:, cols]
        for outcomes in scenario.joint_outcomes:
            mask = np.all(sub == np.asarray(outcomes), axis=1)
            rows.append(np.flatnonzero(mask))
    return MarginalMap(scenario, tuple(rows))


# -- behaviors and distributions ----------------------------------------------


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        raise TypeError("probabilities must be exact; got a float")
    return Fraction(v)


@dataclass(frozen=True)
class Behavior:
    """Conditional outcome table ``P(outcomes | settings)``.

    Entries are exact rationals and may be negative (formal behaviors), but
    every joint setting's row must sum to one.
    """

    scenario: Scenario
    table: tuple[Fraction, ...]

    def __post_init__(self):
        table = tuple(_as_fraction(v) for v in self.table)
        object.__setattr__(self, "table", table)
        if len(table) != self.scenario.table_size:
            raise ScenarioError(
                f"table has {len(table)} entries, scenario needs {self.scenario.table_size}"
            )
        width = len(self.scenario.joint_outcomes)
        for k, settings in enumerate(self.scenario.joint_settings):
            total = sum(table[k * width : (k + 1) * width])
            if total != 1:
                raise NormalizationError(
                    f"entries for settings {settings} sum to {total}, not 1"
                )

    @classmethod
    def from_function(cls, scenario: Scenario, fn) -> "Behavior":
        """Build from ``fn(settings, outcomes) -> probability``."""
        table = [
            fn(s, o) for s in scenario.joint_settings for o in scenario.joint_outcomes
        ]
        return cls(scenario, tuple(table))

    def prob(self, settings: Sequence[int], outcomes: Sequence[int]) -> Fraction:
        return self.table[self.scenario.row_index(settings, outcomes)]

    def block(self, settings: Sequence[int]) -> np.ndarray:
        """Joint-outcome table for one joint setting, shaped by outcome counts."""
        width = len(self.scenario.joint_outcomes)
        k = self.scenario.row_index(settings, [0] * self.scenario.n_parties) // width
        shape = tuple(p.n_outcomes for p in self.scenario.parties)
        return np.array(self.table[k * width : (k + 1) * width], dtype=object).reshape(
            shape
        )

    def sub_marginal(
        self, parties: Sequence[int], settings: Sequence[int], full_settings=None
    ) -> np.ndarray:
        """Marginal on ``parties`` at ``settings``.

        ``full_settings`` picks the settings of the remaining parties; by
        default they are all 0.
        """
        n = self.scenario.n_parties
        if full_settings is None:
            full = [0] * n
            for k, x in zip(parties, settings):
                full[k] = x
        else:
            full = list(full_settings)
        block = self.block(full)
        drop = tuple(k for k in range(n) if k not in parties)
        return block.sum(axis=drop) if drop else block

    def __eq__(self, other):
        if not isinstance(other, Behavior):
            return NotImplemented
        return self.scenario == other.scenario and self.table == other.table

    def __hash__(self):
        return hash((self.scenario, self.table))


@dataclass(frozen=True)
class QuasiDistribution:
    """Signed measure over atoms, normalized to one."""

    scenario: Scenario
    values: tuple[Fraction, ...]

    def __post_init__(self):
        self.scenario.check_materializable()
        values = tuple(_as_fraction(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) != self.scenario.atom_count:
            raise ScenarioError(
                f"{len(values)} values for {self.scenario.atom_count} atoms"
            )
        total = sum(values)
        if total != 1:
            raise NormalizationError(f"quasi-distribution sums to {total}")

    @classmethod
    def unchecked(cls, scenario: Scenario, values) -> "QuasiDistribution":
        """Build without the normalization check (for verification tooling)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "scenario", scenario)
        object.__setattr__(obj, "values", tuple(_as_fraction(v) for v in values))
        return obj

    @classmethod
    def point_mass(cls, scenario: Scenario, index: int) -> "QuasiDistribution":
        values = [Fraction(0)] * scenario.atom_count
        values[index] = Fraction(1)
        return cls(scenario, tuple(values))

    @classmethod
    def uniform(cls, scenario: Scenario) -> "QuasiDistribution":
        v = Fraction(1, scenario.atom_count)
        return cls(scenario, (v,) * scenario.atom_count)

    @property
    def mass(self) -> Fraction:
        return sum((abs(v) for v in self.values), Fraction(0))

    @property
    def positive_part(self) -> Fraction:
        return sum((v for v in self.values if v > 0), Fraction(0))

    @property
    def negative_part(self) -> Fraction:
        return -sum((v for v in self.values if v < 0), Fraction(0))

    def is_proper(self) -> bool:
        return all(v >= 0 for v in self.values)

    def array(self) -> np.ndarray:
        """Values as an object array shaped by the atom digits."""
        return np.array(self.values, dtype=object).reshape(self.scenario.radix)


def marginals(jqpd: QuasiDistribution) -> Behavior:
    """Observable behavior ``q = A p`` of a quasi-distribution."""
    sc = jqpd.scenario
    arr = jqpd.array()
    n_digits = len(sc.radix)
    table = []
    for settings in sc.joint_settings:
        keep = [sc.digit_offset[k] + x for k, x in enumerate(settings)]
        drop = tuple(d for d in range(n_digits) if d not in keep)
        block = arr.sum(axis=drop) if drop else arr
        # sum() keeps remaining axes in digit order, which is party order
        table.extend(Fraction(v) for v in np.asarray(block).reshape(-1))
    return Behavior(sc, tuple(table))


# -- predicates ---------------------------------------------------------------


@dataclass(frozen=True)
class NoSignallingReport:
    max_discrepancy: Fraction
    satisfied: bool
    worst_context: str | None


def no_signalling_report(behavior: Behavior) -> NoSignallingReport:
    """Largest change of any proper sub-marginal under the other parties' settings."""
    sc = behavior.scenario
    n = sc.n_parties
    worst = Fraction(0)
    where = None
    for size in range(1, n):
        for parties in itertools.combinations(range(n), size):
            rest = [k for k in range(n) if k not in parties]
            for own in itertools.product(*(range(sc.parties[k].n_settings) for k in parties)):
                seen = []
                for other in itertools.product(
                    *(range(sc.parties[k].n_settings) for k in rest)
                ):
                    full = [0] * n
                    for k, x in zip(parties, own):
                        full[k] = x
                    for k, x in zip(rest, other):
                        full[k] = x
                    seen.append(behavior.sub_marginal(parties, own, full).reshape(-1))
                if len(seen) < 2:
                    continue
                stack = np.array(seen, dtype=object)
                spread = stack.max(axis=0) - stack.min(axis=0)
                k = int(np.argmax(spread))
                if spread[k] > worst:
                    worst = Fraction(spread[k])
                    outs = np.unravel_index(
                        k, [sc.parties[p].n_outcomes for p in parties]
                    )
                    where = (
                        f"parties={list(parties)} settings={list(own)} "
                        f"outcomes={[int(o) for o in outs]}"
                    )
    return NoSignallingReport(worst, worst == 0, where)


def is_proper(behavior: Behavior) -> bool:
    """Feynman's observability criterion on the full table."""
    return all(v >= 0 for v in behavior.table)


def is_no_signalling(behavior: Behavior) -> bool:
    return no_signalling_report(behavior).satisfied


def iter_atoms(scenario: Scenario) -> Iterable[tuple[tuple[int, ...], ...]]:
    for i in range(scenario.atom_count):
        yield atom_assignment(scenario, i)
