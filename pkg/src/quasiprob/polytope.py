"""No-signalling polytopes of binary bipartite scenarios.

Behaviors are handled in Collins-Gisin coordinates, ordered as
``p(a=0|x)`` for every x, ``p(b=0|y)`` for every y, then ``p(a=0,b=0|x,y)``
row-major.  The polytope is cut out by positivity of the four joint outcome
probabilities of every setting pair, and its vertices are enumerated with
the double description method in exact integer arithmetic.
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .boxes import pr_n_free_entries, pr_n_sign_matrix, sign_matrix_from_index
from .mass import (
    SignallingError,
    certify_correlation_mass,
    correlation_mass,
    has_jqpd,
    min_mass,
    sign_vectors,
)
from .scenario import Behavior, Scenario, ScenarioError, ScenarioSizeError, no_signalling_report

log = logging.getLogger(__name__)

CHECKPOINT_EVERY = 4096


# -- Collins-Gisin coordinates ---------------------------------------------------------


@dataclass(frozen=True)
class CGVector:
    nx: int
    ny: int
    values: tuple[Fraction, ...]

    def __post_init__(self):
        vals = tuple(Fraction(v) for v in self.values)
        if len(vals) != cg_dimension(self.nx, self.ny):
            raise ScenarioError(
                f"CG vector for {self.nx}{self.ny}22 needs {cg_dimension(self.nx, self.ny)} entries"
            )
        object.__setattr__(self, "values", vals)

    def alice(self, x: int) -> Fraction:
        return self.values[x]

    def bob(self, y: int) -> Fraction:
        return self.values[self.nx + y]

    def joint(self, x: int, y: int) -> Fraction:
        return self.values[self.nx + self.ny + x * self.ny + y]


def cg_dimension(nx: int, ny: int) -> int:
    return nx * ny + nx + ny


def _binary_bipartite(scenario: Scenario) -> tuple[int, int]:
    if scenario.n_parties != 2 or any(p.n_outcomes != 2 for p in scenario.parties):
        raise ScenarioError(f"CG coordinates need a binary bipartite scenario, got {scenario}")
    return scenario.parties[0].n_settings, scenario.parties[1].n_settings


def to_cg(behavior: Behavior) -> CGVector:
    nx, ny = _binary_bipartite(behavior.scenario)
    if not has_jqpd(behavior):
        raise SignallingError(no_signalling_report(behavior))
    alice = [behavior.block((x, 0))[0].sum() for x in range(nx)]
    bob = [behavior.block((0, y))[:, 0].sum() for y in range(ny)]
    joint = [behavior.block((x, y))[0, 0] for x in range(nx) for y in range(ny)]
    return CGVector(nx, ny, (*alice, *bob, *joint))


def from_cg(cg: CGVector) -> Behavior:
    scenario = Scenario.bipartite(cg.nx, cg.ny)

    def entry(s, o):
        (x, y), (a, b) = s, o
        pa, pb, j = cg.alice(x), cg.bob(y), cg.joint(x, y)
        return (j, pa - j, pb - j, 1 - pa - pb + j)[2 * a + b]

    return Behavior.from_function(scenario, entry)


# -- H-representation ----------------------------------------------------------------


@dataclass(frozen=True)
class HRep:
    """Inequalities ``coeff . v + offset >= 0`` over CG coordinates."""

    dim: int
    rows: tuple[tuple[tuple[int, ...], int], ...]
    labels: tuple[str, ...] = ()

    def evaluate(self, point: Sequence[Fraction]) -> list[Fraction]:
        return [sum(c * v for c, v in zip(coeff, point)) + off for coeff, off in self.rows]

    def contains(self, point: Sequence[Fraction]) -> bool:
        return all(v >= 0 for v in self.evaluate(point))

    def tight(self, point: Sequence[Fraction]) -> list[int]:
        return [i for i, v in enumerate(self.evaluate(point)) if v == 0]

    def is_vertex(self, point: Sequence[Fraction]) -> bool:
        """In the polytope with a full-rank set of tight inequalities."""
        if not self.contains(point):
            return False
        tight = self.tight(point)
        if len(tight) < self.dim:
            return False
        return matrix_rank([self.rows[i][0] for i in tight]) == self.dim


def ns_hrep(scenario: Scenario) -> HRep:
    """Positivity of every joint outcome probability, in CG coordinates."""
    nx, ny = _binary_bipartite(scenario)
    dim = cg_dimension(nx, ny)
    rows, labels = [], []
    for x, y in itertools.product(range(nx), range(ny)):
        ia, ib, ij = x, nx + y, nx + ny + x * ny + y
        for a, b in itertools.product((0, 1), repeat=2):
            coeff = [0] * dim
            off = 0
            if (a, b) == (0, 0):
                coeff[ij] = 1
            elif (a, b) == (0, 1):
                coeff[ia], coeff[ij] = 1, -1
            elif (a, b) == (1, 0):
                coeff[ib], coeff[ij] = 1, -1
            else:
                coeff[ia], coeff[ib], coeff[ij] = -1, -1, 1
                off = 1
            rows.append((tuple(coeff), off))
            labels.append(f"P({a}{b}|{x}{y})>=0")
    return HRep(dim, tuple(rows), tuple(labels))


def matrix_rank(rows: Sequence[Sequence]) -> int:
    """Exact rank of a rational matrix."""
    work = [[Fraction(v) for v in r] for r in rows]
    rank = 0
    ncols = len(work[0]) if work else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(work)) if work[i][col] != 0), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        p = work[rank]
        for i in range(len(work)):
            if i != rank and work[i][col] != 0:
                f = work[i][col] / p[col]
                work[i] = [u - f * v for u, v in zip(work[i], p)]
        rank += 1
    return rank


# -- double description -------------------------------------------------------------------


class UnboundedPolyhedronError(ValueError):
    """The inequality system describes an unbounded set."""


def _primitive_rows(R: np.ndarray) -> np.ndarray:
    out = R.copy()
    for i in range(len(out)):
        g = 0
        for v in out[i]:
            g = math.gcd(g, int(v))
        if g > 1:
            out[i] //= g
    return out


def _initial_cone(H: np.ndarray):
    """Pick a square invertible subsystem; its inverse columns are the rays."""
    chosen = []
    basis = []
    for i, row in enumerate(H):
        trial = basis + [list(row)]
        if matrix_rank(trial) == len(trial):
            basis = trial
            chosen.append(i)
            if len(chosen) == H.shape[1]:
                break
    if len(chosen) < H.shape[1]:
        raise UnboundedPolyhedronError("constraint matrix is rank deficient")
    M = [[Fraction(int(v)) for v in H[i]] for i in chosen]
    inv = _invert(M)
    rays = []
    for j in range(len(M)):
        col = [inv[i][j] for i in range(len(M))]
        den = math.lcm(*(v.denominator for v in col))
        rays.append([int(v * den) for v in col])
    return chosen, np.array(rays, dtype=object)


def _invert(M):
    n = len(M)
    aug = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [u - f * v for u, v in zip(aug[i], aug[col])]
    return [row[n:] for row in aug]


def _bit(i: int):
    return np.uint64(1) << np.uint64(i)


def double_description(H: np.ndarray) -> np.ndarray:
    """Extreme rays of the pointed cone ``{z : H z >= 0}`` (integer rows).

    Constraints are inserted in row order after an initial simplicial cone.
    Two rays are adjacent when no third ray is tight on every constraint
    both of them are tight on (the combinatorial adjacency test), after a
    cheap filter requiring at least ``D - 2`` common tight constraints.
    """
    H = np.asarray(H, dtype=object)
    m, D = H.shape
    if m > 64:
        raise ValueError("double description supports at most 64 constraints")
    chosen, R = _initial_cone(H)
    # zero sets as bitmasks over constraint indices
    Z = np.zeros(len(R), dtype=np.uint64)
    vals = R.dot(H[chosen].T)
    for k, i in enumerate(chosen):
        Z[vals[:, k] == 0] |= _bit(i)
    for i in (i for i in range(m) if i not in chosen):
        v = R.dot(H[i])
        pos = np.flatnonzero(v > 0)
        neg = np.flatnonzero(v < 0)
        zero = np.flatnonzero(v == 0)
        new_rays, new_masks = [], []
        if pos.size and neg.size:
            common = Z[pos][:, None] & Z[neg][None, :]
            ok = np.bitwise_count(common) >= D - 2
            for a, b in zip(*np.nonzero(ok)):
                c = common[a, b]
                # rays tight on all of c; the pair itself always is
                if np.count_nonzero((Z & c) == c) > 2:
                    continue
                p, q = pos[a], neg[b]
                ray = v[p] * R[q] - v[q] * R[p]
                new_rays.append(ray)
                new_masks.append(c | _bit(i))
        keep = np.concatenate([pos, zero])
        Zk = Z[keep].copy()
        Zk[len(pos):] |= _bit(i)
        if new_rays:
            R = np.vstack([R[keep], _primitive_rows(np.array(new_rays, dtype=object))])
            Z = np.concatenate([Zk, np.array(new_masks, dtype=np.uint64)])
        else:
            R, Z = R[keep], Zk
        log.debug("constraint %d: %d rays", i, len(R))
    return R


def enumerate_vertices(hrep: HRep) -> list[CGVector | tuple[Fraction, ...]]:
    """Exact vertex list of a bounded H-polytope, sorted canonically."""
    # homogenize: z = (t, v), offset*t + coeff.v >= 0, t >= 0
    rows = [[1] + [0] * hrep.dim]
    rows += [[off, *coeff] for coeff, off in hrep.rows]
    R = double_description(np.array(rows, dtype=object))
    verts = set()
    for ray in R:
        t = int(ray[0])
        if t == 0:
            raise UnboundedPolyhedronError("polyhedron has a recession direction")
        verts.add(tuple(Fraction(int(v), t) for v in ray[1:]))
    return sorted(verts)


def ns_vertices(scenario: Scenario) -> list[CGVector]:
    nx, ny = _binary_bipartite(scenario)
    return [CGVector(nx, ny, v) for v in enumerate_vertices(ns_hrep(scenario))]


# -- classification -----------------------------------------------------------------


@dataclass
class VertexClassification:
    counts: dict  # Fraction -> int
    total: int
    vertices: list | None = None  # (item, m_star) pairs when requested
    exhaustive: bool = True
    notes: dict = field(default_factory=dict)

    def sorted_counts(self) -> list[tuple[Fraction, int]]:
        return sorted(self.counts.items())

    @property
    def max_mass(self) -> Fraction | None:
        return max(self.counts) if self.counts else None


def classify_vertices(vertices: Iterable, keep: bool = False) -> VertexClassification:
    """Histogram of exact ``M*`` over vertices (CG vectors or behaviors)."""
    counts: Counter = Counter()
    kept = [] if keep else None
    total = 0
    for v in vertices:
        behavior = from_cg(v) if isinstance(v, CGVector) else v
        m = min_mass(behavior).m_star
        counts[m] += 1
        total += 1
        if keep:
            kept.append((v, m))
    return VertexClassification(dict(sorted(counts.items())), total, kept)


def is_local_vertex(cg: CGVector) -> bool:
    return all(v in (0, 1) for v in cg.values)


# -- NN22 correlation-box scans ---------------------------------------------------------


def _mass_of_index(args) -> tuple[int, Fraction]:
    n, idx = args
    return idx, correlation_mass(sign_matrix_from_index(n, idx)).m_star


def _write_csv_rows(counts: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class_mass_num", "class_mass_den", "count"])
    for m, c in sorted(counts.items()):
        w.writerow([m.numerator, m.denominator, c])
    return buf.getvalue()


def classification_csv(result: VertexClassification, decimals: int | None = None) -> str:
    if decimals is None:
        return _write_csv_rows(result.counts)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class_mass_num", "class_mass_den", "count", "class_mass_decimal"])
    for m, c in result.sorted_counts():
        w.writerow([m.numerator, m.denominator, c, f"{float(m):.{decimals}f}"])
    return buf.getvalue()


def read_classification_csv(text: str) -> dict:
    rows = [r for r in text.splitlines() if r and not r.startswith("#")]
    reader = csv.reader(rows)
    header = next(reader)
    if header[:3] != ["class_mass_num", "class_mass_den", "count"]:
        raise ValueError(f"unexpected header {header}")
    return {Fraction(int(a), int(b)): int(c) for a, b, c, *_ in reader}


def _load_checkpoint(path: Path) -> tuple[dict, int]:
    text = path.read_text()
    cursor = None
    for line in text.splitlines():
        if line.startswith("# cursor="):
            cursor = int(line.split("=", 1)[1])
    if cursor is None:
        raise ValueError(f"checkpoint {path} has no cursor line")
    return read_classification_csv(text), cursor


def _save_checkpoint(path: Path, counts: dict, cursor: int):
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(_write_csv_rows(counts) + f"# cursor={cursor}\n")
    os.replace(tmp, path)


def full_scan(
    n: int,
    jobs: int = 1,
    checkpoint: Path | str | None = None,
    progress=None,
) -> VertexClassification:
    """Every one of the ``2^(N^2)`` correlation boxes, in index order."""
    if n > 4:
        raise ScenarioSizeError("full mode is limited to N <= 4")
    total = 2 ** (n * n)
    counts: Counter = Counter()
    start = 0
    path = Path(checkpoint) if checkpoint else None
    if path and path.exists():
        loaded, start = _load_checkpoint(path)
        counts.update(loaded)
        log.info("resuming from box %d", start)
    pool = None
    if jobs > 1:
        import multiprocessing

        pool = multiprocessing.Pool(jobs)
    try:
        for lo in range(start, total, CHECKPOINT_EVERY):
            hi = min(lo + CHECKPOINT_EVERY, total)
            work = [(n, i) for i in range(lo, hi)]
            if pool is not None:
                results = pool.map(_mass_of_index, work, chunksize=64)
            else:
                results = [_mass_of_index(w) for w in work]
            # results are merged in index order whatever the completion order
            for _, m in sorted(results):
                counts[m] += 1
            if path:
                _save_checkpoint(path, counts, hi)
            if progress:
                progress(hi, total)
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    return VertexClassification(dict(sorted(counts.items())), total)


# symmetry group generated by adjacent row/column swaps, flipping row 0,
# flipping column 0 and transposition


def _generator_images(n: int) -> list[np.ndarray]:
    total = 2 ** (n * n)
    idx = np.arange(total, dtype=np.int64)
    bits = ((idx[:, None] >> np.arange(n * n)) & 1).reshape(total, n, n)
    weights = (np.int64(1) << np.arange(n * n, dtype=np.int64)).reshape(n, n)

    def encode(b):
        return (b * weights).sum(axis=(1, 2))

    images = []
    for i in range(n - 1):
        perm = list(range(n))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        images.append(encode(bits[:, perm, :]))
        images.append(encode(bits[:, :, perm]))
    flip_r = bits.copy()
    flip_r[:, 0, :] ^= 1
    images.append(encode(flip_r))
    flip_c = bits.copy()
    flip_c[:, :, 0] ^= 1
    images.append(encode(flip_c))
    images.append(encode(bits.transpose(0, 2, 1)))
    return images


def orbits(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Orbit representatives (least index) and orbit sizes for N <= 4."""
    if n > 4:
        raise ScenarioSizeError("exact orbit enumeration is limited to N <= 4")
    images = _generator_images(n)
    labels = np.arange(2 ** (n * n), dtype=np.int64)
    while True:
        before = labels.copy()
        for img in images:
            # every generator is an involution, so img is its own inverse
            np.minimum(labels, labels[img], out=labels)
        if np.array_equal(before, labels):
            break
    reps, sizes = np.unique(labels, return_counts=True)
    return reps, sizes


def symmetry_scan(n: int) -> VertexClassification:
    """One exact LP per orbit, weighted by orbit size (N <= 4)."""
    reps, sizes = orbits(n)
    counts: Counter = Counter()
    for rep, size in zip(reps, sizes):
        counts[correlation_mass(sign_matrix_from_index(n, int(rep))).m_star] += int(size)
    return VertexClassification(
        dict(sorted(counts.items())), 2 ** (n * n), notes={"orbits": len(reps)}
    )


def sample_scan(n: int, count: int, seed: int) -> VertexClassification:
    """Seeded uniform sample of sign matrices (with replacement)."""
    rng = np.random.default_rng(seed)
    counts: Counter = Counter()
    for _ in range(count):
        c = rng.choice(np.array([1, -1]), size=(n, n))
        counts[correlation_mass(c, rule="dantzig" if n > 4 else "bland").m_star] += 1
    return VertexClassification(
        dict(sorted(counts.items())), count, exhaustive=False, notes={"seed": seed}
    )


# -- seeded search for N >= 5 ------------------------------------------------------------
#
# Exhaustive classification is out of reach beyond N = 4, so larger N are
# searched: a pool of sign matrices with pairwise distinct orbit
# fingerprints is built, ranked by rigorous dual lower bounds on M*, the
# most promising are solved in floating point, and the best of those are
# solved exactly and certified.  Reported values are exact; the search only
# decides which boxes get solved.


def orbit_invariants(batch: np.ndarray) -> list[bytes]:
    """Relabeling-invariant fingerprints; distinct values mean distinct orbits.

    Combines the absolute Gram matrices of rows and of columns (each row
    sorted, then the rows sorted, the pair ordered so transposition does not
    matter) with the characteristic polynomial of ``C^T C``.
    """
    b = batch.astype(np.int64)
    n = b.shape[1]
    base = n + 1

    def side(m):
        g = np.abs(np.einsum("bij,bkj->bik", m, m))
        g.sort(axis=2)
        codes = (g * base ** np.arange(n)[None, None, :]).sum(axis=2)
        codes.sort(axis=1)
        return codes

    rows, cols = side(b), side(b.transpose(0, 2, 1))
    poly = _charpoly(np.einsum("bji,bjk->bik", b, b))
    out = []
    for r, c, q in zip(rows, cols, poly):
        rb, cb = r.tobytes(), c.tobytes()
        out.append(min(rb, cb) + max(rb, cb) + q.tobytes())
    return out


def _charpoly(A: np.ndarray) -> np.ndarray:
    """Integer characteristic polynomial coefficients (Faddeev-LeVerrier)."""
    batch, n, _ = A.shape
    eye = np.broadcast_to(np.eye(n, dtype=np.int64), A.shape)
    M = eye.copy()
    coeffs = []
    for k in range(1, n + 1):
        AM = A @ M
        c = -np.trace(AM, axis1=1, axis2=2) // k
        coeffs.append(c)
        M = AM + c[:, None, None] * eye
    return np.stack(coeffs, axis=1)


def cut_norms(batch: np.ndarray) -> np.ndarray:
    """``max_{s,t} s^T C t`` for each matrix of a ``(B, N, N)`` batch."""
    n = batch.shape[1]
    S = sign_vectors(n, pinned=True).astype(np.int32)
    prod = np.einsum("kn,bnm->bkm", S, batch.astype(np.int32))
    return np.abs(prod).sum(axis=2).max(axis=1)


def approximate_correlation_mass(sign_matrix, tol: float = 1e-9):
    """Floating-point ``M*`` by column generation, for screening only.

    Returns the value, the patterns ``(s, t)`` carrying weight (a good
    starting column set for the exact solver) and the dual ``(Y, y0)``.
    """
    from scipy.optimize import linprog

    C = np.asarray(sign_matrix, dtype=np.int64)
    n = C.shape[0]
    S = sign_vectors(n, pinned=True)
    b = np.concatenate([C.reshape(-1), [1]]).astype(float)
    u = np.ones((n, n), dtype=np.int64)
    for i in range(1, n):
        u[i, i] = -1
    pats = [(a, c) for a in u for c in u] + [(u[0], -u[0])]
    seen = {(tuple(a), tuple(c)) for a, c in pats}

    def column(a, c):
        return np.concatenate([np.outer(a, c).ravel(), [1]])

    A = np.array([column(a, c) for a, c in pats], dtype=float).T
    while True:
        AA = np.hstack([A, -A])
        res = linprog(
            np.ones(AA.shape[1]), A_eq=AA, b_eq=b, bounds=(0, None), method="highs-ds"
        )
        if res.status != 0:
            raise RuntimeError(f"screening LP failed: {res.message}")
        y = res.eqlin.marginals
        V = S @ y[:-1].reshape(n, n)
        best = np.abs(V).sum(axis=1)
        new = []
        for k in np.argsort(-(best + abs(y[-1])), kind="stable")[:16]:
            t = np.where(V[k] >= 0, 1, -1)
            for tv, g in ((t, best[k] + y[-1]), (-t, best[k] - y[-1])):
                key = (tuple(S[k]), tuple(tv))
                if g > 1 + tol and key not in seen:
                    seen.add(key)
                    new.append((S[k], tv))
        if not new:
            break
        pats.extend(new)
        A = np.hstack([A, np.array([column(a, c) for a, c in new], dtype=float).T])
    w = res.x[: len(pats)] - res.x[len(pats) :]
    support = [pats[i] for i in np.flatnonzero(np.abs(w) > tol)]
    return float(res.fun), support, (y[:-1].reshape(n, n), float(y[-1]))


def exact_from_screen(sign_matrix, rule: str = "dantzig"):
    """Exact ``M*``, warm-started from the screening solution's support."""
    _, support, _ = approximate_correlation_mass(sign_matrix)
    return correlation_mass(sign_matrix, rule=rule, seed_patterns=support)


def feasible_dual(Y: np.ndarray, y0: float) -> tuple[np.ndarray, float]:
    """Scale ``(Y, y0)`` so that ``|s^T Y t + y0| <= 1`` on every pattern."""
    S = sign_vectors(Y.shape[0], pinned=True)
    worst = (np.abs(S @ Y).sum(axis=1) + abs(y0)).max()
    return Y / worst, y0 / worst


def dual_bounds(pool: np.ndarray, duals: list) -> np.ndarray:
    """Best lower bound ``<Y, C> + y0`` over feasible duals, per pool matrix."""
    flat = pool.reshape(len(pool), -1).astype(float)
    Ys = np.array([Y.reshape(-1) for Y, _ in duals]).T
    y0 = np.array([v for _, v in duals])
    return (flat @ Ys + y0).max(axis=1)


def pr_n_variants(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    free = pr_n_free_entries(n)
    base = pr_n_sign_matrix(n)
    out = np.repeat(base[None], count, axis=0)
    if free:
        flips = rng.integers(0, 2, size=(count, len(free)))
        xs, ys = zip(*free)
        out[:, list(xs), list(ys)] = np.where(flips == 1, -1, 1)
    return out


def _mutants(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """PR_N variants with one to three further cells flipped."""
    out = pr_n_variants(n, count, rng)
    flips = rng.integers(1, 4, size=count)
    for k in range(count):
        cells = rng.choice(n * n, size=flips[k], replace=False)
        out[k].reshape(-1)[cells] *= -1
    return out


def _random_signs(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    return np.where(rng.integers(0, 2, size=(count, n, n)) == 1, -1, 1)


def build_pool(n: int, representatives: int, rng, batch: int = 20_000, max_rounds: int = 200):
    """Sign matrices with pairwise distinct orbit fingerprints.

    Sources in priority order: PR_N variants, their mutants, random matrices.
    Stops early when the sources stop yielding new fingerprints.
    """
    seen: set[bytes] = set()
    kept = []
    tally = Counter()
    # (source, share of the pool it may fill)
    plan = ((pr_n_variants, "prn", 1.0), (_mutants, "mutant", 0.75), (_random_signs, "random", 1.0))
    for make, name, share in plan:
        cap = int(representatives * share)
        stale = 0
        for _ in range(max_rounds):
            if len(kept) >= cap or stale >= 2:
                break
            fresh = 0
            cand = make(n, batch, rng)
            for inv, c in zip(orbit_invariants(cand), cand):
                if inv not in seen and len(kept) < cap:
                    seen.add(inv)
                    kept.append(c)
                    fresh += 1
            tally[name] += fresh
            # a source is exhausted once it rarely yields anything new
            stale = stale + 1 if fresh < batch // 100 else 0
    return np.array(kept), dict(tally)


def symmetry_search(
    n: int,
    representatives: int = 100_000,
    screen: int = 120,
    exact: int = 4,
    seed: int = 0,
    rounds: int = 6,
    targets: Sequence[float] = (),
) -> VertexClassification:
    """Seeded search for large ``M*`` among ``N x N`` correlation boxes.

    ``screen`` boxes are solved in floating point, chosen in ``rounds``
    batches by the best dual lower bound collected so far; the ``exact``
    boxes with the largest floating values are then solved exactly and
    certified by primal and dual checks.  Screened boxes whose floating
    value lies within 1e-4 of one of ``targets`` are solved exactly as well.
    Counts cover the exactly solved boxes only; the maximum is a search
    lower bound, not a classification.
    """
    rng = np.random.default_rng(seed)
    pool, sources = build_pool(n, representatives, rng)
    duals = [feasible_dual(*approximate_correlation_mass(pr_n_sign_matrix(n))[2])]
    screened: dict[int, float] = {}
    per_round = max(1, screen // rounds)
    while len(screened) < min(screen, len(pool)):
        bounds = dual_bounds(pool, duals)
        order = [int(i) for i in np.argsort(-bounds, kind="stable") if int(i) not in screened]
        for i in order[: min(per_round, screen - len(screened))]:
            value, _, dual = approximate_correlation_mass(pool[i])
            screened[i] = value
            duals.append(feasible_dual(*dual))
        log.info("screened %d boxes, best float M* %.6f", len(screened), max(screened.values()))
    top = sorted(screened, key=lambda i: (-screened[i], i))[:exact]
    top += [
        i for i in sorted(screened)
        if i not in top and any(abs(screened[i] - t) < 1e-4 for t in targets)
    ]
    counts: Counter = Counter()
    solved = []
    for i in top:
        cm = exact_from_screen(pool[i])
        if not certify_correlation_mass(pool[i], cm):
            raise RuntimeError("exact solution failed its optimality certificate")
        counts[cm.m_star] += 1
        solved.append((pool[i], cm.m_star))
        log.info("exact M* = %s (%.6f)", cm.m_star, float(cm.m_star))
    return VertexClassification(
        dict(sorted(counts.items())),
        len(solved),
        solved,
        exhaustive=False,
        notes={
            "orbits_screened": len(pool),
            "float_screened": len(screened),
            "seed": seed,
            **{f"pool_{k}": v for k, v in sorted(sources.items())},
        },
    )


def nn22_scan(
    n: int,
    mode: str = "full",
    count: int = 1000,
    seed: int = 0,
    jobs: int = 1,
    checkpoint=None,
    exact: int = 4,
) -> VertexClassification:
    if mode == "full":
        return full_scan(n, jobs=jobs, checkpoint=checkpoint)
    if mode == "symmetry":
        if n > 8:
            raise ScenarioSizeError("symmetry mode supports N <= 8")
        if n <= 4:
            return symmetry_scan(n)
        return symmetry_search(n, representatives=count, exact=exact, seed=seed)
    if mode == "sample":
        if n > 8:
            raise ScenarioSizeError("sample mode supports N <= 8")
        return sample_scan(n, count, seed)
    raise ValueError(f"unknown scan mode {mode!r}")
