"""Persistent homology by boundary-matrix reduction over a prime field, and bottleneck distance."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .complexes import NON_STRICT, STRICT, Filtration, vr_filtration
from .errors import SizeGuard
from .metric import FiniteMetricSpace, build_space, fmt_real, gh_distance_exact, sample_circle

CIRCLE_H3_LIMIT = (1.0 / 3.0, 2.0 / 5.0)
CIRCLE_MAX_POINTS_H3 = 24


class Interval(NamedTuple):
    birth: float
    death: float
    birth_closed: bool = True
    death_closed: bool = False

    @property
    def persistence(self) -> float:
        return self.death - self.birth

    def contains(self, r: float) -> bool:
        lo = self.birth <= r if self.birth_closed else self.birth < r
        hi = r <= self.death if self.death_closed else r < self.death
        return lo and hi


@dataclass
class PersistenceDiagram:
    intervals: dict = field(default_factory=dict)  # hom dim -> list[Interval]
    field: int = 2

    def __getitem__(self, dim: int) -> list:
        return self.intervals.get(dim, [])

    def pairs(self, dim: int) -> list:
        return sorted((iv.birth, iv.death) for iv in self[dim])

    def betti_at(self, dim: int, r: float) -> int:
        return sum(iv.contains(r) for iv in self[dim])

    def to_csv(self) -> str:
        lines = ["dim,birth,death,birth_closed,death_closed"]
        for dim in sorted(self.intervals):
            for iv in sorted(self.intervals[dim]):
                lines.append(
                    f"{dim},{fmt_real(iv.birth)},{fmt_real(iv.death)},"
                    f"{str(iv.birth_closed).lower()},{str(iv.death_closed).lower()}"
                )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, field_p: int = 2) -> "PersistenceDiagram":
        out: dict = {}
        for line in text.strip().splitlines()[1:]:
            dim, b, d, bc, dc = line.split(",")
            out.setdefault(int(dim), []).append(
                Interval(float(b), float(d), bc.strip() == "true", dc.strip() == "true")
            )
        return cls(out, field_p)


def _check_prime(p: int) -> None:
    if p < 2 or any(p % q == 0 for q in range(2, int(math.isqrt(p)) + 1)):
        raise ValueError(f"{p} is not prime")


def _reduce(columns: list, dims: list, p: int) -> dict:
    """Column reduction with clearing; returns {pivot row: column} for every nonzero column.

    Columns are dicts row -> coefficient in F_p (sets for p = 2). They are processed by
    decreasing dimension so that columns of positive simplices can be skipped.
    """
    pivot_of: dict[int, int] = {}
    cleared: set[int] = set()
    order = sorted(range(len(columns)), key=lambda j: (-dims[j], j))
    for j in order:
        if j in cleared or not columns[j]:
            continue
        col = columns[j]
        if p == 2:
            while col:
                low = max(col)
                k = pivot_of.get(low)
                if k is None:
                    break
                col ^= columns[k]
        else:
            while col:
                low = max(col)
                k = pivot_of.get(low)
                if k is None:
                    break
                other = columns[k]
                factor = col[low] * pow(other[low], p - 2, p) % p
                for row, c in other.items():
                    v = (col.get(row, 0) - factor * c) % p
                    if v:
                        col[row] = v
                    else:
                        col.pop(row, None)
        columns[j] = col
        if col:
            low = max(col)
            pivot_of[low] = j
            cleared.add(low)
    return pivot_of


def compute_ph(filtration: Filtration, max_hom_dim: int = 1, field: int = 2,
               convention: str = NON_STRICT) -> PersistenceDiagram:
    """Persistence diagram of a filtration in dimensions 0..max_hom_dim.

    Intervals are labelled [birth, death) for the non-strict convention and
    (birth, death] for the strict one; the pairing is the same.
    """
    _check_prime(field)
    if max_hom_dim + 1 > filtration.max_dim:
        raise ValueError("filtration must contain simplices of dimension max_hom_dim + 1")
    simplices = [s for s in filtration.simplices if s.dim <= max_hom_dim + 1]
    index = {s.vertices: k for k, s in enumerate(simplices)}
    dims = [s.dim for s in simplices]
    columns: list = []
    for s in simplices:
        v = s.vertices
        if len(v) == 1:
            columns.append(set() if field == 2 else {})
            continue
        faces = [index[v[:i] + v[i + 1:]] for i in range(len(v))]
        if field == 2:
            columns.append(set(faces))
        else:
            columns.append({f: (1 if i % 2 == 0 else field - 1) for i, f in enumerate(faces)})
    pivot_of = _reduce(columns, dims, field)

    closed = (True, False) if convention == NON_STRICT else (False, True)
    if convention not in (NON_STRICT, STRICT):
        raise ValueError(f"unknown convention {convention!r}")
    intervals: dict[int, list] = {d: [] for d in range(max_hom_dim + 1)}
    for low, j in pivot_of.items():
        d = dims[low]
        if d > max_hom_dim:
            continue
        b, e = simplices[low].birth, simplices[j].birth
        if b != e:
            intervals[d].append(Interval(b, e, *closed))
    for k, s in enumerate(simplices):
        if s.dim <= max_hom_dim and not columns[k] and k not in pivot_of:
            intervals[s.dim].append(Interval(s.birth, math.inf, closed[0], False))
    for d in intervals:
        intervals[d].sort()
    return PersistenceDiagram(intervals, field)


# --- independent rank oracle --------------------------------------------------------


def rank_mod_p(M: np.ndarray, p: int) -> int:
    """Rank of an integer matrix over F_p by dense Gaussian elimination."""
    A = np.array(M, dtype=np.int64) % p
    rows, cols = A.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        nz = np.nonzero(A[rank:, c])[0]
        if len(nz) == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            A[[rank, piv]] = A[[piv, rank]]
        inv = pow(int(A[rank, c]), p - 2, p)
        A[rank] = (A[rank] * inv) % p
        others = np.nonzero(A[:, c])[0]
        others = others[others != rank]
        if len(others):
            A[others] = (A[others] - np.outer(A[others, c], A[rank])) % p
        rank += 1
    return rank


def betti_numbers(simplices, max_hom_dim: int, p: int = 2) -> list:
    """Betti numbers of a finite simplicial complex given as a collection of vertex tuples."""
    by_dim: dict[int, list] = {}
    for s in simplices:
        by_dim.setdefault(len(s) - 1, []).append(tuple(s))
    for d in by_dim:
        by_dim[d].sort()

    def boundary_rank(d):
        if d == 0 or d not in by_dim or d - 1 not in by_dim:
            return 0
        rows = {s: i for i, s in enumerate(by_dim[d - 1])}
        M = np.zeros((len(rows), len(by_dim[d])), dtype=np.int64)
        for j, s in enumerate(by_dim[d]):
            for i in range(len(s)):
                M[rows[s[:i] + s[i + 1:]], j] = (-1) ** i
        return rank_mod_p(M, p)

    ranks = {d: boundary_rank(d) for d in range(max_hom_dim + 2)}
    return [len(by_dim.get(d, [])) - ranks[d] - ranks[d + 1] for d in range(max_hom_dim + 1)]


# --- bottleneck distance --------------------------------------------------------------


def _linf(a, b) -> float:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def _finite_bottleneck(A: list, B: list) -> float:
    if not A and not B:
        return 0.0
    na, nb = len(A), len(B)
    half_a = [(d - b) / 2 for b, d in A]
    half_b = [(d - b) / 2 for b, d in B]
    cross = np.array([[_linf(a, b) for b in B] for a in A]).reshape(na, nb)
    candidates = np.unique(np.concatenate([cross.ravel(), half_a, half_b, [0.0]]))

    def feasible(eps):
        # left: A then diagonal copies of B; right: B then diagonal copies of A
        n = na + nb
        M = np.zeros((n, n), dtype=bool)
        M[:na, :nb] = cross <= eps
        for i in range(na):
            M[i, nb + i] = half_a[i] <= eps
        for j in range(nb):
            M[na + j, j] = half_b[j] <= eps
        M[na:, nb:] = True
        matching = maximum_bipartite_matching(csr_matrix(M), perm_type="column")
        return bool(np.all(matching >= 0))

    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def _split(diagram, dim):
    if isinstance(diagram, PersistenceDiagram):
        pts = diagram.pairs(dim)
    else:
        pts = sorted((float(b), float(d)) for b, d in diagram)
    finite = [p for p in pts if math.isfinite(p[1])]
    essential = sorted(p[0] for p in pts if not math.isfinite(p[1]))
    return finite, essential


def bottleneck(d1, d2, dim: int = 0) -> float:
    """Bottleneck distance between the dimension-``dim`` parts of two diagrams.

    Accepts diagrams or plain lists of (birth, death) pairs. Essential classes can only
    be matched with each other; unequal counts give an infinite distance.
    """
    f1, e1 = _split(d1, dim)
    f2, e2 = _split(d2, dim)
    if len(e1) != len(e2):
        return math.inf
    ess = max((abs(a - b) for a, b in zip(e1, e2)), default=0.0)
    return max(ess, _finite_bottleneck(f1, f2))


def bottleneck_exhaustive(A: list, B: list) -> float:
    """Brute-force bottleneck over all partial matchings of two small finite diagrams."""
    A = [tuple(a) for a in A]
    B = [tuple(b) for b in B]
    best = math.inf

    def rec(i, used, worst):
        nonlocal best
        if worst >= best:
            return
        if i == len(A):
            rest = [(b[1] - b[0]) / 2 for j, b in enumerate(B) if j not in used]
            best = min(best, max([worst] + rest))
            return
        rec(i + 1, used, max(worst, (A[i][1] - A[i][0]) / 2))
        for j, b in enumerate(B):
            if j not in used:
                rec(i + 1, used | {j}, max(worst, _linf(A[i], b)))

    rec(0, frozenset(), 0.0)
    return best


# --- experiments ------------------------------------------------------------------------


def stability_check(X: FiniteMetricSpace, Y: FiniteMetricSpace, dim: int = 1, field: int = 2,
                    slack: float = 1e-9) -> dict:
    """Compare d_b(PH_dim(X), PH_dim(Y)) against 2 d_GH(X, Y)."""
    gh, _ = gh_distance_exact(X, Y)
    dx = compute_ph(vr_filtration(X, dim + 1), dim, field)
    dy = compute_ph(vr_filtration(Y, dim + 1), dim, field)
    db = bottleneck(dx, dy, dim)
    return {
        "dim": dim,
        "bottleneck": db,
        "two_gh": 2 * gh,
        "passed": bool(db <= 2 * gh + slack),
    }


def circle_ph_experiment(n_points: int, max_hom_dim: int = 3, field: int = 2,
                         circumference: float = 1.0):
    """PH of ``n_points`` evenly spaced circle points, compared with [1/3, 2/5) in degree 3."""
    if max_hom_dim >= 3 and n_points > CIRCLE_MAX_POINTS_H3:
        raise SizeGuard(f"H_3 experiment limited to {CIRCLE_MAX_POINTS_H3} points")
    space = build_space(sample_circle(n_points, circumference))
    diagram = compute_ph(vr_filtration(space, max_hom_dim + 1), max_hom_dim, field)
    report = {"n_points": n_points, "limit_h3": list(CIRCLE_H3_LIMIT)}
    if max_hom_dim >= 3:
        h3 = diagram.pairs(3)
        report["h3"] = [list(iv) for iv in h3]
        if len(h3) == 1:
            b, d = h3[0]
            report["birth_gap"] = abs(b / circumference - CIRCLE_H3_LIMIT[0])
            report["death_gap"] = abs(d / circumference - CIRCLE_H3_LIMIT[1])
        else:
            # no single degree-3 class at this sample size
            report["birth_gap"] = report["death_gap"] = math.inf
    report["h1"] = [list(iv) for iv in diagram.pairs(1)] if max_hom_dim >= 1 else []
    return diagram, report


def circle_convergence(sizes=(12, 16, 20), field: int = 2) -> dict:
    reports = [circle_ph_experiment(n, 3, field)[1] for n in sizes]
    births = [r["birth_gap"] for r in reports]
    deaths = [r["death_gap"] for r in reports]
    monotone = all(b2 <= b1 for b1, b2 in zip(births, births[1:])) and all(
        d2 <= d1 for d1, d2 in zip(deaths, deaths[1:])
    )
    return {"sizes": list(sizes), "birth_gaps": births, "death_gaps": deaths, "non_increasing": monotone}
