"""Finitely supported probability measures and the exact 1-Wasserstein distance.

The primal problem is solved by the transportation simplex method (a network simplex
specialised to the complete bipartite graph). The Kantorovich dual is solved
separately as an LP over potential values, and a spanning-tree enumeration serves as
a brute-force oracle for tiny instances.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import InvalidMeasure, SupportMismatch, TooLargeForBrute
from .metric import FiniteMetricSpace

WEIGHT_SUM_TOL = 1e-12
MARGINAL_TOL = 1e-10
EQUAL_TOL = 1e-12
BRUTE_MAX_SUPPORT = 8


@dataclass(frozen=True, eq=False)
class FiniteMeasure:
    """A probability measure sum_i w_i delta_{x_i} with x_i given as point indices.

    Zero weights are dropped and the support is sorted, so each measure has exactly
    one representation.
    """

    support: tuple
    weights: np.ndarray

    def __post_init__(self):
        support = [int(i) for i in self.support]
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(support) != len(weights):
            raise InvalidMeasure("support and weights differ in length")
        if len(set(support)) != len(support):
            raise InvalidMeasure("support indices must be distinct")
        if any(i < 0 for i in support):
            raise InvalidMeasure("support indices must be nonnegative")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise InvalidMeasure("weights must be nonnegative and finite")
        keep = weights > 0
        order = np.argsort(np.asarray(support)[keep], kind="stable") if keep.any() else []
        support = tuple(np.asarray(support)[keep][order].tolist())
        weights = weights[keep][order]
        if not support:
            raise InvalidMeasure("measure has no mass")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidMeasure(f"weights sum to {weights.sum()!r}, not 1")
        weights.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.support)

    def __eq__(self, other):
        if not isinstance(other, FiniteMeasure):
            return NotImplemented
        return self.support == other.support and bool(
            np.all(np.abs(self.weights - other.weights) <= EQUAL_TOL)
        )

    def __hash__(self):
        return hash(self.support)

    def __repr__(self):
        terms = " + ".join(f"{w:.6g}*d{i}" for i, w in zip(self.support, self.weights))
        return f"FiniteMeasure({terms})"

    def weight_of(self, i: int) -> float:
        try:
            return float(self.weights[self.support.index(i)])
        except ValueError:
            return 0.0

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.weights.tolist()))

    def to_json(self) -> dict:
        return {"support": list(self.support), "weights": self.weights.tolist()}

    @classmethod
    def from_json(cls, obj) -> "FiniteMeasure":
        return cls(obj["support"], obj["weights"])


def measure(weights_by_point: dict) -> FiniteMeasure:
    return FiniteMeasure(tuple(weights_by_point), list(weights_by_point.values()))


def normalized(support: Sequence[int], raw_weights) -> FiniteMeasure:
    """Measure with the given support and weights rescaled to sum to one.

    Repeated indices are merged, so this also serves as a pushforward helper.
    """
    w = np.asarray(raw_weights, dtype=float)
    merged: dict[int, float] = {}
    for i, x in zip(support, w):
        merged[int(i)] = merged.get(int(i), 0.0) + float(x)
    keys = sorted(merged)
    vals = np.array([merged[k] for k in keys])
    vals = vals / vals.sum()
    return FiniteMeasure(tuple(keys), vals)


def dirac(i: int, space: FiniteMetricSpace | None = None) -> FiniteMeasure:
    if space is not None and not 0 <= i < space.size:
        raise InvalidMeasure(f"index {i} outside a space of {space.size} points")
    if i < 0:
        raise InvalidMeasure(f"index {i} is negative")
    return FiniteMeasure((i,), [1.0])


@dataclass(frozen=True, eq=False)
class TransportPlan:
    rows: tuple
    cols: tuple
    mass: np.ndarray

    def to_json(self) -> dict:
        return {"rows": list(self.rows), "cols": list(self.cols), "mass": self.mass.tolist()}


@dataclass(frozen=True)
class DualPotential:
    values: dict

    def lipschitz_gap(self, space: FiniteMetricSpace) -> float:
        """max |f(x) - f(y)| - d(x, y) over the domain; <= 0 means 1-Lipschitz."""
        pts = list(self.values)
        worst = -np.inf
        for x, y in itertools.combinations(pts, 2):
            worst = max(worst, abs(self.values[x] - self.values[y]) - space.dist[x, y])
        return float(worst) if pts[1:] else 0.0


def _check(mu: FiniteMeasure, space: FiniteMetricSpace) -> None:
    if mu.support[-1] >= space.size:
        raise SupportMismatch(f"index {mu.support[-1]} outside a space of {space.size} points")


# --- transportation simplex ---------------------------------------------------------


def _tree_path(basis: set, m: int, n: int, start: int, goal: int) -> list:
    """Cells on the basis-tree path from row node ``start`` to column node ``goal``.

    Nodes 0..m-1 are rows, m..m+n-1 are columns.
    """
    adj: dict[int, list] = {k: [] for k in range(m + n)}
    for i, j in basis:
        adj[i].append((m + j, (i, j)))
        adj[m + j].append((i, (i, j)))
    prev = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for nxt, cell in adj[node]:
            if nxt not in prev:
                prev[nxt] = (node, cell)
                queue.append(nxt)
    path = []
    node = goal
    while prev[node] is not None:
        node, cell = prev[node]
        path.append(cell)
    path.reverse()
    return path


def _potentials(basis: set, C: np.ndarray, m: int, n: int):
    u = np.full(m, np.nan)
    v = np.full(n, np.nan)
    u[0] = 0.0
    by_row: dict[int, list] = {}
    by_col: dict[int, list] = {}
    for i, j in basis:
        by_row.setdefault(i, []).append(j)
        by_col.setdefault(j, []).append(i)
    queue = deque([("r", 0)])
    while queue:
        kind, k = queue.popleft()
        if kind == "r":
            for j in by_row.get(k, ()):
                if np.isnan(v[j]):
                    v[j] = C[k, j] - u[k]
                    queue.append(("c", j))
        else:
            for i in by_col.get(k, ()):
                if np.isnan(u[i]):
                    u[i] = C[i, k] - v[k]
                    queue.append(("r", i))
    return u, v


def transport_simplex(a, b, C, max_iter: int = 100_000):
    """Solve min <C, P> over couplings of ``a`` and ``b``.

    Returns ``(P, u, v)`` with ``u_i + v_j <= C_ij`` (up to rounding) and equality on the
    support of ``P``. Pivots follow Bland's smallest-index rule.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    C = np.asarray(C, dtype=float)
    m, n = len(a), len(b)
    X = np.zeros((m, n))
    basis: set = set()

    # north-west corner start; exactly m + n - 1 basic cells even when degenerate
    ra, rb = a.copy(), b.copy()
    i = j = 0
    while True:
        x = min(ra[i], rb[j])
        X[i, j] = x
        basis.add((i, j))
        ra[i] -= x
        rb[j] -= x
        if i == m - 1 and j == n - 1:
            break
        if j == n - 1 or (i < m - 1 and ra[i] <= rb[j]):
            i += 1
        else:
            j += 1
    X[X < 0] = 0.0

    tol = 1e-12 * max(1.0, float(np.abs(C).max()) if C.size else 1.0)
    for _ in range(max_iter):
        u, v = _potentials(basis, C, m, n)
        reduced = C - u[:, None] - v[None, :]
        entering = None
        for i in range(m):
            for j in range(n):
                if (i, j) not in basis and reduced[i, j] < -tol:
                    entering = (i, j)
                    break
            if entering:
                break
        if entering is None:
            return X, u, v
        ei, ej = entering
        path = _tree_path(basis, m, n, ei, m + ej)
        minus = path[0::2]
        plus = path[1::2]
        theta = min(X[c] for c in minus)
        leaving = min(c for c in minus if X[c] == theta)
        for c in minus:
            X[c] -= theta
        for c in plus:
            X[c] += theta
        X[ei, ej] += theta
        X[leaving] = 0.0
        basis.remove(leaving)
        basis.add(entering)
    raise RuntimeError("transportation simplex did not terminate")


def wasserstein(mu: FiniteMeasure, nu: FiniteMeasure, space: FiniteMetricSpace):
    """Exact W1 distance and an optimal plan between two measures on ``space``."""
    _check(mu, space)
    _check(nu, space)
    C = space.dist[np.ix_(mu.support, nu.support)]
    P, _, _ = transport_simplex(mu.weights, nu.weights, C)
    cost = float((P * C).sum())
    return cost, TransportPlan(mu.support, nu.support, P)


def wasserstein_distance(mu, nu, space) -> float:
    return wasserstein(mu, nu, space)[0]


def verify_plan(plan: TransportPlan, mu: FiniteMeasure, nu: FiniteMeasure, tol: float = MARGINAL_TOL) -> bool:
    P = np.asarray(plan.mass, dtype=float)
    if P.shape != (len(mu.support), len(nu.support)):
        return False
    if tuple(plan.rows) != mu.support or tuple(plan.cols) != nu.support:
        return False
    if np.any(P < -tol):
        return False
    return bool(
        np.all(np.abs(P.sum(axis=1) - mu.weights) <= tol)
        and np.all(np.abs(P.sum(axis=0) - nu.weights) <= tol)
    )


def product_plan(mu: FiniteMeasure, nu: FiniteMeasure) -> TransportPlan:
    return TransportPlan(mu.support, nu.support, np.outer(mu.weights, nu.weights))


def dual_value(mu: FiniteMeasure, nu: FiniteMeasure, space: FiniteMetricSpace):
    """Maximise sum f d(mu - nu) over 1-Lipschitz f on the union of the supports.

    Only the values of f on the supports enter the objective, and any f that is
    1-Lipschitz there extends to all of the space (McShane), so this is the full dual.
    """
    _check(mu, space)
    _check(nu, space)
    pts = sorted(set(mu.support) | set(nu.support))
    k = len(pts)
    signed = np.array([mu.weight_of(p) - nu.weight_of(p) for p in pts])
    if k == 1:
        return DualPotential({pts[0]: 0.0}), 0.0
    rows, rhs = [], []
    for s, t in itertools.permutations(range(k), 2):
        row = np.zeros(k)
        row[s], row[t] = 1.0, -1.0
        rows.append(row)
        rhs.append(space.dist[pts[s], pts[t]])
    bounds = [(0.0, 0.0)] + [(None, None)] * (k - 1)
    res = linprog(-signed, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"dual LP failed: {res.message}")
    f = res.x
    return DualPotential(dict(zip(pts, f.tolist()))), float(signed @ f)


def convex_combine(mu: FiniteMeasure, nu: FiniteMeasure, t: float) -> FiniteMeasure:
    """(1 - t) mu + t nu."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    pts = sorted(set(mu.support) | set(nu.support))
    w = [(1.0 - t) * mu.weight_of(p) + t * nu.weight_of(p) for p in pts]
    return FiniteMeasure(tuple(pts), w)


# --- brute-force oracle -------------------------------------------------------------


def _tree_solution(cells, a, b):
    """Unique flow on a spanning tree of K_{m,n} meeting the marginals (leaf peeling)."""
    m, n = len(a), len(b)
    ra, rb = list(a), list(b)
    remaining = set(cells)
    flow = {}
    degree = {}
    for i, j in remaining:
        degree[("r", i)] = degree.get(("r", i), 0) + 1
        degree[("c", j)] = degree.get(("c", j), 0) + 1
    while remaining:
        for cell in sorted(remaining):
            i, j = cell
            if degree[("r", i)] == 1:
                x = ra[i]
            elif degree[("c", j)] == 1:
                x = rb[j]
            else:
                continue
            flow[cell] = x
            ra[i] -= x
            rb[j] -= x
            degree[("r", i)] -= 1
            degree[("c", j)] -= 1
            remaining.remove(cell)
            break
        else:
            raise AssertionError("not a tree")
    X = np.zeros((m, n))
    for c, x in flow.items():
        X[c] = x
    return X


def _is_spanning_tree(cells, m, n) -> bool:
    parent = list(range(m + n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in cells:
        ri, rj = find(i), find(m + j)
        if ri == rj:
            return False
        parent[ri] = rj
    return True


def wasserstein_brute(mu: FiniteMeasure, nu: FiniteMeasure, space: FiniteMetricSpace) -> float:
    """W1 by enumerating every basic solution of the transportation polytope.

    Each vertex is supported on a spanning tree of the bipartite support graph, so the
    minimum over all nonnegative tree solutions is the optimum.
    """
    if len(mu) + len(nu) > BRUTE_MAX_SUPPORT:
        raise TooLargeForBrute(f"supports of total size {len(mu) + len(nu)} exceed {BRUTE_MAX_SUPPORT}")
    _check(mu, space)
    _check(nu, space)
    m, n = len(mu), len(nu)
    C = space.dist[np.ix_(mu.support, nu.support)]
    all_cells = list(itertools.product(range(m), range(n)))
    best = np.inf
    for cells in itertools.combinations(all_cells, m + n - 1):
        if not _is_spanning_tree(cells, m, n):
            continue
        X = _tree_solution(cells, mu.weights, nu.weights)
        if X.min() < -1e-12:
            continue
        best = min(best, float((X * C).sum()))
    return best


# --- serialization ------------------------------------------------------------------


def load_measure(path) -> FiniteMeasure:
    with open(path) as fh:
        return FiniteMeasure.from_json(json.load(fh))


def dump_measure(mu: FiniteMeasure, path) -> None:
    with open(path, "w") as fh:
        json.dump(mu.to_json(), fh)


def random_measure(rng: np.random.Generator, points: Sequence[int] | Iterable[int], k: int | None = None) -> FiniteMeasure:
    """Measure on ``k`` distinct points drawn from ``points`` with Dirichlet(1) weights."""
    points = list(points)
    if k is None:
        k = int(rng.integers(1, len(points) + 1))
    chosen = rng.choice(points, size=k, replace=False)
    w = rng.dirichlet(np.ones(k))
    return normalized(chosen, w)
