"""Finite metric spaces, point-cloud samplers and exact GH / Hausdorff distances."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import EmptySubset, NonUnitSphericalPoint, NotCloudBacked, TooLargeForExactGH

EUCLIDEAN = "euclidean"
L1 = "l1"
GEODESIC_SPHERE = "geodesic_sphere"
GEODESIC_CIRCLE = "geodesic_circle"
METRIC_KINDS = (EUCLIDEAN, L1, GEODESIC_SPHERE, GEODESIC_CIRCLE)

TRIANGLE_TOL = 1e-12
NORM_TOL = 1e-12
GH_MAX_POINTS = 7
# arcs within this relative distance of a rational k/q (q <= CIRCLE_MAX_DENOM) of the
# circumference are snapped to it, so evenly spaced samples give bit-identical distances
CIRCLE_SNAP_TOL = 1e-12
CIRCLE_MAX_DENOM = 1000


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Coordinates plus the metric used to measure them.

    ``param`` is the sphere radius for ``geodesic_sphere`` and the circumference for
    ``geodesic_circle``; it is ignored otherwise. Circle coordinates are arc lengths,
    stored as an ``(n, 1)`` array.
    """

    coords: np.ndarray
    metric_kind: str = EUCLIDEAN
    param: Optional[float] = None

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim == 1:
            coords = coords.reshape(-1, 1)
        object.__setattr__(self, "coords", coords)
        if self.metric_kind not in METRIC_KINDS:
            raise ValueError(f"unknown metric kind {self.metric_kind!r}")
        if self.metric_kind in (GEODESIC_SPHERE, GEODESIC_CIRCLE):
            if self.param is None or self.param <= 0:
                raise ValueError(f"{self.metric_kind} needs a positive param")
        if self.metric_kind == GEODESIC_CIRCLE:
            if coords.shape[1] != 1:
                raise ValueError("circle coordinates must be scalars")
            if len(coords) and (coords.min() < 0 or coords.max() >= self.param):
                raise ValueError("circle coordinates must lie in [0, circumference)")

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def __len__(self):
        return len(self.coords)


def _snap_circle(d: np.ndarray, c: float) -> np.ndarray:
    out = d.copy()
    flat = out.reshape(-1)
    for value in np.unique(flat):
        frac = Fraction(float(value / c)).limit_denominator(CIRCLE_MAX_DENOM)
        snapped = frac.numerator * c / frac.denominator
        if snapped != value and abs(snapped - value) <= CIRCLE_SNAP_TOL * c:
            flat[flat == value] = snapped
    return out


def cross_distances(a, b, metric_kind: str = EUCLIDEAN, param: Optional[float] = None) -> np.ndarray:
    """Distances between the rows of ``a`` and the rows of ``b`` under ``metric_kind``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if b.ndim == 1:
        b = b.reshape(-1, 1)
    diff = a[:, None, :] - b[None, :, :]
    if metric_kind == EUCLIDEAN:
        return np.sqrt((diff**2).sum(axis=-1))
    if metric_kind == L1:
        return np.abs(diff).sum(axis=-1)
    if metric_kind == GEODESIC_SPHERE:
        # 2 atan2(|x-y|, |x+y|) stays accurate near 0 and near pi
        minus = np.sqrt((diff**2).sum(axis=-1))
        plus = np.sqrt(((a[:, None, :] + b[None, :, :]) ** 2).sum(axis=-1))
        return param * 2.0 * np.arctan2(minus, plus)
    if metric_kind == GEODESIC_CIRCLE:
        gap = np.abs(diff[..., 0])
        return _snap_circle(np.minimum(gap, param - gap), param)
    raise ValueError(f"unknown metric kind {metric_kind!r}")


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A finite metric space given by its distance matrix.

    When ``cloud`` is set the space is cloud-backed: new points can be appended with
    :meth:`extend`, which the thickening constructions rely on.
    """

    dist: np.ndarray
    labels: Optional[tuple] = None
    cloud: Optional[PointCloud] = field(default=None, repr=False)

    def __post_init__(self):
        dist = np.array(self.dist, dtype=float)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1] or dist.shape[0] == 0:
            raise ValueError("distance matrix must be square and nonempty")
        dist.setflags(write=False)
        object.__setattr__(self, "dist", dist)
        if self.labels is not None and len(self.labels) != len(dist):
            raise ValueError("labels must match the number of points")

    @property
    def size(self) -> int:
        return self.dist.shape[0]

    def __len__(self):
        return self.size

    def diameter(self, indices: Optional[Iterable[int]] = None) -> float:
        if indices is None:
            return float(self.dist.max())
        idx = list(indices)
        if len(idx) <= 1:
            return 0.0
        return float(self.dist[np.ix_(idx, idx)].max())

    def subspace(self, indices: Sequence[int]) -> "FiniteMetricSpace":
        idx = list(indices)
        labels = tuple(self.labels[i] for i in idx) if self.labels else None
        cloud = None
        if self.cloud is not None:
            cloud = PointCloud(self.cloud.coords[idx], self.cloud.metric_kind, self.cloud.param)
        return FiniteMetricSpace(self.dist[np.ix_(idx, idx)], labels, cloud)

    def extend(self, coords) -> tuple["FiniteMetricSpace", list[int]]:
        """Append points to a cloud-backed space.

        Returns the enlarged space and the index of each requested point. Points that
        coincide exactly with an existing point reuse its index; old indices are kept.
        """
        if self.cloud is None:
            raise NotCloudBacked("space has no coordinates; cannot create new points")
        cloud = self.cloud
        new = np.asarray(coords, dtype=float).reshape(-1, cloud.dim)
        if cloud.metric_kind == GEODESIC_CIRCLE:
            new = np.mod(new, cloud.param)
            new[new >= cloud.param] = 0.0
        lookup = {tuple(row): i for i, row in enumerate(cloud.coords)}
        indices, fresh = [], []
        for row in new:
            key = tuple(row)
            if key not in lookup:
                lookup[key] = self.size + len(fresh)
                fresh.append(row)
            indices.append(lookup[key])
        if not fresh:
            return self, indices
        fresh = np.array(fresh)
        all_coords = np.vstack([cloud.coords, fresh])
        bigger = PointCloud(all_coords, cloud.metric_kind, cloud.param)
        n = self.size
        dist = np.zeros((len(all_coords), len(all_coords)))
        dist[:n, :n] = self.dist
        block = cross_distances(fresh, all_coords, cloud.metric_kind, cloud.param)
        dist[n:, :] = block
        dist[:, n:] = block.T
        np.fill_diagonal(dist, 0.0)
        return FiniteMetricSpace(dist, None, bigger), indices


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    def __bool__(self):
        # truthy when something is wrong, mirroring a list of failures
        return bool(self.violations)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_metric(dist, tol: float = TRIANGLE_TOL) -> ValidationReport:
    """Check the metric axioms and list every violation with its indices."""
    d = np.asarray(dist, dtype=float)
    report = ValidationReport()
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        report.violations.append(("shape", d.shape))
        return report
    n = d.shape[0]
    for i in range(n):
        if d[i, i] != 0:
            report.violations.append(("diagonal", (i,)))
    for i, j in zip(*np.nonzero(d < 0)):
        report.violations.append(("negative", (int(i), int(j))))
    for i, j in zip(*np.nonzero(d != d.T)):
        if i < j:
            report.violations.append(("symmetry", (int(i), int(j))))
    # slack[i, j, k] = d[i,k] - d[i,j] - d[j,k]
    slack = d[:, None, :] - d[:, :, None] - d[None, :, :]
    for i, j, k in zip(*np.nonzero(slack > tol)):
        report.violations.append(("triangle", (int(i), int(j), int(k))))
    return report


def build_space(cloud: PointCloud) -> FiniteMetricSpace:
    if cloud.metric_kind == GEODESIC_SPHERE:
        norms = np.linalg.norm(cloud.coords, axis=1)
        bad = np.nonzero(np.abs(norms - cloud.param) > NORM_TOL * max(1.0, cloud.param))[0]
        if len(bad):
            raise NonUnitSphericalPoint(
                f"point {int(bad[0])} has norm {norms[bad[0]]!r}, expected {cloud.param!r}"
            )
    dist = cross_distances(cloud.coords, cloud.coords, cloud.metric_kind, cloud.param)
    np.fill_diagonal(dist, 0.0)
    dist = np.minimum(dist, dist.T)
    return FiniteMetricSpace(dist, None, cloud)


def space_from_matrix(dist, labels=None, check: bool = True) -> FiniteMetricSpace:
    space = FiniteMetricSpace(dist, tuple(labels) if labels is not None else None)
    if check:
        report = validate_metric(space.dist)
        if report:
            raise ValueError(f"not a metric: {report.violations[:5]}")
    return space


def sample_circle(n: int, circumference: float = 1.0) -> PointCloud:
    if n < 1:
        raise ValueError("need at least one point")
    coords = np.array([k * circumference / n for k in range(n)])
    return PointCloud(coords, GEODESIC_CIRCLE, circumference)


def sample_sphere(n: int, dim: int, radius: float = 1.0, seed: int = 0) -> PointCloud:
    """``n`` points uniform on the ``dim``-sphere of the given radius."""
    if dim < 1:
        raise ValueError("sphere dimension must be >= 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, dim + 1))
    pts = radius * g / np.linalg.norm(g, axis=1, keepdims=True)
    return PointCloud(pts, GEODESIC_SPHERE, radius)


def hausdorff_distance(X: Sequence[int], Y: Sequence[int], ambient: FiniteMetricSpace) -> float:
    X, Y = list(X), list(Y)
    if not X or not Y:
        raise EmptySubset("Hausdorff distance needs two nonempty subsets")
    block = ambient.dist[np.ix_(X, Y)]
    return float(max(block.min(axis=1).max(), block.min(axis=0).max()))


@dataclass(frozen=True)
class Correspondence:
    relation: frozenset

    def is_surjective(self, nx: int, ny: int) -> bool:
        return {i for i, _ in self.relation} == set(range(nx)) and {
            j for _, j in self.relation
        } == set(range(ny))


def distortion(relation: Iterable[tuple[int, int]], dX: np.ndarray, dY: np.ndarray) -> float:
    pairs = list(relation)
    if not pairs:
        return 0.0
    xs = np.array([p[0] for p in pairs])
    ys = np.array([p[1] for p in pairs])
    return float(np.abs(dX[np.ix_(xs, xs)] - dY[np.ix_(ys, ys)]).max())


def _find_correspondence(dX, dY, eta):
    """Backtracking search for a correspondence of distortion <= eta.

    Every correspondence contains one of the form graph(f) ∪ graph(g)^T, which has no
    larger distortion, so it suffices to search over such pairs (f, g).
    """
    nx, ny = len(dX), len(dY)
    ok = np.abs(dX[:, None, :, None] - dY[None, :, None, :]) <= eta  # ok[x, y, x', y']
    chosen: list[tuple[int, int]] = []

    def compatible(x, y):
        return ok[x, y, x, y] and all(ok[x, y, a, b] for a, b in chosen)

    def cover_y(covered):
        missing = [y for y in range(ny) if y not in covered]
        if not missing:
            return True
        y = missing[0]
        for x in range(nx):
            if compatible(x, y):
                chosen.append((x, y))
                if cover_y(covered | {y}):
                    return True
                chosen.pop()
        return False

    def assign_x(x, covered):
        if x == nx:
            return cover_y(covered)
        for y in range(ny):
            if compatible(x, y):
                chosen.append((x, y))
                if assign_x(x + 1, covered | {y}):
                    return True
                chosen.pop()
        return False

    if assign_x(0, frozenset()):
        return list(chosen)
    return None


def gh_distance_exact(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> tuple[float, Correspondence]:
    """Exact Gromov-Hausdorff distance between two tiny spaces, with an optimal correspondence."""
    if X.size > GH_MAX_POINTS or Y.size > GH_MAX_POINTS:
        raise TooLargeForExactGH(
            f"exact GH enumerates correspondences; sizes {X.size}, {Y.size} exceed {GH_MAX_POINTS}"
        )
    dX, dY = X.dist, Y.dist
    # the optimum distortion is one of these values
    candidates = np.unique(
        np.concatenate([[0.0], np.abs(dX[:, :, None, None] - dY[None, None, :, :]).ravel()])
    )
    lo, hi = 0, len(candidates) - 1
    best = _find_correspondence(dX, dY, candidates[hi])
    while lo < hi:
        mid = (lo + hi) // 2
        found = _find_correspondence(dX, dY, candidates[mid])
        if found is None:
            lo = mid + 1
        else:
            hi, best = mid, found
    rel = frozenset(best)
    # report the distortion of the witness itself so value and witness agree exactly
    return 0.5 * distortion(rel, dX, dY), Correspondence(rel)


def gh_distance_bruteforce(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> float:
    """Minimum over *all* relations; only usable for |X|*|Y| <= ~12. Test oracle."""
    cells = list(itertools.product(range(X.size), range(Y.size)))
    if len(cells) > 16:
        raise TooLargeForExactGH("brute force over all relations is limited to 16 cells")
    best = math.inf
    for mask in range(1, 1 << len(cells)):
        rel = [cells[k] for k in range(len(cells)) if mask >> k & 1]
        if Correspondence(frozenset(rel)).is_surjective(X.size, Y.size):
            best = min(best, distortion(rel, X.dist, Y.dist))
    return 0.5 * best


# --- CSV ingestion / emission -------------------------------------------------------


def fmt_real(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    # shortest string that round-trips exactly
    return repr(float(x))


def read_cloud_csv(path) -> PointCloud:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise ValueError("point cloud CSV must start with '# dim=<d> metric=<kind> param=<value>'")
        meta = dict(tok.split("=", 1) for tok in header.lstrip("#").split())
        rows = [list(map(float, line.split(","))) for line in fh if line.strip()]
    dim = int(meta["dim"])
    kind = meta.get("metric", EUCLIDEAN)
    param = meta.get("param")
    param = None if param in (None, "", "none", "None") else float(param)
    coords = np.array(rows, dtype=float).reshape(-1, dim)
    return PointCloud(coords, kind, param)


def write_cloud_csv(cloud: PointCloud, path) -> None:
    param = "none" if cloud.param is None else fmt_real(cloud.param)
    with open(path, "w") as fh:
        fh.write(f"# dim={cloud.dim} metric={cloud.metric_kind} param={param}\n")
        for row in cloud.coords:
            fh.write(",".join(fmt_real(v) for v in row) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    with open(path) as fh:
        rows = [list(map(float, line.split(","))) for line in fh if line.strip()]
    return np.array(rows, dtype=float)


def write_matrix_csv(dist, path) -> None:
    with open(path, "w") as fh:
        for row in np.asarray(dist):
            fh.write(",".join(fmt_real(v) for v in row) + "\n")


def random_space(n: int, rng: np.random.Generator, dim: int = 2) -> FiniteMetricSpace:
    """Euclidean space on ``n`` uniform points of the unit cube; used by randomized suites."""
    return build_space(PointCloud(rng.random((n, dim)), EUCLIDEAN))
