"""Metric thickenings K^m: finitely supported measures on simplices, with the W1 metric.

A thickening is never materialised. It is a membership predicate on
:class:`~vrthick.transport.FiniteMeasure` plus the Wasserstein distance of the
underlying space. Constructions that need new points (skeleton escape, crushings,
centres of mass) work on cloud-backed spaces and return an enlarged space in which
all previous indices remain valid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .complexes import NON_STRICT, STRICT, within
from .errors import (
    IsolatedPoint,
    NotInThickening,
    SimplexNotPreserved,
    UnionNotASimplex,
)
from .metric import (
    EUCLIDEAN,
    GEODESIC_CIRCLE,
    GEODESIC_SPHERE,
    L1,
    FiniteMetricSpace,
    PointCloud,
    build_space,
    hausdorff_distance,
)
from .transport import FiniteMeasure, convex_combine, dirac, normalized, wasserstein

VR = "vr"
CECH = "cech"


@dataclass(frozen=True, eq=False)
class Thickening:
    """VR^m(X; r) or Čech^m(X; r) over a finite (possibly cloud-backed) space.

    ``slack`` loosens the membership test by an absolute amount; it is zero unless a
    caller deliberately compares floating-point constructions against the scale.
    """

    space: FiniteMetricSpace
    kind: str = VR
    scale: float = 1.0
    convention: str = NON_STRICT
    slack: float = 0.0

    def __post_init__(self):
        if self.kind not in (VR, CECH):
            raise ValueError(f"unknown thickening kind {self.kind!r}")
        if self.convention not in (STRICT, NON_STRICT):
            raise ValueError(f"unknown convention {self.convention!r}")

    def with_space(self, space: FiniteMetricSpace) -> "Thickening":
        return replace(self, space=space)

    def support_value(self, support) -> float:
        """Diameter (VR) or minimal witness radius (Čech) of a vertex set."""
        idx = list(support)
        if self.kind == VR:
            return self.space.diameter(idx)
        return float(self.space.dist[:, idx].max(axis=1).min())

    def admits(self, support) -> bool:
        return bool(within(self.support_value(support) - self.slack, self.scale, self.convention))

    def to_json(self, space_ref: str = "") -> dict:
        return {"kind": self.kind, "scale": self.scale, "convention": self.convention,
                "space_ref": space_ref}


def contains(th: Thickening, mu: FiniteMeasure) -> bool:
    if mu.support[-1] >= th.space.size:
        return False
    return th.admits(mu.support)


def _require(th: Thickening, *measures: FiniteMeasure) -> None:
    for mu in measures:
        if not contains(th, mu):
            raise NotInThickening(f"{mu!r} is not a point of the thickening")


def distance(th: Thickening, mu: FiniteMeasure, nu: FiniteMeasure) -> float:
    _require(th, mu, nu)
    return wasserstein(mu, nu, th.space)[0]


def distance_to_base(th: Thickening, mu: FiniteMeasure) -> tuple[float, int]:
    """min_x W(mu, delta_x) and a minimising base point.

    Transport to a Dirac mass has a single coupling, so W(mu, delta_x) is just the
    mu-average of d(., x).
    """
    _require(th, mu)
    costs = mu.weights @ th.space.dist[list(mu.support), :]
    x = int(np.argmin(costs))
    return float(costs[x]), x


@dataclass(frozen=True, eq=False)
class VertexMap:
    """A map between vertex sets, ``image[i]`` being the target index of source point i."""

    target: FiniteMetricSpace
    image: tuple

    def lipschitz_constant(self, source: FiniteMetricSpace) -> float:
        img = np.asarray(self.image)
        d_src = source.dist
        d_tgt = self.target.dist[np.ix_(img, img)]
        mask = d_src > 0
        if not mask.any():
            return 0.0
        return float((d_tgt[mask] / d_src[mask]).max())


def induced_map(f: VertexMap, mu: FiniteMeasure, target: Optional[Thickening] = None) -> FiniteMeasure:
    """Pushforward sum_i w_i delta_{f(x_i)}; coinciding images merge their weights."""
    image = normalized([f.image[i] for i in mu.support], mu.weights)
    if target is not None and not contains(target, image):
        raise SimplexNotPreserved(f"image support {image.support} is not a simplex of the target")
    return image


def linear_homotopy(th: Thickening, mu: FiniteMeasure, nu: FiniteMeasure, t: float) -> FiniteMeasure:
    """(1 - t) mu + t nu, defined only when the union of the supports is a simplex."""
    union = sorted(set(mu.support) | set(nu.support))
    if union[-1] >= th.space.size or not th.admits(union):
        raise UnionNotASimplex(f"supports {mu.support} and {nu.support} do not span a simplex")
    return convex_combine(mu, nu, t)


def skeleton_membership(th: Thickening, mu: FiniteMeasure, n: int) -> bool:
    return len(mu.support) <= n + 1


# --- skeleton escape -----------------------------------------------------------------


def _ray_points(cloud: PointCloud, x0: np.ndarray, radii, toward: Optional[np.ndarray], rng) -> np.ndarray:
    """Points at the given distances from ``x0`` along one geodesic ray."""
    kind = cloud.metric_kind
    radii = np.asarray(radii, dtype=float)
    if kind == GEODESIC_CIRCLE:
        return np.mod(x0[0] + radii, cloud.param).reshape(-1, 1)
    if kind in (EUCLIDEAN, L1):
        if toward is not None and np.linalg.norm(toward - x0) > 0:
            u = toward - x0
        else:
            u = np.zeros_like(x0)
            u[0] = 1.0
        u = u / (np.abs(u).sum() if kind == L1 else np.linalg.norm(u))
        return x0[None, :] + radii[:, None] * u[None, :]
    if kind == GEODESIC_SPHERE:
        R = cloud.param
        p = x0 / R
        v = rng.standard_normal(len(p))
        v -= (v @ p) * p
        v /= np.linalg.norm(v)
        ang = radii / R
        return R * (np.cos(ang)[:, None] * p[None, :] + np.sin(ang)[:, None] * v[None, :])
    raise ValueError(f"cannot generate points for metric {kind!r}")


def skeleton_escape_witness(th: Thickening, mu: FiniteMeasure, n: int, eps: float,
                            seed: int = 0) -> tuple[Thickening, FiniteMeasure]:
    """A point of the thickening within ``eps`` of ``mu`` that is outside the n-skeleton.

    The mass at the first support point x_0 is split evenly over new points close to
    x_0, as many as needed for the support to have exactly n + 2 points. Existing points of the space are used when enough of them are close
    enough; otherwise a cloud-backed space generates them. Returns the (possibly
    enlarged) thickening together with the new measure.
    """
    _require(th, mu)
    if th.kind != VR:
        raise ValueError("skeleton escape is implemented for Vietoris-Rips thickenings")
    if eps <= 0:
        raise ValueError("eps must be positive")
    space = th.space
    x0 = mu.support[0]
    lam0 = float(mu.weights[0])
    diam = space.diameter(mu.support)
    room = th.scale - diam
    budget = min(eps, room) if room > 0 else eps
    if len(mu) > n + 1:
        raise ValueError(f"mu has {len(mu)} support points and is not in the {n}-skeleton")
    count = n + 2 - (len(mu) - 1)
    others = set(mu.support[1:])

    def assemble(ys, sp):
        weights = [lam0 / count] * count + list(mu.weights[1:])
        return FiniteMeasure(tuple(ys) + tuple(mu.support[1:]), weights)

    # existing points first
    near = [y for y in np.argsort(space.dist[x0], kind="stable")
            if y != x0 and y not in others and space.dist[x0, y] < budget]
    if len(near) >= count:
        candidate = assemble([int(y) for y in near[:count]], space)
        if contains(th, candidate) and wasserstein(mu, candidate, space)[0] < eps:
            return th, candidate

    cloud = space.cloud
    if cloud is None:
        raise IsolatedPoint(f"fewer than {count} points of the space lie within {budget!r} of point {x0}")
    toward = None
    if room <= 0:
        if th.convention != NON_STRICT or cloud.metric_kind not in (EUCLIDEAN, L1) or len(mu) == 1:
            raise ValueError("no room to add points: support diameter equals the scale "
                             "and the space is not a convex Euclidean set")
        # inside the convex hull of the support no distance to a support point exceeds diam
        toward = cloud.coords[list(mu.support)].mean(axis=0)
        hull_reach = float(np.linalg.norm(toward - cloud.coords[x0]))
        if cloud.metric_kind == L1:
            hull_reach = float(np.abs(toward - cloud.coords[x0]).sum())
        budget = min(budget, hull_reach)
    rng = np.random.default_rng(seed)
    # strictly inside the budget, all distinct and away from the other support points
    radii = budget * np.arange(1, count + 1) / (count + 1)
    for _ in range(50):
        pts = _ray_points(cloud, cloud.coords[x0], radii, toward, rng)
        bigger, ys = space.extend(pts)
        if len(set(ys)) == count and not (set(ys) & others) and x0 not in ys:
            break
        radii = radii * (1 - 1e-3 * rng.random(count))
    else:
        raise IsolatedPoint("could not place distinct points near the first support point")
    new_th = th.with_space(bigger)
    return new_th, assemble(ys, bigger)


# --- crushings ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CrushingFamily:
    """F: X x [0, 1] -> X with F(., 1) = id, F(., 0) in A, and bounded speed ``speed``."""

    name: str
    metric_kind: str
    evaluator: Callable[[np.ndarray, float], np.ndarray]
    speed: float
    fixed_set: Callable[[np.ndarray], np.ndarray]
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    anchors: np.ndarray  # the points of A, for reference

    def __call__(self, coords, t: float) -> np.ndarray:
        return self.evaluator(np.atleast_2d(np.asarray(coords, dtype=float)), float(t))

    def space(self, coords) -> FiniteMetricSpace:
        return build_space(PointCloud(np.atleast_2d(coords), self.metric_kind))


def _rectangle_eval(P, t):
    out = P.copy()
    out[:, 0] = t * P[:, 0]
    return out


def _rectangle_sample(rng, k):
    return np.column_stack([rng.random(k), rng.integers(0, 2, k).astype(float)])


def _two_rect_eval(P, t):
    s, y, z = P[:, 0], P[:, 1], P[:, 2]
    upper = y > 0
    return np.column_stack([t * s, np.where(upper, 1 + 0.5 * t * s, 0.0), t * z])


def _two_rect_sample(rng, k):
    s = 2 * rng.random(k)
    z = rng.random(k)
    upper = rng.integers(0, 2, k).astype(bool)
    return np.column_stack([s, np.where(upper, 1 + 0.5 * s, 0.0), z])


def _rectangle_fixed(P):
    return P[:, 0] == 0


def _two_rect_fixed(P):
    return (P[:, 0] == 0) & (P[:, 2] == 0)


CRUSHINGS = {
    # [0,1] x {0,1} in the plane, crushed onto {(0,0), (0,1)}; speed max s = 1
    "rectangle": CrushingFamily(
        "rectangle", EUCLIDEAN, _rectangle_eval, 1.0, _rectangle_fixed, _rectangle_sample,
        np.array([[0.0, 0.0], [0.0, 1.0]]),
    ),
    # two non-parallel rectangles in (R^3, l1) crushed onto {(0,0,0), (0,1,0)};
    # a point (s, 1 + s/2, z) moves at l1-speed s + s/2 + z <= 4
    "two_rectangles_l1": CrushingFamily(
        "two_rectangles_l1", L1, _two_rect_eval, 4.0, _two_rect_fixed, _two_rect_sample,
        np.array([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
    ),
}


def crushing_apply(family: CrushingFamily, space: FiniteMetricSpace, mu: FiniteMeasure,
                   t: float) -> tuple[FiniteMetricSpace, FiniteMeasure]:
    """Pushforward of ``mu`` by f_t; returns the enlarged space and the image measure."""
    if space.cloud is None:
        raise ValueError("crushings act on coordinates; the space must be cloud-backed")
    coords = space.cloud.coords[list(mu.support)]
    bigger, idx = space.extend(family(coords, t))
    return bigger, normalized(idx, mu.weights)


# --- worked examples ---------------------------------------------------------------------


def not_continuous_example(N: int) -> dict:
    """The induced map of a merely continuous vertex map need not be continuous.

    X = {(0,0)} ∪ {(1/n, 0)} ∪ {(1/n, 1)} for n <= N and f = 0 on the axis, n^2 at
    (1/n, 1). The measures mu_n = (1 - 1/n) delta_(1/n,0) + (1/n) delta_(1/n,1) tend
    to delta_(0,0), while their images have W-distance |n - m| >= 1 from each other.
    """
    pts = [(0.0, 0.0)] + [(1.0 / n, 0.0) for n in range(1, N + 1)] + [(1.0 / n, 1.0) for n in range(1, N + 1)]
    values = [0.0] + [0.0] * N + [float(n * n) for n in range(1, N + 1)]
    X = build_space(PointCloud(np.array(pts), EUCLIDEAN))
    uniq = sorted(set(values))
    line = build_space(PointCloud(np.array(uniq), EUCLIDEAN))
    f = VertexMap(line, tuple(uniq.index(v) for v in values))
    origin = dirac(0)
    to_origin, images = [], []
    for n in range(2, N + 1):
        mu_n = FiniteMeasure((n, N + n), [(n - 1) / n, 1.0 / n])
        to_origin.append(wasserstein(mu_n, origin, X)[0])
        images.append(induced_map(f, mu_n))
    gaps = [wasserstein(a, b, line)[0] for a, b in zip(images, images[1:])]
    return {"distance_to_origin": to_origin, "image_gaps": gaps}


def gh_thickening_witness(ambient: FiniteMetricSpace, X, Y, r: float, mu: FiniteMeasure,
                          convention: str = NON_STRICT) -> tuple[float, FiniteMeasure, float]:
    """Closest candidate point of VR^m(Y; r) to a point ``mu`` of VR^m(X; r).

    Candidates are every Dirac mass on Y and the nearest-point transfer
    sum_i w_i delta_{y_i} when it is itself in the thickening of Y. Returns the distance,
    the witness, and the bound r + d_H(X, Y).
    """
    X, Y = list(X), list(Y)
    th_y = Thickening(ambient, VR, r, convention)
    nearest = [Y[int(np.argmin(ambient.dist[x, Y]))] for x in mu.support]
    candidates = [dirac(y) for y in Y]
    transfer = normalized(nearest, mu.weights)
    if contains(th_y, transfer):
        candidates.append(transfer)
    best, witness = math.inf, None
    for nu in candidates:
        w = wasserstein(mu, nu, ambient)[0]
        if w < best:
            best, witness = w, nu
    return best, witness, r + hausdorff_distance(X, Y, ambient)


def random_point(th: Thickening, rng: np.random.Generator, max_size: int = 5) -> FiniteMeasure:
    """A random point of the thickening: a random simplex with Dirichlet(1) weights."""
    n = th.space.size
    size = int(rng.integers(1, max_size + 1))
    if th.kind == VR:
        chosen = [int(rng.integers(n))]
        if not th.admits(chosen):
            raise NotInThickening("no vertex is a simplex at this scale")
        while len(chosen) < size:
            cands = [v for v in range(n) if v not in chosen and th.admits(chosen + [v])]
            if not cands:
                break
            chosen.append(int(rng.choice(cands)))
    else:
        w = int(rng.integers(n))
        ball = np.nonzero(within(th.space.dist[w] - th.slack, th.scale, th.convention))[0]
        if len(ball) == 0:
            raise NotInThickening("empty witness ball")
        chosen = rng.choice(ball, size=min(size, len(ball)), replace=False).tolist()
    return normalized(chosen, rng.dirichlet(np.ones(len(chosen))))
