"""Karcher means on spheres, the linear and radial projections, and the critical scales r_n."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .complexes import NON_STRICT, STRICT
from .errors import (
    AntipodalPoint,
    DegenerateProjection,
    NoConvergence,
    NotOrthogonal,
    StepLeftThickening,
    SupportTooSpread,
    UnsupportedDimension,
    ZeroVector,
)
from .metric import GEODESIC_SPHERE, FiniteMetricSpace
from .thickening import Thickening, contains
from .transport import FiniteMeasure, convex_combine, dirac

ANTIPODAL_TOL = 1e-12
ZERO_TOL = 1e-12
W_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SpherePoint:
    vec: np.ndarray
    radius: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.vec, dtype=float)
        if abs(np.linalg.norm(v) - self.radius) > 1e-12 * max(1.0, self.radius):
            raise ValueError(f"norm {np.linalg.norm(v)!r} differs from radius {self.radius!r}")
        object.__setattr__(self, "vec", v)

    @property
    def sphere_dim(self) -> int:
        return len(self.vec) - 1


@dataclass(frozen=True, eq=False)
class SphereMeasure:
    """sum_i w_i delta_{x_i} with the x_i given as rows of ``points`` on a sphere."""

    points: np.ndarray
    weights: np.ndarray
    radius: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "points", np.atleast_2d(np.asarray(self.points, dtype=float)))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float).reshape(-1))

    @classmethod
    def from_measure(cls, space: FiniteMetricSpace, mu: FiniteMeasure) -> "SphereMeasure":
        cloud = space.cloud
        if cloud is None or cloud.metric_kind != GEODESIC_SPHERE:
            raise ValueError("measure must live on a geodesic-sphere point cloud")
        return cls(cloud.coords[list(mu.support)], mu.weights, cloud.param)

    @property
    def sphere_dim(self) -> int:
        return self.points.shape[1] - 1


@dataclass(frozen=True)
class KarcherConfig:
    """Convexity radius, curvature bounds and stopping rule for Karcher-mean descent."""

    rho: float
    curvature_bounds: tuple
    tol: float = 1e-10
    max_iter: int = 10_000

    def __post_init__(self):
        delta, Delta = self.curvature_bounds
        if self.rho <= 0 or self.tol <= 0 or delta > Delta:
            raise ValueError("invalid Karcher configuration")
        if Delta > 0 and not 2 * self.rho < 0.5 * math.pi / math.sqrt(Delta):
            raise ValueError("convexity radius too large for the curvature bound: need 2 rho < (pi/2) Delta^(-1/2)")

    @classmethod
    def for_sphere(cls, radius: float = 1.0, rho: Optional[float] = None, **kw) -> "KarcherConfig":
        k = 1.0 / radius**2
        if rho is None:
            rho = 0.99 * (math.pi / 4) * radius
        return cls(rho, (k, k), **kw)


# --- geometry on the radius-R sphere ---------------------------------------------------


def geodesic_distance(x, y, radius: float = 1.0) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(radius * 2.0 * math.atan2(np.linalg.norm(x - y), np.linalg.norm(x + y)))


def log_map(x, y, radius: float = 1.0) -> np.ndarray:
    """Tangent vector at x pointing along the shortest geodesic to y, of length d(x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u, w = x / radius, y / radius
    theta = 2.0 * math.atan2(np.linalg.norm(u - w), np.linalg.norm(u + w))
    if math.pi - theta < ANTIPODAL_TOL:
        raise AntipodalPoint("log map undefined at the antipode")
    perp = w - (u @ w) * u
    norm = np.linalg.norm(perp)
    if norm == 0.0 or theta == 0.0:
        return np.zeros_like(x)
    return radius * theta * perp / norm


def exp_map(x, v, radius: float = 1.0) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    u = x / radius
    t = np.linalg.norm(v) / radius
    if t == 0.0:
        return x.copy()
    out = radius * (math.cos(t) * u + math.sin(t) * v / (radius * t))
    return radius * out / np.linalg.norm(out)


def karcher_objective(mu: SphereMeasure, x) -> float:
    """P(x) = 1/2 sum_i w_i d(x, x_i)^2."""
    total = 0.0
    for p, w in zip(mu.points, mu.weights):
        d = geodesic_distance(x, p, mu.radius)
        if mu.radius * math.pi - d < ANTIPODAL_TOL * mu.radius:
            raise AntipodalPoint("a support point is antipodal to x")
        total += w * d * d
    return 0.5 * total


def karcher_gradient(mu: SphereMeasure, x) -> np.ndarray:
    return -sum(w * log_map(x, p, mu.radius) for p, w in zip(mu.points, mu.weights))


def _enclosing_center(mu: SphereMeasure, rho: float):
    """A centre whose open rho-ball holds the support, or None.

    Candidates are the support points and the normalised Euclidean mean; this is a
    sufficient test, not the minimal enclosing ball.
    """
    cands = list(mu.points)
    m = mu.weights @ mu.points
    if np.linalg.norm(m) > 0:
        cands.append(mu.radius * m / np.linalg.norm(m))
    for c in cands:
        if max(geodesic_distance(c, p, mu.radius) for p in mu.points) < rho:
            return c
    return None


def karcher_mean(mu: SphereMeasure, config: KarcherConfig) -> SpherePoint:
    """Riemannian centre of mass by the fixed-point iteration x <- exp_x(sum_i w_i log_x x_i)."""
    if len(mu.points) == 1:
        return SpherePoint(mu.points[0], mu.radius)
    start = _enclosing_center(mu, config.rho)
    if start is None:
        raise SupportTooSpread(f"support does not fit in an open ball of radius {config.rho!r}")
    x = start
    for _ in range(config.max_iter):
        step = -karcher_gradient(mu, x)
        if np.linalg.norm(step) < config.tol:
            return SpherePoint(x, mu.radius)
        x = exp_map(x, step, mu.radius)
    raise NoConvergence(f"gradient norm still {np.linalg.norm(step)!r} after {config.max_iter} steps")


def karcher_variation_ratio(mu: SphereMeasure, nu: SphereMeasure, config: KarcherConfig) -> float:
    """d(C_mu, C_nu) divided by the product-coupling cost of (mu, nu)."""
    a = karcher_mean(mu, config).vec
    b = karcher_mean(nu, config).vec
    num = geodesic_distance(a, b, mu.radius)
    den = sum(wi * wj * geodesic_distance(p, q, mu.radius)
              for p, wi in zip(mu.points, mu.weights)
              for q, wj in zip(nu.points, nu.weights))
    if den == 0.0:
        return 0.0
    return num / den


# --- regular simplices and the critical scale ---------------------------------------------


@dataclass(frozen=True, eq=False)
class RegularSimplexFrame:
    vertices: np.ndarray  # (n + 2, n + 1)
    radius: float = 1.0

    @property
    def sphere_dim(self) -> int:
        return self.vertices.shape[1] - 1

    def regularity_error(self) -> float:
        n = self.sphere_dim
        G = self.vertices @ self.vertices.T
        off = G[~np.eye(len(G), dtype=bool)]
        return float(np.abs(off + self.radius**2 / (n + 1)).max())

    def uniform_measure(self) -> SphereMeasure:
        k = len(self.vertices)
        return SphereMeasure(self.vertices, np.full(k, 1.0 / k), self.radius)


def regular_simplex(n: int, rotation=None, radius: float = 1.0) -> RegularSimplexFrame:
    """n + 2 vertices of a regular (n+1)-simplex inscribed in S^n of the given radius.

    The standard basis of R^{n+2}, centred, is expressed in the Helmert basis of the
    hyperplane sum = 0 and normalised.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    m = n + 2
    H = np.zeros((n + 1, m))
    for k in range(1, m):
        H[k - 1, :k] = 1.0
        H[k - 1, k] = -k
        H[k - 1] /= math.sqrt(k * (k + 1))
    centred = np.eye(m) - 1.0 / m
    V = centred @ H.T
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    if rotation is not None:
        Q = np.asarray(rotation, dtype=float)
        if Q.shape != (n + 1, n + 1) or np.abs(Q.T @ Q - np.eye(n + 1)).max() > 1e-10:
            raise NotOrthogonal("rotation must be an orthogonal (n+1)x(n+1) matrix")
        V = V @ Q.T
    return RegularSimplexFrame(radius * V, radius)


def critical_scale(n: int, metric_kind: str = "geodesic", radius: Optional[float] = None,
                   circumference: Optional[float] = None) -> float:
    """Diameter r_n of a regular (n+1)-simplex inscribed in S^n.

    Size is given by ``radius`` or, for geodesic circles, ``circumference``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if circumference is not None:
        if n != 1 or metric_kind != "geodesic":
            raise ValueError("circumference only describes the geodesic circle (n = 1)")
        # arccos(-1/2) / (2 pi) = 1/3
        return circumference / 3.0
    R = 1.0 if radius is None else radius
    if metric_kind == "geodesic":
        return R * math.acos(-1.0 / (n + 1))
    if metric_kind == "euclidean":
        return R * math.sqrt(2.0 * (n + 2) / (n + 1))
    raise ValueError(f"unknown metric kind {metric_kind!r}")


# --- projections ------------------------------------------------------------------------


def project_linear(mu: SphereMeasure) -> np.ndarray:
    """Euclidean convex combination sum_i w_i x_i in R^{n+1}."""
    return mu.weights @ mu.points


def radial_project(v, radius: float = 1.0) -> SpherePoint:
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm <= ZERO_TOL * radius:
        raise ZeroVector("cannot radially project (numerically) the zero vector")
    return SpherePoint(radius * v / norm, radius)


def sphere_diameter(mu: SphereMeasure) -> float:
    P = mu.points
    if len(P) < 2:
        return 0.0
    return max(geodesic_distance(p, q, mu.radius) for i, p in enumerate(P) for q in P[i + 1:])


def in_W(mu: SphereMeasure, tolerance: float = W_TOL) -> bool:
    """True when mu is an interior point of an inscribed regular (n+1)-simplex."""
    n = mu.sphere_dim
    if len(mu.points) != n + 2 or np.any(mu.weights <= 0):
        return False
    G = mu.points @ mu.points.T
    off = G[~np.eye(len(G), dtype=bool)]
    return bool(np.all(np.abs(off + mu.radius**2 / (n + 1)) <= tolerance))


def pi_f_domain(mu: SphereMeasure, r: float, convention: str = NON_STRICT) -> bool:
    """Whether mu lies where the projection is claimed to be defined.

    That is VR^m(S^n; r) with r < r_n, or r = r_n with the strict convention, or
    r = r_n non-strict away from W.
    """
    rn = critical_scale(mu.sphere_dim, "geodesic", mu.radius)
    diam = sphere_diameter(mu)
    if not (diam < r if convention == STRICT else diam <= r):
        return False
    if r < rn or (r == rn and convention == STRICT):
        return True
    return r == rn and not in_W(mu)


def pi_f(mu: SphereMeasure) -> SpherePoint:
    """Radial projection of the linear projection, pi(f(mu))."""
    try:
        return radial_project(project_linear(mu), mu.radius)
    except ZeroVector as exc:
        raise DegenerateProjection("f(mu) = 0: mu is in the degenerate locus") from exc


# --- the homotopy through the centre of mass ------------------------------------------


def hausmann_track(th: Thickening, mu: FiniteMeasure, config: KarcherConfig,
                   steps: int = 10) -> tuple[Thickening, list]:
    """Discrete path H(mu, k/steps) = (1 - k/steps) mu + (k/steps) delta_g(mu).

    Returns the thickening over the space enlarged by g(mu) and the list of measures.
    Raises StepLeftThickening if any step fails the membership test.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    g = karcher_mean(SphereMeasure.from_measure(th.space, mu), config)
    bigger, (gi,) = th.space.extend(g.vec[None, :])
    th2 = th.with_space(bigger)
    target = dirac(gi)
    path = []
    for k in range(steps + 1):
        nu = convex_combine(mu, target, k / steps)
        if not contains(th2, nu):
            raise StepLeftThickening(f"step {k} with support {nu.support} left the thickening")
        path.append(nu)
    return th2, path


# --- the predicted homology at the critical scale -----------------------------------------

_INTEGRAL_TABLE = {
    # Sigma^2 SO(2)/A_3 = S^3
    1: {3: "Z"},
    # Sigma^3 SO(3)/A_4: the quotient is a closed orientable 3-manifold with H_1 = Z/3
    2: {4: "Z/3", 6: "Z"},
}


def _group_betti(group: str, p: int) -> tuple[int, int]:
    """(free rank + p-torsion count, p-torsion count) of a cyclic group descriptor."""
    if group == "Z":
        return 1, 0
    order = int(group.split("/")[1])
    t = 1 if order % p == 0 else 0
    return t, t


def predicted_betti(n: int, field: Optional[int] = None) -> dict:
    """Reduced homology of VR^m_<=(S^n; r_n) for n = 1, 2.

    With ``field=None`` the integral groups are returned as descriptors. With a prime
    ``field`` the reduced Betti numbers over F_p follow from universal coefficients:
    b_k = rank H_k + t_p(H_k) + t_p(H_{k-1}).
    """
    if n not in _INTEGRAL_TABLE:
        raise UnsupportedDimension(f"the Betti table covers n = 1, 2 only (got {n})")
    table = _INTEGRAL_TABLE[n]
    if field is None:
        return dict(table)
    out: dict[int, int] = {}
    for k, group in table.items():
        own, tors = _group_betti(group, field)
        if own:
            out[k] = out.get(k, 0) + own
        if tors:
            out[k + 1] = out.get(k + 1, 0) + tors
    return dict(sorted(out.items()))
