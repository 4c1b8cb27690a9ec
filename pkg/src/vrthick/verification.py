"""Randomized verification suites, one per checked claim.

Every suite takes a seed and a trial count and returns a :class:`CheckResult`. The
CLI's ``verify all`` and the acceptance tests both run these.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import sphere as sph
from .complexes import NON_STRICT, STRICT
from .errors import DegenerateProjection
from .metric import (
    GEODESIC_CIRCLE,
    GEODESIC_SPHERE,
    PointCloud,
    build_space,
    random_space,
)
from .persistence import CIRCLE_H3_LIMIT, circle_convergence, circle_ph_experiment, stability_check
from .thickening import (
    CECH,
    CRUSHINGS,
    VR,
    Thickening,
    VertexMap,
    contains,
    crushing_apply,
    distance_to_base,
    gh_thickening_witness,
    induced_map,
    linear_homotopy,
    random_point,
    skeleton_escape_witness,
    skeleton_membership,
)
from .transport import (
    BRUTE_MAX_SUPPORT,
    FiniteMeasure,
    dirac,
    dual_value,
    normalized,
    random_measure,
    verify_plan,
    wasserstein,
    wasserstein_brute,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name} ({self.seconds:.2f}s) {self.detail}"

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "seconds": round(self.seconds, 3),
                "detail": {k: _jsonable(v) for k, v in self.detail.items()}}


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


def _random_cap_measure(rng, center, cap_radius, k, radius=1.0) -> np.ndarray:
    """k points within geodesic distance cap_radius of center on the sphere."""
    dim = len(center)
    pts = []
    for _ in range(k):
        v = rng.standard_normal(dim)
        v -= (v @ center) * center / radius**2
        v *= cap_radius * rng.random() / np.linalg.norm(v)
        pts.append(sph.exp_map(center, v, radius))
    return np.array(pts)


def _unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


# --- suites --------------------------------------------------------------------------------


def check_dirac_isometry(seed=0, trials=1, n_points=20, tol=1e-12):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        space = random_space(n_points, rng, dim=3)
        for i in range(n_points):
            for j in range(n_points):
                w, _ = wasserstein(dirac(i), dirac(j), space)
                worst = max(worst, abs(w - space.dist[i, j]))
    return worst < tol, {"max_error": worst, "tol": tol}


def check_strong_duality(seed=0, trials=200, n_points=10, max_support=8, tol=1e-9):
    rng = np.random.default_rng(seed)
    worst_dual = worst_brute = 0.0
    brute_count = 0
    plans_ok = True
    for _ in range(trials):
        space = random_space(n_points, rng)
        mu = random_measure(rng, range(n_points), int(rng.integers(1, max_support + 1)))
        nu = random_measure(rng, range(n_points), int(rng.integers(1, max_support + 1)))
        primal, plan = wasserstein(mu, nu, space)
        plans_ok &= verify_plan(plan, mu, nu)
        pot, dual = dual_value(mu, nu, space)
        worst_dual = max(worst_dual, abs(primal - dual))
        if len(mu) + len(nu) <= BRUTE_MAX_SUPPORT:
            brute_count += 1
            worst_brute = max(worst_brute, abs(primal - wasserstein_brute(mu, nu, space)))
    ok = worst_dual < tol and worst_brute < tol and plans_ok
    return ok, {"max_primal_dual_gap": worst_dual, "max_primal_brute_gap": worst_brute,
                "brute_instances": brute_count, "plans_feasible": plans_ok}


def check_thickening_bound(seed=0, trials=1000, tol=1e-12):
    rng = np.random.default_rng(seed)
    worst_vr = -np.inf
    worst_cech = -np.inf
    for _ in range(trials):
        space = random_space(int(rng.integers(3, 13)), rng)
        r = float(rng.uniform(0.05, 1.0) * space.diameter())
        conv = STRICT if rng.random() < 0.5 else NON_STRICT
        th = Thickening(space, VR, r, conv)
        mu = random_point(th, rng, 6)
        worst_vr = max(worst_vr, distance_to_base(th, mu)[0] - r)
        thc = Thickening(space, CECH, r, conv)
        mu = random_point(thc, rng, 6)
        worst_cech = max(worst_cech, distance_to_base(thc, mu)[0] - 2 * r)
    return worst_vr <= tol and worst_cech <= tol, {
        "max_excess_over_r": worst_vr, "max_cech_excess_over_2r": worst_cech}


def check_lipschitz_propagation(seed=0, trials=100, tol=1e-9):
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(trials):
        X = random_space(int(rng.integers(3, 9)), rng)
        Y = random_space(int(rng.integers(2, 7)), rng)
        f = VertexMap(Y, tuple(int(v) for v in rng.integers(0, Y.size, X.size)))
        c = f.lipschitz_constant(X)
        target = Thickening(Y, VR, Y.diameter(), NON_STRICT)
        mu = random_measure(rng, range(X.size), int(rng.integers(1, X.size + 1)))
        nu = random_measure(rng, range(X.size), int(rng.integers(1, X.size + 1)))
        lhs = wasserstein(induced_map(f, mu, target), induced_map(f, nu, target), Y)[0]
        worst = max(worst, lhs - c * wasserstein(mu, nu, X)[0])
    return worst <= tol, {"max_violation": worst}


def check_homotopy_estimate(seed=0, trials=1000, tol=1e-9):
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(trials):
        space = random_space(int(rng.integers(2, 9)), rng)
        th = Thickening(space, VR, space.diameter(), NON_STRICT)
        pts = range(space.size)
        mu, nu, mu2, nu2 = (random_measure(rng, pts, int(rng.integers(1, space.size + 1))) for _ in range(4))
        t, t2 = rng.random(2)
        if rng.random() < 0.1:
            t2 = t
        lhs = wasserstein(linear_homotopy(th, mu, nu, t), linear_homotopy(th, mu2, nu2, t2), space)[0]
        W = lambda a, b: wasserstein(a, b, space)[0]
        rhs = max(W(mu, mu2), W(nu, nu2)) + abs(t - t2) * W(mu2, nu2)
        worst = max(worst, lhs - rhs)
    return worst <= tol, {"max_violation": worst}


def check_critical_scales(seed=0, trials=1, tol=1e-12):
    worst = 0.0
    for n in range(1, 6):
        V = sph.regular_simplex(n).vertices
        geo = max(sph.geodesic_distance(p, q) for p in V for q in V)
        euc = max(float(np.linalg.norm(p - q)) for p in V for q in V)
        worst = max(worst, abs(geo - sph.critical_scale(n, "geodesic")),
                    abs(euc - sph.critical_scale(n, "euclidean")))
    r1 = sph.critical_scale(1, "geodesic", circumference=1.0)
    return worst < tol and r1 == 1.0 / 3.0, {"max_error": worst, "circle_r1": r1}


def check_karcher(seed=0, trials=100, interp_tol=1e-8, grad_tol=1e-5):
    rng = np.random.default_rng(seed)
    cfg = sph.KarcherConfig.for_sphere(1.0)
    worst_interp = worst_grad = 0.0
    for dim in (3, 4):  # S^2 and S^3
        for _ in range(trials):
            a = _unit(rng, dim)
            gap = rng.uniform(0.01, 0.95) * cfg.rho
            v = rng.standard_normal(dim)
            v -= (v @ a) * a
            v *= gap / np.linalg.norm(v)
            b = sph.exp_map(a, v)
            t = rng.random()
            mu = sph.SphereMeasure(np.array([a, b]), [1 - t, t])
            got = sph.karcher_mean(mu, cfg).vec
            worst_interp = max(worst_interp, float(np.linalg.norm(got - sph.exp_map(a, t * v))))
    for _ in range(trials):
        dim = int(rng.choice([3, 4]))
        center = _unit(rng, dim)
        k = int(rng.integers(1, 6))
        mu = sph.SphereMeasure(_random_cap_measure(rng, center, 0.7, k), rng.dirichlet(np.ones(k)))
        x = sph.exp_map(center, 0.3 * _tangent(rng, center))
        g = sph.karcher_gradient(mu, x)
        for _ in range(3):
            u = _tangent(rng, x)
            h = 1e-5
            fd = (sph.karcher_objective(mu, sph.exp_map(x, h * u)) - sph.karcher_objective(mu, sph.exp_map(x, -h * u))) / (2 * h)
            scale = max(abs(fd), np.linalg.norm(g), 1e-12)
            worst_grad = max(worst_grad, abs(fd - g @ u) / scale)
    ok = worst_interp < interp_tol and worst_grad < grad_tol
    return ok, {"max_interpolation_error": worst_interp, "max_gradient_rel_error": worst_grad}


def _tangent(rng, x):
    v = rng.standard_normal(len(x))
    v -= (v @ x) * x / (x @ x)
    return v / np.linalg.norm(v)


def _measure_below_diameter(rng, limit, dim=3):
    """A random measure on S^{dim-1} with geodesic support diameter <= limit.

    Half the draws are jittered regular frames (the hard case, close to W), the rest are
    random caps.
    """
    while True:
        if rng.random() < 0.5:
            Q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
            V = sph.regular_simplex(dim - 1, Q).vertices
            V = V + rng.normal(scale=rng.uniform(0.005, 0.3), size=V.shape)
            V /= np.linalg.norm(V, axis=1, keepdims=True)
            keep = rng.random(len(V)) < 0.9
            pts = V[keep] if keep.any() else V[:1]
        else:
            k = int(rng.integers(1, 7))
            pts = _random_cap_measure(rng, _unit(rng, dim), rng.uniform(0.1, limit), k)
        mu = sph.SphereMeasure(pts, rng.dirichlet(np.ones(len(pts))))
        if sph.sphere_diameter(mu) <= limit:
            return mu


def check_pi_f_domain(seed=0, trials=10_000, margin=0.01, zero_tol=1e-12):
    rng = np.random.default_rng(seed)
    limit = sph.critical_scale(2, "geodesic") - margin
    failures = 0
    min_norm = np.inf
    for _ in range(trials):
        mu = _measure_below_diameter(rng, limit)
        min_norm = min(min_norm, float(np.linalg.norm(sph.project_linear(mu))))
        try:
            sph.pi_f(mu)
        except DegenerateProjection:
            failures += 1
    frame_norm = float(np.linalg.norm(sph.project_linear(sph.regular_simplex(2).uniform_measure())))
    ok = failures == 0 and frame_norm < zero_tol
    return ok, {"degenerate_projections": failures, "min_norm_f": min_norm, "frame_norm_f": frame_norm}


def check_hausmann_track(seed=0, trials=1000, steps=10, slack=1e-9):
    rng = np.random.default_rng(seed)
    cfg = sph.KarcherConfig.for_sphere(1.0)
    r = 0.5 * cfg.rho
    left = 0
    worst_reach = -np.inf
    for _ in range(trials):
        k = int(rng.integers(1, 7))
        center = _unit(rng, 3)
        while True:
            pts = _random_cap_measure(rng, center, r, k)
            space = build_space(PointCloud(pts, GEODESIC_SPHERE, 1.0))
            if space.diameter() <= r:
                break
        mu = normalized(range(k), rng.dirichlet(np.ones(k)))
        th = Thickening(space, VR, r, NON_STRICT, slack=slack)
        th2, path = sph.hausmann_track(th, mu, cfg, steps)
        g = path[-1].support[0]
        worst_reach = max(worst_reach, float(th2.space.dist[g, list(mu.support)].max()) - space.diameter())
        left += sum(not contains(th2, nu) for nu in path)
    return left == 0, {"steps_outside": left, "scale": r,
                       "max_center_reach_minus_diameter": worst_reach}


def check_circle_ph(seed=0, trials=1, field=2):
    _, report = circle_ph_experiment(20, 3, field)
    exact = report["h3"] == [[0.35, 0.4]]
    conv = circle_convergence((12, 16, 20), field)
    return exact and conv["non_increasing"], {"c20_h3": report["h3"], "c20_h1": report["h1"],
                                              "limit": list(CIRCLE_H3_LIMIT), **conv}


def check_stability(seed=0, trials=50, tol=1e-9, field=2):
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(trials):
        X = random_space(int(rng.integers(2, 7)), rng)
        Y = random_space(int(rng.integers(2, 7)), rng)
        for dim in (0, 1):
            rep = stability_check(X, Y, dim, field, tol)
            worst = max(worst, rep["bottleneck"] - rep["two_gh"])
    return worst <= tol, {"max_violation": worst}


def check_skeleton_escape(seed=0, trials=100, epsilons=(1e-2, 1e-4)):
    rng = np.random.default_rng(seed)
    cloud = PointCloud(np.sort(rng.random(60)), GEODESIC_CIRCLE, 1.0)
    base = build_space(cloud)
    bad = 0
    worst_ratio = 0.0
    for _ in range(trials):
        r = float(rng.uniform(0.05, 0.45))
        th = Thickening(base, VR, r, STRICT)
        n = int(rng.integers(0, 4))
        mu = random_point(th, rng, n + 1)
        assert skeleton_membership(th, mu, n)
        for eps in epsilons:
            th2, mu2 = skeleton_escape_witness(th, mu, n, eps, seed=int(rng.integers(1 << 31)))
            w = wasserstein(mu, mu2, th2.space)[0]
            worst_ratio = max(worst_ratio, w / eps)
            if not (w < eps and contains(th2, mu2) and len(mu2) == n + 2
                    and not skeleton_membership(th2, mu2, n)):
                bad += 1
    return bad == 0, {"failures": bad, "max_distance_over_eps": worst_ratio}


def check_crushing(seed=0, trials=1000, tol=1e-9):
    rng = np.random.default_rng(seed)
    detail = {}
    ok = True
    for name, fam in CRUSHINGS.items():
        worst = -np.inf
        for _ in range(trials):
            k1, k2 = rng.integers(1, 5, 2)
            space = fam.space(fam.sampler(rng, int(k1 + k2)))
            mu = normalized(range(k1), rng.dirichlet(np.ones(k1)))
            mu2 = normalized(range(k1, k1 + k2), rng.dirichlet(np.ones(k2)))
            t, t2 = rng.random(2)
            base_w = wasserstein(mu, mu2, space)[0]
            sp, a = crushing_apply(fam, space, mu, t)
            sp, b = crushing_apply(fam, sp, mu2, t2)
            worst = max(worst, wasserstein(a, b, sp)[0] - base_w - fam.speed * abs(t - t2))
        detail[name] = {"speed": fam.speed, "max_violation": worst}
        ok &= worst <= tol
    return ok, detail


def check_gh_thickening(seed=0, trials=500, tol=1e-9):
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(trials):
        ambient = random_space(int(rng.integers(4, 13)), rng)
        m = ambient.size
        X = sorted(rng.choice(m, int(rng.integers(1, m)), replace=False).tolist())
        Y = sorted(rng.choice(m, int(rng.integers(1, m)), replace=False).tolist())
        r = float(rng.uniform(0.05, 1.0) * ambient.diameter())
        conv = STRICT if rng.random() < 0.5 else NON_STRICT
        for A, B in ((X, Y), (Y, X)):
            local = random_point(Thickening(ambient.subspace(A), VR, r, conv), rng, 5)
            mu = FiniteMeasure(tuple(A[i] for i in local.support), local.weights)
            w, _, bound = gh_thickening_witness(ambient, A, B, r, mu, conv)
            worst = max(worst, w - bound)
    return worst <= tol, {"max_violation": worst}


def check_betti_table(seed=0, trials=1):
    got = {
        "n1": sph.predicted_betti(1),
        "n2": sph.predicted_betti(2),
        "n2_f2": sph.predicted_betti(2, 2),
        "n2_f3": sph.predicted_betti(2, 3),
        "n1_f2": sph.predicted_betti(1, 2),
    }
    ok = (got["n1"] == {3: "Z"} and got["n2"] == {4: "Z/3", 6: "Z"}
          and got["n2_f2"] == {6: 1} and got["n2_f3"] == {4: 1, 5: 1, 6: 1}
          and got["n1_f2"] == {3: 1})
    return ok, got


SUITES: dict[str, tuple[Callable, int]] = {
    # name: (suite, default trials)
    "dirac-isometry": (check_dirac_isometry, 1),
    "strong-duality": (check_strong_duality, 200),
    "thickening-bound": (check_thickening_bound, 1000),
    "lipschitz-propagation": (check_lipschitz_propagation, 100),
    "homotopy-estimate": (check_homotopy_estimate, 1000),
    "critical-scales": (check_critical_scales, 1),
    "karcher-mean": (check_karcher, 100),
    "pi-f-domain": (check_pi_f_domain, 10_000),
    "hausmann-track": (check_hausmann_track, 1000),
    "circle-ph": (check_circle_ph, 1),
    "stability": (check_stability, 50),
    "skeleton-escape": (check_skeleton_escape, 100),
    "crushing-estimate": (check_crushing, 1000),
    "gh-thickening-bound": (check_gh_thickening, 500),
    "betti-table": (check_betti_table, 1),
}


def run_suite(name: str, seed: int = 0, trials: int | None = None) -> CheckResult:
    fn, default = SUITES[name]
    start = time.perf_counter()
    passed, detail = fn(seed=seed, trials=default if trials is None else trials)
    return CheckResult(name, bool(passed), detail, time.perf_counter() - start)


def run_all(seed: int = 0, trials: int | None = None) -> list:
    return [run_suite(name, seed, trials) for name in SUITES]
