import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vrthick.errors import (
    AntipodalPoint, DegenerateProjection, NotOrthogonal, SupportTooSpread, UnsupportedDimension, ZeroVector,
)
from vrthick.metric import GEODESIC_SPHERE, PointCloud, build_space
from vrthick.sphere import (
    KarcherConfig, SphereMeasure, critical_scale, exp_map, geodesic_distance, hausmann_track, in_W,
    karcher_gradient, karcher_mean, karcher_objective, karcher_variation_ratio, log_map, pi_f, pi_f_domain,
    predicted_betti, project_linear, radial_project, regular_simplex,
)
from vrthick.thickening import VR, Thickening
from vrthick.transport import dirac, measure

CFG = KarcherConfig.for_sphere(1.0)


def unit(v):
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


def frame_diameter(frame):
    V = frame.vertices
    return max(geodesic_distance(p, q, frame.radius) for i, p in enumerate(V) for q in V[i + 1:])


def test_critical_scale_examples():
    assert critical_scale(1, "geodesic", circumference=1.0) == 1 / 3
    assert critical_scale(1, "euclidean", radius=1.0) == pytest.approx(math.sqrt(3), abs=1e-15)


@pytest.mark.parametrize("n", range(1, 6))
@pytest.mark.parametrize("R", [1.0, 2.5])
def test_critical_scale_matches_frame(n, R):
    frame = regular_simplex(n, radius=R)
    assert frame.regularity_error() < 1e-12
    V = frame.vertices
    euclid = max(np.linalg.norm(p - q) for p in V for q in V)
    assert critical_scale(n, "euclidean", R) == pytest.approx(euclid, abs=1e-12)
    assert critical_scale(n, "geodesic", R) == pytest.approx(frame_diameter(frame), abs=1e-12)


def test_regular_simplex_rotation():
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((3, 3)))
    frame = regular_simplex(2, Q)
    assert frame.regularity_error() < 1e-12
    with pytest.raises(NotOrthogonal):
        regular_simplex(2, 2 * np.eye(3))
    tri = regular_simplex(1).vertices
    assert np.allclose(np.linalg.norm(tri, axis=1), 1) and np.allclose(tri.sum(axis=0), 0)


def test_objective_and_gradient_basics():
    x, y = unit([1, 0, 0]), unit([1, 1, 0])
    mu = SphereMeasure(y[None, :], [1.0])
    assert karcher_objective(mu, x) == pytest.approx(0.5 * (math.pi / 4) ** 2)
    assert karcher_objective(mu, y) == 0
    assert np.allclose(karcher_gradient(mu, y), 0)
    a, b = unit([1, 0.2, 0]), unit([1, -0.2, 0])
    mid = unit(a + b)
    assert np.linalg.norm(karcher_gradient(SphereMeasure(np.array([a, b]), [0.5, 0.5]), mid)) < 1e-10
    with pytest.raises(AntipodalPoint):
        karcher_objective(mu, -y)


def test_log_exp_inverse():
    rng = np.random.default_rng(1)
    for _ in range(20):
        x, y = unit(rng.standard_normal(4)), unit(rng.standard_normal(4))
        assert np.allclose(exp_map(x, log_map(x, y)), y, atol=1e-12)


def test_karcher_dirac_and_interpolation():
    x = unit([0.3, -0.2, 0.9])
    assert np.allclose(karcher_mean(SphereMeasure(x[None, :], [1.0]), CFG).vec, x)
    a, b = unit([1, 0, 0]), unit([1, 0.6, 0.2])
    for t in (0.1, 0.5, 0.8):
        g = karcher_mean(SphereMeasure(np.array([a, b]), [1 - t, t]), CFG)
        assert np.allclose(g.vec, exp_map(a, t * log_map(a, b)), atol=1e-8)


def test_karcher_symmetric_triangle():
    c = unit([0, 0, 1])
    pts = np.array([unit(c + 0.2 * np.array([math.cos(k), math.sin(k), 0])) for k in (0, 2 * math.pi / 3, 4 * math.pi / 3)])
    mu = SphereMeasure(pts, np.full(3, 1 / 3))
    g = karcher_mean(mu, CFG)
    assert np.allclose(g.vec, c, atol=1e-9)
    assert np.linalg.norm(karcher_gradient(mu, g.vec)) < 1e-9


def test_karcher_too_spread():
    mu = SphereMeasure(np.array([[1.0, 0, 0], [-1.0, 0, 0], [0, 1.0, 0]]), np.full(3, 1 / 3))
    with pytest.raises(SupportTooSpread):
        karcher_mean(mu, CFG)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_gradient_finite_difference(seed):
    rng = np.random.default_rng(seed)
    c = unit(rng.standard_normal(3))
    pts = np.array([unit(c + 0.3 * rng.standard_normal(3)) for _ in range(4)])
    mu = SphereMeasure(pts, rng.dirichlet(np.ones(4)))
    x = unit(c + 0.1 * rng.standard_normal(3))
    v = rng.standard_normal(3)
    v -= (v @ x) * x
    h = 1e-6
    fd = (karcher_objective(mu, exp_map(x, h * v)) - karcher_objective(mu, exp_map(x, -h * v))) / (2 * h)
    an = karcher_gradient(mu, x) @ v
    assert abs(fd - an) <= 1e-5 * max(1.0, abs(an))


def test_variation_ratio():
    a, b = unit([1, 0, 0]), unit([1, 0.3, 0])
    A, B = SphereMeasure(a[None, :], [1.0]), SphereMeasure(b[None, :], [1.0])
    assert karcher_variation_ratio(A, A, CFG) == 0
    assert karcher_variation_ratio(A, B, CFG) == pytest.approx(1.0)


def test_projections():
    x = unit([0.2, 0.4, -0.1])
    assert np.allclose(project_linear(SphereMeasure(x[None, :], [1.0])), x)
    frame = regular_simplex(2)
    assert np.linalg.norm(project_linear(frame.uniform_measure())) < 1e-12
    assert np.allclose(project_linear(SphereMeasure(np.array([x, -x]), [0.5, 0.5])), 0)
    assert np.allclose(radial_project(x).vec, x) and np.allclose(radial_project(2 * x).vec, x)
    with pytest.raises(ZeroVector):
        radial_project(np.zeros(3))


def test_W_and_pi_f_degenerate():
    frame = regular_simplex(2)
    mu = frame.uniform_measure()
    assert in_W(mu)
    assert not in_W(SphereMeasure(frame.vertices[:3], np.full(3, 1 / 3)))
    w = np.array([0.5, 0.5, 0.0, 0.0])
    assert not in_W(SphereMeasure(frame.vertices, w))
    with pytest.raises(DegenerateProjection):
        pi_f(mu)
    r2 = critical_scale(2)
    assert not pi_f_domain(mu, r2)
    assert pi_f_domain(SphereMeasure(frame.vertices[:3], np.full(3, 1 / 3)), r2)
    x = unit([1, 1, 1])
    assert np.allclose(pi_f(SphereMeasure(x[None, :], [1.0])).vec, x)


def test_hausmann_track_endpoints():
    pts = np.array([unit([1, 0, 0]), unit([1, 0.2, 0]), unit([1, 0, 0.2])])
    X = build_space(PointCloud(pts, GEODESIC_SPHERE, 1.0))
    th = Thickening(X, VR, 0.5, slack=1e-9)
    mu = measure({0: 0.2, 1: 0.3, 2: 0.5})
    th2, path = hausmann_track(th, mu, CFG, steps=4)
    assert path[0] == mu and len(path[-1]) == 1 and len(path) == 5
    th2, path = hausmann_track(th, dirac(1), CFG, steps=3)
    assert all(p == path[0] for p in path)


def test_predicted_betti():
    assert predicted_betti(1) == {3: "Z"}
    assert predicted_betti(2) == {4: "Z/3", 6: "Z"}
    assert predicted_betti(2, 2) == {6: 1}
    assert predicted_betti(2, 3) == {4: 1, 5: 1, 6: 1}
    assert predicted_betti(1, 5) == {3: 1}
    with pytest.raises(UnsupportedDimension):
        predicted_betti(3)
