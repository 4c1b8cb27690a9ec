import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vrthick.complexes import NON_STRICT, STRICT
from vrthick.errors import IsolatedPoint, NotInThickening, SimplexNotPreserved, UnionNotASimplex
from vrthick.metric import EUCLIDEAN, PointCloud, build_space, random_space, sample_circle, space_from_matrix
from vrthick.thickening import (
    CECH, CRUSHINGS, VR, Thickening, VertexMap, contains, crushing_apply, distance, distance_to_base,
    gh_thickening_witness, induced_map, linear_homotopy, not_continuous_example, random_point,
    skeleton_escape_witness, skeleton_membership,
)
from vrthick.transport import dirac, measure, wasserstein

from conftest import line_space


def test_contains_boundary():
    X = line_space(0.0, 1.0, 5.0)
    pair = measure({0: 0.5, 1: 0.5})
    assert contains(Thickening(X, VR, 0.5, STRICT), dirac(2))
    assert not contains(Thickening(X, VR, 1.0, STRICT), pair)
    assert contains(Thickening(X, VR, 1.0, NON_STRICT), pair)
    assert contains(Thickening(X, VR, 1 / 0.9, STRICT), pair)


def test_cech_membership_uses_witness():
    X = line_space(0.0, 1.0, 0.5)
    pair = measure({0: 0.5, 1: 0.5})
    assert contains(Thickening(X, CECH, 0.6, STRICT), pair)
    assert not contains(Thickening(line_space(0.0, 1.0), CECH, 0.6, STRICT), pair)


def test_distance_requires_membership():
    X = line_space(0.0, 3.0)
    th = Thickening(X, VR, 1.0)
    with pytest.raises(NotInThickening):
        distance(th, dirac(0), measure({0: 0.5, 1: 0.5}))
    assert distance(th, dirac(0), dirac(1)) == 3.0


def test_distance_to_base_examples():
    X = line_space(0.0, 2.0)
    th = Thickening(X, VR, 2.0)
    assert distance_to_base(th, dirac(1))[0] == 0
    assert distance_to_base(th, measure({0: 0.5, 1: 0.5}))[0] == 1.0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.05, 1.5))
def test_r_thickening_bound(seed, r):
    rng = np.random.default_rng(seed)
    X = random_space(7, rng)
    for kind, factor in ((VR, 1), (CECH, 2)):
        th = Thickening(X, kind, r)
        mu = random_point(th, rng)
        assert contains(th, mu)
        assert distance_to_base(th, mu)[0] <= factor * r + 1e-12


def test_induced_map():
    X = line_space(0.0, 1.0, 2.0)
    mu = measure({0: 0.2, 1: 0.3, 2: 0.5})
    assert induced_map(VertexMap(X, (0, 1, 2)), mu) == mu
    assert induced_map(VertexMap(X, (1, 1, 1)), mu) == dirac(1)
    with pytest.raises(SimplexNotPreserved):
        induced_map(VertexMap(X, (0, 2, 2)), mu, Thickening(X, VR, 1.0))


def test_lipschitz_constant():
    X, Y = line_space(0.0, 1.0, 3.0), line_space(0.0, 10.0)
    f = VertexMap(Y, (0, 0, 1))
    assert f.lipschitz_constant(X) == pytest.approx(5.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_induced_map_is_lipschitz(seed):
    rng = np.random.default_rng(seed)
    X, Y = random_space(6, rng), random_space(4, rng)
    f = VertexMap(Y, tuple(int(v) for v in rng.integers(0, 4, 6)))
    c = f.lipschitz_constant(X)
    th = Thickening(X, VR, np.inf)
    mu, nu = random_point(th, rng), random_point(th, rng)
    lhs = wasserstein(induced_map(f, mu), induced_map(f, nu), Y)[0]
    assert lhs <= c * wasserstein(mu, nu, X)[0] + 1e-9


def test_linear_homotopy():
    X = line_space(0.0, 1.0, 5.0)
    th = Thickening(X, VR, 1.0)
    mu, nu = dirac(0), measure({0: 0.5, 1: 0.5})
    assert linear_homotopy(th, mu, nu, 0.0) == mu and linear_homotopy(th, mu, nu, 1.0) == nu
    for t in np.linspace(0, 1, 7):
        assert contains(th, linear_homotopy(th, mu, nu, t))
    with pytest.raises(UnionNotASimplex):
        linear_homotopy(th, dirac(0), dirac(2), 0.5)


def test_skeleton_membership():
    th = Thickening(line_space(0.0, 1.0, 2.0), VR, 5.0)
    tri = measure({0: 0.2, 1: 0.3, 2: 0.5})
    assert skeleton_membership(th, dirac(0), 0)
    assert not skeleton_membership(th, tri, 1)
    assert skeleton_membership(th, tri, 2)


def test_skeleton_escape_on_circle():
    X = build_space(sample_circle(10))
    th = Thickening(X, VR, 0.3, STRICT)
    th2, mu2 = skeleton_escape_witness(th, dirac(3), 0, 0.01)
    assert len(mu2) == 2 and contains(th2, mu2)
    assert wasserstein(dirac(3), mu2, th2.space)[0] < 0.01
    assert np.array_equal(th2.space.dist[:10, :10], X.dist)


def test_skeleton_escape_isolated():
    # a bare distance matrix cannot grow new points
    th = Thickening(space_from_matrix(np.array([[0.0, 1.0], [1.0, 0.0]])), VR, 2.0)
    with pytest.raises(IsolatedPoint):
        skeleton_escape_witness(th, dirac(0), 0, 0.5)


def test_skeleton_escape_convex_euclidean_at_full_diameter():
    X = build_space(PointCloud(np.array([[0.0, 0.0], [1.0, 0.0]]), EUCLIDEAN))
    th = Thickening(X, VR, 1.0, NON_STRICT)
    mu = measure({0: 0.5, 1: 0.5})
    th2, mu2 = skeleton_escape_witness(th, mu, 1, 1e-3)
    assert len(mu2) == 3 and contains(th2, mu2)
    assert wasserstein(mu, mu2, th2.space)[0] < 1e-3


def test_crushing_endpoints():
    fam = CRUSHINGS["rectangle"]
    X = fam.space(np.array([[0.3, 0.0], [0.8, 1.0], [0.5, 0.0]]))
    mu = measure({0: 0.2, 1: 0.5, 2: 0.3})
    Y, nu = crushing_apply(fam, X, mu, 1.0)
    assert nu == mu
    Y, nu = crushing_apply(fam, X, mu, 0.0)
    pts = Y.cloud.coords[list(nu.support)]
    assert {tuple(p) for p in pts} <= {(0.0, 0.0), (0.0, 1.0)}
    fam = CRUSHINGS["two_rectangles_l1"]
    X = fam.space(fam.sampler(np.random.default_rng(0), 5))
    Y, nu = crushing_apply(fam, X, measure({i: 0.2 for i in range(5)}), 0.0)
    assert {tuple(p) for p in Y.cloud.coords[list(nu.support)]} <= {(0.0, 0.0, 0.0), (0.0, 1.0, 0.0)}


def test_two_rectangle_speed_is_four_not_two():
    fam = CRUSHINGS["two_rectangles_l1"]
    corner = np.array([[2.0, 2.0, 1.0]])
    a, b = fam(corner, 0.75)[0], fam(corner, 0.25)[0]
    moved = np.abs(a - b).sum()
    assert moved == pytest.approx(4.0 * 0.5)
    assert moved > 2.0 * 0.5


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(sorted(CRUSHINGS)), st.integers(0, 10**6))
def test_crushing_estimate(name, seed):
    rng = np.random.default_rng(seed)
    fam = CRUSHINGS[name]
    X = fam.space(fam.sampler(rng, 6))
    mu = measure(dict(zip(rng.choice(6, 3, replace=False).tolist(), rng.dirichlet(np.ones(3)))))
    nu = measure(dict(zip(rng.choice(6, 2, replace=False).tolist(), rng.dirichlet(np.ones(2)))))
    t, s = rng.random(2)
    Y1, a = crushing_apply(fam, X, mu, t)
    Y2, b = crushing_apply(fam, Y1, nu, s)
    lhs = wasserstein(a, b, Y2)[0]
    assert lhs <= wasserstein(mu, nu, X)[0] + fam.speed * abs(t - s) + 1e-9


def test_not_continuous_example():
    out = not_continuous_example(8)
    assert all(b < a for a, b in zip(out["distance_to_origin"], out["distance_to_origin"][1:]))
    assert min(out["image_gaps"]) >= 1.0


def test_gh_thickening_witness():
    ambient = line_space(0.0, 0.1, 0.5, 0.55, 1.0)
    X, Y = [0, 2, 4], [1, 3]
    mu = measure({0: 0.5, 2: 0.5})
    dist, witness, bound = gh_thickening_witness(ambient, X, Y, 0.5, mu)
    assert dist <= bound + 1e-9
    assert set(witness.support) <= set(Y)
