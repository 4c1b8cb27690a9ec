import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vrthick.complexes import STRICT, vr_filtration
from vrthick.errors import SizeGuard
from vrthick.metric import build_space, random_space, sample_circle
from vrthick.persistence import (
    Interval, PersistenceDiagram, betti_numbers, bottleneck, bottleneck_exhaustive, circle_convergence,
    circle_ph_experiment, compute_ph, rank_mod_p, stability_check,
)

from conftest import line_space


def ph(space, top, field=2, convention="non_strict"):
    return compute_ph(vr_filtration(space, top + 1), top, field, convention)


def test_two_points():
    D = ph(line_space(0.0, 0.7), 0)
    assert sorted(D.pairs(0)) == [(0.0, 0.7), (0.0, math.inf)]


def test_c4_loop():
    D = ph(build_space(sample_circle(4)), 1)
    assert D.pairs(1) == [(0.25, 0.5)]


def test_interval_conventions():
    D = ph(build_space(sample_circle(4)), 1, convention=STRICT)
    (iv,) = D.intervals[1]
    assert not iv.birth_closed and iv.death_closed
    assert iv.contains(0.5) and not iv.contains(0.25)
    closed_open = Interval(0.25, 0.5)
    assert closed_open.contains(0.25) and not closed_open.contains(0.5)


@pytest.mark.parametrize("p", [2, 3])
def test_c20_intervals(p):
    D = ph(build_space(sample_circle(20)), 3, field=p)
    assert D.pairs(3) == [(0.35, 0.4)]
    (h1,) = D.pairs(1)
    assert h1[0] == 0.05 and h1[1] <= 1 / 3 + 0.05


def test_c20_against_rank_oracle():
    X = build_space(sample_circle(20))
    F = vr_filtration(X, 4)
    D = compute_ph(F, 3)
    for r in (0.3, 0.35, 0.375, 0.4):
        K = [s.vertices for s in F if s.birth <= r]
        assert betti_numbers(K, 3, 2)[3] == D.betti_at(3, r)


def test_rank_mod_p():
    M = np.array([[1, 1], [1, 1]])
    assert rank_mod_p(M, 2) == 1
    assert rank_mod_p(np.array([[2, 0], [0, 1]]), 2) == 1
    assert rank_mod_p(np.array([[2, 0], [0, 1]]), 3) == 2


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3]))
def test_reduction_matches_rank_oracle(seed, p):
    X = random_space(7, np.random.default_rng(seed))
    F = vr_filtration(X, 3)
    D = compute_ph(F, 2, p)
    for r in F.values:
        K = [s.vertices for s in F if s.birth <= r]
        oracle = betti_numbers(K, 2, p)
        assert [D.betti_at(k, r) for k in range(3)] == oracle


def test_bottleneck_examples():
    D = ph(build_space(sample_circle(6)), 1)
    assert bottleneck(D, D, 1) == 0
    assert bottleneck([(0.0, 1.0)], [(0.0, 2.0)], 0) == pytest.approx(1.0)
    assert bottleneck([], [(0.2, 0.6)], 0) == pytest.approx(0.2)


finite_pairs = st.lists(
    st.tuples(st.floats(0, 5), st.floats(0, 5)).map(lambda t: (min(t), max(t))), max_size=3
)


@settings(max_examples=100, deadline=None)
@given(finite_pairs, finite_pairs)
def test_bottleneck_matches_exhaustive(A, B):
    assert bottleneck(A, B, 0) == pytest.approx(bottleneck_exhaustive(A, B), abs=1e-12)


def test_csv_roundtrip():
    D = ph(build_space(sample_circle(8)), 1, field=3)
    back = PersistenceDiagram.from_csv(D.to_csv())
    for k in (0, 1):
        assert sorted(back.pairs(k)) == sorted(D.pairs(k))


def test_stability_identity_and_perturbation():
    X = line_space(0.0, 1.0, 2.5, 4.0)
    rep = stability_check(X, X, 0)
    assert rep["bottleneck"] == 0 and rep["passed"]
    Y = line_space(0.0, 1.1, 2.5, 4.0)
    for dim in (0, 1):
        assert stability_check(X, Y, dim)["passed"]


def test_circle_experiment_and_guard():
    D, rep = circle_ph_experiment(20)
    assert rep["h3"] == [[0.35, 0.4]]
    with pytest.raises(SizeGuard):
        circle_ph_experiment(30)
    conv = circle_convergence()
    assert conv["non_increasing"]
