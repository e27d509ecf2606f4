import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fgsal.connectivity import RegionGraph, WeightVectors
from fgsal.errors import DimensionMismatch, SingularSystemWarning
from fgsal.optimize import (
    conjugate_gradient, render_map, saliency_cost, saliency_system, solve_saliency, solve_unclamped,
)
from fgsal.superpixel import Segmentation

from oracles import random_connected_graph, saliency_cost_direct


def random_instance(rng, n):
    edges, dists = random_connected_graph(rng, n, extra=0.2)
    g = RegionGraph(n, np.array(edges).reshape(-1, 2), dists, np.zeros(n, bool))
    w = WeightVectors(rng.uniform(0, 1, n) * (rng.random(n) < 0.7),
                      rng.uniform(0, 1, n) * (rng.random(n) < 0.7),
                      rng.uniform(0.1, 1.1, len(edges)))
    return g, w


def chain(n):
    return RegionGraph(n, np.array([(i, i + 1) for i in range(n - 1)]).reshape(-1, 2),
                       np.ones(n - 1), np.zeros(n, bool))


def test_all_foreground_gives_ones(rng):
    g = chain(5)
    w = WeightVectors(np.ones(5), np.zeros(5), rng.uniform(0, 3, 4))
    np.testing.assert_allclose(solve_saliency(w, g), 1.0, atol=1e-12)


def test_all_background_gives_zeros(rng):
    g = chain(5)
    w = WeightVectors(np.zeros(5), np.ones(5), rng.uniform(0, 3, 4))
    np.testing.assert_allclose(solve_saliency(w, g), 0.0, atol=1e-12)


def test_two_region_hand_case():
    g = chain(2)
    w = WeightVectors(np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([1.0]))
    t = solve_unclamped(w, g)
    np.testing.assert_allclose(t, [2 / 3, 1 / 3], atol=1e-12)
    a, b = saliency_system(w, g)
    assert np.abs(a @ t - b).max() < 1e-10
    np.testing.assert_array_equal(a.toarray(), [[2, -1], [-1, 2]])


def test_cost_matches_direct(rng):
    g, w = random_instance(rng, 12)
    t = rng.uniform(0, 1, 12)
    assert saliency_cost(t, w, g) == pytest.approx(
        saliency_cost_direct(t, w.foreground, w.background, g.edges.tolist(), w.smoothness))


def test_singular_system_returns_half():
    g = chain(4)
    w = WeightVectors(np.zeros(4), np.zeros(4), np.ones(3))
    with pytest.warns(SingularSystemWarning):
        t = solve_saliency(w, g)
    np.testing.assert_array_equal(t, 0.5)


def test_length_mismatch():
    with pytest.raises(DimensionMismatch):
        solve_saliency(WeightVectors(np.ones(3), np.ones(4), np.ones(3)), chain(4))


def test_cg_agrees_with_cholesky(rng):
    g, w = random_instance(rng, 40)
    direct = solve_unclamped(w, g, method="direct")
    cg = solve_unclamped(w, g, method="cg")
    np.testing.assert_allclose(cg, direct, atol=1e-8)


def test_conjugate_gradient_dense_spd(rng):
    m = rng.normal(size=(10, 10))
    a = m @ m.T + 10 * np.eye(10)
    b = rng.normal(size=10)
    np.testing.assert_allclose(conjugate_gradient(a, b), np.linalg.solve(a, b), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(2, 30))
def test_maximum_principle(seed, n):
    g, w = random_instance(np.random.default_rng(seed), n)
    if not np.any(w.foreground + w.background > 0):
        return
    t = solve_unclamped(w, g)
    assert t.min() >= -1e-6 and t.max() <= 1 + 1e-6


def test_monotone_in_foreground_weight(rng):
    g, w = random_instance(rng, 15)
    base = solve_unclamped(w, g)
    for j in range(15):
        fg = w.foreground.copy()
        fg[j] += 0.5
        bumped = solve_unclamped(WeightVectors(fg, w.background, w.smoothness), g)
        assert bumped[j] >= base[j] - 1e-12


def test_render_uniform_no_normalize():
    seg = Segmentation.from_labels(np.array([[0, 0, 1], [1, 2, 2]]))
    np.testing.assert_array_equal(render_map([0.5, 0.5, 0.5], seg, normalize=False), 0.5)
    # a constant map is left alone even when normalizing
    np.testing.assert_array_equal(render_map([0.5, 0.5, 0.5], seg), 0.5)


def test_render_binary():
    labels = np.zeros((4, 6), int)
    labels[:, 3:] = 1
    seg = Segmentation.from_labels(labels)
    np.testing.assert_array_equal(render_map([0.0, 1.0], seg), labels)


def test_render_lookup(rng):
    labels = rng.integers(0, 5, (7, 9))
    labels.ravel()[:5] = np.arange(5)
    seg = Segmentation.from_labels(labels)
    t = rng.uniform(0, 1, 5)
    out = render_map(t, seg, normalize=False)
    for y in range(7):
        for x in range(9):
            assert out[y, x] == t[labels[y, x]]
    stretched = render_map(t, seg)
    assert stretched.min() == 0.0 and stretched.max() == 1.0


def test_render_mismatch():
    with pytest.raises(DimensionMismatch):
        render_map([0.1, 0.2], Segmentation.from_labels(np.zeros((3, 3), int)))
