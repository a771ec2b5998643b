import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from dendrocode.codec import decode, encode, equivalent
from dendrocode.height import HeightFunction, validate
from dendrocode.order import check_mes
from dendrocode.random_gen import (PlaneTree, RandomTreeParams, child_rng, discrete_distance, discrete_height_process,
                                   dyck_path, excursion_walk, geometric_pmf, graph_distance_from_heights,
                                   gw_plane_tree, height_process_function, lifo_height, plane_tree_structured,
                                   random_structured_tree)
from dendrocode.tree import Vertex


def tau(*words):
    return PlaneTree(frozenset([()] + [tuple(w) for w in words]))


def test_height_process_examples():
    assert discrete_height_process(tau()) == [0]
    assert discrete_height_process(tau((1,), (2,))) == [0, 1, 1]
    t = tau((1,), (1, 1), (2,))
    H = discrete_height_process(t)
    assert H == [0, 1, 2, 1]
    assert discrete_distance(H, 2, 3) == 1
    # (1,1) and (2) are three edges apart in the tree itself
    assert graph_distance_from_heights(H, 2, 3) == 3
    assert encode(plane_tree_structured(t)).distance(2, 3) == 3


def test_plane_tree_validation():
    assert tau((1,), (2,)).validate() == []
    assert tau((2,)).validate()
    assert tau((1, 1)).validate()


def test_excursion_walk_single_step_is_tent():
    h = excursion_walk(1, random.Random(0))
    assert h.knots == HeightFunction.from_points([(0, 0), (1, 1), (2, 0)]).knots


def test_excursion_walk_is_valid_and_scaled():
    h = excursion_walk(16, random.Random(1))
    assert validate(h) == [] and h.lifetime == 2 and h(2) == 0
    assert all((k.y_left * 4).denominator == 1 for k in h.knots)


@settings(max_examples=50)
@given(st.integers(1, 40), st.integers(0, 10 ** 6))
def test_dyck_path_stays_nonnegative(n, seed):
    walk = dyck_path(n, random.Random(seed))
    assert len(walk) == 2 * n + 1 and walk[0] == walk[-1] == 0
    assert min(walk) == 0 and all(abs(a - b) == 1 for a, b in zip(walk, walk[1:]))


def test_dyck_paths_uniform_for_n_3():
    rng = random.Random(2)
    counts = {}
    for _ in range(5000):
        key = tuple(dyck_path(3, rng))
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 5  # Catalan(3)
    assert max(counts.values()) - min(counts.values()) < 200


def test_lifo_zero_rate_is_identity():
    h = lifo_height(0, {}, 1, 10, random.Random(0))
    assert h.knots == HeightFunction.from_points([(0, 0), (1, 1)]).knots


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([0.5, 1.0, 1.5]))
def test_lifo_outputs_are_height_functions(seed, rate):
    h = lifo_height(rate, {"1/4": 1, "1/2": 2}, F(1, 2), 10 ** 4, random.Random(seed))
    assert validate(h) == []
    assert all(k.y_right <= k.y_left for k in h.knots)
    first, later = h.visit_sets()
    assert later.length == 0


def test_lifo_errors():
    with pytest.raises(ValueError):
        lifo_height(1.0, {"1/2": 1}, 0, 10, random.Random(0))
    with pytest.raises(ValueError):
        lifo_height(1.0, {"1/2": 0}, 1, 10, random.Random(0))
    with pytest.raises(RuntimeError):
        lifo_height(5.0, {"2": 1}, 1, 1, random.Random(0))


def test_gw_errors_and_cap():
    with pytest.raises(ValueError):
        gw_plane_tree([0, 1], 10, random.Random(0))
    t = gw_plane_tree(geometric_pmf(), 10, random.Random(0))
    assert len(t) <= 10 and t.validate() == []


def test_gw_large_tree_four_points():
    t = gw_plane_tree(geometric_pmf(), 10 ** 4, random.Random(4), min_size=50)
    S = decode(encode(plane_tree_structured(t)))
    pts = S.tree.witness_points()
    rng = random.Random(0)
    for _ in range(1000):
        assert S.tree.four_point_check(*(rng.choice(pts) for _ in range(4)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_discrete_bridge(seed):
    t = gw_plane_tree(geometric_pmf(), 50, random.Random(seed))
    H = discrete_height_process(t)
    words = t.lexicographic()
    interpolated = height_process_function(t)
    S = plane_tree_structured(t)
    h = encode(S)
    assert all(h(n) == H[n] for n in range(len(H)))
    for m in range(len(H)):
        for n in range(m, len(H)):
            assert discrete_distance(H, m, n) == interpolated.distance(m, n)
            graph = S.tree.distance(Vertex(S.tree.vertices[m]), Vertex(S.tree.vertices[n]))
            assert graph == h.distance(m, n) == graph_distance_from_heights(H, m, n)
    assert equivalent(decode(h), S, compare_measure=False)
    assert len(words) == len(H)


def test_random_tree_examples():
    S = random_structured_tree(RandomTreeParams(max_vertices=1), random.Random(0))
    assert S.tree.edges == () and len(S.measure.atoms) == 1
    for seed in range(30):
        S = random_structured_tree(RandomTreeParams(), random.Random(seed))
        assert S.validate() == [] and check_mes(S)
        assert all(F(1, 4) <= d <= 4 for d in S.measure.densities.values())
        assert len(S.measure.atoms) <= 5
    a = random_structured_tree(RandomTreeParams(), random.Random(42))
    b = random_structured_tree(RandomTreeParams(), random.Random(42))
    assert a == b


def test_random_tree_params_validated():
    with pytest.raises(ValueError):
        random_structured_tree(RandomTreeParams(min_density=F(0)), random.Random(0))
    with pytest.raises(ValueError):
        random_structured_tree(RandomTreeParams(max_vertices=0), random.Random(0))


def test_random_trees_cover_interesting_shapes():
    shapes = {"atoms": 0, "no_atoms": 0, "branch_atom": 0, "degree3": 0}
    for seed in range(200):
        S = random_structured_tree(RandomTreeParams(), random.Random(seed))
        T = S.tree
        _, branch, _ = T.classify()
        shapes["atoms" if S.measure.atoms else "no_atoms"] += 1
        shapes["degree3"] += bool(branch)
        shapes["branch_atom"] += any(T.normalize(p) in {Vertex(b) for b in branch} for p, _ in S.measure.atoms)
    assert all(shapes.values())


def test_child_rng_is_deterministic_and_distinct():
    assert child_rng(7, 3).random() == child_rng(7, 3).random()
    assert child_rng(7, 3).random() != child_rng(7, 4).random()
