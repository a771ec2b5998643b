import math
import random
from collections import Counter
from fractions import Fraction as F

from hypothesis import given, settings, strategies as st
from scipy import stats

from dendrocode.order import (Ordering, PlanarOrder, StructuredTree, TreeMeasure, check_compatibility, check_inc,
                              check_mes, compare, enumerate_compatible_orders, left_set_measure, order_key,
                              regularize, shuffle)
from dendrocode.random_gen import RandomTreeParams, remark_segment, segment_tree, star_tree, y_tree
from dendrocode.tree import EdgePoint, RealTree, Vertex

from helpers import left_set_oracle, structured_trees, tree_from_seed

Y = y_tree()
L1, L2, B, R = Vertex("l1"), Vertex("l2"), Vertex("b"), Vertex("r")


def test_compare_examples():
    assert compare(Y, L1, L2) == Ordering.LESS
    assert compare(Y, L2, L1) == Ordering.GREATER
    assert all(compare(Y, R, p) == Ordering.LESS for p in Y.tree.witness_points() if p != R)
    assert compare(Y, B, B) == Ordering.EQUAL
    assert compare(Y, Y.tree.point_on("el1", 1), L1) == Ordering.EQUAL


def test_order_key_agrees_with_compare():
    pts = Y.tree.witness_points()
    for a in pts:
        for b in pts:
            c = compare(Y, a, b)
            ka, kb = order_key(Y, a), order_key(Y, b)
            assert (ka < kb, ka == kb, ka > kb) == (c < 0, c == 0, c > 0)


def test_check_compatibility_passes_for_planar_orders():
    assert check_compatibility(Y).passed
    assert check_compatibility(segment_tree()).passed


def corrupted_key(p):
    # the deeper half of arm 1 is moved after arm 2
    if isinstance(p, EdgePoint) and p.edge == "el1":
        return (1, p.offset) if p.offset <= F(1, 2) else (3, p.offset)
    if p == L1:
        return (3, F(1))
    if p == L2 or (isinstance(p, EdgePoint) and p.edge == "el2"):
        return (2, p.offset if isinstance(p, EdgePoint) else F(1))
    return (0, Y.tree.height(p))


def test_corrupted_comparator_reports_or2_counterexample():
    def cmp(a, b):
        ka, kb = corrupted_key(Y.tree.normalize(a)), corrupted_key(Y.tree.normalize(b))
        return (ka > kb) - (ka < kb)

    report = check_compatibility(Y, comparator=cmp)
    assert not report.passed
    assert "(Or2)" in report.detail
    s1, s2, s3 = report.counterexample
    assert not Y.tree.is_ancestor(Y.tree.wedge(s1, s3), s2)


def test_shuffle_star_uniform():
    rng = random.Random(11)
    S = star_tree(3)
    counts = Counter(shuffle(S.tree, rng).children("r") for _ in range(6000))
    assert len(counts) == 6
    stat, p = stats.chisquare(list(counts.values()))
    assert p > 0.001


def test_shuffle_path_is_deterministic():
    T = RealTree.from_parents("r", [("a", "r", 1), ("b", "a", 1)])
    rng = random.Random(0)
    assert {tuple(sorted(shuffle(T, rng).child_order.items())) for _ in range(20)} == {
        tuple(sorted(PlanarOrder.default(T).child_order.items()))}


def test_left_set_examples():
    S = remark_segment()
    mid = EdgePoint("ea", F(1, 2))
    assert left_set_measure(S, mid, include_x=False) == F(1, 3)
    assert left_set_measure(S, mid, include_x=True) == F(2, 3)
    assert left_set_measure(Y, R, include_x=False) == 0
    assert left_set_measure(Y, L2) == 3


def test_check_mes_examples():
    assert check_mes(Y)
    leafy = StructuredTree(Y.tree, Y.order, TreeMeasure({}, ((L1, F(1)), (L2, F(1)))))
    assert not check_mes(leafy)
    point = StructuredTree(RealTree.point_tree(), PlanarOrder({}), TreeMeasure({}, ((Vertex("r"), F(1)),)))
    assert check_mes(point)
    assert check_mes(regularize(leafy, F(1, 100)))


def test_measure_validation():
    bad = TreeMeasure({"el1": F(-1)}, ((Vertex("zz"), F(1)),))
    problems = bad.validate(Y.tree)
    assert any("negative" in p for p in problems) and any("foreign" in p for p in problems)


@settings(max_examples=40, deadline=None)
@given(structured_trees, st.data())
def test_left_set_matches_compare_oracle(S, data):
    p = data.draw(st.sampled_from(S.tree.witness_points()))
    for include in (False, True):
        assert left_set_measure(S, p, include) == left_set_oracle(S, p, include)


@settings(max_examples=30, deadline=None)
@given(structured_trees)
def test_compare_is_compatible_total_order(S):
    assert check_compatibility(S, sample_count=500).passed
    pts = [Vertex(v) for v in S.tree.vertices]
    for a in pts:
        for b in pts:
            assert compare(S, a, b) == -compare(S, b, a)


@settings(max_examples=30, deadline=None)
@given(structured_trees)
def test_inc_holds_under_mes(S):
    assert check_mes(S)
    assert check_inc(S, sample_count=500).passed


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_enumerated_orders_count_and_compatibility(seed):
    S = tree_from_seed(seed, RandomTreeParams(max_vertices=6))
    T = S.tree
    orders = list(enumerate_compatible_orders(T))
    assert len(orders) == math.prod(math.factorial(len(es)) for es in T.child_edges.values())
    assert len({tuple(sorted(o.child_order.items())) for o in orders}) == len(orders)
    vertices = [Vertex(v) for v in T.vertices]
    for order in orders:
        assert check_compatibility(StructuredTree(T, order, S.measure), sample_count=10 ** 6, points=vertices).passed


@settings(max_examples=30, deadline=None)
@given(structured_trees)
def test_child_components_compare_as_blocks(S):
    T = S.tree
    for v in T.vertices:
        kids = T.child_edges.get(v, [])
        for e1 in kids:
            for e2 in kids:
                if e1 is e2:
                    continue
                below1 = [u for u in T.vertices if T.is_ancestor(Vertex(e1.child), Vertex(u))]
                below2 = [u for u in T.vertices if T.is_ancestor(Vertex(e2.child), Vertex(u))]
                assert len({compare(S, Vertex(a), Vertex(b)) for a in below1 for b in below2}) == 1


@settings(max_examples=30, deadline=None)
@given(structured_trees, st.integers(0, 10 ** 6))
def test_shuffled_orders_keep_mes_and_compatibility(S, seed):
    S2 = StructuredTree(S.tree, shuffle(S.tree, random.Random(seed)), S.measure)
    assert S2.validate() == []
    assert check_mes(S2)
    assert check_compatibility(S2, sample_count=300).passed
