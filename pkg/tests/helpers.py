"""Shared test data, brute-force oracles and hypothesis strategies."""
import functools
import random
from fractions import Fraction

import networkx as nx
from hypothesis import strategies as st

from dendrocode.codec import encode
from dendrocode.height import HeightFunction
from dendrocode.order import Ordering, StructuredTree, compare
from dendrocode.random_gen import RandomTreeParams, random_height_function, random_structured_tree
from dendrocode.tree import EdgePoint, Vertex

F = Fraction

H1 = HeightFunction.from_knots([(0, 0, 0), (F(1, 3), F(1, 2), F(1, 2)), (F(2, 3), F(1, 2), F(1, 2)), (1, 1, 1)])
# h2(t) = h1(2t) on [0, 1/2] and h1(2(1 - t)) on (1/2, 1]
H2 = HeightFunction.from_points([(0, 0), (F(1, 6), F(1, 2)), (F(1, 3), F(1, 2)), (F(1, 2), 1),
                                 (F(2, 3), F(1, 2)), (F(5, 6), F(1, 2)), (1, 0)])
HY = HeightFunction.from_knots([(0, 0, 0), (2, 2, 1), (3, 2, 2)])

SMALL = RandomTreeParams(max_vertices=12)


def tree_from_seed(seed, params=SMALL) -> StructuredTree:
    return random_structured_tree(params, random.Random(seed))


seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
structured_trees = seeds.map(tree_from_seed)
height_functions = st.one_of(
    seeds.map(lambda s: random_height_function(random.Random(s), pieces=random.Random(s).randint(1, 8))),
    structured_trees.map(encode),
)


# -- oracles ------------------------------------------------------------------------------------


def eval_oracle(h: HeightFunction, t) -> Fraction:
    """Value at t by summing slope increments and jumps from time 0."""
    t = Fraction(t)
    y = Fraction(0)
    for a, b in zip(h.knots, h.knots[1:]):
        if t <= a.t:
            break
        y += a.y_right - a.y_left
        slope = (b.y_left - a.y_right) / (b.t - a.t)
        y += slope * (min(t, b.t) - a.t)
    return y


def grid_values(h: HeightFunction, step: Fraction):
    """Values and right limits of h on the grid step * k, by a single sweep."""
    n = int(h.lifetime / step)
    values, rights = [], []
    ks = h.knots
    j = 0
    for i in range(n + 1):
        t = i * step
        while j + 1 < len(ks) and ks[j + 1].t < t:
            j += 1
        if ks[j].t == t:
            values.append(ks[j].y_left)
            rights.append(ks[j].y_right)
            continue
        if j + 1 < len(ks) and ks[j + 1].t == t:
            values.append(ks[j + 1].y_left)
            rights.append(ks[j + 1].y_right)
            continue
        a, b = ks[j], ks[j + 1]
        y = a.y_right + (b.y_left - a.y_right) * (t - a.t) / (b.t - a.t)
        values.append(y)
        rights.append(y)
    return values, rights


def networkx_graph(T, points):
    """Weighted graph on the vertices plus the given points, split along edges."""
    G = nx.Graph()
    on_edge = {e.id: [] for e in T.edges}
    for p in points:
        p = T.normalize(p)
        if isinstance(p, EdgePoint):
            on_edge[p.edge].append(p.offset)
    for e in T.edges:
        stops = [(Fraction(0), Vertex(e.parent))]
        stops += [(off, EdgePoint(e.id, off)) for off in sorted(set(on_edge[e.id]))]
        stops.append((e.length, Vertex(e.child)))
        for (o1, p1), (o2, p2) in zip(stops, stops[1:]):
            G.add_edge(p1, p2, weight=o2 - o1)
    G.add_node(Vertex(T.root))
    return G


def left_set_oracle(S: StructuredTree, x, include_x=True) -> Fraction:
    """Mass of {y <= x} (or {y < x}) using only compare, wedge and heights."""
    T = S.tree
    x = T.normalize(x)
    total = Fraction(0)
    for p, m in S.measure.atoms:
        c = compare(S, p, x)
        if c == Ordering.LESS or (include_x and c == Ordering.EQUAL):
            total += m
    for e in T.edges:
        d = S.measure.density(e.id)
        if compare(S, Vertex(e.child), x) != Ordering.GREATER:
            total += d * e.length
        elif compare(S, Vertex(e.parent), x) == Ordering.LESS:
            w = T.wedge(x, Vertex(e.child))
            cut = T.height(w) - T.height(Vertex(e.parent))
            total += d * max(Fraction(0), min(cut, e.length))
    return total


def dyadic_grid(T, depth=2):
    pts = [Vertex(v) for v in T.vertices]
    pts += [EdgePoint(e.id, e.length * Fraction(k, 2 ** depth)) for e in T.edges for k in range(1, 2 ** depth)]
    return pts


def phi_oracle_table(S: StructuredTree, depth=2):
    """Grid points sorted in the tree order, each with its left-set masses."""
    pts = sorted(dyadic_grid(S.tree, depth),
                 key=functools.cmp_to_key(lambda a, b: int(compare(S, a, b))))
    return [(p, left_set_oracle(S, p, False), left_set_oracle(S, p, True)) for p in pts]


def phi_oracle(table, t):
    """The order-first grid point whose left set has mass at least t."""
    for p, _, upto in table:
        if upto >= t:
            return p
    raise AssertionError("time beyond the total mass")
