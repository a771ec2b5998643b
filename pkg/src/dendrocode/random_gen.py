"""Seeded generators of plane trees, height functions and structured trees.

Every generator takes a caller-owned :class:`random.Random`.  Batches derive
per-task generators with :func:`child_rng`, so a batch is reproducible from a
single seed whatever the scheduling.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Mapping, Sequence, Tuple

from .height import HeightFunction, Knot
from .order import PlanarOrder, StructuredTree, TreeMeasure, shuffle
from .rational import Q, dyadic
from .tree import Edge, EdgePoint, RealTree, TreePoint, Vertex

Word = Tuple[int, ...]


def child_rng(seed, index: int) -> random.Random:
    """Independent generator for task ``index`` of the batch seeded by ``seed``."""
    return random.Random(f"dendrocode/{seed}/{index}")


# -- discrete plane trees -----------------------------------------------------------


@dataclass(frozen=True)
class PlaneTree:
    """Finite plane tree as a prefix-closed set of words over positive integers."""

    nodes: frozenset

    def __post_init__(self):
        object.__setattr__(self, "nodes", frozenset(tuple(v) for v in self.nodes))

    def child_count(self, v: Word) -> int:
        k = 0
        while v + (k + 1,) in self.nodes:
            k += 1
        return k

    def validate(self) -> List[str]:
        problems = []
        if () not in self.nodes:
            problems.append("missing root")
        for v in self.nodes:
            if any(j < 1 for j in v):
                problems.append(f"{v}: letters must be positive")
            if v and v[:-1] not in self.nodes:
                problems.append(f"{v}: parent missing")
            if v and v[-1] > 1 and v[:-1] + (v[-1] - 1,) not in self.nodes:
                problems.append(f"{v}: left sibling missing")
        return problems

    def lexicographic(self) -> List[Word]:
        return sorted(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)


def discrete_height_process(tau: PlaneTree) -> List[int]:
    """Generation of each vertex, listed in lexicographic order."""
    return [len(v) for v in tau.lexicographic()]


def discrete_distance(heights: Sequence[int], m: int, n: int) -> int:
    """``H_m + H_n - 2 min_{m <= k <= n} H_k``.

    This is the quotient distance of the linear interpolation of the height
    process (see :func:`height_process_function`).  It equals the graph
    distance of the tree only when one vertex is an ancestor of the other;
    :func:`graph_distance_from_heights` gives the graph distance in general.
    """
    m, n = min(m, n), max(m, n)
    return heights[m] + heights[n] - 2 * min(heights[m:n + 1])


def graph_distance_from_heights(heights: Sequence[int], m: int, n: int) -> int:
    """Graph distance between the m-th and n-th vertices in lexicographic order.

    The last common ancestor sits at height ``min(H_m, min_{m < k <= n} H_k - 1)``.
    """
    m, n = min(m, n), max(m, n)
    if m == n:
        return 0
    branch = min(heights[m], min(heights[m + 1:n + 1]) - 1)
    return heights[m] + heights[n] - 2 * branch


def height_process_function(tau: PlaneTree) -> HeightFunction:
    """Continuous function through ``(n, H_n)``, linear between integers."""
    return HeightFunction.from_points(enumerate(discrete_height_process(tau))).canonical()


def _word_id(v: Word) -> str:
    return "u" + ".".join(map(str, v)) if v else "u"


def plane_tree_structured(tau: PlaneTree) -> StructuredTree:
    """Unit edge lengths and unit densities; children ordered by their last letter."""
    words = tau.lexicographic()
    vertices = tuple(_word_id(v) for v in words)
    edges = tuple(Edge("e" + _word_id(v), _word_id(v[:-1]), _word_id(v), Fraction(1)) for v in words[1:])
    tree = RealTree(_word_id(()), vertices, edges)
    return StructuredTree(tree, PlanarOrder.default(tree), TreeMeasure.uniform(tree))


def gw_plane_tree(offspring_pmf: Sequence[float], max_size: int, rng: random.Random,
                  max_tries: int = 10_000, min_size: int = 1) -> PlaneTree:
    """Galton-Watson tree, rejecting draws with fewer than ``min_size`` or more than ``max_size`` vertices."""
    weights = list(offspring_pmf)
    if not weights or sum(weights) <= 0 or any(w < 0 for w in weights):
        raise ValueError("offspring pmf must be non-negative with positive total")
    if weights[0] <= 0:
        raise ValueError("degenerate offspring pmf: the tree is a.s. infinite")
    ks = range(len(weights))
    for _ in range(max_tries):
        nodes = [()]
        stack: List[Word] = [()]
        ok = True
        while stack:
            v = stack.pop()
            k = rng.choices(ks, weights)[0]
            if len(nodes) + k > max_size:
                ok = False
                break
            kids = [v + (j,) for j in range(1, k + 1)]
            nodes.extend(kids)
            stack.extend(reversed(kids))
        if ok and len(nodes) >= min_size:
            return PlaneTree(frozenset(nodes))
    raise RuntimeError(f"no tree of size in [{min_size}, {max_size}] after {max_tries} tries")


def geometric_pmf(p: float = 0.5, terms: int = 40) -> List[float]:
    """P(k) = p (1 - p)^k truncated to ``terms`` values."""
    return [p * (1 - p) ** k for k in range(terms)]


# -- height-function samplers --------------------------------------------------------------


def _inverse_sqrt(n: int) -> Fraction:
    r = math.isqrt(n)
    if r * r == n:
        return Fraction(1, r)
    return dyadic(1 / math.sqrt(n), 32)


def dyck_path(n: int, rng: random.Random) -> List[int]:
    """Uniform Dyck path with ``2n`` steps, as its ``2n + 1`` partial sums (cycle lemma)."""
    if n < 1:
        raise ValueError("need n >= 1")
    steps = [1] * n + [-1] * (n + 1)
    rng.shuffle(steps)
    partial, low, low_at = 0, 0, 0
    for i, s in enumerate(steps):
        partial += s
        if partial < low:
            low, low_at = partial, i + 1
    rotated = steps[low_at:] + steps[:low_at]
    walk = [0]
    for s in rotated[:-1]:
        walk.append(walk[-1] + s)
    return walk


def excursion_walk(n: int, rng: random.Random) -> HeightFunction:
    """Dyck excursion of ``2n`` steps with time step ``1/n`` and height step ``n**-1/2``.

    The height scale is exact for perfect squares and otherwise the dyadic
    rational nearest to ``n**-1/2`` at 32 bits.
    """
    walk = dyck_path(n, rng)
    scale = _inverse_sqrt(n)
    return HeightFunction.from_points(
        (Fraction(i, n), w * scale) for i, w in enumerate(walk)
    ).canonical()


def lifo_height(arrival_rate: float, service_pmf: Mapping, x0, horizon, rng: random.Random) -> HeightFunction:
    """Time-reversed load of a LIFO queue: unit drift down, compound-Poisson jumps up.

    The load starts at ``x0``, drains at unit speed and jumps by a service
    requirement drawn from ``service_pmf`` at the arrival times of a Poisson
    process (exponential gaps rounded to dyadic rationals).  The path is run
    until it hits 0 and then read backwards, which turns its upward jumps
    into the downward jumps of a height function.
    """
    x0 = Q(x0)
    horizon = Q(horizon)
    if x0 <= 0:
        raise ValueError("initial load must be positive")
    sizes = [Q(s) for s in service_pmf]
    probs = [float(service_pmf[s]) for s in service_pmf]
    if arrival_rate < 0:
        raise ValueError("arrival rate must be non-negative")
    if arrival_rate > 0 and (not sizes or sum(probs) <= 0 or any(s <= 0 for s in sizes)):
        raise ValueError("service pmf must put positive weight on positive sizes")
    s, x = Fraction(0), x0
    arrivals: List[Tuple[Fraction, Fraction, Fraction]] = []
    while True:
        if arrival_rate > 0:
            gap = max(dyadic(rng.expovariate(arrival_rate), 32), Fraction(1, 1 << 32))
        else:
            gap = None
        if gap is None or x - gap <= 0:
            end = s + x
            break
        s += gap
        if s > horizon:
            raise RuntimeError(f"queue did not drain before the horizon {horizon}")
        pre = x - gap
        x = pre + rng.choices(sizes, probs)[0]
        arrivals.append((s, pre, x))
    knots = [Knot(0, 0, 0)]
    for a, pre, post in reversed(arrivals):
        knots.append(Knot(end - a, post, pre))
    knots.append(Knot(end, x0, x0))
    return HeightFunction(tuple(knots)).canonical()


def random_height_function(rng: random.Random, pieces: int = 8, denominator: int = 4,
                           allow_falls: bool = True) -> HeightFunction:
    """Random piecewise-linear element of H with small rational knots.

    Mixes rises, plateaus, falls and downward jumps, so the result is in
    general not minimal.
    """
    knots = [Knot(0, 0, 0)]
    t = y = Fraction(0)
    for _ in range(pieces):
        t += Fraction(rng.randint(1, 2 * denominator), denominator)
        move = rng.choice(("up", "up", "flat", "down") if allow_falls else ("up", "up", "flat"))
        if move == "up":
            y += Fraction(rng.randint(1, 2 * denominator), denominator)
        elif move == "down" and y > 0:
            y -= Fraction(rng.randint(1, int(y * denominator)), denominator) if y * denominator >= 1 else y
        y_left = y
        if rng.random() < 0.3 and y > 0:
            y = y - y * Fraction(rng.randint(1, denominator), denominator)
        knots.append(Knot(t, y_left, y))
    last = knots[-1]
    knots[-1] = Knot(last.t, last.y_left, last.y_left)
    return HeightFunction(tuple(knots))


# -- structured trees ----------------------------------------------------------------------


@dataclass(frozen=True)
class RandomTreeParams:
    max_vertices: int = 20
    min_density: Fraction = Fraction(1, 4)
    max_density: Fraction = Fraction(4)
    max_atoms: int = 5
    max_length: Fraction = Fraction(2)
    grid: int = 4

    def validate(self) -> List[str]:
        problems = []
        if self.max_vertices < 1:
            problems.append("max_vertices must be >= 1")
        if not 0 < self.min_density <= self.max_density:
            problems.append("need 0 < min_density <= max_density")
        if self.max_atoms < 0:
            problems.append("max_atoms must be >= 0")
        if self.max_length <= 0 or self.grid < 1:
            problems.append("max_length and grid must be positive")
        return problems


def random_structured_tree(params: RandomTreeParams, rng: random.Random) -> StructuredTree:
    """Random recursive tree with grid-rational lengths, densities in range, a few atoms."""
    problems = params.validate()
    if problems:
        raise ValueError("; ".join(problems))
    g = params.grid
    k = rng.randint(1, params.max_vertices)
    vertices = [f"v{i}" for i in range(k)]
    edges = []
    max_steps = max(1, int(params.max_length * g))
    for i in range(1, k):
        parent = vertices[rng.randrange(i)]
        edges.append(Edge(f"e{i}", parent, vertices[i], Fraction(rng.randint(1, max_steps), g)))
    tree = RealTree("v0", tuple(vertices), tuple(edges))
    lo, hi = Q(params.min_density), Q(params.max_density)
    dens = {e.id: lo + (hi - lo) * Fraction(rng.randint(0, 8), 8) for e in edges}

    candidates: List[TreePoint] = [Vertex(v) for v in vertices]
    candidates += [EdgePoint(e.id, e.length * Fraction(j, 4)) for e in edges for j in (1, 2, 3)]
    n_atoms = rng.randint(1 if k == 1 else 0, min(params.max_atoms, len(candidates)) if params.max_atoms else 0)
    if k == 1:
        n_atoms = max(n_atoms, 1)
    spots = rng.sample(candidates, n_atoms)
    atoms = tuple((p, Fraction(rng.randint(1, 8), 8)) for p in spots)
    return StructuredTree(tree, shuffle(tree, rng), TreeMeasure(dens, atoms))


def segment_tree(length=1) -> StructuredTree:
    tree = RealTree.from_parents("r", [("a", "r", Q(length))])
    return StructuredTree.build(tree)


def star_tree(arms: int = 3, length=1) -> StructuredTree:
    """Root with ``arms`` leaves hanging directly below it."""
    tree = RealTree.from_parents("r", [(f"l{i}", "r", Q(length)) for i in range(1, arms + 1)])
    return StructuredTree.build(tree)


def y_tree() -> StructuredTree:
    """Root, a unit stem to the branch point ``b``, two unit arms; left arm first."""
    tree = RealTree.from_parents("r", [("b", "r", 1), ("l1", "b", 1), ("l2", "b", 1)])
    return StructuredTree.build(tree)


def remark_segment() -> StructuredTree:
    """Unit segment with density 2/3 and an atom of mass 1/3 at its midpoint."""
    tree = RealTree.from_parents("r", [("a", "r", 1)])
    mu = TreeMeasure({"ea": Fraction(2, 3)}, ((EdgePoint("ea", Fraction(1, 2)), Fraction(1, 3)),))
    return StructuredTree.build(tree, measure=mu)
