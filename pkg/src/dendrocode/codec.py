"""Coding structured trees by height functions and back.

``encode`` explores the tree depth-first in its planar order, spending
``density * length`` time along each edge and ``mass`` time at each atom, and
backtracks by instantaneous downward jumps.  The result is the unique
minimal height function coding the tree.  ``decode`` rebuilds the tree
coded by any piecewise-linear height function with a stack sweep.
"""
from __future__ import annotations

import random
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate
from typing import Dict, Iterator, List, Sequence, Set, Tuple

from .height import HeightFunction, Knot, PiecewiseLinear, validate
from .order import (PlanarOrder, StructuredTree, TreeMeasure, check_mes, order_key)
from .tree import Edge, EdgePoint, RealTree, TreePoint, Vertex


class MesViolation(ValueError):
    """The measure gives zero density to some edge, so the coding is not unique."""


class EmptyMeasure(ValueError):
    """Sampling was asked of a measure with no mass at all."""


# -- depth-first walk ---------------------------------------------------------------


def _stops(S: StructuredTree, extra: Sequence[TreePoint] = ()):
    """Atom locations (plus ``extra`` points) split into vertex stops and sorted edge offsets."""
    T = S.tree
    vertex_stops: Set[str] = set()
    edge_stops: Dict[str, Set[Fraction]] = {}
    for p in [p for p, m in S.measure.atoms if m > 0] + list(extra):
        p = T.normalize(p)
        if isinstance(p, Vertex):
            vertex_stops.add(p.id)
        else:
            edge_stops.setdefault(p.edge, set()).add(p.offset)
    return vertex_stops, {e: sorted(offs) for e, offs in edge_stops.items()}


def _walk(S: StructuredTree, extra: Sequence[TreePoint] = ()) -> Iterator[Tuple]:
    """Depth-first exploration events in planar order.

    Yields ``("rise", edge, a, b)`` for climbing edge offsets ``a -> b``,
    ``("stop", point)`` at atom locations on first arrival, and
    ``("jump", vertex)`` when the exploration backtracks to ``vertex`` before
    taking its next child edge.
    """
    T = S.tree
    vertex_stops, edge_stops = _stops(S, extra)
    if T.root in vertex_stops:
        yield ("stop", Vertex(T.root))
    stack = [[T.root, 0]]
    while stack:
        top = stack[-1]
        kids = S.ordered_children(top[0])
        if top[1] == len(kids):
            stack.pop()
            continue
        i = top[1]
        top[1] += 1
        if i > 0:
            yield ("jump", top[0])
        e = kids[i]
        pos = Fraction(0)
        for off in edge_stops.get(e.id, ()):
            yield ("rise", e, pos, off)
            yield ("stop", EdgePoint(e.id, off))
            pos = off
        yield ("rise", e, pos, e.length)
        if e.child in vertex_stops:
            yield ("stop", Vertex(e.child))
        stack.append([e.child, 0])


def _require_mes(S: StructuredTree) -> None:
    if not check_mes(S):
        bad = [e.id for e in S.tree.edges if S.measure.density(e.id) <= 0]
        raise MesViolation(f"edges with zero density: {', '.join(bad)}")


def encode(S: StructuredTree) -> HeightFunction:
    """The minimal height function coding ``S``; its lifetime is the total mass.

    A massless point tree is coded by the zero function on ``[0, 0]``.
    """
    _require_mes(S)
    T = S.tree
    knots: List[Knot] = [Knot(0, 0, 0)]
    t = Fraction(0)
    for event in _walk(S):
        kind = event[0]
        if kind == "rise":
            _, e, a, b = event
            t += S.measure.density(e.id) * (b - a)
            y = T.depth[e.parent] + b
            knots.append(Knot(t, y, y))
        elif kind == "stop":
            m = S.measure.atom_mass(T, event[1])
            if m > 0:
                t += m
                y = T.height(event[1])
                knots.append(Knot(t, y, y))
        else:
            last = knots[-1]
            knots[-1] = Knot(last.t, last.y_left, T.depth[event[1]])
    return HeightFunction(tuple(knots)).canonical()


# -- exploration mapping ---------------------------------------------------------------


@dataclass(frozen=True)
class ExplorationState:
    t: Fraction
    sigma_minus: TreePoint
    sigma_plus: TreePoint
    m_t: Fraction
    M_t: Fraction


def _segments(S: StructuredTree) -> List[Tuple]:
    """Exploration segments ``(t0, t1, kind, data)`` covering ``(0, mass]``."""
    T = S.tree
    out = []
    t = Fraction(0)
    for event in _walk(S):
        if event[0] == "rise":
            _, e, a, b = event
            dt = S.measure.density(e.id) * (b - a)
            out.append((t, t + dt, "rise", (e, a, b)))
            t += dt
        elif event[0] == "stop":
            m = S.measure.atom_mass(T, event[1])
            if m > 0:
                out.append((t, t + m, "atom", event[1]))
                t += m
    return out


def exploration_point(S: StructuredTree, t) -> ExplorationState:
    """Point visited at exploration time ``t``, with its right limit and the bracketing masses."""
    _require_mes(S)
    T = S.tree
    t = Fraction(t)
    M = S.total_mass
    if t < 0 or t > M:
        raise ValueError(f"time {t} outside [0, {M}]")
    segs = _segments(S)
    ends = [s[1] for s in segs]

    def start_point(seg):
        _, _, kind, data = seg
        if kind == "atom":
            return data
        e, a, _ = data
        return T.point_on(e.id, a)

    def point_at(seg, u):
        t0, _, kind, data = seg
        if kind == "atom":
            return data
        e, a, _ = data
        return T.point_on(e.id, a + (u - t0) / S.measure.density(e.id))

    if t == 0:
        minus = plus = Vertex(T.root)
    else:
        k = bisect_right(ends, t)
        k = k - 1 if k and ends[k - 1] == t else k
        seg = segs[k]
        minus = point_at(seg, t)
        if t < seg[1]:
            plus = minus
        elif k + 1 < len(segs):
            plus = start_point(segs[k + 1])
        else:
            plus = minus
    m_t = M_t = t
    for t0, t1, kind, _ in segs:
        if kind == "atom" and t0 <= t < t1:
            m_t, M_t = t0, t1
            break
    return ExplorationState(t, T.normalize(minus), T.normalize(plus), m_t, M_t)


# -- decoding ---------------------------------------------------------------------------


def decode(h: HeightFunction) -> StructuredTree:
    """The structured tree coded by ``h`` (tree, first-visit order, push-forward of Lebesgue)."""
    problems = validate(h)
    if problems:
        raise ValueError("not a height function: " + "; ".join(problems))
    height: Dict[str, Fraction] = {"root": Fraction(0)}
    parent_edge: Dict[str, str] = {}
    edges: Dict[str, List] = {}  # id -> [parent, child, density]
    kids: Dict[str, List[str]] = {"root": []}
    atom: Dict[str, Fraction] = {}
    stack = ["root"]
    counter = [0]

    def new_vertex(y):
        counter[0] += 1
        v = f"n{counter[0]}"
        height[v] = y
        kids[v] = []
        return v

    def split(c: str, y: Fraction) -> str:
        e = parent_edge[c]
        p, _, dens = edges[e]
        w = new_vertex(y)
        e2 = f"s{w}"
        edges[e] = [p, w, dens]
        edges[e2] = [w, c, dens]
        kids[w] = [e2]
        parent_edge[w] = e
        parent_edge[c] = e2
        return w

    def descend(y: Fraction, add: Fraction) -> None:
        while height[stack[-1]] > y:
            c = stack.pop()
            p = stack[-1]
            if height[p] < y:
                w = split(c, y)
                edges[parent_edge[c]][2] += add
                stack.append(w)
                return
            edges[parent_edge[c]][2] += add

    for i, (t0, t1, y0, y1) in enumerate(h.pieces()):
        knot = h.knots[i]
        if i and knot.y_right < knot.y_left:
            descend(knot.y_right, Fraction(0))
        dt = t1 - t0
        top = stack[-1]
        if y1 > y0:
            c = new_vertex(y1)
            e = f"a{c}"
            edges[e] = [top, c, dt / (y1 - y0)]
            kids[top].append(e)
            parent_edge[c] = e
            stack.append(c)
        elif y1 < y0:
            descend(y1, dt / (y0 - y1))
        else:
            atom[top] = atom.get(top, Fraction(0)) + dt
    return _assemble(height, edges, kids, atom)


def _assemble(height, edges, kids, atom) -> StructuredTree:
    """Merge plain degree-2 vertices and relabel everything in preorder."""
    names: Dict[str, str] = {}
    vertices: List[str] = []
    out_edges: List[Edge] = []
    order: Dict[str, Tuple[str, ...]] = {}
    densities: Dict[str, Fraction] = {}
    atoms: List[Tuple[TreePoint, Fraction]] = []

    def name(v):
        names[v] = f"v{len(names)}"
        vertices.append(names[v])
        if atom.get(v):
            atoms.append((Vertex(names[v]), atom[v]))
        return names[v]

    name("root")
    stack: List[Tuple[str, str]] = [("root", e) for e in reversed(kids["root"])]
    pending: Dict[str, List[str]] = {}
    while stack:
        top, e = stack.pop()
        _, c, dens = edges[e]
        length = height[c] - height[top]
        while len(kids[c]) == 1 and not atom.get(c) and edges[kids[c][0]][2] == dens:
            c = edges[kids[c][0]][1]
            length = height[c] - height[top]
        cname = name(c)
        eid = f"e{cname[1:]}"
        out_edges.append(Edge(eid, names[top], cname, length))
        densities[eid] = dens
        pending.setdefault(names[top], []).append(eid)
        stack.extend((c, k) for k in reversed(kids[c]))
    order = {v: tuple(es) for v, es in pending.items()}
    tree = RealTree("v0", tuple(vertices), tuple(out_edges))
    return StructuredTree(tree, PlanarOrder(order), TreeMeasure(densities, tuple(atoms)))


# -- equivalence ------------------------------------------------------------------------


def _vertex_atom_form(S: StructuredTree, extra: Sequence[TreePoint] = ()):
    """Subdivide edges so that every atom (and every ``extra`` point) sits on a vertex."""
    T = S.tree
    points = [p for p, m in S.measure.atoms] + list(extra)
    T2, where, pieces = T.subdivide(points)
    order = {}
    for v in T.vertices:
        order[v] = tuple(pieces[e][0] for e in S.order.children(v))
    for e, names in pieces.items():
        for upper, lower in zip(names, names[1:]):
            order[T2.edge[upper].child] = (lower,)
    dens = {new: S.measure.density(old) for old, names in pieces.items() for new in names}
    atoms = [(Vertex(where[T.normalize(p)]), m) for p, m in S.measure.atoms if m > 0]
    return StructuredTree(T2, PlanarOrder(order), TreeMeasure(dens, tuple(atoms))), where


def canonical_form(S: StructuredTree, *, with_measure: bool = True, ordered: bool = True) -> Tuple:
    """Nested-tuple invariant: equal iff an isometry preserving root (order, measure) exists."""
    S2, _ = _vertex_atom_form(S)
    T = S2.tree
    atoms: Dict[str, Fraction] = {}
    if with_measure:
        for p, m in S2.measure.atoms:
            atoms[p.id] = atoms.get(p.id, Fraction(0)) + m
    node: Dict[str, Tuple] = {}
    for v in reversed(T.preorder()):
        entries = []
        for e in S2.ordered_children(v):
            d = S2.measure.density(e.id) if with_measure else Fraction(0)
            length, below = e.length, node[e.child]
            atom_below, grand = below
            if atom_below == 0 and len(grand) == 1 and grand[0][1] == d:
                length, below = length + grand[0][0], grand[0][2]
            entries.append((length, d, below))
        if not ordered:
            entries.sort()
        node[v] = (atoms.get(v, Fraction(0)), tuple(entries))
    return node[T.root]


def equivalent(S1: StructuredTree, S2: StructuredTree, compare_measure: bool = True,
               ordered: bool = True) -> bool:
    return canonical_form(S1, with_measure=compare_measure, ordered=ordered) == canonical_form(
        S2, with_measure=compare_measure, ordered=ordered
    )


# -- time change between two measures -------------------------------------------------------


@dataclass(frozen=True)
class PiecewiseMap(PiecewiseLinear):
    """Non-decreasing left-continuous map; ``y_left``/``y_right`` are the values v(t), v(t+)."""

    def validate(self) -> List[str]:
        problems = []
        prev = None
        for i, k in enumerate(self.knots):
            if k.y_right < k.y_left:
                problems.append(f"downward jump at knot {i}")
            if prev is not None and (k.t <= prev.t or k.y_left < prev.y_right):
                problems.append(f"not non-decreasing at knot {i}")
            prev = k
        return problems

    def is_continuous(self) -> bool:
        return all(k.y_left == k.y_right for k in self.knots[:-1])

    def is_strictly_increasing(self) -> bool:
        return all(y1 > y0 for _, _, y0, y1 in self.pieces())

    def jump_intervals(self) -> List[Tuple[Fraction, Fraction, Fraction]]:
        """``(t, v(t), v(t+))`` for every jump before the end of the domain."""
        return [(k.t, k.y_left, k.y_right) for k in self.knots[:-1] if k.y_right > k.y_left]


def shared_atoms(T: RealTree, mu: TreeMeasure, mu_prime: TreeMeasure) -> List[TreePoint]:
    """Points charged by both measures; the time change is unique iff this is empty."""
    a = {T.normalize(p) for p, m in mu.atoms if m > 0}
    return sorted({T.normalize(p) for p, m in mu_prime.atoms if m > 0} & a, key=str)


def time_change(T: RealTree, order: PlanarOrder, mu: TreeMeasure, mu_prime: TreeMeasure) -> PiecewiseMap:
    """Map ``phi`` with ``encode(T, order, mu) == encode(T, order, mu_prime) o phi``.

    Inside an atom shared by both measures ``phi`` is taken affine; any
    non-decreasing bijection of that interval would do as well.
    """
    S = StructuredTree(T, order, mu)
    S_prime = StructuredTree(T, order, mu_prime)
    _require_mes(S)
    _require_mes(S_prime)
    extra = [p for p, m in mu_prime.atoms if m > 0]
    knots: List[List[Fraction]] = [[Fraction(0)] * 3]
    t = u = Fraction(0)
    for event in _walk(S, extra):
        if event[0] == "rise":
            _, e, a, b = event
            a1, a2 = mu.density(e.id) * (b - a), mu_prime.density(e.id) * (b - a)
        elif event[0] == "stop":
            a1, a2 = mu.atom_mass(T, event[1]), mu_prime.atom_mass(T, event[1])
        else:
            continue
        if a1 > 0:
            t, u = t + a1, u + a2
            knots.append([t, u, u])
        elif a2 > 0:
            u += a2
            knots[-1][2] = u
    return PiecewiseMap(tuple(Knot(*k) for k in knots)).canonical()


def compose(h_prime: HeightFunction, phi: PiecewiseMap, t) -> Fraction:
    """``h_prime(phi(t))``."""
    return h_prime.eval(phi.eval(t))


# -- Aldous-style sampled height functions ---------------------------------------------------


def _uniform_open(rng: random.Random, bits: int = 32) -> Fraction:
    """Dyadic rational uniform on the open unit interval."""
    return Fraction(2 * rng.getrandbits(bits) + 1, 1 << (bits + 1))


def point_sampler(S: StructuredTree):
    """Return ``draw(rng)`` giving points with law ``mu / mu(T)`` (dyadic-rational offsets)."""
    T = S.tree
    parts: List[Tuple[str, object, Fraction]] = [("edge", e, S.measure.density(e.id) * e.length)
                                                  for e in T.edges if S.measure.density(e.id) > 0]
    parts += [("atom", p, m) for p, m in S.measure.atoms if m > 0]
    cum = list(accumulate(w for _, _, w in parts))
    if not cum or cum[-1] <= 0:
        raise EmptyMeasure("cannot sample from a zero measure")

    def draw(rng: random.Random) -> TreePoint:
        r = Fraction(rng.getrandbits(53), 1 << 53) * cum[-1]
        kind, obj, _ = parts[bisect_right(cum, r)]
        if kind == "atom":
            return T.normalize(obj)
        return T.point_on(obj.id, obj.length * _uniform_open(rng))

    return draw


def aldous_samples(S: StructuredTree, n: int, rng: random.Random) -> List[Tuple[Fraction, TreePoint]]:
    """``[(U_0, Sigma_0), ..., (U_n, Sigma_n)]`` in sampling order, with ``Sigma_0`` the root.

    Each new sample gets a U-value uniform strictly between the U-values of its
    order-neighbours among the earlier samples, or between the largest U-value
    and 1 when it comes after all of them.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    draw = point_sampler(S)
    root = Vertex(S.tree.root)
    out = [(Fraction(0), root)]
    keys = [(order_key(S, root), 0)]
    for i in range(1, n + 1):
        p = draw(rng)
        key = (order_key(S, p), i)
        pos = bisect_right(keys, key)
        lo = out[keys[pos - 1][1]][0]
        hi = out[keys[pos][1]][0] if pos < len(keys) else Fraction(1)
        out.append((lo + (hi - lo) * _uniform_open(rng), p))
        keys.insert(pos, key)
    return out


def aldous_height(S: StructuredTree, n: int, rng: random.Random, timing: str = "uniform") -> HeightFunction:
    """Continuous height function on [0, 1] interpolating the sampled points.

    Samples are visited in U-order; between two consecutive ones the function
    dips linearly to the height of their branch point (at the midpoint in
    time) unless one is an ancestor of the other, and after the last sample it returns to 0 at time 1.  With
    ``timing="rank"`` the i-th sample is placed at ``i / (n + 1)`` instead of
    its U-value, which removes the randomness of the time parametrization.
    """
    T = S.tree
    samples = sorted(aldous_samples(S, n, rng), key=lambda s: s[0])
    if timing == "rank":
        samples = [(Fraction(i, n + 1), p) for i, (_, p) in enumerate(samples)]
    elif timing != "uniform":
        raise ValueError(f"unknown timing {timing!r}")
    pts = [(Fraction(0), Fraction(0))]
    for (u0, p0), (u1, p1) in zip(samples, samples[1:]):
        h0, h1, dip = T.height(p0), T.height(p1), T.height(T.wedge(p0, p1))
        if dip < min(h0, h1):
            pts.append(((u0 + u1) / 2, dip))
        pts.append((u1, h1))
    pts.append((Fraction(1), Fraction(0)))
    return HeightFunction.from_points(pts).canonical()


def graph_distance(f: PiecewiseLinear, g: PiecewiseLinear, step: float = 1e-3) -> float:
    """Hausdorff distance (max-norm) between the completed graphs of ``f`` and ``g``.

    Each graph includes the vertical segments at jumps and a final drop to 0
    at the end of the lifetime.  Computed in floating point by sampling every
    segment at spacing ``step``, so the result is accurate to about ``step``.
    """
    import numpy as np
    from scipy.spatial import cKDTree

    def cloud(h):
        verts = []
        for k in h.knots:
            verts.append((float(k.t), float(k.y_left)))
            verts.append((float(k.t), float(k.y_right)))
        verts[-1] = (float(h.lifetime), 0.0)
        v = np.array(verts)
        start, delta = v[:-1], np.diff(v, axis=0)
        counts = (np.abs(delta).max(axis=1) / step).astype(int) + 2
        seg = np.repeat(np.arange(len(delta)), counts)
        first = np.repeat(np.cumsum(counts) - counts, counts)
        frac = (np.arange(len(seg)) - first) / (counts[seg] - 1)
        return start[seg] + frac[:, None] * delta[seg]

    a, b = cloud(f), cloud(g)
    da = cKDTree(b).query(a, p=np.inf)[0].max()
    db = cKDTree(a).query(b, p=np.inf)[0].max()
    return float(max(da, db))
