"""Finite rooted real trees with exact edge lengths.

Points of a tree are either a :class:`Vertex` or an :class:`EdgePoint`
strictly inside an edge; :meth:`RealTree.point_on` normalizes edge offsets
that hit an endpoint back to the vertex form.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

from .rational import Q


class ForeignPointError(ValueError):
    """A point (or id) that does not belong to the tree at hand."""


@dataclass(frozen=True, order=True)
class Vertex:
    id: str

    def __str__(self):
        return self.id


@dataclass(frozen=True, order=True)
class EdgePoint:
    edge: str
    offset: Fraction

    def __post_init__(self):
        object.__setattr__(self, "offset", Q(self.offset))

    def __str__(self):
        return f"{self.edge}@{self.offset}"


TreePoint = Union[Vertex, EdgePoint]


@dataclass(frozen=True)
class Edge:
    id: str
    parent: str
    child: str
    length: Fraction

    def __post_init__(self):
        object.__setattr__(self, "length", Q(self.length))


@dataclass(frozen=True)
class RealTree:
    root: str
    vertices: Tuple[str, ...]
    edges: Tuple[Edge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(
            self, "edges", tuple(e if isinstance(e, Edge) else Edge(*e) for e in self.edges)
        )

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_parents(cls, root: str, parents: Sequence[Tuple[str, str, object]]):
        """Build from ``(child, parent, length)`` triples; edge ids are ``e<child>``."""
        vertices = [root] + [c for c, _, _ in parents]
        edges = [Edge(f"e{c}", p, c, Q(length)) for c, p, length in parents]
        return cls(root, tuple(vertices), tuple(edges))

    @classmethod
    def point_tree(cls, root: str = "r"):
        return cls(root, (root,), ())

    # -- cached structure ----------------------------------------------------

    @cached_property
    def edge(self) -> Dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def parent_edge(self) -> Dict[str, Edge]:
        return {e.child: e for e in self.edges}

    @cached_property
    def child_edges(self) -> Dict[str, List[Edge]]:
        out: Dict[str, List[Edge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            out.setdefault(e.parent, []).append(e)
        return out

    @cached_property
    def _vertex_set(self) -> Set[str]:
        return set(self.vertices)

    @cached_property
    def depth(self) -> Dict[str, Fraction]:
        depth = {self.root: Fraction(0)}
        for v in self.preorder():
            for e in self.child_edges[v]:
                depth[e.child] = depth[v] + e.length
        return depth

    @cached_property
    def level(self) -> Dict[str, int]:
        level = {self.root: 0}
        for v in self.preorder():
            for e in self.child_edges[v]:
                level[e.child] = level[v] + 1
        return level

    def preorder(self) -> List[str]:
        """Vertices in depth-first order following the stored edge order."""
        out, stack = [], [self.root]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(e.child for e in reversed(self.child_edges.get(v, [])))
        return out

    def validate(self) -> List[str]:
        """Structural problems; empty means a finite rooted tree with positive lengths."""
        problems = []
        if self.root not in self._vertex_set:
            problems.append(f"root {self.root!r} is not a vertex")
        if len(self._vertex_set) != len(self.vertices):
            problems.append("duplicate vertex ids")
        if len(self.edge) != len(self.edges):
            problems.append("duplicate edge ids")
        seen_children = set()
        for e in self.edges:
            if e.parent not in self._vertex_set or e.child not in self._vertex_set:
                problems.append(f"edge {e.id} references an unknown vertex")
            if e.length <= 0:
                problems.append(f"edge {e.id} has non-positive length {e.length}")
            if e.child == self.root:
                problems.append(f"edge {e.id} points into the root")
            if e.child in seen_children:
                problems.append(f"vertex {e.child} has more than one parent")
            seen_children.add(e.child)
        if len(self.edges) != len(self.vertices) - 1:
            problems.append("edge count must be vertex count - 1")
        if not problems:
            reached = set(self.preorder())
            if reached != self._vertex_set:
                problems.append("tree is not connected")
        return problems

    # -- points ----------------------------------------------------------------

    def point_on(self, edge_id: str, offset) -> TreePoint:
        e = self._edge_or_raise(edge_id)
        offset = Q(offset)
        if offset < 0 or offset > e.length:
            raise ForeignPointError(f"offset {offset} outside edge {edge_id}")
        if offset == 0:
            return Vertex(e.parent)
        if offset == e.length:
            return Vertex(e.child)
        return EdgePoint(edge_id, offset)

    def normalize(self, p: TreePoint) -> TreePoint:
        self.check_point(p)
        if isinstance(p, EdgePoint):
            return self.point_on(p.edge, p.offset)
        return p

    def _edge_or_raise(self, edge_id: str) -> Edge:
        try:
            return self.edge[edge_id]
        except KeyError:
            raise ForeignPointError(f"unknown edge {edge_id!r}") from None

    def check_point(self, p: TreePoint) -> None:
        if isinstance(p, Vertex):
            if p.id not in self._vertex_set:
                raise ForeignPointError(f"unknown vertex {p.id!r}")
        elif isinstance(p, EdgePoint):
            e = self._edge_or_raise(p.edge)
            if not 0 < p.offset < e.length:
                raise ForeignPointError(f"offset {p.offset} not interior to edge {p.edge}")
        else:
            raise ForeignPointError(f"not a tree point: {p!r}")

    def _locate(self, p: TreePoint) -> Tuple[str, Optional[Edge], Fraction]:
        """Highest vertex at or below ``p``, the edge ``p`` sits on, and the offset."""
        p = self.normalize(p)
        if isinstance(p, Vertex):
            return p.id, None, Fraction(0)
        e = self.edge[p.edge]
        return e.parent, e, p.offset

    def height(self, p: TreePoint) -> Fraction:
        """Distance from the root."""
        v, _, off = self._locate(p)
        return self.depth[v] + off

    def vertex_ancestors(self, v: str) -> List[str]:
        """``v`` and its ancestors, from ``v`` up to the root."""
        out = [v]
        while out[-1] != self.root:
            out.append(self.parent_edge[out[-1]].parent)
        return out

    def _lca(self, u: str, v: str) -> str:
        while self.level[u] > self.level[v]:
            u = self.parent_edge[u].parent
        while self.level[v] > self.level[u]:
            v = self.parent_edge[v].parent
        while u != v:
            u = self.parent_edge[u].parent
            v = self.parent_edge[v].parent
        return u

    def _edge_towards(self, top: str, below: str) -> Edge:
        """The child edge of ``top`` on the path down to its strict descendant ``below``."""
        while True:
            e = self.parent_edge[below]
            if e.parent == top:
                return e
            below = e.parent

    # -- metric operations -------------------------------------------------------

    def wedge(self, x: TreePoint, y: TreePoint) -> TreePoint:
        """Branch point of ``x`` and ``y`` seen from the root."""
        ux, ex, ox = self._locate(x)
        uy, ey, oy = self._locate(y)
        w = self._lca(ux, uy)
        if w == ux == uy:
            if ex is not None and ey is not None and ex.id == ey.id:
                return self.point_on(ex.id, min(ox, oy))
            return Vertex(w)
        if w == ux and ex is not None:
            if self._edge_towards(ux, uy).id == ex.id:
                return self.normalize(x)
        if w == uy and ey is not None:
            if self._edge_towards(uy, ux).id == ey.id:
                return self.normalize(y)
        return Vertex(w)

    def is_ancestor(self, x: TreePoint, y: TreePoint) -> bool:
        """True iff ``x`` lies on the segment from the root to ``y``."""
        return self.wedge(x, y) == self.normalize(x)

    def _wedge_height(self, lx, ly) -> Fraction:
        """Height of the wedge of two points given by their ``_locate`` tuples."""
        (ux, ex, ox), (uy, ey, oy) = lx, ly
        w = self._lca(ux, uy)
        if w == ux == uy:
            if ex is not None and ey is not None and ex.id == ey.id:
                return self.depth[w] + min(ox, oy)
            return self.depth[w]
        if w == ux and ex is not None and self._edge_towards(ux, uy).id == ex.id:
            return self.depth[ux] + ox
        if w == uy and ey is not None and self._edge_towards(uy, ux).id == ey.id:
            return self.depth[uy] + oy
        return self.depth[w]

    def distance(self, x: TreePoint, y: TreePoint) -> Fraction:
        lx, ly = self._locate(x), self._locate(y)
        return self.depth[lx[0]] + lx[2] + self.depth[ly[0]] + ly[2] - 2 * self._wedge_height(lx, ly)

    def four_point_check(self, x1, x2, x3, x4) -> bool:
        """Four-point condition, compared through wedge heights.

        Each pairing of d(x, y) = |x| + |y| - 2 |x ^ y| sums the same four
        heights, so only the wedge heights matter.
        """
        locs = [self._locate(x) for x in (x1, x2, x3, x4)]

        def w(i, j):
            return self._wedge_height(locs[i], locs[j])

        return w(0, 1) + w(2, 3) >= min(w(0, 2) + w(1, 3), w(0, 3) + w(1, 2))

    def degree(self, p: TreePoint) -> int:
        """Number of connected components of the tree with ``p`` removed."""
        p = self.normalize(p)
        if isinstance(p, EdgePoint):
            return 2
        n = len(self.child_edges.get(p.id, []))
        return n if p.id == self.root else n + 1

    def classify(self) -> Tuple[List[str], List[str], str]:
        """``(leaves, branch_points, root)``; the root is in neither list."""
        leaves, branch = [], []
        for v in self.vertices:
            if v == self.root:
                continue
            deg = self.degree(Vertex(v))
            if deg == 1:
                leaves.append(v)
            elif deg >= 3:
                branch.append(v)
        return leaves, branch, self.root

    def total_length(self) -> Fraction:
        return sum((e.length for e in self.edges), Fraction(0))

    def span(self, points: Iterable[TreePoint]) -> "RealTree":
        """Union of the root segments of ``points``, with plain degree-2 vertices merged."""
        points = [self.normalize(p) for p in points]
        if not points:
            raise ValueError("span of an empty point set")
        full: Set[str] = set()
        partial: Dict[str, Fraction] = {}
        for p in points:
            v, e, off = self._locate(p)
            if e is not None:
                partial[e.id] = max(partial.get(e.id, Fraction(0)), off)
            while v != self.root:
                pe = self.parent_edge[v]
                full.add(pe.id)
                v = pe.parent
        keep_vertices = [self.root]
        edges: List[Edge] = []
        marked = set()
        for e in self.edges:
            if e.id in full:
                keep_vertices.append(e.child)
                edges.append(e)
            elif e.id in partial:
                tip = f"{e.id}@{partial[e.id]}"
                keep_vertices.append(tip)
                edges.append(Edge(e.id, e.parent, tip, partial[e.id]))
        for p in points:
            if isinstance(p, Vertex):
                marked.add(p.id)
        sub = RealTree(self.root, tuple(keep_vertices), tuple(edges))
        return sub.suppress_degree_two(keep=marked)

    def suppress_degree_two(self, keep: Iterable[str] = ()) -> "RealTree":
        """Merge every non-root vertex with exactly one child, except those in ``keep``."""
        keep = set(keep)
        vertices: List[str] = []
        edges: List[Edge] = []
        stack: List[Tuple[str, Optional[Edge]]] = [(self.root, None)]
        while stack:
            v, incoming = stack.pop()
            kids = self.child_edges.get(v, [])
            if incoming is not None and len(kids) == 1 and v not in keep:
                e = kids[0]
                stack.append((e.child, Edge(incoming.id, incoming.parent, e.child,
                                            incoming.length + e.length)))
                continue
            vertices.append(v)
            if incoming is not None:
                edges.append(Edge(incoming.id, incoming.parent, v, incoming.length))
            for e in reversed(kids):
                stack.append((e.child, e))
        return RealTree(self.root, tuple(vertices), tuple(edges))

    def subdivide(self, points: Iterable[TreePoint]) -> Tuple["RealTree", Dict[TreePoint, str], Dict[str, List[str]]]:
        """Insert a vertex at every edge-interior point in ``points``.

        Returns the new tree, the vertex id now carrying each given point, and
        for every old edge the list of new edge ids from top to bottom.
        """
        cuts: Dict[str, Set[Fraction]] = defaultdict(set)
        where: Dict[TreePoint, str] = {}
        for p in points:
            p = self.normalize(p)
            if isinstance(p, EdgePoint):
                cuts[p.edge].add(p.offset)
            else:
                where[p] = p.id
        vertices = list(self.vertices)
        edges: List[Edge] = []
        pieces: Dict[str, List[str]] = {}
        for e in self.edges:
            offs = sorted(cuts.get(e.id, ()))
            if not offs:
                edges.append(e)
                pieces[e.id] = [e.id]
                continue
            names = []
            top, top_off = e.parent, Fraction(0)
            for k, off in enumerate(offs):
                mid = f"{e.id}@{off}"
                vertices.append(mid)
                where[EdgePoint(e.id, off)] = mid
                name = f"{e.id}.{k}"
                edges.append(Edge(name, top, mid, off - top_off))
                names.append(name)
                top, top_off = mid, off
            name = f"{e.id}.{len(offs)}"
            edges.append(Edge(name, top, e.child, e.length - top_off))
            names.append(name)
            pieces[e.id] = names
        return RealTree(self.root, tuple(vertices), tuple(edges)), where, pieces

    def witness_points(self, offsets: Sequence[Fraction] = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))) -> List[TreePoint]:
        """Every vertex plus edge points at the given relative offsets."""
        pts: List[TreePoint] = [Vertex(v) for v in self.vertices]
        for e in self.edges:
            pts.extend(EdgePoint(e.id, e.length * f) for f in offsets)
        return pts


def validate_tree(T: RealTree) -> List[str]:
    return T.validate()


def distance(T: RealTree, x: TreePoint, y: TreePoint) -> Fraction:
    return T.distance(x, y)


def wedge(T: RealTree, x: TreePoint, y: TreePoint) -> TreePoint:
    return T.wedge(x, y)


def degree(T: RealTree, x: TreePoint) -> int:
    return T.degree(x)


def classify(T: RealTree) -> Tuple[List[str], List[str], str]:
    return T.classify()


def total_length(T: RealTree) -> Fraction:
    return T.total_length()


def span(T: RealTree, points: Iterable[TreePoint]) -> RealTree:
    return T.span(points)


def four_point_check(T: RealTree, x1, x2, x3, x4) -> bool:
    return T.four_point_check(x1, x2, x3, x4)
