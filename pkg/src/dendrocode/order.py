"""Compatible linear orders and finite measures on finite rooted trees.

A :class:`PlanarOrder` lists the child edges of every vertex.  The induced
linear order on points puts an ancestor before its descendants and otherwise
compares the child components at the branch point.  Measures are uniform
densities on edges plus finitely many atoms.

On this measure class the compatibility condition (Mes) is equivalent to
every edge density being positive: a zero-density edge has two
order-adjacent points with an empty open interval between them, while a
positive density puts mass on the skeleton segment that every non-empty open
order-interval contains.
"""
from __future__ import annotations

import enum
import functools
import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .rational import Q
from .tree import Edge, EdgePoint, RealTree, TreePoint, Vertex


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class PlanarOrder:
    """Linear order of the child edges at every vertex, as ``vertex -> edge ids``."""

    child_order: Mapping[str, Tuple[str, ...]]

    def __post_init__(self):
        object.__setattr__(
            self, "child_order", {v: tuple(es) for v, es in self.child_order.items() if es}
        )

    @classmethod
    def default(cls, tree: RealTree) -> "PlanarOrder":
        return cls({v: tuple(e.id for e in es) for v, es in tree.child_edges.items()})

    def children(self, v: str) -> Tuple[str, ...]:
        return self.child_order.get(v, ())

    def validate(self, tree: RealTree) -> List[str]:
        problems = []
        for v, es in tree.child_edges.items():
            want = sorted(e.id for e in es)
            have = sorted(self.children(v))
            if want != have:
                problems.append(f"vertex {v}: order lists {have}, tree has {want}")
        for v in self.child_order:
            if v not in tree.child_edges:
                problems.append(f"order mentions unknown vertex {v}")
        return problems


@dataclass(frozen=True)
class TreeMeasure:
    """Uniform density per edge plus point masses."""

    densities: Mapping[str, Fraction] = field(default_factory=dict)
    atoms: Tuple[Tuple[TreePoint, Fraction], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "densities", {e: Q(d) for e, d in self.densities.items()})
        object.__setattr__(self, "atoms", tuple((p, Q(m)) for p, m in self.atoms))

    @classmethod
    def uniform(cls, tree: RealTree, density=1, atoms=()) -> "TreeMeasure":
        return cls({e.id: Q(density) for e in tree.edges}, tuple(atoms))

    def density(self, edge_id: str) -> Fraction:
        return self.densities.get(edge_id, Fraction(0))

    def atom_mass(self, tree: RealTree, p: TreePoint) -> Fraction:
        p = tree.normalize(p)
        return sum((m for q, m in self.atoms if tree.normalize(q) == p), Fraction(0))

    def total_mass(self, tree: RealTree) -> Fraction:
        return sum((self.density(e.id) * e.length for e in tree.edges), Fraction(0)) + sum(
            (m for _, m in self.atoms), Fraction(0)
        )

    def has_atoms(self) -> bool:
        return any(m > 0 for _, m in self.atoms)

    def validate(self, tree: RealTree) -> List[str]:
        problems = []
        for e, d in self.densities.items():
            if e not in tree.edge:
                problems.append(f"density on unknown edge {e}")
            if d < 0:
                problems.append(f"negative density on edge {e}")
        seen = set()
        for p, m in self.atoms:
            try:
                q = tree.normalize(p)
            except ValueError as exc:
                problems.append(f"atom at foreign point: {exc}")
                continue
            if m <= 0:
                problems.append(f"atom at {q} has non-positive mass")
            if q in seen:
                problems.append(f"two atoms at {q}")
            seen.add(q)
        if tree.edges and self.total_mass(tree) <= 0:
            problems.append("measure has zero total mass")
        return problems


@dataclass(frozen=True)
class StructuredTree:
    tree: RealTree
    order: PlanarOrder
    measure: TreeMeasure

    @classmethod
    def build(cls, tree: RealTree, order: Optional[PlanarOrder] = None,
              measure: Optional[TreeMeasure] = None) -> "StructuredTree":
        return cls(tree, order or PlanarOrder.default(tree), measure or TreeMeasure.uniform(tree))

    def validate(self) -> List[str]:
        return self.tree.validate() + self.order.validate(self.tree) + self.measure.validate(self.tree)

    @property
    def total_mass(self) -> Fraction:
        return self.measure.total_mass(self.tree)

    def ordered_children(self, v: str) -> List[Edge]:
        return [self.tree.edge[e] for e in self.order.children(v)]

    @cached_property
    def _child_index(self) -> Dict[str, int]:
        return {e: i for es in self.order.child_order.values() for i, e in enumerate(es)}

    @cached_property
    def _atoms_on_edge(self) -> Dict[str, List[Tuple[Fraction, Fraction]]]:
        out: Dict[str, List[Tuple[Fraction, Fraction]]] = {}
        for p, m in self.measure.atoms:
            p = self.tree.normalize(p)
            if isinstance(p, EdgePoint):
                out.setdefault(p.edge, []).append((p.offset, m))
        return out

    @cached_property
    def _vertex_atom(self) -> Dict[str, Fraction]:
        out: Dict[str, Fraction] = {}
        for p, m in self.measure.atoms:
            p = self.tree.normalize(p)
            if isinstance(p, Vertex):
                out[p.id] = out.get(p.id, Fraction(0)) + m
        return out

    def edge_mass(self, edge_id: str) -> Fraction:
        """Mass of the open edge: density part plus interior atoms."""
        e = self.tree.edge[edge_id]
        return self.measure.density(edge_id) * e.length + sum(
            (m for _, m in self._atoms_on_edge.get(edge_id, ())), Fraction(0)
        )

    @cached_property
    def subtree_mass(self) -> Dict[str, Fraction]:
        """Mass of the closed subtree hanging from each vertex."""
        mass: Dict[str, Fraction] = {}
        for v in reversed(self.tree.preorder()):
            total = self._vertex_atom.get(v, Fraction(0))
            for e in self.tree.child_edges.get(v, []):
                total += self.edge_mass(e.id) + mass[e.child]
            mass[v] = total
        return mass

    @cached_property
    def _vertex_keys(self) -> Dict[str, Tuple]:
        keys: Dict[str, Tuple] = {self.tree.root: ()}
        for v in self.tree.preorder():
            for e in self.tree.child_edges.get(v, []):
                keys[e.child] = keys[v] + ((self._child_index[e.id], e.length),)
        return keys

    @cached_property
    def _left_before_vertex(self) -> Dict[str, Fraction]:
        """Mass of points strictly before each vertex, excluding the vertex's own atom."""
        before = {self.tree.root: Fraction(0)}
        for v in self.tree.preorder():
            running = before[v] + self._vertex_atom.get(v, Fraction(0))
            for e in self.ordered_children(v):
                before[e.child] = running + self.edge_mass(e.id)
                running += self.edge_mass(e.id) + self.subtree_mass[e.child]
        return before


def order_key(S: StructuredTree, x: TreePoint) -> Tuple:
    """Sort key realising the induced order: x <= y iff key(x) <= key(y)."""
    v, e, off = S.tree._locate(x)
    key = S._vertex_keys[v]
    if e is not None:
        key = key + ((S._child_index[e.id], off),)
    return key


def compare(S: StructuredTree, x: TreePoint, y: TreePoint) -> Ordering:
    """Compare two points: ancestors first, otherwise by the child components at the wedge."""
    T = S.tree
    x, y = T.normalize(x), T.normalize(y)
    if x == y:
        return Ordering.EQUAL
    w = T.wedge(x, y)
    if w == x:
        return Ordering.LESS
    if w == y:
        return Ordering.GREATER
    assert isinstance(w, Vertex)
    ix = S._child_index[_component_edge(T, w.id, x).id]
    iy = S._child_index[_component_edge(T, w.id, y).id]
    return Ordering.LESS if ix < iy else Ordering.GREATER


def _component_edge(T: RealTree, w: str, p: TreePoint) -> Edge:
    u, e, _ = T._locate(p)
    if u == w:
        assert e is not None
        return e
    return T._edge_towards(w, u)


def enumerate_compatible_orders(T: RealTree) -> Iterator[PlanarOrder]:
    """All planar orders: one permutation of the child edges per vertex."""
    internal = [v for v in T.vertices if T.child_edges.get(v)]
    choices = [list(itertools.permutations(e.id for e in T.child_edges[v])) for v in internal]
    for combo in itertools.product(*choices):
        yield PlanarOrder(dict(zip(internal, combo)))


def shuffle(T: RealTree, rng: random.Random) -> PlanarOrder:
    """Uniform random shuffling: independent uniform permutations at every vertex."""
    out = {}
    for v in T.vertices:
        kids = [e.id for e in T.child_edges.get(v, [])]
        rng.shuffle(kids)
        out[v] = tuple(kids)
    return PlanarOrder(out)


def left_set_measure(S: StructuredTree, x: TreePoint, include_x: bool = True) -> Fraction:
    """Mass of the points before ``x`` (and of ``x`` itself when ``include_x``)."""
    T = S.tree
    x = T.normalize(x)
    u, e, off = T._locate(x)
    total = S._left_before_vertex[u]
    if e is None:
        if include_x:
            total += S._vertex_atom.get(u, Fraction(0))
        return total
    total += S._vertex_atom.get(u, Fraction(0))
    for f in S.ordered_children(u):
        if f.id == e.id:
            break
        total += S.edge_mass(f.id) + S.subtree_mass[f.child]
    total += S.measure.density(e.id) * off
    for a_off, m in S._atoms_on_edge.get(e.id, ()):
        if a_off < off or (include_x and a_off == off):
            total += m
    return total


def check_mes(S: StructuredTree) -> bool:
    return all(S.measure.density(e.id) > 0 for e in S.tree.edges)


def regularize(S: StructuredTree, eps) -> StructuredTree:
    """Add ``eps`` to the density of every edge."""
    eps = Q(eps)
    dens = {e.id: S.measure.density(e.id) + eps for e in S.tree.edges}
    return StructuredTree(S.tree, S.order, TreeMeasure(dens, S.measure.atoms))


@dataclass
class Report:
    name: str
    passed: bool = True
    checked: int = 0
    counterexample: Optional[Tuple] = None
    detail: str = ""

    def fail(self, example: Tuple, detail: str) -> None:
        if self.passed:
            self.passed = False
            self.counterexample = example
            self.detail = detail


def _triples(points: Sequence, k: int, sample_count: int, rng: random.Random):
    if len(points) ** k <= sample_count:
        return itertools.product(points, repeat=k)
    return (tuple(rng.choice(points) for _ in range(k)) for _ in range(sample_count))


def check_compatibility(S: StructuredTree, sample_count: int = 10_000, rng_seed=0,
                        comparator: Optional[Callable[[TreePoint, TreePoint], int]] = None,
                        points: Optional[Sequence[TreePoint]] = None) -> Report:
    """Check (Or1) on ancestor pairs and (Or2) on ordered triples of points.

    ``points`` defaults to the tree's witness points.  ``comparator`` defaults
    to the order induced by ``S.order``; passing another one lets arbitrary
    (possibly broken) orders be audited.
    """
    T = S.tree
    cmp = comparator or (lambda a, b: int(compare(S, a, b)))
    rng = random.Random(rng_seed)
    pts = list(points) if points is not None else T.witness_points()
    report = Report("compatibility")
    for a, b in _triples(pts, 2, sample_count, rng):
        report.checked += 1
        if T.is_ancestor(a, b) and cmp(a, b) > 0:
            report.fail((a, b), "(Or1): ancestor ordered after descendant")
    for trio in _triples(pts, 3, sample_count, rng):
        s1, s2, s3 = sorted_by(trio, cmp)
        report.checked += 1
        w12, w13 = T.wedge(s1, s2), T.wedge(s1, s3)
        gamma = w12 if T.height(w12) >= T.height(w13) else w13
        if not T.is_ancestor(gamma, s2):
            report.fail((s1, s2, s3), "(Or2): branch point of s1 not below s2")
        elif gamma != w12:
            report.fail((s1, s2, s3), "branch point of s1 differs from s1 ^ s2")
    return report


def sorted_by(points, cmp) -> List:
    return sorted(points, key=functools.cmp_to_key(cmp))


def check_inc(S: StructuredTree, sample_count: int = 10_000, rng_seed=0) -> Report:
    """Left-set mass must grow strictly along the order."""
    rng = random.Random(rng_seed)
    pts = S.tree.witness_points()
    report = Report("inc")
    for a, b in _triples(pts, 2, sample_count, rng):
        c = compare(S, a, b)
        if c == Ordering.EQUAL:
            continue
        if c == Ordering.GREATER:
            a, b = b, a
        report.checked += 1
        if not left_set_measure(S, a) < left_set_measure(S, b):
            report.fail((a, b), "left-set mass did not increase")
    return report
