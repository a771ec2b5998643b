"""JSON interchange with rationals as ``"p/q"`` strings, plus CSV plot rows.

Every ``*_to_json`` returns plain dicts and lists; :func:`dumps` turns them
into deterministic text.  Parsers raise :class:`SchemaError` with a path to
the offending field.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Dict, List

from .codec import PiecewiseMap
from .height import HeightFunction, Knot, PiecewiseLinear, validate
from .order import PlanarOrder, StructuredTree, TreeMeasure
from .rational import Q, fmt
from .tree import Edge, EdgePoint, RealTree, TreePoint, Vertex


class SchemaError(ValueError):
    """Input that does not match the expected JSON layout."""


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2) + "\n"


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from None


# -- field helpers ---------------------------------------------------------------------------


def _get(doc, key: str, where: str, kind=None):
    if not isinstance(doc, dict):
        raise SchemaError(f"{where}: expected an object")
    if key not in doc:
        raise SchemaError(f"{where}: missing field {key!r}")
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise SchemaError(f"{where}.{key}: expected {kind.__name__}")
    return value


def _rat(value, where: str) -> Fraction:
    if not isinstance(value, str):
        raise SchemaError(f"{where}: rationals must be \"p/q\" strings")
    try:
        return Q(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise SchemaError(f"{where}: {exc}") from None


def _str(value, where: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(f"{where}: expected a string id")
    return value


# -- height functions and maps --------------------------------------------------------------------


def knots_to_json(f: PiecewiseLinear) -> Dict:
    return {
        "lifetime": fmt(f.lifetime),
        "knots": [{"t": fmt(k.t), "y_left": fmt(k.y_left), "y_right": fmt(k.y_right)} for k in f.knots],
    }


def _knots_from_json(doc, where: str) -> tuple:
    raw = _get(doc, "knots", where, list)
    if not raw:
        raise SchemaError(f"{where}.knots: need at least one knot")
    knots = tuple(
        Knot(_rat(_get(k, "t", f"{where}.knots[{i}]"), f"{where}.knots[{i}].t"),
             _rat(_get(k, "y_left", f"{where}.knots[{i}]"), f"{where}.knots[{i}].y_left"),
             _rat(_get(k, "y_right", f"{where}.knots[{i}]"), f"{where}.knots[{i}].y_right"))
        for i, k in enumerate(raw)
    )
    if "lifetime" in doc and _rat(doc["lifetime"], f"{where}.lifetime") != knots[-1].t:
        raise SchemaError(f"{where}.lifetime: does not match the last knot")
    if any(b.t <= a.t for a, b in zip(knots, knots[1:])):
        raise SchemaError(f"{where}.knots: times must be strictly increasing")
    return knots


height_to_json = knots_to_json
map_to_json = knots_to_json


def height_from_json(doc) -> HeightFunction:
    h = HeightFunction(_knots_from_json(doc, "height"))
    problems = validate(h)
    if problems:
        raise SchemaError("height: " + "; ".join(problems))
    return h


def map_from_json(doc) -> PiecewiseMap:
    return PiecewiseMap(_knots_from_json(doc, "map"))


# -- trees --------------------------------------------------------------------------------------


def point_to_json(p: TreePoint) -> Dict:
    if isinstance(p, Vertex):
        return {"vertex": p.id}
    return {"edge": p.edge, "offset": fmt(p.offset)}


def point_from_json(doc, where: str = "point") -> TreePoint:
    if not isinstance(doc, dict):
        raise SchemaError(f"{where}: expected an object")
    if "vertex" in doc:
        return Vertex(_str(doc["vertex"], f"{where}.vertex"))
    if "edge" in doc:
        return EdgePoint(_str(doc["edge"], f"{where}.edge"), _rat(_get(doc, "offset", where), f"{where}.offset"))
    raise SchemaError(f"{where}: expected a 'vertex' or an 'edge' field")


def tree_to_json(T: RealTree) -> Dict:
    return {
        "root": T.root,
        "vertices": list(T.vertices),
        "edges": [{"id": e.id, "parent": e.parent, "child": e.child, "length": fmt(e.length)} for e in T.edges],
    }


def tree_from_json(doc) -> RealTree:
    root = _str(_get(doc, "root", "tree"), "tree.root")
    vertices = tuple(_str(v, f"tree.vertices[{i}]") for i, v in enumerate(_get(doc, "vertices", "tree", list)))
    edges = []
    for i, e in enumerate(_get(doc, "edges", "tree", list)):
        w = f"tree.edges[{i}]"
        edges.append(Edge(_str(_get(e, "id", w), f"{w}.id"), _str(_get(e, "parent", w), f"{w}.parent"),
                          _str(_get(e, "child", w), f"{w}.child"), _rat(_get(e, "length", w), f"{w}.length")))
    T = RealTree(root, vertices, tuple(edges))
    problems = T.validate()
    if problems:
        raise SchemaError("tree: " + "; ".join(problems))
    return T


def order_to_json(order: PlanarOrder) -> Dict:
    return {"child_order": {v: list(es) for v, es in order.child_order.items()}}


def order_from_json(doc) -> PlanarOrder:
    raw = _get(doc, "child_order", "order", dict)
    out = {}
    for v, es in raw.items():
        if not isinstance(es, list):
            raise SchemaError(f"order.child_order.{v}: expected a list of edge ids")
        out[v] = tuple(_str(e, f"order.child_order.{v}") for e in es)
    return PlanarOrder(out)


def measure_to_json(mu: TreeMeasure) -> Dict:
    return {
        "densities": {e: fmt(d) for e, d in mu.densities.items()},
        "atoms": [{"point": point_to_json(p), "mass": fmt(m)} for p, m in mu.atoms],
    }


def measure_from_json(doc, where: str = "measure") -> TreeMeasure:
    dens = {e: _rat(d, f"{where}.densities.{e}") for e, d in _get(doc, "densities", where, dict).items()}
    atoms = []
    for i, a in enumerate(_get(doc, "atoms", where, list)):
        w = f"{where}.atoms[{i}]"
        atoms.append((point_from_json(_get(a, "point", w), f"{w}.point"), _rat(_get(a, "mass", w), f"{w}.mass")))
    return TreeMeasure(dens, tuple(atoms))


def structured_to_json(S: StructuredTree) -> Dict:
    return {"tree": tree_to_json(S.tree), "order": order_to_json(S.order), "measure": measure_to_json(S.measure)}


def structured_from_json(doc) -> StructuredTree:
    T = tree_from_json(_get(doc, "tree", "bundle"))
    order = order_from_json(doc["order"]) if "order" in doc else PlanarOrder.default(T)
    mu = measure_from_json(doc["measure"]) if "measure" in doc else TreeMeasure.uniform(T)
    S = StructuredTree(T, order, mu)
    problems = S.validate()
    if problems:
        raise SchemaError("bundle: " + "; ".join(problems))
    return S


# -- plot rows ------------------------------------------------------------------------------------


def plot_csv(f: PiecewiseLinear, grid: int = 0) -> str:
    """``t,h(t)`` rows at every knot plus ``grid`` evenly spaced interior times."""
    rows: List[str] = ["t,h"]
    for t, y in f.plot_rows(grid):
        rows.append(f"{fmt(t)},{fmt(y)}")
    return "\n".join(rows) + "\n"
