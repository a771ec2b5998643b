"""Named invariant suites, runnable from the CLI with a seed and a case count.

Each check is a function of a per-case :class:`random.Random` that returns
``None`` on success or a short description of the counterexample.  Case
``i`` of check ``c`` in suite ``s`` is seeded from ``(seed, s, c, i)`` alone,
so cases can be sharded across threads and the merged report does not
depend on scheduling.
"""
from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional

from . import io
from .codec import (decode, encode, equivalent, exploration_point, shared_atoms, time_change)
from .height import HeightFunction, four_times_check, validate
from .order import (StructuredTree, TreeMeasure, check_compatibility, check_inc, check_mes,
                    compare, enumerate_compatible_orders, left_set_measure, regularize, shuffle)
from .random_gen import (RandomTreeParams, child_rng, discrete_distance, discrete_height_process,
                         graph_distance_from_heights, height_process_function,
                         excursion_walk, geometric_pmf, gw_plane_tree, lifo_height, plane_tree_structured,
                         random_height_function, random_structured_tree, star_tree)
from .tree import Vertex

Check = Callable[[random.Random], Optional[str]]

SMALL = RandomTreeParams(max_vertices=12)


def _tree(rng, params: RandomTreeParams = SMALL) -> StructuredTree:
    return random_structured_tree(params, rng)


def _times(h: HeightFunction, rng, k: int = 6) -> List[Fraction]:
    pool = list(h.times) + [h.lifetime * Fraction(rng.randint(0, 64), 64) for _ in range(k)]
    return [rng.choice(pool) for _ in range(k)]


def _measure(S: StructuredTree, rng, atoms: bool) -> TreeMeasure:
    T = S.tree
    dens = {e.id: Fraction(rng.randint(1, 16), 4) for e in T.edges}
    spots = []
    if atoms or not T.edges:
        pts = T.witness_points()
        spots = rng.sample(pts, rng.randint(1, min(3, len(pts))))
    return TreeMeasure(dens, tuple((p, Fraction(rng.randint(1, 8), 8)) for p in spots))


# -- height_fn ---------------------------------------------------------------------------------


def _h(rng) -> HeightFunction:
    return random_height_function(rng, pieces=rng.randint(1, 10)) if rng.random() < 0.5 else encode(_tree(rng))


def check_quotient_metric(rng):
    h = _h(rng)
    s = _times(h, rng, 4)
    d = h.distance
    for a in s:
        if d(a, a) != 0:
            return f"d({a},{a}) = {d(a, a)}"
        for b in s:
            if d(a, b) < 0 or d(a, b) != d(b, a):
                return f"d({a},{b}) = {d(a, b)}, d({b},{a}) = {d(b, a)}"
    if not four_times_check(h, *s):
        return f"four times fails at {s}"
    return None


def check_min_bounds(rng):
    h = _h(rng)
    a, b, c, e = sorted(_times(h, rng, 4))
    inner = h.min_on(b, c)
    if inner > min(h(b), h(c)):
        return f"min on [{b},{c}] = {inner} above endpoint values"
    if h.min_on(a, e) > inner:
        return f"min on [{a},{e}] exceeds min on [{b},{c}]"
    return None


def check_visit_lengths(rng):
    h = _h(rng)
    F, S = h.visit_sets()
    if F.length + S.length != h.lifetime:
        return f"|F| + |S| = {F.length + S.length} != {h.lifetime}"
    if h.is_minimal() != (S.length == 0):
        return "is_minimal disagrees with |S|"
    return None


def check_continuify(rng):
    h = _h(rng)
    c = h.continuify()
    if validate(c) or not all(k.y_left == k.y_right for k in c.knots):
        return f"continuified function invalid or discontinuous: {validate(c)}"
    if not equivalent(decode(c), decode(h), compare_measure=False):
        return "continuified function codes a different ordered tree"
    return None


def check_tv_additive(rng):
    h = _h(rng)
    a, b, c = sorted(_times(h, rng, 3))
    v = h.total_variation
    if v(a, b) + v(b, c) != v(a, c):
        return f"v[{a},{b}] + v[{b},{c}] != v[{a},{c}]"
    return None


def _brute_eval(h: HeightFunction, t: Fraction) -> Fraction:
    for t0, t1, y0, y1 in h.pieces():
        if t0 < t <= t1:
            return y0 + (y1 - y0) * (t - t0) / (t1 - t0)
    return h.knots[0].y_left


def check_grid_oracle(rng):
    h = random_height_function(rng, pieces=rng.randint(1, 6))
    step = Fraction(1, 32)
    n = int(h.lifetime / step)
    grid = [i * step for i in range(n + 1)]
    vals = [_brute_eval(h, t) for t in grid]
    rights = [h.knots[h.times.index(t)].y_right if t in h.times else v for t, v in zip(grid, vals)]
    for _ in range(20):
        i, j = sorted((rng.randrange(n + 1), rng.randrange(n + 1)))
        s, t = grid[i], grid[j]
        if h(t) != vals[j]:
            return f"eval({t}) = {h(t)}, oracle {vals[j]}"
        m = min(vals[i:j + 1] + rights[i:j])
        if h.min_on(s, t) != m:
            return f"min_on({s},{t}) = {h.min_on(s, t)}, oracle {m}"
        if h.distance(s, t) != vals[i] + vals[j] - 2 * m:
            return f"distance({s},{t}) disagrees with oracle"
    return None


# -- tree_core ---------------------------------------------------------------------------------


def check_metric(rng):
    T = _tree(rng).tree
    pts = T.witness_points()
    x, y, z, w = (rng.choice(pts) for _ in range(4))
    d = T.distance
    if d(x, x) != 0 or (x != y and T.normalize(x) != T.normalize(y) and d(x, y) <= 0):
        return f"identity fails for {x}, {y}"
    if d(x, y) != d(y, x):
        return f"asymmetric at {x}, {y}"
    if d(x, z) > d(x, y) + d(y, z):
        return f"triangle fails at {x}, {y}, {z}"
    if not T.four_point_check(x, y, z, w):
        return f"four points fail at {x}, {y}, {z}, {w}"
    return None


def check_wedge_identity(rng):
    T = _tree(rng).tree
    pts = T.witness_points()
    x, y = rng.choice(pts), rng.choice(pts)
    root = Vertex(T.root)
    d = T.distance
    if 2 * d(root, T.wedge(x, y)) != d(root, x) + d(root, y) - d(x, y):
        return f"wedge identity fails at {x}, {y}"
    return None


def check_span_length(rng):
    T = _tree(rng).tree
    leaves, _, root = T.classify()
    spanned = T.span([Vertex(v) for v in leaves] + [Vertex(root)])
    if spanned.total_length() != T.total_length():
        return f"span length {spanned.total_length()} != {T.total_length()}"
    return None


def check_degree_count(rng):
    T = _tree(rng).tree
    total = sum(T.degree(Vertex(v)) for v in T.vertices)
    if len(T.edges) != len(T.vertices) - 1 or total != 2 * len(T.edges):
        return f"degree sum {total} with {len(T.edges)} edges, {len(T.vertices)} vertices"
    return None


# -- order_measure -------------------------------------------------------------------------------


def check_total_order(rng):
    S = _tree(rng)
    rep = check_compatibility(S, sample_count=300, rng_seed=rng.getrandbits(32))
    if not rep.passed:
        return f"{rep.detail}: {rep.counterexample}"
    pts = [Vertex(v) for v in S.tree.vertices]
    for a in pts:
        for b in pts:
            if compare(S, a, b) != -compare(S, b, a):
                return f"antisymmetry fails at {a}, {b}"
            if S.tree.is_ancestor(a, b) and compare(S, a, b) > 0:
                return f"ancestor {a} after {b}"
    return None


def check_enumerated_orders(rng):
    S = _tree(rng, RandomTreeParams(max_vertices=6))
    T = S.tree
    want = math.prod(math.factorial(len(es)) for es in T.child_edges.values())
    count = 0
    for order in enumerate_compatible_orders(T):
        count += 1
        rep = check_compatibility(StructuredTree(T, order, S.measure), sample_count=10 ** 6,
                                  points=[Vertex(v) for v in T.vertices])
        if not rep.passed:
            return f"order {order.child_order} fails: {rep.detail}"
    if count != want:
        return f"{count} orders enumerated, expected {want}"
    return None


def check_components(rng):
    S = _tree(rng)
    T = S.tree
    below: Dict[str, List[str]] = {}
    for v in T.vertices:
        for e in T.child_edges.get(v, []):
            below[e.id] = [u for u in T.vertices if T.is_ancestor(Vertex(e.child), Vertex(u))]
    for v in T.vertices:
        kids = T.child_edges.get(v, [])
        for e1 in kids:
            for e2 in kids:
                if e1 is e2:
                    continue
                signs = {compare(S, Vertex(a), Vertex(b)) for a in below[e1.id] for b in below[e2.id]}
                if len(signs) != 1:
                    return f"components {e1.id}, {e2.id} at {v} compare both ways"
    return None


def check_inc_property(rng):
    S = _tree(rng)
    rep = check_inc(S, sample_count=300, rng_seed=rng.getrandbits(32))
    if not rep.passed:
        return f"{rep.detail}: {rep.counterexample}"
    pts = S.tree.witness_points()
    a, b = rng.choice(pts), rng.choice(pts)
    if compare(S, a, b) < 0 and left_set_measure(S, a) > left_set_measure(S, b):
        return f"left-set mass not monotone at {a}, {b}"
    return None


def check_shuffle_mes(rng):
    S = _tree(rng)
    S2 = StructuredTree(S.tree, shuffle(S.tree, rng), S.measure)
    if not check_mes(S2):
        return "shuffled order breaks (Mes)"
    rep = check_compatibility(S2, sample_count=200, rng_seed=rng.getrandbits(32))
    if not rep.passed:
        return f"shuffled order not compatible: {rep.detail}"
    return None


def shuffle_chi2(rng, draws: int = 2000) -> float:
    """Chi-square statistic of the 3! leaf orderings of the 3-star under ``draws`` shuffles."""
    S = star_tree(3)
    counts: Dict[tuple, int] = {}
    for _ in range(draws):
        order = shuffle(S.tree, rng)
        key = order.children("r")
        counts[key] = counts.get(key, 0) + 1
    expected = draws / 6
    observed = list(counts.values()) + [0] * (6 - len(counts))
    return sum((o - expected) ** 2 / expected for o in observed)


CHI2_5DF_999 = 20.515


def check_shuffle_uniform(rng):
    stat = shuffle_chi2(rng)
    if stat >= CHI2_5DF_999:
        return f"chi-square {stat:.2f} above the 0.999 quantile"
    return None


# -- codec ---------------------------------------------------------------------------------------


def check_roundtrip_a(rng):
    S = random_structured_tree(RandomTreeParams(max_vertices=30), rng)
    if not equivalent(decode(encode(S)), S):
        return f"decode(encode(S)) differs for {io.dumps(io.structured_to_json(S))}"
    return None


def check_roundtrip_b(rng):
    h = encode(random_structured_tree(RandomTreeParams(max_vertices=30), rng))
    h2 = encode(decode(h))
    if h2.knots != h.knots:
        return f"encode(decode(h)) != h for {io.dumps(io.height_to_json(h))}"
    return None


def check_minimality(rng):
    S = _tree(rng)
    if not encode(S).is_minimal():
        return "encode output is not minimal"
    g = random_height_function(rng, pieces=rng.randint(1, 8))
    D = decode(g)
    if not equivalent(decode(encode(D)), D):
        return f"decode(g) differs from decode of its minimal re-encoding for {io.dumps(io.height_to_json(g))}"
    return None


def check_exploration(rng):
    S = _tree(rng)
    h = encode(S)
    root = Vertex(S.tree.root)
    for _ in range(8):
        t = h.lifetime * Fraction(rng.randint(0, 256), 256)
        st = exploration_point(S, t)
        if S.tree.distance(root, st.sigma_minus) != h(t):
            return f"d(root, phi({t})) = {S.tree.distance(root, st.sigma_minus)}, h = {h(t)}"
        if t < h.lifetime and S.tree.distance(root, st.sigma_plus) != h.right_limit(t):
            return f"right limit mismatch at {t}"
    return None


def check_first_visit(rng):
    S = _tree(rng)
    T = S.tree
    h = encode(S)
    pts = [Vertex(v) for v in T.vertices] + [T.normalize(p) for p, _ in S.measure.atoms]
    for p in pts:
        lo, hi = left_set_measure(S, p, include_x=False), left_set_measure(S, p)
        for t in {lo, hi, (lo + hi) / 2}:
            if t == 0 and p != Vertex(T.root):
                return f"point {p} first visited at time 0"
            if exploration_point(S, t).sigma_minus != p:
                return f"phi({t}) = {exploration_point(S, t).sigma_minus}, expected {p} on [{lo},{hi}]"
        if lo > 0:
            before = lo - min(lo, Fraction(1, 1 << 20))
            if exploration_point(S, before).sigma_minus == p:
                return f"{p} visited before its left-set time {lo}"
        if h(hi) != T.height(p):
            return f"h({hi}) = {h(hi)} != height of {p}"
    return None


def check_time_change(rng):
    S = _tree(rng)
    T, order = S.tree, S.order
    mu = _measure(S, rng, atoms=rng.random() < 0.6)
    mu2 = _measure(S, rng, atoms=rng.random() < 0.6)
    if not T.edges:
        return None
    h = encode(StructuredTree(T, order, mu))
    h2 = encode(StructuredTree(T, order, mu2))
    phi = time_change(T, order, mu, mu2)
    if phi.validate():
        return f"time change is not monotone: {phi.validate()}"
    ts = sorted(set(h.times) | set(phi.times))
    ts += [(a + b) / 2 for a, b in zip(ts, ts[1:])]
    for t in ts:
        if h(t) != h2(phi(t)):
            return f"h({t}) = {h(t)} but h'(phi(t)) = {h2(phi(t))}"
    if not mu2.has_atoms() and not phi.is_continuous():
        return "mu' atomless but phi jumps"
    if not mu.has_atoms() and not phi.is_strictly_increasing():
        return "mu atomless but phi has a flat piece"
    for t, v0, v1 in phi.jump_intervals():
        if h2.min_on(v0, v1) != h(t) or any(h2(u) != h(t) for u in h2.times if v0 <= u <= v1):
            return f"h' not flat at height h({t}) on [{v0},{v1}]"
    shared = set(shared_atoms(T, mu, mu2))
    want = {T.normalize(p) for p, _ in mu.atoms} & {T.normalize(p) for p, _ in mu2.atoms}
    if shared != want:
        return f"shared atoms reported as {shared}, expected {want}"
    return None


def check_tv_bridge(rng):
    S = _tree(rng)
    h = encode(S)
    if h.total_variation(0, h.lifetime) != 2 * S.tree.total_length() - h(h.lifetime):
        return "total variation differs from 2 * length - h(end)"
    return None


def check_leaf_atoms(rng):
    S = _tree(rng)
    T = S.tree
    if not T.edges:
        return None
    leaves = T.classify()[0]
    leafy = StructuredTree(T, S.order, TreeMeasure({}, tuple((Vertex(v), Fraction(1)) for v in leaves)))
    reg = regularize(leafy, Fraction(1, 1 << 10))
    h = encode(reg)
    F, _ = h.visit_sets()
    for v in leaves:
        t = left_set_measure(reg, Vertex(v))
        if t not in F:
            return f"leaf {v} visited at {t}, outside F(h)"
    return None


def check_order_change(rng):
    S = _tree(rng)
    S2 = StructuredTree(S.tree, shuffle(S.tree, rng), S.measure)
    if not equivalent(S, S2, ordered=False):
        return "reshuffled tree not equivalent without order"
    if encode(S).knots != encode(S2).knots and equivalent(S, S2):
        return "different codings but ordered-equivalent trees"
    return None


# -- random_gen ------------------------------------------------------------------------------------


def check_discrete_bridge(rng):
    tau = gw_plane_tree(geometric_pmf(), 50, rng, min_size=2)
    H = discrete_height_process(tau)
    interpolated = height_process_function(tau)
    h = encode(plane_tree_structured(tau))
    words = tau.lexicographic()
    for m in range(len(H)):
        for n in range(m, len(H)):
            if discrete_distance(H, m, n) != interpolated.distance(m, n):
                return f"formula vs interpolated height process at ({m},{n}) of {words}"
            u, v = words[m], words[n]
            common = next((i for i, (a, b) in enumerate(zip(u, v)) if a != b), min(len(u), len(v)))
            graph = len(u) + len(v) - 2 * common
            if graph != h.distance(m, n) or graph != graph_distance_from_heights(H, m, n):
                return f"graph distance of ({m},{n}) in {words} not matched by the coding"
    return None


def check_lifo_valid(rng):
    h = lifo_height(rng.choice([0.5, 1.0, 1.5]), {"1/4": 1, "1/2": 1}, Fraction(rng.randint(1, 8), 4), 10 ** 4, rng)
    if validate(h):
        return f"invalid LIFO height: {validate(h)}"
    return None


def check_deterministic(rng):
    seed = rng.getrandbits(32)
    pairs = [
        (random_structured_tree(SMALL, random.Random(seed)), random_structured_tree(SMALL, random.Random(seed))),
        (excursion_walk(16, random.Random(seed)), excursion_walk(16, random.Random(seed))),
        (gw_plane_tree(geometric_pmf(), 50, random.Random(seed)), gw_plane_tree(geometric_pmf(), 50, random.Random(seed))),
    ]
    for a, b in pairs:
        if a != b:
            return f"seed {seed} gives different outputs"
    return None


# -- cli -----------------------------------------------------------------------------------------


def check_schema_roundtrip(rng):
    S = _tree(rng)
    h = encode(S)
    mu2 = _measure(S, rng, atoms=True)
    phi = time_change(S.tree, S.order, S.measure, mu2) if S.tree.edges else None
    docs = [
        (io.height_to_json(h), lambda d: io.height_to_json(io.height_from_json(d))),
        (io.tree_to_json(S.tree), lambda d: io.tree_to_json(io.tree_from_json(d))),
        (io.structured_to_json(S), lambda d: io.structured_to_json(io.structured_from_json(d))),
        (io.order_to_json(S.order), lambda d: io.order_to_json(io.order_from_json(d))),
        (io.measure_to_json(S.measure), lambda d: io.measure_to_json(io.measure_from_json(d))),
    ]
    if phi is not None:
        docs.append((io.map_to_json(phi), lambda d: io.map_to_json(io.map_from_json(d))))
    for doc, again in docs:
        text = io.dumps(doc)
        if io.dumps(again(io.loads(text))) != text:
            return f"schema round trip changed {text[:200]}"
    return None


SUITES: Dict[str, Dict[str, Check]] = {
    "height_fn": {
        "quotient_metric": check_quotient_metric,
        "min_bounds": check_min_bounds,
        "visit_lengths": check_visit_lengths,
        "continuify": check_continuify,
        "tv_additive": check_tv_additive,
        "grid_oracle": check_grid_oracle,
    },
    "tree_core": {
        "metric": check_metric,
        "wedge_identity": check_wedge_identity,
        "span_length": check_span_length,
        "degree_count": check_degree_count,
    },
    "order_measure": {
        "total_order": check_total_order,
        "enumerated_orders": check_enumerated_orders,
        "components": check_components,
        "inc": check_inc_property,
        "shuffle_uniform": check_shuffle_uniform,
        "shuffle_mes": check_shuffle_mes,
    },
    "codec": {
        "roundtrip_a": check_roundtrip_a,
        "roundtrip_b": check_roundtrip_b,
        "minimality": check_minimality,
        "exploration": check_exploration,
        "first_visit": check_first_visit,
        "time_change": check_time_change,
        "tv_bridge": check_tv_bridge,
        "leaf_atoms": check_leaf_atoms,
        "order_change": check_order_change,
    },
    "random_gen": {
        "discrete_bridge": check_discrete_bridge,
        "lifo_valid": check_lifo_valid,
        "deterministic": check_deterministic,
    },
    "cli": {
        "schema_roundtrip": check_schema_roundtrip,
    },
    "roundtrip": {
        "roundtrip_a": check_roundtrip_a,
        "roundtrip_b": check_roundtrip_b,
    },
}

# statistical checks run once per suite invocation, not once per case
SINGLE_CASE = {"shuffle_uniform"}


@dataclass
class CheckOutcome:
    name: str
    cases: int = 0
    failures: List[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        first = min(self.failures, key=lambda f: f["case"]) if self.failures else None
        return {"name": self.name, "cases": self.cases, "passed": not self.failures,
                "failures": len(self.failures), "counterexample": first}


def _run_case(suite: str, check: str, fn: Check, seed, i: int) -> Optional[dict]:
    rng = child_rng(f"{seed}/{suite}/{check}", i)
    try:
        msg = fn(rng)
    except Exception as exc:  # a crash is a counterexample too
        msg = f"{type(exc).__name__}: {exc}"
    return None if msg is None else {"case": i, "detail": msg}


def run_suite(name: str, seed=0, cases: int = 100, workers: int = 1) -> dict:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(sorted(SUITES))}")
    jobs = []
    for check, fn in SUITES[name].items():
        n = 1 if check in SINGLE_CASE else cases
        jobs.extend((check, fn, i) for i in range(n))
    outcomes = {check: CheckOutcome(check) for check in SUITES[name]}

    def work(job):
        check, fn, i = job
        return check, _run_case(name, check, fn, seed, i)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]
    for check, failure in results:
        outcomes[check].cases += 1
        if failure is not None:
            outcomes[check].failures.append(failure)
    checks = [outcomes[c].to_json() for c in sorted(outcomes)]
    return {"suite": name, "seed": str(seed), "cases": cases,
            "passed": all(c["passed"] for c in checks), "checks": checks}
