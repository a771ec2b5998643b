"""Command-line front end.

Every subcommand reads JSON from ``--in`` (default stdin) and writes to
``--out`` (default stdout).  Exit codes: 0 success, 1 failed verification,
2 usage, missing file, schema or (Mes) errors.
"""
from __future__ import annotations

import argparse
import os
import random
import sys
from typing import List, Optional

from . import io
from .codec import EmptyMeasure, MesViolation, decode, encode, time_change
from .order import shuffle
from .random_gen import (RandomTreeParams, excursion_walk, geometric_pmf, gw_plane_tree, lifo_height,
                         plane_tree_structured, random_structured_tree, segment_tree, star_tree, y_tree)
from .verify import SUITES, run_suite

SEED_ENV = "DENDROCODE_SEED"


class UsageError(Exception):
    pass


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _read(path: Optional[str]):
    if path is None or path == "-":
        return io.loads(sys.stdin.read())
    with open(path, encoding="utf-8") as fh:
        return io.loads(fh.read())


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_encode(args) -> int:
    S = io.structured_from_json(_read(args.inp))
    _write(args.out, io.dumps(io.height_to_json(encode(S))))
    return 0


def cmd_decode(args) -> int:
    h = io.height_from_json(_read(args.inp))
    _write(args.out, io.dumps(io.structured_to_json(decode(h))))
    return 0


def cmd_shuffle(args) -> int:
    doc = _read(args.inp)
    T = io.tree_from_json(doc["tree"] if isinstance(doc, dict) and "tree" in doc else doc)
    _write(args.out, io.dumps(io.order_to_json(shuffle(T, random.Random(_seed(args))))))
    return 0


def cmd_timechange(args) -> int:
    S = io.structured_from_json(_read(args.inp))
    mu_prime = io.measure_from_json(_read(args.to), "measure_prime")
    phi = time_change(S.tree, S.order, S.measure, mu_prime)
    _write(args.out, io.dumps(io.map_to_json(phi)))
    return 0


def cmd_continuify(args) -> int:
    h = io.height_from_json(_read(args.inp))
    _write(args.out, io.dumps(io.height_to_json(h.continuify())))
    return 0


def cmd_gen(args) -> int:
    rng = random.Random(_seed(args))
    size = args.size
    kind = args.kind
    if kind == "gw":
        doc = io.structured_to_json(plane_tree_structured(gw_plane_tree(geometric_pmf(), size or 50, rng, min_size=2)))
    elif kind == "excursion":
        doc = io.height_to_json(excursion_walk(size or 16, rng))
    elif kind == "lifo":
        doc = io.height_to_json(lifo_height(1.0, {"1/2": 1}, 1, size or 10 ** 4, rng))
    elif kind == "segment":
        doc = io.structured_to_json(segment_tree(size or 1))
    elif kind == "star":
        doc = io.structured_to_json(star_tree(size or 3))
    elif kind == "ytree":
        doc = io.structured_to_json(y_tree())
    else:
        doc = io.structured_to_json(random_structured_tree(RandomTreeParams(max_vertices=size or 20), rng))
    _write(args.out, io.dumps(doc))
    return 0


def cmd_verify(args) -> int:
    report = run_suite(args.suite, seed=_seed(args), cases=args.cases, workers=args.workers)
    _write(args.out, io.dumps(report))
    return 0 if report["passed"] else 1


def cmd_plot(args) -> int:
    h = io.height_from_json(_read(args.inp))
    _write(args.out, io.plot_csv(h, args.grid))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dendrocode", description="Code rooted measured real trees by height functions.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, inp=True):
        sp = sub.add_parser(name, help=help_text)
        if inp:
            sp.add_argument("--in", dest="inp", metavar="FILE", help="input JSON (default stdin)")
        sp.add_argument("--out", metavar="FILE", help="output file (default stdout)")
        sp.set_defaults(func=fn)
        return sp

    add("encode", cmd_encode, "structured tree -> minimal height function")
    add("decode", cmd_decode, "height function -> structured tree")
    sp = add("shuffle", cmd_shuffle, "tree -> uniformly shuffled planar order")
    sp.add_argument("--seed", type=int)
    sp = add("timechange", cmd_timechange, "tree, order and two measures -> time change")
    sp.add_argument("--to", required=True, metavar="FILE", help="measure JSON for the target coding")
    add("continuify", cmd_continuify, "replace jumps by steep descents")
    sp = add("gen", cmd_gen, "generate a tree or height function", inp=False)
    sp.add_argument("--kind", required=True, choices=["gw", "excursion", "lifo", "segment", "star", "ytree", "random"])
    sp.add_argument("--seed", type=int)
    sp.add_argument("--size", type=int)
    sp = add("verify", cmd_verify, "run an invariant suite", inp=False)
    sp.add_argument("suite", choices=sorted(SUITES))
    sp.add_argument("--seed", type=int)
    sp.add_argument("--cases", type=int, default=100)
    sp.add_argument("--workers", type=int, default=1)
    sp = add("plot", cmd_plot, "height function -> CSV rows t,h")
    sp.add_argument("--grid", type=int, default=0, help="extra evenly spaced sample times")
    return p


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
    except io.SchemaError as exc:
        print(f"error: schema violation: {exc}", file=sys.stderr)
    except MesViolation as exc:
        print(f"error: measure violates (Mes): {exc}", file=sys.stderr)
    except EmptyMeasure as exc:
        print(f"error: empty measure: {exc}", file=sys.stderr)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return 2


def main() -> None:
    sys.exit(run())
