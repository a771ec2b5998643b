"""Walk through the main operations on two small trees.

    python3 scripts/demo.py
"""
import random

from dendrocode import io
from dendrocode.codec import aldous_height, decode, encode, equivalent, graph_distance
from dendrocode.random_gen import remark_segment, y_tree
from dendrocode.rational import fmt


def show(name, h):
    knots = ", ".join(f"({fmt(k.t)}, {fmt(k.y_left)}, {fmt(k.y_right)})" for k in h.knots)
    print(f"{name}: lifetime {fmt(h.lifetime)}; knots {knots}")


def main():
    seg = remark_segment()
    h1 = encode(seg)
    show("segment with an atom at 1/2", h1)
    print("  minimal:", h1.is_minimal(), "| decode(encode) equivalent:", equivalent(decode(h1), seg))

    Y = y_tree()
    hy = encode(Y)
    show("Y-tree", hy)
    print("  total variation", fmt(hy.total_variation()), "= 2 * length", fmt(Y.tree.total_length()),
          "- final height", fmt(hy(hy.lifetime)))

    target = hy.time_scaled(1 / Y.total_mass)
    for n in (100, 500, 2000):
        approx = aldous_height(Y, n, random.Random(f"demo/{n}"), timing="rank")
        print(f"  Aldous approximant n={n}: graph gap {graph_distance(approx, target):.4f}")

    print("\nY-tree as JSON:")
    print(io.dumps(io.structured_to_json(Y)), end="")


if __name__ == "__main__":
    main()
