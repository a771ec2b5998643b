"""Exact piecewise-linear caglad height functions.

A :class:`HeightFunction` is stored as a sequence of knots ``(t, y_left,
y_right)``.  Between two consecutive knots the function is affine, running
from ``y_right`` of the earlier knot to ``y_left`` of the later one.  At a
knot the value is ``y_left`` (left-continuity) and ``y_right`` is the right
limit, so ``y_right < y_left`` encodes a downward jump.  All arithmetic is
done with :class:`fractions.Fraction`.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from .rational import Q, RationalLike


@dataclass(frozen=True)
class Knot:
    t: Fraction
    y_left: Fraction
    y_right: Fraction

    def __post_init__(self):
        object.__setattr__(self, "t", Q(self.t))
        object.__setattr__(self, "y_left", Q(self.y_left))
        object.__setattr__(self, "y_right", Q(self.y_right))

    @property
    def jump(self) -> Fraction:
        return self.y_left - self.y_right


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction
    lo_closed: bool = True
    hi_closed: bool = True

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, t) -> bool:
        t = Q(t)
        above = t > self.lo or (self.lo_closed and t == self.lo)
        below = t < self.hi or (self.hi_closed and t == self.hi)
        return above and below

    def __str__(self) -> str:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo}, {self.hi}{right}"


@dataclass(frozen=True)
class IntervalSet:
    """Sorted, pairwise disjoint intervals."""

    intervals: Tuple[Interval, ...] = ()

    @property
    def length(self) -> Fraction:
        return sum((iv.length for iv in self.intervals), Fraction(0))

    def __contains__(self, t) -> bool:
        return any(t in iv for iv in self.intervals)

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __str__(self) -> str:
        if not self.intervals:
            return "{}"
        return " u ".join(str(iv) for iv in self.intervals)


class _SparseMin:
    """Range-minimum table; ``query(i, j)`` is min(data[i:j]) in O(1)."""

    def __init__(self, data: Sequence[Fraction]):
        self.table: List[List[Fraction]] = [list(data)]
        span = 1
        while 2 * span <= len(data):
            prev = self.table[-1]
            self.table.append(
                [min(prev[i], prev[i + span]) for i in range(len(data) - 2 * span + 1)]
            )
            span *= 2

    def query(self, i: int, j: int) -> Optional[Fraction]:
        if j <= i:
            return None
        level = (j - i).bit_length() - 1
        row = self.table[level]
        return min(row[i], row[j - (1 << level)])


@dataclass(frozen=True)
class PiecewiseLinear:
    """Left-continuous piecewise-affine function given by its knots."""

    knots: Tuple[Knot, ...]

    def __post_init__(self):
        knots = tuple(k if isinstance(k, Knot) else Knot(*k) for k in self.knots)
        if not knots:
            raise ValueError("need at least the knot at t=0")
        object.__setattr__(self, "knots", knots)

    @classmethod
    def from_knots(cls, triples: Iterable[Tuple[RationalLike, RationalLike, RationalLike]]):
        return cls(tuple(Knot(*tr) for tr in triples))

    @classmethod
    def from_points(cls, points: Iterable[Tuple[RationalLike, RationalLike]]):
        """Continuous function through ``(t, y)`` points."""
        return cls(tuple(Knot(t, y, y) for t, y in points))

    @property
    def lifetime(self) -> Fraction:
        return self.knots[-1].t

    @cached_property
    def times(self) -> List[Fraction]:
        return [k.t for k in self.knots]

    def pieces(self) -> Iterator[Tuple[Fraction, Fraction, Fraction, Fraction]]:
        """Yield ``(t0, t1, y0, y1)``: the affine piece on ``(t0, t1]``."""
        for a, b in zip(self.knots, self.knots[1:]):
            yield a.t, b.t, a.y_right, b.y_left

    def _check_time(self, t, *, strict_end: bool = False) -> Fraction:
        t = Q(t)
        if t < 0 or t > self.lifetime or (strict_end and t == self.lifetime):
            raise ValueError(f"time {t} outside the domain [0, {self.lifetime}]")
        return t

    def __call__(self, t) -> Fraction:
        return self.eval(t)

    def eval(self, t) -> Fraction:
        """Left-continuous value at ``t``."""
        t = self._check_time(t)
        i = bisect.bisect_left(self.times, t)
        if self.times[i] == t:
            return self.knots[i].y_left
        a, b = self.knots[i - 1], self.knots[i]
        return a.y_right + (b.y_left - a.y_right) * (t - a.t) / (b.t - a.t)

    def right_limit(self, t) -> Fraction:
        """Right limit at ``t``, defined for t < lifetime."""
        t = self._check_time(t, strict_end=True)
        i = bisect.bisect_left(self.times, t)
        if self.times[i] == t:
            return self.knots[i].y_right
        return self.eval(t)

    def canonical(self):
        """Drop knots that sit inside a single affine piece; pin the final right limit."""
        ks = list(self.knots)
        ks[-1] = Knot(ks[-1].t, ks[-1].y_left, ks[-1].y_left)
        out = [ks[0]]
        for i in range(1, len(ks) - 1):
            prev, cur, nxt = out[-1], ks[i], ks[i + 1]
            if cur.y_left == cur.y_right:
                slope_in = (cur.y_left - prev.y_right) / (cur.t - prev.t)
                slope_out = (nxt.y_left - cur.y_right) / (nxt.t - cur.t)
                if slope_in == slope_out:
                    continue
            out.append(cur)
        if len(ks) > 1:
            out.append(ks[-1])
        return type(self)(tuple(out))

    def time_scaled(self, factor):
        factor = Q(factor)
        return type(self)(tuple(Knot(k.t * factor, k.y_left, k.y_right) for k in self.knots))

    def plot_rows(self, grid: int = 0) -> List[Tuple[Fraction, Fraction]]:
        """``(t, value)`` rows at every knot plus ``grid`` equally spaced interior times."""
        ts = set(self.times)
        if grid > 0 and self.lifetime > 0:
            ts.update(self.lifetime * Fraction(i, grid + 1) for i in range(1, grid + 1))
        return [(t, self.eval(t)) for t in sorted(ts)]


@dataclass(frozen=True)
class HeightFunction(PiecewiseLinear):
    @classmethod
    def point(cls, lifetime: RationalLike = 0):
        """The zero function on ``[0, lifetime]``."""
        lifetime = Q(lifetime)
        if lifetime == 0:
            return cls((Knot(0, 0, 0),))
        return cls((Knot(0, 0, 0), Knot(lifetime, 0, 0)))

    @cached_property
    def _right_min(self) -> _SparseMin:
        return _SparseMin([k.y_right for k in self.knots])

    def jumps(self) -> List[Knot]:
        """Knots carrying a downward jump, in time order (final knot excluded)."""
        return [k for k in self.knots[:-1] if k.y_right < k.y_left]

    def is_continuous(self) -> bool:
        return not self.jumps()

    def min_on(self, s, t, *, with_attainment: bool = False):
        """Infimum of h over the closed interval between s and t.

        With ``with_attainment`` the result is ``(inf, attained)``.
        """
        a, b = sorted((self._check_time(s), self._check_time(t)))
        pa, pb = self._probe(a), self._probe(b)
        best = self._min_between(a, pa, b, pb)
        if not with_attainment:
            return best
        return best, self._attained(a, b, best, pa[1], pb[1])

    def _probe(self, t):
        """``(i, h(t), h(t+))`` for a checked time, with ``i`` the bisect_left index into the knots."""
        i = bisect.bisect_left(self.times, t)
        k = self.knots[i]
        if k.t == t:
            return i, k.y_left, k.y_right
        a = self.knots[i - 1]
        v = a.y_right + (k.y_left - a.y_right) * (t - a.t) / (k.t - a.t)
        return i, v, v

    def _min_between(self, a, pa, b, pb) -> Fraction:
        # a <= b, with pa and pb from _probe
        best = min(pa[1], pb[1])
        if a < b:
            best = min(best, pa[2])
            lo = pa[0] + 1 if self.times[pa[0]] == a else pa[0]
            inner = self._right_min.query(lo, pb[0])
            if inner is not None:
                best = min(best, inner)
        return best

    def _attained(self, a, b, value, ha, hb) -> bool:
        if value in (ha, hb):
            return True
        for t0, t1, y0, y1 in self.pieces():
            if t1 <= a or t0 >= b:
                continue
            if a < t1 < b and y1 == value:
                return True
            if y0 == y1 == value:
                return True
        return False

    def distance(self, s, t) -> Fraction:
        """Quotient pseudo-distance h(s) + h(t) - 2 inf_[s,t] h."""
        return self.eval(s) + self.eval(t) - 2 * self.min_on(s, t)

    # -- first and latter visits -----------------------------------------------

    def visit_sets(self) -> Tuple[IntervalSet, IntervalSet]:
        """Split [0, lifetime] into first-visit times F and latter-visit times S.

        Each piece ``(t0, t1]`` is classified as a whole: rising pieces reach
        new points, falling pieces retrace old ones, and a flat piece is a
        first visit only if it continues a fresh arrival with no jump.
        """
        classes: List[bool] = []
        prev_first = True
        for i, (t0, t1, y0, y1) in enumerate(self.pieces()):
            if y1 > y0:
                first = True
            elif y1 < y0:
                first = False
            else:
                knot = self.knots[i]
                no_jump = knot.y_right == knot.y_left
                first = i == 0 or (no_jump and prev_first)
            classes.append(first)
            prev_first = first

        first_runs: List[Interval] = [Interval(Fraction(0), Fraction(0))]
        latter_runs: List[Interval] = []
        for (t0, t1, _, _), first in zip(self.pieces(), classes):
            runs = first_runs if first else latter_runs
            if runs and runs[-1].hi == t0:
                last = runs[-1]
                runs[-1] = Interval(last.lo, t1, last.lo_closed, True)
            else:
                runs.append(Interval(t0, t1, False, True))
        return IntervalSet(tuple(first_runs)), IntervalSet(tuple(latter_runs))

    def is_minimal(self) -> bool:
        return self.visit_sets()[1].length == 0

    # -- variation and continuification -------------------------------------------

    def total_variation(self, a=0, b=None) -> Fraction:
        a = self._check_time(a)
        b = self.lifetime if b is None else self._check_time(b)
        if a > b:
            raise ValueError("need a <= b")
        total = Fraction(0)
        for t0, t1, y0, y1 in self.pieces():
            lo, hi = max(a, t0), min(b, t1)
            if hi > lo:
                total += abs(y1 - y0) / (t1 - t0) * (hi - lo)
        for k in self.jumps():
            if a <= k.t < b:
                total += k.jump
        return total

    def continuify(self) -> "HeightFunction":
        """Replace the k-th jump (in time order) by a linear descent of duration 2**-k."""
        out: List[Knot] = []
        shift = Fraction(0)
        k = 0
        last = len(self.knots) - 1
        for i, knot in enumerate(self.knots):
            t = knot.t + shift
            if i < last and knot.y_right < knot.y_left:
                k += 1
                step = Fraction(1, 2**k)
                out.append(Knot(t, knot.y_left, knot.y_left))
                out.append(Knot(t + step, knot.y_right, knot.y_right))
                shift += step
            else:
                out.append(Knot(t, knot.y_left, knot.y_left))
        return HeightFunction(tuple(out)).canonical()


def validate(h: HeightFunction) -> List[str]:
    """List every broken invariant of H; an empty list means ``h`` is a height function."""
    problems = []
    ks = h.knots
    first = ks[0]
    if first.t != 0:
        problems.append(f"first knot at t={first.t}, expected 0")
    if first.y_left != 0 or first.y_right != 0:
        problems.append("h(0) and h(0+) must both be 0")
    for i, k in enumerate(ks):
        if k.y_left < 0 or k.y_right < 0:
            problems.append(f"negative height at knot {i} (t={k.t})")
        if k.y_right > k.y_left:
            problems.append(f"positive jump at knot {i} (t={k.t})")
        if i and k.t <= ks[i - 1].t:
            problems.append(f"knot times not strictly increasing at knot {i}")
    return problems


def four_times_check(h: HeightFunction, s1, s2, s3, s4) -> bool:
    """Four-point condition for the quotient distance of ``h`` at four times.

    With d(i, j) = h_i + h_j - 2 m_ij every pairing sums the same four
    values, so the inequality reduces to one between sums of minima.
    """
    ts = [h._check_time(s) for s in (s1, s2, s3, s4)]
    probes = [h._probe(t) for t in ts]
    rank = sorted(range(4), key=ts.__getitem__)
    pos = [0] * 4
    for r, i in enumerate(rank):
        pos[i] = r
    # inf over [t_a, t_c] is the smaller of the infima over [t_a, t_b] and [t_b, t_c]
    gaps = [h._min_between(ts[i], probes[i], ts[j], probes[j]) for i, j in zip(rank, rank[1:])]

    def m(i, j):
        a, b = sorted((pos[i], pos[j]))
        return min(gaps[a:b]) if a < b else probes[i][1]

    return m(0, 1) + m(2, 3) >= min(m(0, 2) + m(1, 3), m(1, 2) + m(0, 3))


def quotient_distance(h: HeightFunction, s, t) -> Fraction:
    """Tree distance between the points coded by times ``s`` and ``t``."""
    return h.distance(s, t)


def min_on(h: HeightFunction, s, t) -> Fraction:
    return h.min_on(s, t)


def visit_sets(h: HeightFunction) -> Tuple[IntervalSet, IntervalSet]:
    return h.visit_sets()


def is_minimal(h: HeightFunction) -> bool:
    return h.is_minimal()


def total_variation(h: HeightFunction, a=0, b=None) -> Fraction:
    return h.total_variation(a, b)


def continuify(h: HeightFunction) -> HeightFunction:
    return h.continuify()
