"""Exact plane geometry for the unit-square torus.

Coordinates live in Q(sqrt(d)) (or Q); the torus is the quotient by the
integer lattice and paths are recorded in the universal cover.  The
transverse measure of a path against the slope-theta foliation follows the
vertical-shift convention: a segment contributes |dy - theta dx|, so leaf
segments contribute 0, vertical hops their length, and loops around the
puncture (cusp-marked lattice vertices) nothing.  The perpendicular-length
normalization differs by the constant factor 1/sqrt(1 + theta^2) and is
available as a floating-point convenience only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

from .cf import ContinuedFraction
from .errors import (ClearanceViolated, InvalidGrowthFunction, SingularHit)
from .exactnum import Exact, QuadNum, exact_floor, format_exact, frac_part, parse_exact

Number = Union[int, Fraction, QuadNum]


@dataclass(frozen=True)
class FlatPoint:
    x: Number
    y: Number

    def __iter__(self):
        return iter((self.x, self.y))


class FlatPath:
    """Piecewise-linear path in the universal cover.

    ``markers[i]`` tags vertex i: "start" for the base point, "leaf" when the
    incoming segment runs along the foliation direction (or any transversal
    flight), "hop" when it is a connector, "cusp" when the vertex is a lattice
    point standing for a loop around the puncture.  Interior vertices and
    segment interiors must avoid the integer lattice except at cusp marks.
    """

    def __init__(self, vertices: Sequence[FlatPoint], markers: Optional[Sequence[str]] = None,
                 validate: bool = True):
        self.vertices = list(vertices)
        if markers is None:
            markers = ["start"] + ["leaf"] * (len(self.vertices) - 1)
        self.markers = list(markers)
        if len(self.markers) != len(self.vertices):
            raise ValueError("one marker per vertex")
        if validate:
            self.validate()

    def validate(self):
        for u, v in zip(self.vertices, self.vertices[1:]):
            if u.x == v.x and u.y == v.y:
                raise ValueError("consecutive vertices must be distinct")
        for i, (pt, mark) in enumerate(zip(self.vertices, self.markers)):
            if mark == "cusp":
                continue
            if _is_integer(pt.x) and _is_integer(pt.y):
                raise SingularHit(f"vertex {i} lies on the lattice", point=pt)
        for i in range(1, len(self.vertices)):
            hit = _segment_lattice_hit(self.vertices[i - 1], self.vertices[i])
            if hit is not None:
                raise SingularHit("segment passes through a lattice point",
                                  point=hit)

    def segments(self):
        for i in range(1, len(self.vertices)):
            yield self.vertices[i - 1], self.vertices[i], self.markers[i]

    def concat(self, other: "FlatPath") -> "FlatPath":
        if tuple(self.vertices[-1]) != tuple(other.vertices[0]):
            raise ValueError("paths do not share an endpoint")
        return FlatPath(self.vertices + other.vertices[1:],
                        self.markers + other.markers[1:], validate=False)

    def to_json(self) -> dict:
        field = None
        for pt in self.vertices:
            for c in (pt.x, pt.y):
                if isinstance(c, QuadNum) and c.b != 0:
                    field = f"sqrt{c.d}"
        return {
            "field": field,
            "vertices": [[format_exact(pt.x), format_exact(pt.y)]
                         for pt in self.vertices],
            "markers": list(self.markers),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FlatPath":
        vertices = [FlatPoint(parse_exact(x), parse_exact(y))
                    for x, y in doc["vertices"]]
        return cls(vertices, doc.get("markers"))


def _is_integer(x: Number) -> bool:
    if isinstance(x, QuadNum):
        return x.b == 0 and x.a.denominator == 1
    return Fraction(x).denominator == 1


def _between(lo, x, hi, include_hi=False) -> bool:
    if lo > hi:
        lo, hi = hi, lo
    if include_hi:
        return lo < x <= hi
    return lo < x < hi


def _segment_lattice_hit(p: FlatPoint, q: FlatPoint):
    """A lattice point strictly interior to the segment (p, q), or None."""
    dx = q.x - p.x
    dy = q.y - p.y
    if dx == 0:
        if not _is_integer(p.x):
            return None
        lo, hi = (p.y, q.y) if p.y < q.y else (q.y, p.y)
        n = exact_floor(lo) + 1
        while n < hi:
            if n > lo:
                return FlatPoint(p.x, Fraction(n))
            n += 1
        return None
    x_lo, x_hi = (p.x, q.x) if p.x < q.x else (q.x, p.x)
    m = exact_floor(x_lo) + 1  # first integer strictly above x_lo
    while m < x_hi:
        y = p.y + (m - p.x) * dy / dx
        if _is_integer(y):
            return FlatPoint(Fraction(m), y)
        m += 1
    return None


# -- transverse measure ------------------------------------------------------

Measure = Exact  # vertical-shift convention: |dy - theta dx| summed over segments


def transverse_measure(path: FlatPath, theta: Exact, normalized: bool = False):
    """Exact transverse measure of ``path`` against the slope-theta foliation.

    With ``normalized=True`` the perpendicular-length value is returned as a
    float (the exact value times 1/sqrt(1+theta^2)) for plotting only.
    """
    total: Exact = Fraction(0)
    for u, v, _mark in path.segments():
        contribution = abs((v.y - u.y) - theta * (v.x - u.x))
        total = total + contribution
    if normalized:
        t = float(theta)
        return float(total) / math.sqrt(1.0 + t * t)
    return total


# -- cutting sequences ---------------------------------------------------------

def cutting_sequence(s, theta: ContinuedFraction, num_letters: int) -> str:
    """Crossing word of the line y = theta x + s leaving (0, s) rightward:
    'b' per horizontal grid line, 'a' per vertical grid line.

    Exact: a crossing that lands on a lattice point raises SingularHit with
    the point.  Slopes with an exact value use field arithmetic; opaque
    coefficient sources fall back to enclosure comparisons.
    """
    theta_val = theta.value()
    if theta_val is not None and not theta_val > 0:
        raise ValueError("theta must be positive")
    word = []
    m, n = 1, exact_floor(s) + 1
    while len(word) < num_letters:
        if theta_val is not None:
            crit = theta_val * m + s
            cmp = 1 if crit > n else (-1 if crit < n else 0)
        else:
            cmp = theta.compare(Fraction(n - s, m))
        if cmp == 0:
            raise SingularHit(f"line hits lattice point ({m}, {n})",
                              point=FlatPoint(Fraction(m), Fraction(n)))
        if cmp > 0:
            word.append("b")
            n += 1
        else:
            word.append("a")
            m += 1
    return "".join(word)


def cutting_blocks(s, theta: ContinuedFraction, num_blocks: int) -> tuple[int, ...]:
    """First ``num_blocks`` block sizes of the cutting sequence from height s."""
    blocks = []
    count = 0
    theta_val = theta.value()
    m, n = 1, exact_floor(s) + 1
    while len(blocks) < num_blocks:
        if theta_val is not None:
            crit = theta_val * m + s
            cmp = 1 if crit > n else (-1 if crit < n else 0)
        else:
            cmp = theta.compare(Fraction(n - s, m))
        if cmp == 0:
            raise SingularHit(f"line hits lattice point ({m}, {n})",
                              point=FlatPoint(Fraction(m), Fraction(n)))
        if cmp > 0:
            count += 1
            n += 1
        else:
            blocks.append(count)
            count = 0
            m += 1
    return tuple(blocks)


def _axis_crossings(u0, dx, letter):
    """Crossing parameters of integer lines along one coordinate, on (0, 1]."""
    events = []
    if dx == 0:
        return events
    v0 = u0 + dx
    lo, hi = (u0, v0) if u0 < v0 else (v0, u0)
    m = exact_floor(lo)
    while m <= hi:
        t = (m - u0) / dx
        if 0 < t <= 1:
            events.append((t, letter))
        m += 1
    return events


def path_crossing_word(path: FlatPath) -> str:
    """Grid-crossing word of a piecewise path; crossings are counted on the
    half-open segment (start, end].  Cusp-marked lattice junctions separate
    segments without contributing letters."""
    out = []
    for u, v, mark in path.segments():
        events = (_axis_crossings(u.x, v.x - u.x, "a")
                  + _axis_crossings(u.y, v.y - u.y, "b"))
        events.sort(key=lambda e: e[0])
        for t, letter in events:
            if mark == "cusp" and t == 1:
                continue
            out.append(letter)
    return "".join(out)


# -- rotation orbit structure ---------------------------------------------------

def three_distance_points(s, r) -> list:
    """Heights s + r*l mod 1 for l = 0..q-1, sorted; consecutive gaps are 1/q."""
    r = Fraction(r)
    q = r.denominator
    heights = sorted(frac_part(s + r * l) for l in range(q))
    return heights


@dataclass(frozen=True)
class ClearanceCertificate:
    """Witness that the slope-theta line and its convergent approximation stay
    in the same lattice cells over one cycle, except at the extreme height."""

    k: int
    l0: int
    heights: tuple
    agreements: tuple  # (l, common integer part) for l != l0


def homotopy_clearance(s, theta: ContinuedFraction, k: int) -> ClearanceCertificate:
    """Certify the lattice-free strip between y = theta x + s and the k-th
    convergent line over 0 <= x <= q_k.

    Requires 1/q_k < 1 - s for even k and 1/q_k < s for odd k; returns the
    index l0 of the extreme height and, for every other l, the common integer
    part of theta l + s and (p_k/q_k) l + s.
    """
    cv = theta.convergent(k)
    r = Fraction(cv.p, cv.q)
    eps = (1 - s) if k % 2 == 0 else s
    if not Fraction(1, cv.q) < eps:
        raise ClearanceViolated(
            f"need 1/q_k < {'1-s' if k % 2 == 0 else 's'} at k={k}")
    heights = [frac_part(s + r * l) for l in range(cv.q)]
    if k % 2 == 0:
        l0 = max(range(cv.q), key=lambda l: heights[l])
    else:
        l0 = min(range(cv.q), key=lambda l: heights[l])
    theta_val = theta.value()
    agreements = []
    for l in range(cv.q):
        if l == l0:
            continue
        f_theta = exact_floor(theta_val * l + s)
        f_rat = exact_floor(r * l + s)
        if f_theta != f_rat:
            raise AssertionError(f"integer parts split at l={l}")
        agreements.append((l, f_theta))
    return ClearanceCertificate(k, l0, tuple(heights), tuple(agreements))


# -- growth probes -----------------------------------------------------------------

@dataclass(frozen=True)
class GrowthRow:
    t: Exact
    measure: Exact
    target: Optional[float] = None


def linear_growth_probe(theta: ContinuedFraction, direction, t_max, samples: int) -> list[GrowthRow]:
    """Measure straight paths of parameter length t in a fixed direction.

    ``direction`` is an exact slope or the string "vertical"; parameter length
    is dx for sloped directions and the height for vertical ones.  The table
    satisfies I(t) = t * I(1) exactly.
    """
    theta_val = theta.value()
    base = FlatPoint(Fraction(1, 7), Fraction(1, 9))
    rows = []
    t_max = Fraction(t_max)
    for i in range(1, samples + 1):
        t = t_max * i / samples
        if direction == "vertical":
            end = FlatPoint(base.x, base.y + t)
        else:
            end = FlatPoint(base.x + t, base.y + direction * t)
        path = FlatPath([base, end], validate=False)
        rows.append(GrowthRow(t, transverse_measure(path, theta_val)))
    return rows


def prescribed_growth_path(theta: ContinuedFraction, f: Callable[[float], float],
                           n_segments: int, t_cap=None):
    """Piecewise path whose transverse measure tracks a sublinear target f.

    Leaf segments of lengths d_n with f(d_1 + ... + d_n) = n alternate with
    unit-measure vertical jumps, so the measure at the n-th joint is exactly n
    and |I - f| <= 1 there.  Returns (path, rows); rows carry (t, I(t), f(t))
    at the joints.  Raises InvalidGrowthFunction when f(0) != 0 or f fails to
    increase across a bracket.
    """
    if abs(f(0.0)) > 1e-12:
        raise InvalidGrowthFunction("f(0) must be 0")
    theta_val = theta.value()
    if t_cap is None:
        t_cap = Fraction(10) ** 9

    joints = []
    T_prev = Fraction(0)
    for n in range(1, n_segments + 1):
        lo = T_prev
        hi = max(T_prev * 2, Fraction(1))
        tries = 0
        while f(float(hi)) < n:
            hi *= 2
            tries += 1
            if hi > t_cap or tries > 200:
                joints_ok = False
                break
        else:
            joints_ok = True
        if not joints_ok:
            break
        if f(float(lo)) > n:
            raise InvalidGrowthFunction("f decreased across a bracket")
        for _ in range(60):
            mid = (lo + hi) / 2
            if f(float(mid)) < n:
                lo = mid
            else:
                hi = mid
        T_n = (lo + hi) / 2
        # keep jump abscissas off the integer lattice
        while T_n.denominator == 1:
            T_n += Fraction(1, 2 ** 31)
        joints.append(T_n)
        T_prev = T_n

    base = FlatPoint(Fraction(0), Fraction(1, 7))
    vertices = [base]
    markers = ["start"]
    x = base.x
    y: Exact = base.y
    for T_n in joints:
        dx = T_n - x
        x = T_n
        y = y + theta_val * dx
        vertices.append(FlatPoint(x, y))
        markers.append("leaf")
        y = y + 1
        vertices.append(FlatPoint(x, y))
        markers.append("hop")
    if not joints:
        end_x = min(Fraction(t_cap), Fraction(100))
        vertices.append(FlatPoint(end_x, base.y + theta_val * end_x))
        markers.append("leaf")
    path = FlatPath(vertices, markers, validate=False)

    rows = []
    for n, T_n in enumerate(joints, start=1):
        rows.append(GrowthRow(T_n, Fraction(n), f(float(T_n))))
    return path, rows
