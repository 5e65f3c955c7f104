"""Polygonal translation surfaces and their horizontal-flow return dynamics.

A surface is a list of simple CCW polygons with vertices in Q(sqrt(d)) and a
pairing of parallel, equal-length, oppositely-oriented edges glued by
translations.  Polygon vertices are the marked singularities.  The horizontal
foliation flows rightward; its transverse measure is vertical distance.

Crossing words: inner-edge pair i carries labels e_i / E_i (lowercase for the
first slot of the pair, uppercase for the second); a flow segment records the
label of each slot it exits through.  Internally pair i is encoded as the
character chr(ord('a')+i) or chr(ord('A')+i) so words are plain strings.

The first-return map to a non-horizontal edge is an interval exchange in the
edge parameter; return words are constant on the exchange intervals, whose
endpoints are the backward orbits of the singularities.  That structure
drives everything here: level-set partitions, short inadmissible loops of
exponentially small measure, and their concatenation into finite-measure
words no leaf word ever contains in its tail.

Exactness policy: all states and certificates are exact field elements.
Inner loops use floating-point shadows only to pre-filter branch decisions;
any branch within 1e-9 of a boundary is re-decided exactly, and shadows are
resynchronized from the exact state periodically, so no decision ever rests
on floating point alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import (BudgetExhausted, CylinderDecomposition, InvalidSurface,
                     SingularHit)
from .exactnum import Exact, QuadNum, format_exact, parse_exact

Number = Union[int, Fraction, QuadNum]

_NEAR = 1e-9
_RESYNC = 2048


@dataclass(frozen=True)
class SurfacePoint:
    poly: int
    x: Number
    y: Number


@dataclass(frozen=True)
class StepResult:
    kind: str                       # "crossing" | "singular" | "boundary"
    point: Optional[SurfacePoint]   # transported point (crossing only)
    hit: Optional[SurfacePoint]     # crossing/vertex point in the exited chart
    letter: Optional[str]           # internal char label of the exited slot
    pair: Optional[int]
    advance: Optional[Number]       # horizontal distance travelled


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _sign(x) -> int:
    if isinstance(x, QuadNum):
        return x.sign()
    return (x > 0) - (x < 0)


def _dir_in_wedge(wx, wy, bx, by, dx, dy) -> bool:
    """Is (dx,dy) strictly inside the CCW sector from (wx,wy) to (bx,by)?"""
    swb = _sign(_cross(wx, wy, bx, by))
    swd = _sign(_cross(wx, wy, dx, dy))
    sdb = _sign(_cross(dx, dy, bx, by))
    if swb > 0:
        return swd > 0 and sdb > 0
    if swb < 0:
        return swd > 0 or sdb > 0
    # straight corner: the sector is the half plane to the left of w
    return swd > 0


def _segments_cross(a1, a2, b1, b2) -> bool:
    d1 = _sign(_cross(a2[0] - a1[0], a2[1] - a1[1], b1[0] - a1[0], b1[1] - a1[1]))
    d2 = _sign(_cross(a2[0] - a1[0], a2[1] - a1[1], b2[0] - a1[0], b2[1] - a1[1]))
    d3 = _sign(_cross(b2[0] - b1[0], b2[1] - b1[1], a1[0] - b1[0], a1[1] - b1[1]))
    d4 = _sign(_cross(b2[0] - b1[0], b2[1] - b1[1], a2[0] - b1[0], a2[1] - b1[1]))
    return d1 * d2 < 0 and d3 * d4 < 0


class TranslationSurface:
    """Validated polygon collection with translation gluings."""

    def __init__(self, polygons, identifications):
        self.polygons = [[(x, y) for x, y in poly] for poly in polygons]
        self.pairs = [tuple(map(tuple, pair)) for pair in identifications]
        self._validate()
        self._build_tables()

    # -- validation ---------------------------------------------------------

    def _validate(self):
        if not self.polygons:
            raise InvalidSurface("no polygons")
        for pi, poly in enumerate(self.polygons):
            if len(poly) < 3:
                raise InvalidSurface(f"polygon {pi} has fewer than 3 vertices")
            area2 = Fraction(0)
            n = len(poly)
            for i in range(n):
                x1, y1 = poly[i]
                x2, y2 = poly[(i + 1) % n]
                if x1 == x2 and y1 == y2:
                    raise InvalidSurface(f"polygon {pi} repeats vertex {i}")
                area2 = area2 + _cross(x1, y1, x2, y2)
            if not area2 > 0:
                raise InvalidSurface(f"polygon {pi} must be counterclockwise")
            self._check_simple(pi, poly)
        if len(self.pairs) > 26:
            raise InvalidSurface("at most 26 edge pairs supported")
        seen = set()
        for idx, (sa, sb) in enumerate(self.pairs):
            for slot in (sa, sb):
                if slot in seen:
                    raise InvalidSurface(f"edge {slot} glued twice")
                seen.add(slot)
                p, k = slot
                if not (0 <= p < len(self.polygons)) or not (0 <= k < len(self.polygons[p])):
                    raise InvalidSurface(f"edge reference {slot} out of range")
            va = self._edge_vector(sa)
            vb = self._edge_vector(sb)
            if va[0] != -vb[0] or va[1] != -vb[1]:
                raise InvalidSurface(
                    f"pair {idx}: edges must be parallel, equal length, and "
                    "oppositely oriented")
        if len(self.polygons) > 1:
            reach = {0}
            frontier = [0]
            adj = {}
            for sa, sb in self.pairs:
                adj.setdefault(sa[0], set()).add(sb[0])
                adj.setdefault(sb[0], set()).add(sa[0])
            while frontier:
                p = frontier.pop()
                for q in adj.get(p, ()):
                    if q not in reach:
                        reach.add(q)
                        frontier.append(q)
            if len(reach) != len(self.polygons):
                raise InvalidSurface("surface is not connected")

    def _check_simple(self, pi, poly):
        n = len(poly)
        for i in range(n):
            a1, a2 = poly[i], poly[(i + 1) % n]
            for j in range(i + 1, n):
                if (j + 1) % n == i or (i + 1) % n == j:
                    continue
                if _segments_cross(a1, a2, poly[j], poly[(j + 1) % n]):
                    raise InvalidSurface(f"polygon {pi} self-intersects")

    def _edge_vector(self, slot):
        p, k = slot
        poly = self.polygons[p]
        x1, y1 = poly[k]
        x2, y2 = poly[(k + 1) % len(poly)]
        return (x2 - x1, y2 - y1)

    def _edge_endpoints(self, slot):
        p, k = slot
        poly = self.polygons[p]
        return poly[k], poly[(k + 1) % len(poly)]

    # -- derived tables -----------------------------------------------------

    def _build_tables(self):
        self.slot_info = {}
        for idx, (sa, sb) in enumerate(self.pairs):
            a0, _a1 = self._edge_endpoints(sa)
            _b0, b1 = self._edge_endpoints(sb)
            cAB = (b1[0] - a0[0], b1[1] - a0[1])  # z on A maps to z + cAB on B
            self.slot_info[sa] = (idx, True, cAB, sb)
            self.slot_info[sb] = (idx, False, (-cAB[0], -cAB[1]), sa)
        self.boundary_slots = []
        for p, poly in enumerate(self.polygons):
            for k in range(len(poly)):
                if (p, k) not in self.slot_info:
                    self.boundary_slots.append((p, k))
        self._edge_table = []
        for poly in self.polygons:
            n = len(poly)
            self._edge_table.append(
                [(poly[k][0], poly[k][1], poly[(k + 1) % n][0],
                  poly[(k + 1) % n][1], k) for k in range(n)])
        self._vertex_classes()

    def _vertex_classes(self):
        parent = {}

        def find(c):
            while parent[c] != c:
                parent[c] = parent[parent[c]]
                c = parent[c]
            return c

        for p, poly in enumerate(self.polygons):
            for k in range(len(poly)):
                parent[(p, k)] = (p, k)
        for sa, sb in self.pairs:
            (pa, ka), (pb, kb) = sa, sb
            na, nb = len(self.polygons[pa]), len(self.polygons[pb])
            for c1, c2 in (((pa, ka), (pb, (kb + 1) % nb)),
                           ((pa, (ka + 1) % na), (pb, kb))):
                r1, r2 = find(c1), find(c2)
                if r1 != r2:
                    parent[r1] = r2
        classes = {}
        for corner in parent:
            classes.setdefault(find(corner), []).append(corner)
        self.vertex_classes = list(classes.values())
        self.corner_class = {}
        for ci, corners in enumerate(self.vertex_classes):
            for c in corners:
                self.corner_class[c] = ci

    @property
    def euler_characteristic(self) -> int:
        return (len(self.vertex_classes)
                - (len(self.pairs) + len(self.boundary_slots))
                + len(self.polygons))

    @property
    def genus(self) -> Optional[int]:
        if self.boundary_slots:
            return None
        return (2 - self.euler_characteristic) // 2

    def pair_letter(self, pair_index: int, first_slot: bool) -> str:
        c = chr(ord("a") + pair_index)
        return c if first_slot else c.upper()

    def public_label(self, letter: str) -> str:
        i = ord(letter.lower()) - ord("a")
        return f"e{i}" if letter.islower() else f"E{i}"

    def word_labels(self, word: str) -> str:
        return " ".join(self.public_label(ch) for ch in word)

    def vertex_point(self, corner) -> SurfacePoint:
        p, k = corner
        x, y = self.polygons[p][k]
        return SurfacePoint(p, x, y)

    # -- singularity germs ----------------------------------------------------

    def corner_germs(self, direction: int):
        """Corners whose interior wedge strictly contains (direction, 0); from
        these the horizontal separatrices emanate."""
        germs = []
        for p, poly in enumerate(self.polygons):
            n = len(poly)
            for k in range(n):
                prev, here, nxt = poly[(k - 1) % n], poly[k], poly[(k + 1) % n]
                wx, wy = nxt[0] - here[0], nxt[1] - here[1]
                bx, by = prev[0] - here[0], prev[1] - here[1]
                if _dir_in_wedge(wx, wy, bx, by, direction, 0):
                    germs.append((p, k))
        return germs

    def horizontal_edges(self):
        return [slot for slot in self.slot_info
                if self._edge_vector(slot)[1] == 0]

    def horizontal_is_cylinder_decomposition(self, budget: int = 2048) -> bool:
        """True when every horizontal separatrix terminates at a vertex within
        the budget; cutting along them then leaves only cylinders."""
        cached = getattr(self, "_cyl_cache", None)
        if cached is not None and cached[1] >= budget:
            return cached[0]
        germs = self.corner_germs(+1)
        flag = True
        for p, k in germs:
            point = self.vertex_point((p, k))
            terminated = False
            for _ in range(budget):
                res = flow_step(point, self)
                if res.kind in ("singular", "boundary"):
                    terminated = res.kind == "singular"
                    break
                point = res.point
            if not terminated:
                flag = False
                break
        self._cyl_cache = (flag, budget)
        return flag

    def to_json(self) -> dict:
        fieldname = None
        for poly in self.polygons:
            for x, y in poly:
                for c in (x, y):
                    if isinstance(c, QuadNum) and c.b != 0:
                        fieldname = f"sqrt{c.d}"
        return {
            "field": fieldname,
            "polygons": [[[format_exact(x), format_exact(y)] for x, y in poly]
                         for poly in self.polygons],
            "identify": [[list(sa), list(sb)] for sa, sb in self.pairs],
        }


def load_surface(doc) -> TranslationSurface:
    """Build and validate a surface from its JSON document."""
    if isinstance(doc, TranslationSurface):
        return doc
    polygons = [[(parse_exact(x), parse_exact(y)) for x, y in poly]
                for poly in doc["polygons"]]
    identify = [(tuple(sa), tuple(sb)) for sa, sb in doc["identify"]]
    return TranslationSurface(polygons, identify)


# -- horizontal flow -----------------------------------------------------------

def flow_step(point: SurfacePoint, surface: TranslationSurface,
              direction: int = 1) -> StepResult:
    """Exact first boundary contact of the horizontal ray from ``point``.

    Inner-edge crossings transport through the gluing; a polygon vertex on
    the ray is a singular hit (informative, not fatal), an unglued edge a
    boundary hit.
    """
    edges = surface._edge_table[point.poly]
    n = len(edges)
    x0, y0 = point.x, point.y
    best = None  # (advance, kind, payload)
    for x1, y1, x2, y2, k in edges:
        s1 = _sign(y1 - y0)
        s2 = _sign(y2 - y0)
        if s1 == 0 and s2 == 0:
            for vk, vx in ((k, x1), ((k + 1) % n, x2)):
                adv = (vx - x0) * direction
                if adv > 0 and (best is None or adv < best[0]):
                    best = (adv, "vertex", (point.poly, vk))
            continue
        if s1 == 0 or s2 == 0:
            vk = k if s1 == 0 else (k + 1) % n
            vx = x1 if s1 == 0 else x2
            adv = (vx - x0) * direction
            if adv > 0 and (best is None or adv < best[0]):
                best = (adv, "vertex", (point.poly, vk))
            continue
        if s1 * s2 < 0:
            xs = x1 + (y0 - y1) * (x2 - x1) / (y2 - y1)
            adv = (xs - x0) * direction
            if adv > 0 and (best is None or adv < best[0]):
                best = (adv, "edge", (point.poly, k, xs))
    if best is None:
        raise InvalidSurface("horizontal ray escapes its polygon")
    adv, kind, payload = best
    if kind == "vertex":
        return StepResult("singular", None, surface.vertex_point(payload),
                          None, None, adv)
    p, k, xs = payload
    hit = SurfacePoint(p, xs, y0)
    info = surface.slot_info.get((p, k))
    if info is None:
        return StepResult("boundary", None, hit, None, None, adv)
    pair_idx, is_first, trans, partner = info
    new = SurfacePoint(partner[0], xs + trans[0], y0 + trans[1])
    return StepResult("crossing", new, hit,
                      surface.pair_letter(pair_idx, is_first), pair_idx, adv)


# -- transversal edges ------------------------------------------------------------

class Transversal:
    """A non-horizontal inner edge parametrized by arclength fraction.

    The parameter runs along the slot whose CCW edge vector points downward;
    that is the chart the rightward flow enters from the edge, so return
    points land there directly.  For the sheared torus this is the left edge
    traversed top to bottom, making the return map rotation by the shear.
    """

    def __init__(self, surface: TranslationSurface, pair_index: int):
        self.surface = surface
        self.pair_index = pair_index
        sa, sb = surface.pairs[pair_index]
        va = surface._edge_vector(sa)
        if va[1] == 0:
            raise InvalidSurface("transversal edge must not be horizontal")
        self.slot = sa if _sign(va[1]) < 0 else sb
        self.upstream_slot = sb if self.slot is sa else sa
        self.start, self.end = surface._edge_endpoints(self.slot)
        self.vec = surface._edge_vector(self.slot)
        up_info = surface.slot_info[self.upstream_slot]
        self.arrival_letter = surface.pair_letter(pair_index, up_info[1])
        self._iet: Optional[ReturnMapIET] = None
        self._non_saddle = None

    def point(self, tau) -> SurfacePoint:
        return SurfacePoint(self.slot[0],
                            self.start[0] + tau * self.vec[0],
                            self.start[1] + tau * self.vec[1])

    def param(self, point: SurfacePoint):
        """Edge parameter of a point lying on either chart of the pair."""
        up_trans = self.surface.slot_info[self.upstream_slot][2]
        for x, y in ((point.x, point.y),
                     (point.x + up_trans[0], point.y + up_trans[1])):
            tau = (y - self.start[1]) / self.vec[1]
            if 0 <= tau <= 1 and self.start[0] + tau * self.vec[0] == x:
                return tau
        raise ValueError("point does not lie on the transversal")

    @property
    def height(self):
        return abs(self.vec[1])

    def return_map(self) -> "ReturnMapIET":
        if self._iet is None:
            self._iet = ReturnMapIET(self)
        return self._iet

    def non_saddle_cut(self, budget: int = 4096):
        if self._non_saddle is None or self._non_saddle.traced_steps < budget:
            self._non_saddle = find_non_saddle_point(self.surface, self, budget)
        return self._non_saddle


def first_return(trans: Transversal, tau, n: int = 1):
    """n-th return parameter and crossing word (intermediate arrivals at the
    transversal included, the final arrival excluded).  n = 0 is the identity
    with the empty word."""
    if n == 0:
        return tau, ""
    surface = trans.surface
    point = trans.point(tau)
    letters = []
    returns = 0
    steps = 0
    while True:
        res = flow_step(point, surface)
        steps += 1
        if res.kind == "singular":
            raise SingularHit(f"orbit hits a vertex after {returns} returns",
                              point=res.hit, step=returns + 1)
        if res.kind == "boundary":
            raise SingularHit("orbit reaches the boundary", point=res.hit,
                              step=returns + 1)
        if res.pair == trans.pair_index:
            returns += 1
            if returns == n:
                return trans.param(res.point), "".join(letters)
            letters.append(res.letter)
        else:
            letters.append(res.letter)
        point = res.point
        if steps > 100000 * n:
            raise BudgetExhausted("flow did not return within the step budget")


# -- the return map as an interval exchange ------------------------------------------

@dataclass(frozen=True)
class ExchangeInterval:
    lo: Number
    hi: Number
    shift: Number     # T(tau) = tau + shift here
    word: str         # crossings strictly between consecutive returns

    @property
    def length(self):
        return self.hi - self.lo


def _parts(v):
    if isinstance(v, QuadNum):
        return v.a, v.b
    return Fraction(v), Fraction(0)


def _den_of(v) -> int:
    a, b = _parts(v)
    return math.lcm(a.denominator, b.denominator)


def _encode_pair(v, D):
    a, b = _parts(v)
    if D % a.denominator or D % b.denominator:
        raise ValueError("denominator does not divide the table denominator")
    return (a.numerator * (D // a.denominator),
            b.numerator * (D // b.denominator))


def _pair_float(u, v, d, D):
    return (u + v * math.sqrt(d)) / D


def _pair_lt(u1, v1, u2, v2, d) -> bool:
    """(u1 + v1 sqrt d) < (u2 + v2 sqrt d), exact integer arithmetic."""
    du = u2 - u1
    dv = v2 - v1
    if dv == 0:
        return du > 0
    if du == 0:
        return dv > 0
    if du > 0 and dv > 0:
        return True
    if du < 0 and dv < 0:
        return False
    if du > 0:
        return du * du > dv * dv * d
    return dv * dv * d > du * du


class _FastIter:
    """Exact interval-exchange iteration with a certified floating filter.

    State is an integer pair (u, v) for (u + v sqrt d)/D; a float shadow
    picks the branch and every decision within 1e-9 of an interval boundary
    is re-decided exactly.  Landing exactly on a boundary raises SingularHit.
    D must be divisible by every denominator that will ever enter; callers
    pass the denominators of their start points via ``extra_den``.
    """

    def __init__(self, iet: "ReturnMapIET", extra_den: int = 1):
        vals = []
        for iv in iet.intervals:
            vals.extend((iv.lo, iv.hi, iv.shift))
        d = 2
        for v in vals:
            if isinstance(v, QuadNum) and v.b != 0:
                d = v.d
        D = extra_den
        for v in vals:
            a, b = _parts(v)
            D = math.lcm(D, a.denominator, b.denominator)
        self.d, self.D = d, D
        self.lo = [_encode_pair(iv.lo, D) for iv in iet.intervals]
        self.hi = [_encode_pair(iv.hi, D) for iv in iet.intervals]
        self.shift = [_encode_pair(iv.shift, D) for iv in iet.intervals]
        self.lo_f = [float(iv.lo) for iv in iet.intervals]
        self.hi_f = [float(iv.hi) for iv in iet.intervals]
        self.shift_f = [float(iv.shift) for iv in iet.intervals]
        self.m = len(iet.intervals)

    def start(self, tau):
        u, v = _encode_pair(tau, self.D)
        return [u, v, _pair_float(u, v, self.d, self.D), 0]

    def value(self, state):
        u, v, _, _ = state
        if v == 0:
            return Fraction(u, self.D)
        return QuadNum(Fraction(u, self.D), Fraction(v, self.D), self.d)

    def locate(self, state) -> int:
        u, v, shadow, _ = state
        for i in range(self.m):
            if self.lo_f[i] - _NEAR < shadow < self.hi_f[i] + _NEAR:
                if shadow < self.lo_f[i] + _NEAR or shadow > self.hi_f[i] - _NEAR:
                    lu, lv = self.lo[i]
                    hu, hv = self.hi[i]
                    if not (_pair_lt(lu, lv, u, v, self.d)
                            and _pair_lt(u, v, hu, hv, self.d)):
                        continue
                return i
        raise SingularHit("orbit landed on a partition cut")

    def step(self, state) -> int:
        i = self.locate(state)
        du, dv = self.shift[i]
        state[0] += du
        state[1] += dv
        state[2] += self.shift_f[i]
        state[3] += 1
        if state[3] % _RESYNC == 0:
            state[2] = _pair_float(state[0], state[1], self.d, self.D)
        return i

    def near(self, state, lo_pair, hi_pair, lo_f, hi_f) -> bool:
        """Exactly decide lo < state < hi, float-filtered."""
        u, v, shadow, _ = state
        if not (lo_f - _NEAR < shadow < hi_f + _NEAR):
            return False
        if lo_f + _NEAR < shadow < hi_f - _NEAR:
            return True
        return (_pair_lt(lo_pair[0], lo_pair[1], u, v, self.d)
                and _pair_lt(u, v, hi_pair[0], hi_pair[1], self.d))

    def encode(self, x):
        return _encode_pair(x, self.D)


class ReturnMapIET:
    """First-return map of the horizontal flow to a transversal, realized as
    an interval exchange with per-interval return words.

    Construction traces the backward separatrices of every singularity to the
    transversal (their first crossings are exactly the discontinuities),
    probes each interval twice to read off the translation and word, and
    verifies that the interval images tile the edge.
    """

    def __init__(self, trans: Transversal):
        self.trans = trans
        cuts = backward_cut_points(trans, depth=1)
        pts = [Fraction(0)] + sorted(set(cuts)) + [Fraction(1)]
        intervals = []
        for lo, hi in zip(pts, pts[1:]):
            if not lo < hi:
                continue
            mid = (lo + hi) / 2
            t1, w1 = first_return(trans, mid, 1)
            probe = lo + (hi - lo) * Fraction(1, 3)
            t2, w2 = first_return(trans, probe, 1)
            if w1 != w2 or t1 - mid != t2 - probe:
                raise AssertionError("return word not constant on an interval; "
                                     "cut enumeration incomplete")
            intervals.append(ExchangeInterval(lo, hi, t1 - mid, w1))
        self.intervals = intervals
        self._verify_tiling()
        self._fast: Optional[_FastIter] = None

    def _verify_tiling(self):
        images = sorted(((iv.lo + iv.shift, iv.hi + iv.shift)
                         for iv in self.intervals), key=lambda t: t[0])
        prev_hi = Fraction(0)
        for lo, hi in images:
            if lo < 0 or hi > 1 or lo < prev_hi:
                raise AssertionError("return-map images overlap or escape")
            prev_hi = hi

    @property
    def arrival_letter(self) -> str:
        return self.trans.arrival_letter

    def fast(self, extra_den: int = 1) -> _FastIter:
        if self._fast is None or self._fast.D % extra_den:
            self._fast = _FastIter(self, extra_den * (self._fast.D if self._fast else 1))
        return self._fast

    def locate(self, tau) -> ExchangeInterval:
        for iv in self.intervals:
            if iv.lo < tau < iv.hi:
                return iv
        raise SingularHit("parameter lies on a partition cut")

    def step(self, tau):
        iv = self.locate(tau)
        return tau + iv.shift, iv

    def step_back(self, tau):
        for iv in self.intervals:
            if iv.lo + iv.shift < tau < iv.hi + iv.shift:
                return tau - iv.shift, iv
        raise SingularHit("parameter lies on an image cut")

    def orbit_word(self, tau, n: int):
        """(T^n(tau), word); matches the convention of first_return."""
        parts = []
        for j in range(n):
            tau, iv = self.step(tau)
            parts.append(iv.word)
            if j < n - 1:
                parts.append(self.arrival_letter)
        return tau, "".join(parts)

    def letter_stream(self, tau0, num_letters: int) -> str:
        """Leaf word (all crossings, arrivals included) read from tau0."""
        fast = self.fast(_den_of(tau0))
        words = [iv.word + self.arrival_letter for iv in self.intervals]
        state = fast.start(tau0)
        out = []
        total = 0
        while total < num_letters:
            j = fast.step(state)
            w = words[j]
            out.append(w)
            total += len(w)
        return "".join(out)[:num_letters]


# -- backward separatrices, level sets --------------------------------------------

def backward_cut_points(trans: Transversal, depth: int,
                        step_budget: int = 400000):
    """Transversal parameters whose forward orbit hits a vertex within
    ``depth`` returns: trace every backward separatrix leftward, recording
    each transversal crossing.

    Raises CylinderDecomposition when every backward separatrix terminates at
    a vertex (then all are saddle connections and the horizontal direction is
    periodic).
    """
    surface = trans.surface
    germs = surface.corner_germs(-1)
    if not germs:
        raise CylinderDecomposition("no interior backward separatrices")
    cuts = []
    any_alive = False
    for corner in germs:
        point = surface.vertex_point(corner)
        crossings = 0
        steps = 0
        alive = True
        while crossings < depth:
            res = flow_step(point, surface, direction=-1)
            steps += 1
            if steps > step_budget:
                raise BudgetExhausted("backward separatrix exceeded the step budget")
            if res.kind in ("singular", "boundary"):
                alive = False
                break
            if res.pair == trans.pair_index:
                crossings += 1
                cuts.append(trans.param(res.point))
            point = res.point
        any_alive = any_alive or alive
    if not any_alive:
        raise CylinderDecomposition(
            "every backward separatrix is a saddle connection")
    return cuts


@dataclass(frozen=True)
class PartitionInterval:
    lo: Number
    hi: Number
    word: Optional[str]

    @property
    def length(self):
        return self.hi - self.lo

    @property
    def midpoint(self):
        return (self.lo + self.hi) / 2


@dataclass
class ReturnPartition:
    depth: int
    cuts: list
    intervals: list

    @property
    def max_length(self):
        return max(iv.length for iv in self.intervals)


def return_partition(surface, trans, n: int, words: bool = True) -> ReturnPartition:
    """Level-set partition of the transversal for the n-step return word.

    Interval endpoints are the backward vertex orbits up to depth n; each
    open interval carries the constant word of its n-step return, read at the
    midpoint when ``words`` is set.
    """
    if isinstance(trans, int):
        trans = Transversal(surface, trans)
    cuts = sorted(set(backward_cut_points(trans, n)))
    pts = [Fraction(0)] + cuts + [Fraction(1)]
    iet = trans.return_map() if words else None
    intervals = []
    for lo, hi in zip(pts, pts[1:]):
        if not lo < hi:
            continue
        word = None
        if words:
            _, word = iet.orbit_word((lo + hi) / 2, n)
        intervals.append(PartitionInterval(lo, hi, word))
    return ReturnPartition(n, cuts, intervals)


class _CutTable:
    """Backward orbit of the depth-1 cuts under the inverse exchange; keeps
    the cut set and answers max-gap queries per depth."""

    def __init__(self, iet: ReturnMapIET):
        self.iet = iet
        base = sorted({iv.lo for iv in iet.intervals}
                      | {iv.hi for iv in iet.intervals})
        self.by_depth = [[t for t in base if 0 < t < 1]]
        self.strands = [(t, True) for t in self.by_depth[0]]

    @property
    def depth(self):
        return len(self.by_depth)

    def extend_to(self, depth: int):
        while self.depth < depth:
            new_strands = []
            born = []
            for t, alive in self.strands:
                if alive:
                    try:
                        t, _ = self.iet.step_back(t)
                        born.append(t)
                    except SingularHit:
                        alive = False
                new_strands.append((t, alive))
            self.strands = new_strands
            self.by_depth.append(born)

    def cuts_to(self, depth: int):
        self.extend_to(depth)
        out = []
        for level in self.by_depth[:depth]:
            out.extend(level)
        return out

    def max_gap(self, depth: int):
        pts = sorted(self.cuts_to(depth))
        pts = [Fraction(0)] + pts + [Fraction(1)]
        return max(hi - lo for lo, hi in zip(pts, pts[1:]))


# -- saddle connections --------------------------------------------------------------

@dataclass(frozen=True)
class SaddleConnection:
    kind: str              # "interior" leaf or "edge" (a horizontal edge)
    start_class: int
    end_class: int
    word: str
    steps: int


def saddle_connections(surface: TranslationSurface, max_steps: int = 4096):
    """Horizontal separatrices terminating at a vertex within the budget,
    with crossing words; horizontal inner edges are edge connections."""
    out = []
    for slot in surface.horizontal_edges():
        p, k = slot
        n = len(surface.polygons[p])
        out.append(SaddleConnection("edge", surface.corner_class[(p, k)],
                                    surface.corner_class[(p, (k + 1) % n)],
                                    "", 0))
    for corner in surface.corner_germs(+1):
        point = surface.vertex_point(corner)
        letters = []
        for step in range(1, max_steps + 1):
            res = flow_step(point, surface)
            if res.kind == "singular":
                hit = res.hit
                end_class = None
                poly_h = surface.polygons[hit.poly]
                for kk in range(len(poly_h)):
                    if poly_h[kk][0] == hit.x and poly_h[kk][1] == hit.y:
                        end_class = surface.corner_class[(hit.poly, kk)]
                out.append(SaddleConnection(
                    "interior", surface.corner_class[corner], end_class,
                    "".join(letters), step))
                break
            if res.kind == "boundary":
                break
            letters.append(res.letter)
            point = res.point
    return out


@dataclass(frozen=True)
class NonSaddleCut:
    tau: Number
    vertex_class: int
    traced_steps: int
    saddle_words: tuple


def find_non_saddle_point(surface, trans, budget: int = 1024) -> NonSaddleCut:
    """A depth-1 cut point whose incoming leaf, traced backward, crosses the
    transversal ``budget`` more times without meeting a vertex (hence lies on
    no saddle connection of that depth).  The saddle connections found below
    the budget are attached as a cross-check."""
    if isinstance(trans, int):
        trans = Transversal(surface, trans)
    if surface.horizontal_is_cylinder_decomposition(512):
        raise CylinderDecomposition("horizontal direction is periodic")
    saddles = tuple(sc.word for sc in saddle_connections(surface, min(budget, 512)))
    iet = trans.return_map()
    for corner in surface.corner_germs(-1):
        point = surface.vertex_point(corner)
        first_cut = None
        for _ in range(100000):
            res = flow_step(point, surface, direction=-1)
            if res.kind in ("singular", "boundary"):
                break
            if res.pair == trans.pair_index:
                first_cut = trans.param(res.point)
                break
            point = res.point
        if first_cut is None:
            continue
        tau = first_cut
        survives = True
        for _ in range(budget):
            try:
                tau, _ = iet.step_back(tau)
            except SingularHit:
                survives = False
                break
        if survives:
            return NonSaddleCut(first_cut, surface.corner_class[corner],
                                budget, saddles)
    raise BudgetExhausted(
        "all backward separatrices hit vertices within the budget; raise it")


# -- inadmissible loops -----------------------------------------------------------------

@dataclass(frozen=True)
class LoopCertificate:
    """Closed curve whose crossing word is inadmissible, with exact measure.

    The word flows n returns from Q (a point within 2^-level of the chosen
    cut P), slides across P into the neighboring interval, takes the wrong
    one-step continuation there, flows until it re-approaches Q and slides
    home.  ``factor`` is the stretch whose occurrence in any leaf word is
    impossible: the (n-1)-step level set through its anchor is shorter than
    a third of |PQ| and lands inside I, so only w_T(I) can follow it, while
    the factor continues with w_T(I').
    """

    level: int
    word: str
    factor: str
    measure: Exact
    measure_constant: Exact      # 3 |e_y|; measure < constant / 2^level
    depth: int
    tau_P: Number
    tau_Q: Number
    tau_return: Number           # T^depth(Q)
    tau_R: Number
    tau_close: Number
    word_I: str
    word_I2: str
    max_gap: Number              # max interval of the (depth-1) partition
    gap_bound: Number            # the required bound a = |PQ|/3
    path_events: tuple

    @property
    def path(self):
        return self.path_events


def build_inadmissible_loop(surface, trans, k: int,
                            return_budget: Optional[int] = None) -> LoopCertificate:
    """Construct the level-k inadmissible loop at the non-saddle cut point.

    Distances along the transversal are edge-parameter fractions; the loop's
    measure is its two slides along the edge times the edge height and stays
    below 3 |e_y| / 2^k.  If the orbit never re-enters between P and Q on the
    first side, the two intervals swap roles and the search restarts.
    """
    if isinstance(trans, int):
        trans = Transversal(surface, trans)
    iet = trans.return_map()
    P = trans.non_saddle_cut().tau
    if return_budget is None:
        return_budget = 96 * 2 ** k + 8192
    above = next((iv for iv in iet.intervals if iv.lo == P), None)
    below = next((iv for iv in iet.intervals if iv.hi == P), None)
    sides = []
    if above is not None and below is not None:
        sides = [(above, below, 1), (below, above, -1)]
    if not sides:
        raise BudgetExhausted("cut point lacks two flanking intervals")
    table = _CutTable(iet)
    last = None
    # base points whose orbits land exactly on a partition cut are retried at
    # perturbed offsets; fresh prime denominators dodge algebraic coincidences
    offsets = (Fraction(1), Fraction(6, 7), Fraction(9, 11), Fraction(10, 13),
               Fraction(12, 17), Fraction(15, 19), Fraction(16, 23),
               Fraction(22, 29), Fraction(24, 31), Fraction(28, 37))
    for I, I2, sgn in sides:
        for off in offsets:
            try:
                return _try_loop(trans, iet, table, k, P, I, I2, sgn,
                                 return_budget, off)
            except (BudgetExhausted, SingularHit) as exc:
                last = exc
    raise BudgetExhausted(f"loop construction failed at level {k}: {last}")


def _try_loop(trans, iet, table, k, P, I, I2, sgn, return_budget, off=Fraction(1)):
    two_k = Fraction(1, 2 ** k)
    delta_q = min(two_k, I.length) / 2 * off
    a = delta_q / 3
    Q = P + sgn * delta_q
    lo_w, hi_w = (P, Q) if sgn > 0 else (Q, P)
    delta_r = min(two_k, I2.length) / 2 * off
    R = P - sgn * delta_r
    q_lo, q_hi = Q - two_k, Q + two_k

    den = 1
    for val in (Q, R, q_lo, q_hi, lo_w, hi_w):
        den = math.lcm(den, _den_of(val))
    fast = iet.fast(den)
    lo_pair, hi_pair = fast.encode(lo_w), fast.encode(hi_w)
    lo_f, hi_f = float(lo_w), float(hi_w)
    state = fast.start(Q)
    word_idx = []
    n = None
    for j in range(1, return_budget + 1):
        word_idx.append(fast.step(state))
        if fast.near(state, lo_pair, hi_pair, lo_f, hi_f):
            tau = fast.value(state)
            if abs(tau - Q) < a and j >= 2 and table.max_gap(j - 1) < a:
                n = j
                break
    if n is None:
        raise BudgetExhausted(f"no admissible return depth within {return_budget}")
    tau_n = fast.value(state)
    assert min(abs(tau_n - I.lo), abs(tau_n - I.hi)) > a

    ivR = iet.locate(R)
    assert ivR.lo == I2.lo and ivR.hi == I2.hi
    assert ivR.word != I.word

    qlo_pair, qhi_pair = fast.encode(q_lo), fast.encode(q_hi)
    qlo_f, qhi_f = float(q_lo), float(q_hi)
    state2 = fast.start(R)
    tail_idx = []
    m = 0
    while True:
        tail_idx.append(fast.step(state2))
        m += 1
        if fast.near(state2, qlo_pair, qhi_pair, qlo_f, qhi_f):
            break
        if m > return_budget:
            raise BudgetExhausted("closing flight exceeded the return budget")
    tau_s = fast.value(state2)

    e = iet.arrival_letter
    words = [iv.word for iv in iet.intervals]
    piece1 = "".join(words[i] + e for i in word_idx)
    piece2 = "".join(words[i] + e for i in tail_idx)
    word = piece1 + piece2
    factor = piece1[len(words[word_idx[0]]):] + words[tail_idx[0]] + e
    assert words[tail_idx[0]] == ivR.word
    assert factor in word

    ey = trans.height
    measure = (abs(tau_n - R) + abs(tau_s - Q)) * ey
    constant = 3 * ey
    if not measure < constant * two_k:
        raise AssertionError("loop measure exceeds its structural bound")

    events = (
        ("leaf", trans.point(Q), trans.point(tau_n), n),
        ("hop", trans.point(tau_n), trans.point(R), 0),
        ("leaf", trans.point(R), trans.point(tau_s), m),
        ("hop", trans.point(tau_s), trans.point(Q), 0),
    )
    return LoopCertificate(k, word, factor, measure, constant, n,
                           P, Q, tau_n, R, tau_s, I.word, ivR.word,
                           table.max_gap(n - 1), a, events)


# -- exotic synthesis ----------------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceExoticStage:
    position: int
    level: int
    certificate: LoopCertificate
    connector: Exact
    partial_measure: Exact
    partial_bound: Exact


def synthesize_exotic(surface, trans, levels, *, thin: bool = False,
                      certificates: Optional[dict] = None) -> list[SurfaceExoticStage]:
    """Concatenate level-k loops with slides along the transversal between
    their base points; the exact ledger stays below (c + c') sum 2^{-k} with
    c = 3|e_y| for the loops and c' = |e_y| for the slides.

    With ``thin=True`` levels are pruned until each kept loop's measure
    exceeds three times any possible later tail, so distinct level tails give
    distinct tail measures.
    """
    if isinstance(trans, int):
        trans = Transversal(surface, trans)
    stages = []
    partial: Exact = Fraction(0)
    bound: Exact = Fraction(0)
    prev: Optional[LoopCertificate] = None
    c_total = 4 * trans.height   # 3|e_y| loop + |e_y| connector
    gate = None
    skipped = []
    for k in levels:
        if thin and gate is not None:
            # later stages total below 2 c_total / 2^k
            if not 2 * c_total * Fraction(1, 2 ** k) < gate:
                skipped.append(k)
                continue
        if certificates is not None and k in certificates:
            cert = certificates[k]
        else:
            cert = build_inadmissible_loop(surface, trans, k)
            if certificates is not None:
                certificates[k] = cert
        connector: Exact = Fraction(0)
        if prev is not None:
            connector = abs(cert.tau_Q - prev.tau_Q) * trans.height
        partial = partial + connector + cert.measure
        bound = bound + c_total * Fraction(1, 2 ** k)
        stages.append(SurfaceExoticStage(len(stages), k, cert, connector,
                                         partial, bound))
        prev = cert
        if thin:
            gate = cert.measure / 3
    return stages


# -- bundled example surfaces ------------------------------------------------------------

def sheared_torus_doc(gamma=None) -> dict:
    """Unit-area torus from a sheared parallelogram; the first return to the
    vertical edge pair is rotation by gamma (default sqrt2 - 1)."""
    g = QuadNum(-1, 1, 2) if gamma is None else gamma
    pts = [(Fraction(0), Fraction(0)), (Fraction(1), g),
           (Fraction(1), g + 1), (Fraction(0), Fraction(1))]
    return {
        "field": "sqrt2",
        "polygons": [[[format_exact(x), format_exact(y)] for x, y in pts]],
        "identify": [[[0, 0], [0, 2]], [[0, 1], [0, 3]]],
    }


def slit_tori_doc(gamma=None, slit=Fraction(1, 2)) -> dict:
    """Two sheared tori glued along a vertical slit: a genus-2 surface whose
    horizontal flow is minimal for irrational shear."""
    g = QuadNum(-1, 1, 2) if gamma is None else gamma
    a = Fraction(slit)
    hexa = [(Fraction(0), Fraction(0)), (Fraction(1), g),
            (Fraction(1), g + a), (Fraction(1), g + 1),
            (Fraction(0), Fraction(1)), (Fraction(0), a)]
    poly = [[format_exact(x), format_exact(y)] for x, y in hexa]
    return {
        "field": "sqrt2",
        "polygons": [poly, [list(v) for v in poly]],
        "identify": [
            [[0, 0], [0, 3]],   # bottom ~ top, torus 0
            [[1, 0], [1, 3]],   # bottom ~ top, torus 1
            [[0, 2], [0, 4]],   # upper right ~ upper left, torus 0
            [[1, 2], [1, 4]],   # upper right ~ upper left, torus 1
            [[0, 1], [1, 5]],   # lower right of torus 0 ~ slit of torus 1
            [[1, 1], [0, 5]],   # lower right of torus 1 ~ slit of torus 0
        ],
    }


SURFACE_PRESETS = {
    "sheared-torus": sheared_torus_doc,
    "slit-tori": slit_tori_doc,
}


def preset_surface(name: str) -> TranslationSurface:
    try:
        doc = SURFACE_PRESETS[name]()
    except KeyError:
        raise InvalidSurface(f"unknown surface preset {name!r}") from None
    return load_surface(doc)


def sample_leaf_words(surface, trans, num_letters: int, heights: int,
                      seed: Optional[int] = None):
    """Leaf-word prefixes from many start parameters on the transversal;
    start points landing exactly on a partition cut are skipped."""
    import random as _random
    if isinstance(trans, int):
        trans = Transversal(surface, trans)
    iet = trans.return_map()
    if seed is None:
        taus = [Fraction(j, heights + 1) for j in range(1, heights + 1)]
    else:
        rng = _random.Random(seed)
        denom = 2 ** 20 + 7
        taus = [Fraction(rng.randrange(1, denom), denom) for _ in range(heights)]
    for tau in taus:
        try:
            yield tau, iet.letter_stream(tau, num_letters)
        except SingularHit:
            continue
