"""Ground truth for which finite words occur in slope-theta leaf words.

The decision procedure reduces to rational convergent words: a word u over
{a, b} spanning at most count_a(u) + 1 blocks occurs in some theta-leaf word
if and only if it is a factor of the periodic word with period the
convergent word p_l/q_l, for any level l with q_l >= count_a(u) + 2.  One
direction is the window structure of leaf words (every q_l-block window is a
rotation of the convergent word), the other is that every convergent word
extends to a leaf word.  Verdicts record the levels used; "depth
insufficient" is an explicit outcome, never a verdict.

An independent sampling oracle searches long leaf-word prefixes generated by
exact integer floor arithmetic (sums floor(j*theta + s) with isqrt), which is
fast enough for 10^5-letter prefixes from 100 start heights.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .cf import ContinuedFraction
from .errors import DepthInsufficient
from .exactnum import QuadNum
from .words import BlockWord, simple_word

try:
    import numpy as _np
except ImportError:  # pragma: no cover
    _np = None

_FLOAT_EXACT_LIMIT = 2 ** 52


@dataclass(frozen=True)
class FactorSet:
    """All length-m letter factors of the periodic slope-r word."""

    slope: Fraction
    length: int
    factors: frozenset

    def __contains__(self, word: str) -> bool:
        return word in self.factors


def rational_block_rotations(r) -> list[BlockWord]:
    base = simple_word(Fraction(r), 1)
    return [base.rotate(j) for j in range(len(base.blocks))]


def rational_factors(r, m: int) -> FactorSet:
    """Length-m factors of the bi-infinite periodic word with period the
    slope-r convergent word, from all cyclic rotations."""
    r = Fraction(r)
    period = simple_word(r, 1).letters()
    reps = max(2, (m + 2 * len(period) - 1) // len(period) + 1)
    hay = period * reps
    factors = frozenset(hay[i:i + m] for i in range(len(period)))
    return FactorSet(r, m, factors)


def _periodic_haystack(r, needle_len: int) -> str:
    period = simple_word(Fraction(r), 1).letters()
    reps = max(2, needle_len // len(period) + 2)
    return period * reps, len(period)


@dataclass(frozen=True)
class AdmissibilityCertificate:
    verdict: str                       # "admissible" | "inadmissible"
    word: str                          # the factor's letters
    levels: tuple[int, ...]            # convergent indices consulted
    block_span: int                    # block window requirement
    aligned: bool = False              # block-aligned occurrence demanded
    witness_height: Optional[Fraction] = None
    witness_offset: Optional[int] = None

    @property
    def is_admissible(self) -> bool:
        return self.verdict == "admissible"


def _window_level(theta: ContinuedFraction, span: int, k_max: int) -> int:
    for l in range(k_max + 1):
        if theta.convergent(l).q >= span:
            return l
    raise DepthInsufficient(
        f"window of {span} blocks needs q_l >= {span}, unavailable at depth {k_max}")


def _search_form(word) -> tuple[str, str, bool]:
    """(search string, display letters, aligned).

    A BlockWord asks for a block-aligned occurrence.  In a leaf word every
    block ends with the marker letter, so an occurrence is aligned exactly
    when the marker precedes it; anchoring the search string with the marker
    encodes alignment as plain containment.
    """
    if isinstance(word, BlockWord):
        letters = word.letters()
        anchor = letters[-1]  # block-terminating marker ('a' for b^n a blocks)
        return anchor + letters, letters, True
    if set(word) - {"a", "b"}:
        raise ValueError("words are over the letters a, b")
    return word, word, False


def is_admissible(word, theta: ContinuedFraction, k_max: int = 24) -> AdmissibilityCertificate:
    """Decide whether ``word`` occurs in some theta-leaf word.

    ``word`` may be a letter string (plain containment) or a BlockWord
    (block-aligned containment).  Membership of the search string among the
    convergent-word factors at the first level whose cycle is longer than the
    word's block span settles the verdict; inadmissible verdicts are
    confirmed at the following level as well.  Admissible verdicts carry a
    start height and offset locating the factor in the leaf word from that
    height, re-checkable against the exact cutting sequence.
    """
    search, letters, aligned = _search_form(word)
    if letters == "":
        return AdmissibilityCertificate("admissible", letters, (), 0, aligned,
                                        Fraction(1, 7), 0)
    span = search.count("a") + 2
    l0 = _window_level(theta, span, k_max)
    cv = theta.convergent(l0)
    hay, _plen = _periodic_haystack(Fraction(cv.p, cv.q), len(search))
    member = search in hay
    levels = [l0]
    if not member:
        if l0 + 1 <= k_max:
            cv1 = theta.convergent(l0 + 1)
            hay1, _ = _periodic_haystack(Fraction(cv1.p, cv1.q), len(search))
            if search in hay1:
                raise AssertionError(
                    "level disagreement; window threshold violated")
            levels.append(l0 + 1)
        return AdmissibilityCertificate("inadmissible", letters, tuple(levels),
                                        span, aligned)
    s, offset = _find_witness(search, letters, aligned, theta)
    return AdmissibilityCertificate("admissible", letters, tuple(levels), span,
                                    aligned, s, offset)


def _find_witness(search: str, letters: str, aligned: bool,
                  theta: ContinuedFraction):
    """Start height and offset of the factor in an actual leaf word.

    The offset always points at the factor itself; for aligned factors the
    stream either begins with the factor (offset 0, the stream starts on a
    block boundary) or contains the anchored string.
    """
    budget = max(4 * len(search) + 2000, 10000)
    for denom in (7, 11, 101, 257):
        for j in (1, 2, 3):
            s = Fraction(j, denom)
            stream = leaf_letter_stream(theta, s, budget)
            if aligned and stream.startswith(letters):
                return s, 0
            pos = stream.find(search)
            if pos >= 0:
                return s, pos + (1 if aligned else 0)
        budget *= 2
    raise AssertionError("admissible word not found in sampled leaf words")


def factor_count(theta: ContinuedFraction, m: int, k_max: int = 24) -> int:
    """Number of distinct admissible length-m letter factors."""
    if m == 0:
        return 1
    l = _window_level(theta, m + 2, k_max)
    cv = theta.convergent(l)
    period = simple_word(Fraction(cv.p, cv.q), 1).letters()
    reps = max(2, m // len(period) + 2)
    hay = period * reps
    return len({hay[i:i + m] for i in range(len(period))})


# -- exact leaf-word streams -----------------------------------------------------

def _theta_integer_form(theta: ContinuedFraction, s: Fraction):
    """Integers (E, F, d, C) with j*theta + s = (E*j + S + F*j*sqrt(d)) / C."""
    val = theta.value()
    if val is None:
        raise ValueError("stream generation needs an exact slope value")
    if isinstance(val, QuadNum) and val.b != 0:
        a, b, d = val.a, val.b, val.d
    else:
        a = Fraction(val)
        b = Fraction(0)
        d = 2
    g = math.lcm(a.denominator, b.denominator)
    r = s.denominator
    C = g * r
    E = a.numerator * (g // a.denominator) * r
    F = b.numerator * (g // b.denominator) * r
    S = s.numerator * g
    return E, F, S, d, C


def leaf_letter_stream(theta: ContinuedFraction, s: Fraction, num_letters: int) -> str:
    """First ``num_letters`` letters of the cutting sequence from (0, s),
    computed by exact integer floors of j*theta + s."""
    val = theta.value()
    fval = float(val)
    slack = 1.1
    while True:
        J = int(num_letters / (1.0 + fval) * slack) + 16
        blocks = leaf_block_stream(theta, s, J)
        out = []
        total = 0
        for n in blocks:
            out.append("b" * n + "a")
            total += n + 1
            if total >= num_letters:
                return "".join(out)[:num_letters]
        slack *= 2  # block estimate fell short; enlarge and regenerate


def leaf_block_stream(theta: ContinuedFraction, s: Fraction, num_blocks: int):
    """Block sizes floor((j+1)theta + s) - floor(j theta + s), j = 0..n-1."""
    E, F, S, d, C = _theta_integer_form(theta, s)
    J = num_blocks
    if _np is not None and F >= 0:
        b_hi = F * J
        if b_hi * b_hi * d < _FLOAT_EXACT_LIMIT and (E * J + abs(S)) < 2 ** 62:
            return _block_stream_numpy(E, F, S, d, C, J)
    return _block_stream_python(E, F, S, d, C, J)


def _block_stream_numpy(E, F, S, d, C, J):
    j = _np.arange(J + 1, dtype=_np.int64)
    A = E * j + S
    B = F * j
    t = B * B * d
    root = _np.floor(_np.sqrt(t.astype(_np.float64))).astype(_np.int64)
    # repair floating error exactly
    for _ in range(2):
        root = _np.where((root + 1) * (root + 1) <= t, root + 1, root)
        root = _np.where(root * root > t, root - 1, root)
    assert bool(((root * root <= t) & ((root + 1) * (root + 1) > t)).all())
    floors = (A + root) // C
    return _np.diff(floors).tolist()


def _block_stream_python(E, F, S, d, C, J):
    floors = []
    for j in range(J + 1):
        B = F * j
        t = B * B * d
        root = math.isqrt(t)
        if B < 0:
            root = -root - 1 if t != root * root else -root
        floors.append((E * j + S + root) // C)
    return [floors[j + 1] - floors[j] for j in range(J)]


@dataclass(frozen=True)
class SamplingReport:
    word: str
    heights: tuple[Fraction, ...]
    letters_per_height: int
    found_at: Optional[tuple[Fraction, int]]  # (height, offset) if the word occurred

    @property
    def absent(self) -> bool:
        return self.found_at is None


def sampling_cross_check(word, theta: ContinuedFraction,
                         num_letters: int = 100_000, heights: int = 100,
                         seed: Optional[int] = None) -> SamplingReport:
    """Search the factor in leaf-word prefixes from many exact start heights.

    BlockWord inputs are searched block-aligned (anchored by the block
    marker, or at the stream head).  Returns the first occurrence if any; an
    absent report is the sampling oracle's rejection of the word.
    """
    search, letters, aligned = _search_form(word)
    if seed is None:
        hs = [Fraction(j, heights + 1) for j in range(1, heights + 1)]
    else:
        rng = random.Random(seed)
        denom = 2 ** 20 + 7
        hs = []
        seen = set()
        while len(hs) < heights:
            c = rng.randrange(1, denom)
            if c not in seen:
                seen.add(c)
                hs.append(Fraction(c, denom))
    for s in hs:
        stream = leaf_letter_stream(theta, s, num_letters)
        if aligned and stream.startswith(letters):
            return SamplingReport(letters, tuple(hs), num_letters, (s, 0))
        pos = stream.find(search)
        if pos >= 0:
            return SamplingReport(letters, tuple(hs), num_letters,
                                  (s, pos + (1 if aligned else 0)))
    return SamplingReport(letters, tuple(hs), num_letters, None)
