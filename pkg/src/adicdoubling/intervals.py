"""Exact rational arithmetic on n-adic interval grids.

For a base n >= 2, level m and index k the grid interval is
[(k-1)/n^m, k/n^m).  Levels may be negative (intervals longer than 1) and
indices may be any integer, so the grids tile all of the real line.  Every
quantity here is a ``fractions.Fraction``; nothing is ever rounded.

Two interior points of a grid interval are distinguished: the right
endpoint of its first child and the left endpoint of its last child
(``y_point`` and ``z_point``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

Rational = Fraction

RationalLike = Union[Fraction, int, str]


def _frac(value: RationalLike) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


@dataclass(frozen=True)
class PlainInterval:
    """Half-open interval [left, right) with rational endpoints."""

    left: Fraction
    right: Fraction

    def __post_init__(self):
        object.__setattr__(self, "left", _frac(self.left))
        object.__setattr__(self, "right", _frac(self.right))
        if not self.left < self.right:
            raise ValueError(f"empty interval [{self.left}, {self.right})")

    @property
    def length(self) -> Fraction:
        return self.right - self.left

    @property
    def midpoint(self) -> Fraction:
        return (self.left + self.right) / 2

    def contains_point(self, x: RationalLike) -> bool:
        x = _frac(x)
        return self.left <= x < self.right

    def contains(self, other: "IntervalLike") -> bool:
        return self.left <= other.left and other.right <= self.right

    def strictly_contains(self, other: "IntervalLike") -> bool:
        return self.left < other.left and other.right < self.right

    def overlaps(self, other: "IntervalLike") -> bool:
        return self.left < other.right and other.left < self.right

    def intersection(self, other: "IntervalLike"):
        lo = max(self.left, other.left)
        hi = min(self.right, other.right)
        return PlainInterval(lo, hi) if lo < hi else None


@dataclass(frozen=True)
class AdicInterval:
    """The base-adic interval [(index-1)/base^level, index/base^level).

    ``index`` is arbitrary precision: deep selections produce indices with
    hundreds of digits.
    """

    base: int
    level: int
    index: int

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base must be >= 2")

    @property
    def left(self) -> Fraction:
        return (self.index - 1) * Fraction(self.base) ** (-self.level)

    @property
    def right(self) -> Fraction:
        return self.index * Fraction(self.base) ** (-self.level)

    @property
    def length(self) -> Fraction:
        return Fraction(self.base) ** (-self.level)

    def as_plain(self) -> PlainInterval:
        return PlainInterval(self.left, self.right)

    def children(self) -> list["AdicInterval"]:
        """The base children, left to right; they tile this interval."""
        first = (self.index - 1) * self.base + 1
        return [AdicInterval(self.base, self.level + 1, first + j) for j in range(self.base)]

    def child(self, j: int) -> "AdicInterval":
        """The j-th child, 1-based."""
        if not 1 <= j <= self.base:
            raise ValueError(f"child index {j} out of range 1..{self.base}")
        return AdicInterval(self.base, self.level + 1, (self.index - 1) * self.base + j)

    def parent(self) -> "AdicInterval":
        return AdicInterval(self.base, self.level - 1, ceil_frac(Fraction(self.index, self.base)))

    def contains_point(self, x: RationalLike) -> bool:
        return self.as_plain().contains_point(x)

    def contains(self, other: "IntervalLike") -> bool:
        return self.left <= other.left and other.right <= self.right


IntervalLike = Union[PlainInterval, AdicInterval]


def y_point(interval: AdicInterval) -> Fraction:
    """Right endpoint of the first child: (k-1)/n^m + 1/n^(m+1)."""
    n = interval.base
    return interval.left + Fraction(n) ** (-(interval.level + 1))


def z_point(interval: AdicInterval) -> Fraction:
    """Left endpoint of the last child: (k-1)/n^m + (n-1)/n^(m+1)."""
    n = interval.base
    return interval.left + (n - 1) * Fraction(n) ** (-(interval.level + 1))


def adic_containing(base: int, level: int, point: RationalLike) -> AdicInterval:
    """The unique level-`level` base-adic interval containing `point`."""
    point = _frac(point)
    scaled = point * Fraction(base) ** level
    return AdicInterval(base, level, floor_frac(scaled) + 1)


def smallest_containing(base: int, region: IntervalLike) -> AdicInterval:
    """Minimal base-adic interval containing `region`.

    0 is a grid point of every base-adic level, so no grid interval can
    contain a region straddling 0; such input is rejected.  Minimality is
    certified on the way out by checking that no child of the result
    contains the region.
    """
    if isinstance(region, AdicInterval):
        region = region.as_plain()
    if region.left < 0 < region.right:
        raise ValueError("no adic interval contains a region straddling 0")

    level = 0
    candidate = adic_containing(base, level, region.left)
    while not candidate.contains(region):
        level -= 1
        candidate = adic_containing(base, level, region.left)
        if level < -4096:
            raise ValueError("region appears unbounded")
    while True:
        finer = adic_containing(base, level + 1, region.left)
        if finer.contains(region):
            candidate, level = finer, level + 1
        else:
            break
    assert not any(c.contains(region) for c in candidate.children())
    return candidate


def largest_adic_inside(base: int, region: PlainInterval) -> AdicInterval:
    """Largest (coarsest) base-adic interval contained in `region`.

    Among equals at the winning level, the leftmost is returned.
    """
    level = 0
    while Fraction(base) ** (-level) > region.length:
        level += 1
    # At level with 2*length <= |region| a grid interval always fits, so at
    # most two levels need to be inspected.
    for lvl in (level, level + 1):
        first = ceil_frac(region.left * Fraction(base) ** lvl) + 1
        candidate = AdicInterval(base, lvl, first)
        if region.contains(candidate):
            return candidate
    raise AssertionError("unreachable: a grid interval must fit")


def adjacent_equal_pair(left: IntervalLike, right: IntervalLike) -> bool:
    """True iff the intervals abut (left.right == right.left) with equal length."""
    return left.right == right.left and (left.right - left.left) == (right.right - right.left)


def decimal_expansion(x: Fraction, digits: int) -> str:
    """Exact decimal string of x truncated toward zero at `digits` places.

    Independent of Fraction comparison logic; used as a cross-check oracle.
    """
    sign = "-" if x < 0 else ""
    num, den = abs(x.numerator), x.denominator
    whole, rem = divmod(num, den)
    frac_digits = []
    for _ in range(digits):
        rem *= 10
        d, rem = divmod(rem, den)
        frac_digits.append(str(d))
    return f"{sign}{whole}.{''.join(frac_digits)}"


def disjoint_family(intervals: Iterable[IntervalLike]) -> bool:
    """Exact pairwise-disjointness of half-open intervals."""
    spans = sorted((iv.left, iv.right) for iv in intervals)
    for (l1, r1), (l2, _) in zip(spans, spans[1:]):
        if l2 < r1:
            return False
    return True
