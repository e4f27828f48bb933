"""Certified rational enclosures for logarithms and rational powers.

All bounds are exact Fractions.  Natural logs come from the atanh series
ln(y) = 2*atanh((y-1)/(y+1)) after reducing the argument to [1, 2) by
powers of two, so the series ratio is at most 1/9 and the geometric tail
bound is cheap.  Roots come from exact integer bracketing.  No floating
point enters any bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

RationalLike = Union[Fraction, int]


@dataclass(frozen=True)
class Enclosure:
    """A closed interval [lo, hi] certified to contain a real value."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError("enclosure with lo > hi")

    @classmethod
    def exact(cls, value: RationalLike) -> "Enclosure":
        value = Fraction(value)
        return cls(value, value)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    def contains(self, value: RationalLike) -> bool:
        return self.lo <= Fraction(value) <= self.hi

    def strictly_above(self, other: "Enclosure | RationalLike") -> bool:
        bound = other.hi if isinstance(other, Enclosure) else Fraction(other)
        return self.lo > bound

    def strictly_below(self, other: "Enclosure | RationalLike") -> bool:
        bound = other.lo if isinstance(other, Enclosure) else Fraction(other)
        return self.hi < bound

    def __add__(self, other: "Enclosure | RationalLike") -> "Enclosure":
        if isinstance(other, Enclosure):
            return Enclosure(self.lo + other.lo, self.hi + other.hi)
        other = Fraction(other)
        return Enclosure(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __neg__(self) -> "Enclosure":
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other: "Enclosure | RationalLike") -> "Enclosure":
        if isinstance(other, Enclosure):
            return self + (-other)
        return self + (-Fraction(other))

    def scale(self, c: RationalLike) -> "Enclosure":
        c = Fraction(c)
        if c >= 0:
            return Enclosure(c * self.lo, c * self.hi)
        return Enclosure(c * self.hi, c * self.lo)

    def __mul__(self, other: "Enclosure | RationalLike") -> "Enclosure":
        if not isinstance(other, Enclosure):
            return self.scale(other)
        products = [a * b for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
        return Enclosure(min(products), max(products))

    __rmul__ = __mul__

    def reciprocal(self) -> "Enclosure":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("enclosure straddles 0")
        return Enclosure(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other: "Enclosure | RationalLike") -> "Enclosure":
        if isinstance(other, Enclosure):
            return self * other.reciprocal()
        return self.scale(1 / Fraction(other))


def _atanh_enclosure(z: Fraction, target: Fraction) -> Enclosure:
    # series sum_{k>=0} z^(2k+1)/(2k+1); geometric tail bound
    if not 0 < z < 1:
        raise ValueError("atanh series needs 0 < z < 1")
    zz = z * z
    geom = 1 / (1 - zz)
    total = Fraction(0)
    power = z
    k = 0
    while True:
        bound = power * geom / (2 * k + 1)
        if bound < target:
            return Enclosure(total, total + bound)
        total += power / (2 * k + 1)
        power *= zz
        k += 1


_LN2_CACHE: dict[Fraction, Enclosure] = {}


def ln2_enclosure(target: Fraction) -> Enclosure:
    cached = _LN2_CACHE.get(target)
    if cached is None:
        cached = _atanh_enclosure(Fraction(1, 3), target / 2).scale(2)
        _LN2_CACHE[target] = cached
    return cached


def _dyadic_exponent(x: Fraction) -> int:
    """e with 2^e <= x < 2^(e+1), for x > 0."""
    e = x.numerator.bit_length() - x.denominator.bit_length()
    while Fraction(2) ** e > x:
        e -= 1
    while Fraction(2) ** (e + 1) <= x:
        e += 1
    return e


def ln_enclosure(x: Fraction, target_width: Fraction) -> Enclosure:
    """Enclosure of ln(x) of width at most target_width, for rational x > 0."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("ln needs a positive argument")
    if x == 1:
        return Enclosure.exact(0)
    if x < 1:
        return -ln_enclosure(1 / x, target_width)
    e = _dyadic_exponent(x)
    y = x / Fraction(2) ** e
    if e == 0:
        scaled_part = Enclosure.exact(0)
        series_budget = target_width
    else:
        ln2_budget = target_width / (2 * e)
        scaled_part = ln2_enclosure(ln2_budget).scale(e)
        series_budget = target_width / 2
    if y == 1:
        return scaled_part
    z = (y - 1) / (y + 1)
    series = _atanh_enclosure(z, series_budget / 2).scale(2)
    return scaled_part + series


def _integer_root(n: int, r: int) -> int:
    """floor(n^(1/r)) for n >= 0, r >= 1, by Newton iteration."""
    if n < 0:
        raise ValueError("negative radicand")
    if r == 1 or n <= 1:
        return n
    x = 1 << -(-n.bit_length() // r)  # upper-ish start
    while True:
        y = ((r - 1) * x + n // x ** (r - 1)) // r
        if y >= x:
            break
        x = y
    while x**r > n:
        x -= 1
    while (x + 1) ** r <= n:
        x += 1
    return x


def nth_root_enclosure(x: Fraction, r: int, digits: int = 30) -> Enclosure:
    """Enclosure of x^(1/r) with width 10^-digits, for rational x >= 0."""
    if r < 1:
        raise ValueError("root order must be >= 1")
    x = Fraction(x)
    if x < 0:
        raise ValueError("negative radicand")
    if r == 1 or x == 0:
        return Enclosure.exact(x)
    num_root = _integer_root(x.numerator, r)
    den_root = _integer_root(x.denominator, r)
    if num_root**r == x.numerator and den_root**r == x.denominator:
        return Enclosure.exact(Fraction(num_root, den_root))
    scale = 10**digits
    numerator = x.numerator * scale**r
    target = numerator // x.denominator
    root = _integer_root(target, r)
    # root/scale <= x^(1/r) < (root+1)/scale by exact bracketing
    while (root + 1) ** r * x.denominator <= numerator:
        root += 1
    while root**r * x.denominator > numerator:
        root -= 1
    return Enclosure(Fraction(root, scale), Fraction(root + 1, scale))


def pow_enclosure(x: Fraction, exponent: Fraction, digits: int = 30) -> Enclosure:
    """Enclosure of x^exponent for rational x > 0 and rational exponent."""
    x = Fraction(x)
    exponent = Fraction(exponent)
    if x <= 0:
        raise ValueError("power base must be positive")
    inner = x**exponent.numerator  # exact, handles negative numerators
    if exponent.denominator == 1:
        return Enclosure.exact(inner)
    return nth_root_enclosure(inner, exponent.denominator, digits)


def refine_linear_form(
    coefficients: dict[int, Fraction], target_width: Fraction
) -> Enclosure:
    """Enclosure of sum_p c_p * ln(p) over integer bases p >= 2.

    The bases are typically primes; exactness of the zero case is the
    caller's concern (ln of distinct primes are linearly independent over
    the rationals, so an exactly-zero form has all-zero coefficients).
    """
    live = {p: c for p, c in coefficients.items() if c != 0}
    if not live:
        return Enclosure.exact(0)
    budget = target_width / sum(abs(c) for c in live.values()) / 2
    total = Enclosure.exact(0)
    for p, c in sorted(live.items()):
        total = total + ln_enclosure(Fraction(p), budget).scale(c)
    return total
