"""Simultaneous approximation of 2^x by integer powers of other bases.

The search hunts integers x whose doublings land close to the base-n
grids: |1/2^x - 1/n^[x*log_n 2]| < eps/2^x simultaneously for every base
in a list.  Floating point only steers which x get inspected; acceptance
of an x is always a big-integer comparison, and every certificate can be
re-checked from its stored integers alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .enclosure import Enclosure, ln2_enclosure, ln_enclosure
from .errors import BoundaryStraddleError, SearchExhaustedError
from .intervals import floor_frac


def power_of_two_exponent(n: int) -> Optional[int]:
    """s with n = 2^s, else None."""
    if n < 2 or n & (n - 1):
        return None
    return n.bit_length() - 1


def nearest_power_exponent(base: int, x: int) -> int:
    """The integer nearest to x*log_base(2), certified exactly.

    r is nearest iff base^(2r-1) <= 4^x < base^(2r+1); the float estimate
    is only a starting point and ties round up (they require base to be a
    power of two).
    """
    if x < 0:
        raise ValueError("x must be >= 0")
    r = round(x * math.log(2) / math.log(base)) if x else 0
    r = max(r, 0)
    four_x = 1 << (2 * x)
    while r > 0 and base ** (2 * r - 1) > four_x:
        r -= 1
    while four_x >= base ** (2 * r + 1):
        r += 1
    return r


@dataclass(frozen=True)
class BaseWitness:
    """Exact inequality witness for one base: |n^r - 2^x| < eps * n^r.

    lhs/rhs are the cross-multiplied integers actually compared, so the
    inequality is re-checkable with a single big-integer comparison.
    """

    base: int
    exponent: int
    sign: int  # sign of n^r - 2^x
    lhs: int  # eps_den * |n^r - 2^x|
    rhs: int  # eps_num * n^r
    power_of_two: bool


@dataclass(frozen=True)
class XCertificate:
    x: int
    epsilon: Fraction
    witnesses: tuple[BaseWitness, ...]

    @property
    def bases(self) -> tuple[int, ...]:
        return tuple(w.base for w in self.witnesses)

    def exponent_for(self, base: int) -> int:
        for w in self.witnesses:
            if w.base == base:
                return w.exponent
        raise KeyError(base)


def _witness_for(base: int, x: int, epsilon: Fraction) -> Optional[BaseWitness]:
    r = nearest_power_exponent(base, x)
    power = base**r
    delta = power - (1 << x)
    lhs = epsilon.denominator * abs(delta)
    rhs = epsilon.numerator * power
    if lhs >= rhs:
        return None
    return BaseWitness(
        base=base,
        exponent=r,
        sign=(delta > 0) - (delta < 0),
        lhs=lhs,
        rhs=rhs,
        power_of_two=power_of_two_exponent(base) is not None,
    )


def certify_x(bases: Sequence[int], epsilon: Fraction, x: int) -> Optional[XCertificate]:
    """Exact acceptance test for a single x; None when some base fails."""
    witnesses = []
    for n in bases:
        w = _witness_for(n, x, epsilon)
        if w is None:
            return None
        witnesses.append(w)
    return XCertificate(x=x, epsilon=Fraction(epsilon), witnesses=tuple(witnesses))


def verify_x_certificate(cert: XCertificate) -> None:
    """Re-derive every witness from scratch; raises ValueError on mismatch."""
    for w in cert.witnesses:
        fresh = _witness_for(w.base, cert.x, cert.epsilon)
        if fresh != w:
            raise ValueError(f"witness for base {w.base} does not re-verify")
        r, x = w.exponent, cert.x
        # nearest-integer minimality: both neighbours give strictly larger
        # relative gaps |n^r - 2^x| / n^r
        gap = abs(Fraction(w.base) ** r - Fraction(2) ** x) / Fraction(w.base) ** r
        for other in (r - 1, r + 1):
            if other < 0:
                continue
            other_gap = abs(Fraction(w.base) ** other - Fraction(2) ** x) / Fraction(w.base) ** other
            if not other_gap > gap:
                raise ValueError(f"exponent {r} not gap-minimal for base {w.base}")


def _prefilter_thresholds(bases: Sequence[int], epsilon: Fraction) -> list[float]:
    eps = float(epsilon)
    eps = min(eps, 0.999)
    # accept side: frac distance below -log_n(1 - eps); pad generously, the
    # exact check does the deciding
    return [min(0.5, 1.5 * (-math.log1p(-eps) / math.log(n)) + 1e-9) for n in bases]


def find_x(
    bases: Sequence[int],
    epsilon: Fraction,
    x_min: int = 1,
    x_max: int = 10**6,
) -> XCertificate:
    """Smallest certified x in [x_min, x_max].

    Scans candidates with a float fractional-part filter wide enough never
    to discard a certifiable x, then applies the exact integer test.
    Raises SearchExhaustedError when the range yields nothing (the range
    must then be enlarged; eventual success is guaranteed).
    """
    epsilon = Fraction(epsilon)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must be in (0, 1)")
    if x_min < 1:
        raise ValueError("x_min must be >= 1")
    bases = list(bases)
    if any(n < 2 for n in bases):
        raise ValueError("bases must be >= 2")
    logs = [math.log(2) / math.log(n) for n in bases]
    thresholds = _prefilter_thresholds(bases, epsilon)
    pow2_mask = [power_of_two_exponent(n) is not None for n in bases]
    for x in range(x_min, x_max + 1):
        plausible = True
        for ratio, threshold, is_pow2 in zip(logs, thresholds, pow2_mask):
            if is_pow2:
                continue  # exact check decides; fractional part may be exactly 0
            frac = math.fmod(x * ratio, 1.0)
            if min(frac, 1.0 - frac) > threshold:
                plausible = False
                break
        if not plausible:
            continue
        cert = certify_x(bases, epsilon, x)
        if cert is not None:
            return cert
    raise SearchExhaustedError(f"no certified x in [{x_min}, {x_max}]")


@dataclass(frozen=True)
class OrbitPoint:
    """Fractional parts {x*log_n 2} as certified rational enclosures."""

    x: int
    bases: tuple[int, ...]
    coordinates: tuple[Enclosure, ...]


def _log_ratio_enclosure(base: int, x: int, target: Fraction) -> Enclosure:
    """Enclosure of x * log_base(2) = x*ln2/ln(base)."""
    if x == 0:
        return Enclosure.exact(0)
    ln_n = ln_enclosure(Fraction(base), target / (8 * x))
    ln_2 = ln2_enclosure(target / (8 * x))
    return ln_2.scale(x) / ln_n


def orbit_point(x: int, bases: Sequence[int], precision_bits: int = 64) -> OrbitPoint:
    """Enclosures of {x*log_n 2}, each of width below 2^(-precision_bits/2).

    The integer part is certified by a big-integer power comparison, so an
    enclosure can only fail to settle when the refinement budget runs out;
    that is reported defensively as a boundary straddle.
    """
    if precision_bits < 64:
        raise ValueError("precision_bits must be >= 64")
    if x < 0:
        raise ValueError("x must be >= 0")
    target = Fraction(1, 2 ** (precision_bits // 2))
    coords = []
    for n in bases:
        s = power_of_two_exponent(n)
        if s is not None:
            coords.append(Enclosure.exact(Fraction(x % s, s)))
            continue
        if x == 0:
            coords.append(Enclosure.exact(0))
            continue
        # exact floor: n^f <= 2^x < n^(f+1)
        f = nearest_power_exponent(n, x)
        if n**f > (1 << x):
            f -= 1
        width = target
        for _ in range(8):
            t = _log_ratio_enclosure(n, x, width)
            lo = max(t.lo - f, Fraction(0))
            hi = min(t.hi - f, Fraction(1))
            if t.width <= target and not (t.lo < f < t.hi) and not (t.lo < f + 1 < t.hi):
                coords.append(Enclosure(lo, hi))
                break
            width /= 16
        else:
            raise BoundaryStraddleError(f"cannot separate {{x*log_{n} 2}} from an integer")
    return OrbitPoint(x=x, bases=tuple(bases), coordinates=tuple(coords))


@dataclass(frozen=True)
class DependenceRelation:
    """Certified integer relation sum_i a_i * log_{n_i}(2) = c.

    The proof is a plain integer identity left^left_exp == right^right_exp
    (with base 2 standing in for the constant side).
    """

    coefficients: tuple[int, ...]
    constant: int
    identity: tuple[int, int, int, int]  # (base_a, exp_a, base_b, exp_b)


def rational_dependence_scan(bases: Sequence[int], coeff_bound: int) -> Optional[DependenceRelation]:
    """First certified small-coefficient relation among {log_n 2}, else None.

    Relations among logs of integers reduce to multiplicative identities,
    so candidates are certified by exact big-integer exponentiation:
    a*log_n(2) = c  iff  2^a = n^c, and
    a*log_m(2) - b*log_n(2) = 0  iff  n^a = m^b.
    """
    if coeff_bound < 1:
        raise ValueError("coeff_bound must be >= 1")
    bases = list(bases)
    zeros = [0] * len(bases)

    for i, n in enumerate(bases):
        for a in range(1, coeff_bound + 1):
            for c in range(1, coeff_bound + 1):
                if 2**a == n**c:
                    coeffs = zeros.copy()
                    coeffs[i] = a
                    return DependenceRelation(tuple(coeffs), c, (2, a, n, c))
    for i in range(len(bases)):
        for jdx in range(i + 1, len(bases)):
            m, n = bases[i], bases[jdx]
            for a in range(1, coeff_bound + 1):
                for b in range(1, coeff_bound + 1):
                    if n**a == m**b:
                        coeffs = zeros.copy()
                        coeffs[i] = a
                        coeffs[jdx] = -b
                        return DependenceRelation(tuple(coeffs), 0, (n, a, m, b))
    return None


CoordLike = Union[Fraction, int, Enclosure, tuple]


def _coord_enclosure(c: CoordLike) -> Enclosure:
    if isinstance(c, Enclosure):
        return c
    if isinstance(c, tuple):
        return Enclosure(Fraction(c[0]), Fraction(c[1]))
    return Enclosure.exact(Fraction(c))


def _torus_distance_enclosure(a: Enclosure, b: Enclosure) -> Enclosure:
    """Range of dist_T(a, b) = min({a-b}, 1-{a-b}) over the enclosures."""
    diff = a - b
    span = diff.hi - diff.lo
    if span >= 1:
        return Enclosure(Fraction(0), Fraction(1, 2))
    lo_int = floor_frac(diff.lo)
    shifted = Enclosure(diff.lo - lo_int, diff.hi - lo_int)  # within [0, 2)

    def g(t: Fraction) -> Fraction:
        t = t - floor_frac(t)
        return min(t, 1 - t)

    values = [g(shifted.lo), g(shifted.hi)]
    lo = min(values)
    hi = max(values)
    # interior extrema: integers give 0, half-integers give 1/2
    for knot in (Fraction(0), Fraction(1), Fraction(2)):
        if shifted.lo < knot < shifted.hi:
            lo = Fraction(0)
    for knot in (Fraction(1, 2), Fraction(3, 2)):
        if shifted.lo < knot < shifted.hi:
            hi = Fraction(1, 2)
    return Enclosure(lo, hi)


def torus_metric(xs: Sequence[CoordLike], ys: Sequence[CoordLike], terms: int) -> Enclosure:
    """Enclosure of sum_{k<=terms} dist_T(x_k, y_k)/2^k plus the 2^-terms tail."""
    if terms < 1:
        raise ValueError("terms must be >= 1")
    if len(xs) < terms or len(ys) < terms:
        raise ValueError("sequences shorter than requested term count")
    total = Enclosure.exact(0)
    for k in range(1, terms + 1):
        d = _torus_distance_enclosure(_coord_enclosure(xs[k - 1]), _coord_enclosure(ys[k - 1]))
        total = total + d.scale(Fraction(1, 2**k))
    tail = Fraction(1, 2**terms)
    return Enclosure(total.lo, total.hi + tail)


def fractional_parts_near_zero(
    bases: Sequence[int], delta: Fraction, x_max: int, x_min: int = 1, precision_bits: int = 64
) -> Optional[int]:
    """First x <= x_max with every {x*log_n 2} within delta of 0 or 1.

    Candidates come from a float filter; acceptance requires the certified
    enclosure of each coordinate to sit inside [0, delta] or [1-delta, 1).
    Evidence for orbit density near 0, not a proof of anything.
    """
    delta = Fraction(delta)
    logs = [math.log(2) / math.log(n) for n in bases]
    slack = float(delta) * 1.25 + 1e-9
    for x in range(x_min, x_max + 1):
        ok = True
        for ratio in logs:
            frac = math.fmod(x * ratio, 1.0)
            if min(frac, 1.0 - frac) > slack:
                ok = False
                break
        if not ok:
            continue
        point = orbit_point(x, bases, precision_bits)
        if all(
            coord.hi <= delta or coord.lo >= 1 - delta for coord in point.coordinates
        ):
            return x
    return None
