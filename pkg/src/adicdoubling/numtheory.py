"""Multiplicative orders modulo prime powers and exact congruence pairs.

Everything here is plain integer arithmetic.  Orders are computed by
peeling prime factors off the group order rather than scanning, because
the moduli u^(m1*phi(v)) used by the interval selection reach hundreds of
digits.  Discrete logarithms in those groups are cheap: the relevant
subgroup is cyclic of prime-power order, so Pohlig-Hellman reduces them
to base-p digit extraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .errors import (
    DegenerateDenominatorError,
    NotCoprimeError,
    NotInSubgroupError,
    VerificationFailedError,
)
from .intervals import ceil_frac, floor_frac

_SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24 (ample for this package)."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        if a >= n:
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    for c in range(1, 64):
        x = y = 2
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
    raise ArithmeticError(f"factorization failed for {n}")


def factorize(n: int) -> dict[int, int]:
    """Prime factorization via trial division then Pollard rho."""
    if n < 1:
        raise ValueError("factorize expects n >= 1")
    factors: dict[int, int] = {}
    for p in range(2, 10000):
        if p * p > n:
            break
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            factors[m] = factors.get(m, 0) + 1
            continue
        d = _pollard_rho(m)
        stack.extend([d, m // d])
    return dict(sorted(factors.items()))


def prime_power_split(n: int) -> Optional[tuple[int, int]]:
    """(p, k) with n = p^k, or None if n is not a prime power."""
    factors = factorize(n)
    if len(factors) != 1:
        return None
    return next(iter(factors.items()))


def totient(n: int) -> int:
    if n < 1:
        raise ValueError("totient expects n >= 1")
    result = n
    for p in factorize(n):
        result = result // p * (p - 1)
    return result


def multiplicative_order(a: int, modulus: int, group_order_factors: Optional[dict[int, int]] = None) -> int:
    """Least t >= 1 with a^t == 1 (mod modulus).

    Computed by starting from phi(modulus) and peeling prime factors.
    Callers that know the modulus structure can pass the factorization of
    the group order to skip factoring.
    """
    if modulus < 2:
        raise ValueError("modulus must be >= 2")
    a %= modulus
    if math.gcd(a, modulus) != 1:
        raise NotCoprimeError(f"gcd({a}, {modulus}) != 1")
    if a == 1:
        return 1
    if group_order_factors is None:
        order = totient(modulus)
        group_order_factors = factorize(order)
    order = 1
    for p, e in group_order_factors.items():
        order *= p**e
    for p in group_order_factors:
        while order % p == 0 and pow(a, order // p, modulus) == 1:
            order //= p
    return order


@dataclass(frozen=True)
class OrderProfile:
    """Stabilized order data for v^phi(u) modulo powers of the prime power u.

    m_uv is the first level where v^phi(u) escapes 1 and n0 the smallest
    exponent pushing it back; c_uv = m_uv - n0.  The stabilized behaviour
    is tracked at the prime level: for m >= stabilization_level the order
    of v^phi(u) mod u^m equals p^(k(m-1) - order_deficit) where u = p^k.
    For odd p the deficit equals k*c_uv and the order is the classical
    u^(m-1-c_uv); for p = 2 the binomial-lifting argument behind that
    identity breaks (already at (u,v) = (4,3), where the order mod 4^m is
    2^(2m-3)) and only the prime-level form survives.  The subgroup of
    units generated by v^phi(u) is {x == 1 mod p^(order_deficit + k)},
    which reduces to the classical modulus u^(c_uv+1) for odd p.
    """

    u: int
    v: int
    m_uv: int
    n0: int
    c_uv: int
    order_deficit: int
    stabilization_level: int
    probe_depth: int

    @property
    def p(self) -> int:
        return prime_power_split(self.u)[0]

    @property
    def p_exponent(self) -> int:
        return prime_power_split(self.u)[1]

    @property
    def phi_u(self) -> int:
        return totient(self.u)

    @property
    def phi_v(self) -> int:
        return totient(self.v)

    @property
    def subgroup_modulus(self) -> int:
        return self.p ** (self.order_deficit + self.p_exponent)

    def order_at(self, m: int) -> int:
        """Order of v^phi(u) in (Z/u^m)^* for stabilized m."""
        if m < self.stabilization_level:
            raise ValueError(f"level {m} below stabilization {self.stabilization_level}")
        return self.p ** (self.p_exponent * (m - 1) - self.order_deficit)


def order_profile(u: int, v: int, probe_depth: int = 12) -> OrderProfile:
    """Compute m(u,v), N0, C(u,v) and verify the stabilized order formula.

    Raises VerificationFailedError if any probed level violates the
    stabilized prime-level formula (that would falsify this
    implementation, not the theory).
    """
    split = prime_power_split(u)
    if split is None:
        raise ValueError(f"u={u} is not a prime power")
    p, kappa = split
    if v < 2:
        raise ValueError("v must be >= 2")
    if math.gcd(u, v) != 1:
        raise NotCoprimeError(f"gcd({u}, {v}) != 1")

    phi_u = totient(u)
    m_uv = 1
    while pow(v, phi_u, u ** (m_uv + 1)) == 1:
        m_uv += 1
        if m_uv > 512:
            raise ArithmeticError("m(u,v) scan runaway")
    if probe_depth < m_uv + 2:
        raise ValueError(f"probe_depth must be >= m(u,v)+2 = {m_uv + 2}")

    target_mod = u ** (m_uv + 1)
    base = pow(v, phi_u, target_mod)
    n0 = 1
    while pow(base, u**n0, target_mod) != 1:
        n0 += 1
        if n0 > m_uv:
            raise VerificationFailedError("no n0 <= m(u,v); Euler guarantee violated")
    c_uv = m_uv - n0

    def order_at_level(m: int) -> int:
        mod = u**m
        return multiplicative_order(pow(v, phi_u, mod), mod, _unit_group_order_factors(u, m))

    def deficit_at(m: int, order: int) -> int:
        exponent = 0
        while order > 1:
            if order % p:
                raise VerificationFailedError(f"order of v^phi(u) mod u^{m} is not a p-power")
            order //= p
            exponent += 1
        return kappa * (m - 1) - exponent

    stabilization = m_uv + 1
    deficit = deficit_at(stabilization, order_at_level(stabilization))
    while deficit != deficit_at(stabilization + 1, order_at_level(stabilization + 1)):
        stabilization += 1
        if stabilization + 1 > probe_depth:
            raise VerificationFailedError(f"order deficit does not stabilize for (u,v)=({u},{v})")
        deficit = deficit_at(stabilization, order_at_level(stabilization))
    if deficit < 0:
        raise VerificationFailedError("negative order deficit")
    if p != 2 and deficit != kappa * c_uv:
        raise VerificationFailedError(
            f"odd-prime deficit {deficit} != k*C(u,v) = {kappa * c_uv} for (u,v)=({u},{v})"
        )

    # the escape claim: (v^phi(u))^(u^(n0+l-1)) != 1 mod u^(m_uv+l+1)
    for ell in range(0, probe_depth - m_uv):
        mod = u ** (m_uv + ell + 1)
        if pow(pow(v, phi_u, mod), u ** (n0 + ell - 1), mod) == 1:
            raise VerificationFailedError(f"escape claim fails at ell={ell} for (u,v)=({u},{v})")

    profile = OrderProfile(u, v, m_uv, n0, c_uv, deficit, stabilization, probe_depth)
    for m in range(stabilization, probe_depth + 1):
        if order_at_level(m) != profile.order_at(m):
            raise VerificationFailedError(
                f"stabilized order formula fails at m={m} for (u,v)=({u},{v})"
            )
    return profile


def _unit_group_order_factors(u: int, m: int) -> dict[int, int]:
    # phi(u^m) = p^(k*m - 1) * (p - 1) for u = p^k
    p, k = prime_power_split(u)
    factors = dict(factorize(p - 1))
    if k * m - 1 > 0:
        factors[p] = factors.get(p, 0) + k * m - 1
    return dict(sorted(factors.items()))


@dataclass(frozen=True)
class CongruencePair:
    """Witness of the exact identity k*v^(m2*phi(u)) - j*u^(m1*phi(v)) = 1."""

    m2: int
    j: int
    m1: int
    k: int


def _dlog_prime_power(g: int, h: int, modulus: int, p: int, e: int) -> int:
    """x with g^x == h (mod modulus), where g has order p^e.

    Pohlig-Hellman digit extraction; raises NotInSubgroupError when h is
    outside <g>.
    """
    x = 0
    gamma = pow(g, p ** (e - 1), modulus) if e > 0 else 1
    g_inv = pow(g, -1, modulus)
    for i in range(e):
        shifted = h * pow(g_inv, x, modulus) % modulus
        beta = pow(shifted, p ** (e - 1 - i), modulus)
        val, digit = 1, None
        for cand in range(p):
            if val == beta:
                digit = cand
                break
            val = val * gamma % modulus
        if digit is None:
            raise NotInSubgroupError("target outside the cyclic subgroup")
        x += digit * p**i
    if pow(g, x, modulus) != h:
        raise NotInSubgroupError("target outside the cyclic subgroup")
    return x


def congruence_progression(profile: OrderProfile, m1: int, k: int) -> tuple[int, int]:
    """(base, step): the m2 solving k*v^(m2*phi(u)) == 1 mod u^(m1*phi(v))
    form the arithmetic progression {base + t*step}, intersected with m2 >= 1.
    """
    u, v = profile.u, profile.v
    exponent = m1 * profile.phi_v
    if exponent <= profile.m_uv:
        raise ValueError(f"need m1 > m(u,v)/phi(v), got m1={m1}")
    modulus = u**exponent
    if not (1 <= k <= modulus) or k % profile.subgroup_modulus != 1:
        raise NotInSubgroupError(
            f"k={k} not a subgroup member: need k == 1 mod {profile.subgroup_modulus}, 1 <= k <= u^(m1*phi(v))"
        )
    g = pow(v, profile.phi_u, modulus)
    order = profile.order_at(exponent)
    p = profile.p
    e = 0
    t = order
    while t > 1:
        t //= p
        e += 1
    if pow(g, order, modulus) != 1 or (e > 0 and pow(g, order // p, modulus) == 1):
        raise VerificationFailedError("stabilized order prediction failed in progression")
    target = pow(k, -1, modulus)
    base = _dlog_prime_power(g, target, modulus, p, e)
    return base, order


def solve_pairs(profile: OrderProfile, m1: int, k: int, count: int = 1) -> list[CongruencePair]:
    """First `count` exact Bezout pairs (m2, j) for the subgroup member k.

    Every returned pair satisfies k*v^(m2*phi(u)) - j*u^(m1*phi(v)) = 1
    with j == -1 (mod v), re-checked here before returning.
    """
    u, v = profile.u, profile.v
    modulus = u ** (m1 * profile.phi_v)
    base, step = congruence_progression(profile, m1, k)
    start = base if base >= 1 else step
    pairs = []
    for i in range(count):
        m2 = start + i * step
        power = v ** (m2 * profile.phi_u)
        value = k * power - 1
        if value % modulus != 0:
            raise VerificationFailedError("progression member fails exact divisibility")
        j = value // modulus
        if j % v != v - 1:
            raise VerificationFailedError("j == -1 (mod v) failed")
        if k * power - j * modulus != 1:
            raise VerificationFailedError("Bezout identity failed")
        pairs.append(CongruencePair(m2=m2, j=j, m1=m1, k=k))
    return pairs


def subgroup_members_in_window(
    profile: OrderProfile, m1: int, lo: Fraction, hi: Fraction
) -> Iterator[int]:
    """Members k of G_m1(u,v) with k/u^(m1*phi(v)) in [lo, hi], ascending.

    The selection procedure consumes these lazily; windows inside a unit
    interval can hold astronomically many members.
    """
    modulus = profile.u ** (m1 * profile.phi_v)
    stride = profile.subgroup_modulus
    k_min = max(1, ceil_frac(lo * modulus))
    k_max = min(modulus, floor_frac(hi * modulus))
    k = k_min + (1 - k_min) % stride
    while k <= k_max:
        yield k
        k += stride


@dataclass(frozen=True)
class FarNumberResult:
    """Truncated lower estimate of the far constant of delta for base n.

    value = min over 0 <= m <= max_level of n^m * dist(delta, level-m grid).
    A zero value means delta is n-adic; the witness names the grid point.
    """

    value: Fraction
    witness_m: int
    witness_k: int
    max_level: int

    @property
    def is_adic(self) -> bool:
        return self.value == 0


def far_number_check(delta: Fraction, n: int, max_level: int) -> FarNumberResult:
    """Scaled distance from delta to the base-n grids through max_level.

    This is a truncated estimate: it never claims delta is far (a statement
    about all levels), only reports the infimum over the probed ones.
    """
    if max_level < 1:
        raise ValueError("max_level must be >= 1")
    delta = Fraction(delta)
    best: Optional[tuple[Fraction, int, int]] = None
    for m in range(0, max_level + 1):
        scaled = delta * n**m
        k = floor_frac(scaled)
        for cand in (k, k + 1):
            dist = abs(scaled - cand)
            if best is None or dist < best[0]:
                best = (dist, m, cand)
        if best[0] == 0:
            break
    value, m, k = best
    return FarNumberResult(value=value, witness_m=m, witness_k=k, max_level=max_level)


def unique_three_base_solution(
    p1: int, m1: int, k1: int, p2: int, m2: int, k2: int, q: int
) -> Optional[int]:
    """Candidate exponent n = log_q((p1^m1 - p2^m2)/(k2*p1^m1 - k1*p2^m2)).

    Returns n only when the argument is exactly q^n for an integer n >= 1
    (checked by repeated exact division); otherwise None.  At most one n
    can ever satisfy the simultaneous two-prime system, which is the whole
    obstruction this helper documents.
    """
    a = p1**m1
    b = p2**m2
    den = k2 * a - k1 * b
    if den == 0:
        raise DegenerateDenominatorError("k2*p1^m1 == k1*p2^m2")
    arg = Fraction(a - b, den)
    if arg <= 0 or arg.denominator != 1:
        return None
    t = arg.numerator
    n = 0
    while t % q == 0:
        t //= q
        n += 1
    if t == 1 and n >= 1:
        return n
    return None
