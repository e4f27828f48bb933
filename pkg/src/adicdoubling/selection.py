"""Interval selection with a revolving distinguished point.

Given a prime power u, a smaller coprime v, and a list of multipliers c,
the selection produces a v-adic interval I and, for every composite base
u*c, the minimal (u*c)-adic interval J_c containing I, such that an
interior child endpoint zeta of J_c sits just to the right of the
distinguished point Z(I), with a gap of at most epsilon*|I|.  All the
zeta points coincide as rationals (they are the same point read in
different grids), so the gap is shared.

Every certificate is re-verified from its stored integers using only
interval arithmetic before it is returned: nothing about the construction
path is trusted.

The search runs the literal recipe first (smallest admissible k in the
host interval, then the congruence progression).  When the progression
step is astronomically large, which happens as soon as epsilon is tiny,
the roles are reversed: t2 is scanned upward and k is taken as the
inverse power v^(-t2*phi(u)) mod u^(t1*phi(v)), which lands in the
subgroup automatically.  Either way the certificate conditions are
identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import (
    DomainExhaustedError,
    EpsilonTooCoarseError,
    MultiplierDegenerateError,
    NoValidKError,
    VerificationFailedError,
)
from .intervals import (
    AdicInterval,
    PlainInterval,
    ceil_frac,
    floor_frac,
    largest_adic_inside,
    smallest_containing,
    y_point,
    z_point,
)
from .numtheory import (
    OrderProfile,
    congruence_progression,
    is_prime,
    order_profile,
    prime_power_split,
)


@dataclass(frozen=True)
class SelectionTarget:
    """One composite-base target: the minimal containing interval, its
    revolving point, and the (shared) gap to Z(I)."""

    multiplier: int
    interval: AdicInterval
    zeta: Fraction
    gap: Fraction


@dataclass(frozen=True)
class SelectionCertificate:
    kind: str  # "revolving" | "two-base"
    u: int  # prime power (revolving) or the prime p (two-base)
    v: int
    epsilon: Fraction
    interval: AdicInterval  # the selected v-adic interval I
    targets: tuple[SelectionTarget, ...]
    k: int
    t1: int
    t2: int
    j: int
    power_m: Optional[int] = None  # two-base only: J has base p^m q^n
    power_n: Optional[int] = None
    power_s: Optional[int] = None

    @property
    def base_v(self) -> int:
        return self.v

    @property
    def gap(self) -> Fraction:
        return self.targets[0].gap


@dataclass(frozen=True)
class SelectionFamily:
    entries: tuple[tuple[int, SelectionCertificate], ...]  # (alpha, certificate)
    spacing_rule: str


def _zeta_decomposition(k: int, level_exponent: int, u: int, multiplier: int) -> tuple[AdicInterval, int]:
    """Read zeta = k/u^level_exponent in the base-(u*multiplier) grid.

    Returns the minimal interval J having zeta as an interior child
    endpoint, together with the child position y.  The level drops out of
    exact gcd cancellation: the reduced denominator of zeta is the full
    p-power (k is coprime to p), so the exact base-w level of zeta is
    ceil(p-adic valuation / valuation of w).
    """
    w = u * multiplier
    if w < 2:
        raise MultiplierDegenerateError(f"composite base u*c = {w} is degenerate")
    p, kappa = prime_power_split(u)
    e_w = 0
    t = w
    while t % p == 0:
        t //= p
        e_w += 1
    val = kappa * level_exponent  # p-adic valuation of the denominator
    level = -((-val) // e_w)  # ceil
    big_u = u**level_exponent
    scaled = k * w**level
    if scaled % big_u:
        raise VerificationFailedError("zeta decomposition lost exactness")
    key = scaled // big_u
    y = key % w
    if y == 0:
        raise VerificationFailedError("zeta landed on a coarse grid point")
    return AdicInterval(w, level - 1, (key - y) // w + 1), y


def _smallest_t2_exceeding(v: int, step_exp: int, factor: int, bound: int) -> int:
    """Smallest t >= 1 with v^(t*step_exp) * factor > bound."""
    estimate = (bound.bit_length() - factor.bit_length()) / (step_exp * math.log2(v))
    t = max(1, int(estimate) - 1)
    while v ** (t * step_exp) * factor <= bound:
        t += 1
    while t > 1 and v ** ((t - 1) * step_exp) * factor > bound:
        t -= 1
    return t


def _progression_member_at_least(base: int, step: int, lower: int) -> int:
    """Smallest element of {base + i*step : i >= 0} that is >= max(lower, 1)."""
    lower = max(lower, 1)
    if base >= lower:
        return base
    return base + -((base - lower) // step) * step


def _validate_tilde(j_tilde: PlainInterval) -> None:
    if j_tilde.left < 0 or j_tilde.right > 1:
        raise ValueError("the host interval must sit inside [0, 1]")


def select_revolving(
    u: int,
    v: int,
    multipliers: Sequence[int],
    j_tilde: PlainInterval,
    epsilon: Fraction,
    *,
    t1_cap: int = 64,
    literal_k_cap: int = 8,
    t2_cap: int = 4096,
    fallback_scan_cap: int = 1 << 17,
    profile: Optional[OrderProfile] = None,
) -> SelectionCertificate:
    """Selection certificate for the composite bases u*c, c in multipliers.

    Chooses t1 past the order threshold with u^(-t1*phi(v)) < epsilon*v,
    a subgroup member k whose u-adic interval J fits in the largest v-adic
    interval inside j_tilde, and the smallest admissible t2 with
    (v-1)/v^(t2*phi(u)) + 1/(u^(t1*phi(v)) v^(t2*phi(u))) below the
    finest target scale.  Raises EpsilonTooCoarseError when the t1 budget
    runs out and NoValidKError when no subgroup member ever lands.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if prime_power_split(u) is None:
        raise ValueError(f"u={u} must be a prime power")
    if not 2 <= v < u:
        raise ValueError("need 2 <= v < u")
    if math.gcd(u, v) != 1:
        raise ValueError("u and v must be coprime")
    multipliers = list(multipliers)
    if not multipliers:
        raise ValueError("at least one multiplier is required")
    for c in multipliers:
        if c < 1 or u * c < 2:
            raise MultiplierDegenerateError(f"multiplier {c} gives degenerate base {u * c}")
    _validate_tilde(j_tilde)

    if profile is None:
        profile = order_profile(u, v)
    phi_u, phi_v = profile.phi_u, profile.phi_v
    c_max = max(multipliers)

    j_prime = largest_adic_inside(v, j_tilde)
    t1_floor = max(profile.m_uv // phi_v + 1, j_prime.level + 1)
    t1 = t1_floor
    while u ** (t1 * phi_v) * epsilon * v <= 1:
        t1 += 1

    stride = profile.subgroup_modulus
    saw_candidate = False
    found: Optional[tuple[int, int, int]] = None  # (t1, k, t2)

    for t1_try in range(t1, t1 + t1_cap + 1):
        big_u = u ** (t1_try * phi_v)
        k_min = ceil_frac(j_prime.left * big_u) + 1
        k_max = floor_frac(j_prime.right * big_u) - (u - 1)
        if k_min > k_max:
            continue
        w_max = (u * c_max) ** (t1_try * phi_v)
        t2_min = _smallest_t2_exceeding(v, phi_u, big_u, w_max * ((v - 1) * big_u + 1))

        # literal path: smallest subgroup members first
        k = k_min + (1 - k_min) % stride
        tried = 0
        while k <= k_max and tried < literal_k_cap:
            saw_candidate = True
            base_m2, step = congruence_progression(profile, t1_try, k)
            t2 = _progression_member_at_least(base_m2, step, t2_min)
            if t2 <= t2_cap:
                found = (t1_try, k, t2)
                break
            k += stride
            tried += 1
        if found:
            break

        # reversed path: scan t2, derive k as an inverse power
        g_inv = pow(pow(v, phi_u, big_u), -1, big_u)
        k_run = pow(g_inv, t2_min, big_u)
        for t2 in range(t2_min, t2_min + fallback_scan_cap):
            if k_min <= k_run <= k_max and k_run % stride == 1:
                saw_candidate = True
                found = (t1_try, k_run, t2)
                break
            k_run = k_run * g_inv % big_u
        if found:
            break

    if found is None:
        if saw_candidate:
            raise EpsilonTooCoarseError("t1 budget exhausted before a certificate closed")
        raise NoValidKError("no subgroup member k lands in the admissible window")

    t1, k, t2 = found
    big_u = u ** (t1 * phi_v)
    big_v = v ** (t2 * phi_u)
    value = k * big_v - 1
    if value % big_u:
        raise VerificationFailedError("selected pair fails exact divisibility")
    j = value // big_u
    interval = AdicInterval(v, t2 * phi_u - 1, (j + 1) // v)
    zeta = Fraction(k, big_u)
    gap = zeta - z_point(interval)
    targets = tuple(
        SelectionTarget(multiplier=c, interval=_zeta_decomposition(k, t1 * phi_v, u, c)[0], zeta=zeta, gap=gap)
        for c in sorted(set(multipliers))
    )
    certificate = SelectionCertificate(
        kind="revolving",
        u=u,
        v=v,
        epsilon=epsilon,
        interval=interval,
        targets=targets,
        k=k,
        t1=t1,
        t2=t2,
        j=j,
    )
    verify_certificate(certificate, profile=profile)
    return certificate


def select_two_base(
    p: int,
    q: int,
    m: int,
    n: int,
    j_tilde: PlainInterval,
    epsilon: Fraction,
    *,
    m1_cap: int = 64,
    literal_k_cap: int = 8,
    t2_cap: int = 4096,
    fallback_scan_cap: int = 1 << 17,
    profile: Optional[OrderProfile] = None,
) -> SelectionCertificate:
    """Two-base selection on the composite p^m q^n grid: a q-adic I inside
    j_tilde and the minimal p^m q^n-adic J containing it, with
    0 < Y(J) - Z(I) <= epsilon*|I| and q^(m2(p-1)) > 10q * p^(m1(q-1))
    enforced as stated.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not (is_prime(p) and is_prime(q) and p > q):
        raise ValueError("need primes p > q")
    if m < 1 or n < 0:
        raise ValueError("need m >= 1 and n >= 0")
    _validate_tilde(j_tilde)

    if profile is None:
        profile = order_profile(p, q)
    c_const = profile.c_uv
    w_base = p**m * q**n

    j_prime = largest_adic_inside(q, j_tilde)
    m_prime = j_prime.level
    lower = max(
        Fraction(profile.m_uv, q - 1),
        Fraction(m_prime),
        Fraction(m_prime + c_const + 1, p - 1),
    )
    m1 = m * (floor_frac(lower / m) + 1)
    while p ** (m1 * (q - 1)) * epsilon * q <= 1:
        m1 += m

    saw_candidate = False
    found: Optional[tuple[int, int, int]] = None  # (m1, k, m2)

    for _ in range(m1_cap + 1):
        s = m1 * (q - 1) // m
        big_b = w_base**s
        big_p = p ** (m1 * (q - 1))
        stride = w_base ** (c_const + 1)
        k_min = ceil_frac(j_prime.left * big_b) + 1
        k_max = floor_frac(j_prime.right * big_b) - (w_base - 1)
        t2_min = _smallest_t2_exceeding(q, p - 1, 1, 10 * q * big_p)
        if k_min <= k_max:
            k = k_min + (1 - k_min) % stride
            tried = 0
            while k <= k_max and tried < literal_k_cap:
                saw_candidate = True
                base_m2, step = congruence_progression(profile, m1, k % big_p)
                m2 = _progression_member_at_least(base_m2, step, t2_min)
                if m2 <= t2_cap:
                    found = (m1, k, m2)
                    break
                k += stride
                tried += 1
            if found is None:
                found = _two_base_reversed_scan(
                    profile, m1, m, n, w_base, big_p, k_min, k_max, t2_min, fallback_scan_cap
                )
                if found is not None:
                    saw_candidate = True
        if found:
            break
        m1 += m

    if found is None:
        if saw_candidate:
            raise EpsilonTooCoarseError("m1 budget exhausted before a certificate closed")
        raise NoValidKError("no admissible k lands in the host interval")

    m1, k, m2 = found
    s = m1 * (q - 1) // m
    big_b = w_base**s
    big_p = p ** (m1 * (q - 1))
    big_q = q ** (m2 * (p - 1))
    value = k * big_q - 1
    if value % big_p:
        raise VerificationFailedError("selected pair fails exact divisibility")
    j = value // big_p
    level = n * s + m2 * (p - 1)
    interval = AdicInterval(q, level - 1, (j + 1) // q)
    target_interval = AdicInterval(w_base, s - 1, (k - 1) // w_base + 1)
    zeta = Fraction(k, big_b)
    gap = zeta - z_point(interval)
    certificate = SelectionCertificate(
        kind="two-base",
        u=p,
        v=q,
        epsilon=epsilon,
        interval=interval,
        targets=(SelectionTarget(multiplier=1, interval=target_interval, zeta=zeta, gap=gap),),
        k=k,
        t1=m1,
        t2=m2,
        j=j,
        power_m=m,
        power_n=n,
        power_s=s,
    )
    verify_certificate(certificate, profile=profile)
    return certificate


def _two_base_reversed_scan(
    profile: OrderProfile,
    m1: int,
    m: int,
    n: int,
    w_base: int,
    big_p: int,
    k_min: int,
    k_max: int,
    t2_min: int,
    scan_cap: int,
) -> Optional[tuple[int, int, int]]:
    """Reversed search for the p^m q^n case.

    k must satisfy k == v^(-m2*phi(p)) mod p^(m1(q-1)) for the Bezout
    identity and k == 1 mod p^m q^n so J is grid aligned.  The p-parts
    are compatible exactly when m2 is a multiple of the order of q^(p-1)
    mod p^m, so the scan walks that subprogression and CRTs in the q-part.
    """
    p, q = profile.u, profile.v
    if m <= profile.m_uv:
        m2_stride = 1
    else:
        m2_stride = profile.order_at(m)
    q_part = q**n
    g_inv = pow(pow(q, p - 1, big_p), -1, big_p)
    step_inv = pow(g_inv, m2_stride, big_p)
    start = -(-t2_min // m2_stride) * m2_stride
    k_p = pow(g_inv, start, big_p)
    if q_part > 1:
        inv_bp = pow(big_p, -1, q_part)
    modulus = big_p * q_part
    m2 = start
    for _ in range(scan_cap):
        if q_part == 1:
            k0 = k_p
        else:
            # CRT: k == k_p (mod big_p), k == 1 (mod q^n)
            k0 = (k_p + big_p * ((1 - k_p) * inv_bp % q_part)) % modulus
        if k0 == 0:
            k0 = modulus
        candidate = k0 + -((k0 - k_min) // modulus) * modulus if k0 < k_min else k0
        if candidate <= k_max and (candidate - 1) % w_base == 0:
            return (m1, candidate, m2)
        m2 += m2_stride
        k_p = k_p * step_inv % big_p
    return None


def verify_certificate(cert: SelectionCertificate, profile: Optional[OrderProfile] = None) -> None:
    """Re-check every certificate condition with exact interval arithmetic.

    Raises VerificationFailedError on the first violated condition; trusts
    nothing about how the certificate was produced.
    """
    if profile is None:
        profile = order_profile(cert.u, cert.v)
    interval = cert.interval
    if interval.base != cert.v:
        raise VerificationFailedError("selected interval is not v-adic")
    if cert.epsilon <= 0:
        raise VerificationFailedError("epsilon must be positive")

    if cert.kind == "revolving":
        _verify_revolving(cert, profile)
    elif cert.kind == "two-base":
        _verify_two_base(cert, profile)
    else:
        raise VerificationFailedError(f"unknown certificate kind {cert.kind!r}")


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise VerificationFailedError(message)


def _verify_common_geometry(cert: SelectionCertificate) -> None:
    interval = cert.interval
    z_val = z_point(interval)
    for target in cert.targets:
        _check(target.gap == target.zeta - z_val, "stored gap does not match zeta - Z(I)")
        _check(target.gap > 0, "condition (1): zeta must exceed Z(I)")
        _check(
            interval.left < target.zeta < interval.right,
            "zeta must be an interior point of I",
        )
        _check(target.interval.contains(interval), "condition (2): I inside the target interval")
        _check(
            smallest_containing(target.interval.base, interval) == target.interval,
            "condition (3): target interval is not minimal",
        )
        _check(
            target.gap <= cert.epsilon * interval.length,
            "condition (4): gap exceeds epsilon * |I|",
        )


def _verify_revolving(cert: SelectionCertificate, profile: OrderProfile) -> None:
    u, v = cert.u, cert.v
    phi_u, phi_v = profile.phi_u, profile.phi_v
    big_u = u ** (cert.t1 * phi_v)
    big_v = v ** (cert.t2 * phi_u)
    _check(1 <= cert.k <= big_u, "k outside [1, u^(t1*phi(v))]")
    _check(cert.k % profile.subgroup_modulus == 1, "k is not a subgroup member")
    _check(cert.k * big_v - cert.j * big_u == 1, "Bezout identity fails")
    _check(cert.j % v == v - 1, "j != -1 (mod v)")
    _check(cert.interval.level == cert.t2 * phi_u - 1, "I sits at the wrong level")
    _check(z_point(cert.interval) == Fraction(cert.j, big_v), "Z(I) != j/v^(t2*phi(u))")
    zeta = Fraction(cert.k, big_u)
    for target in cert.targets:
        _check(target.zeta == zeta, "zeta must equal k/u^(t1*phi(v)) in every grid")
        _check(target.interval.base == u * target.multiplier, "target base mismatch")
        expected, y = _zeta_decomposition(cert.k, cert.t1 * phi_v, u, target.multiplier)
        _check(expected == target.interval, "target interval is not the zeta-child interval")
        _check(1 <= y <= target.interval.base - 1, "child position out of range")
        _check(
            target.gap * big_u * big_v == 1,
            "gap is not exactly 1/(u^(t1*phi(v)) * v^(t2*phi(u)))",
        )
    _verify_common_geometry(cert)


def _verify_two_base(cert: SelectionCertificate, profile: OrderProfile) -> None:
    p, q = cert.u, cert.v
    m, n, s = cert.power_m, cert.power_n, cert.power_s
    _check(None not in (m, n, s), "two-base certificate lacks power parameters")
    w_base = p**m * q**n
    _check(m * s == cert.t1 * (q - 1), "s and m1 are inconsistent")
    big_b = w_base**s
    big_p = p ** (cert.t1 * (q - 1))
    big_q = q ** (cert.t2 * (p - 1))
    _check((cert.k - 1) % w_base == 0, "k does not align J to the composite grid")
    _check(cert.k * big_q - cert.j * big_p == 1, "Bezout identity fails")
    _check(cert.j % q == q - 1, "j != -1 (mod q)")
    _check(big_q > 10 * q * big_p, "q^(m2(p-1)) > 10q p^(m1(q-1)) violated")
    _check(len(cert.targets) == 1, "two-base certificate must carry one target")
    target = cert.targets[0]
    _check(target.interval.base == w_base, "target base mismatch")
    _check(target.interval.level == s - 1, "target level mismatch")
    _check(y_point(target.interval) == Fraction(cert.k, big_b), "Y(J) != k/(p^m q^n)^s")
    _check(target.zeta == Fraction(cert.k, big_b), "zeta must equal Y(J)")
    _check(cert.interval.level == n * s + cert.t2 * (p - 1) - 1, "I sits at the wrong level")
    _check(
        z_point(cert.interval) == Fraction(cert.j, q ** (n * s + cert.t2 * (p - 1))),
        "Z(I) mismatch",
    )
    _check(
        target.gap * q ** (n * s) * big_p * big_q == 1,
        "gap is not exactly q^(-ns)/(p^(m1(q-1)) q^(m2(p-1)))",
    )
    # the containment chain: |[l(I), Y(J)]| < (1/10) (p^m q^n)^(-s)
    _check(
        (target.zeta - cert.interval.left) * 10 * big_b < 1,
        "containment chain |[l(I), Y(J)]| < (1/10)(p^m q^n)^(-s) violated",
    )
    _verify_common_geometry(cert)


def build_family(
    u: int,
    v: int,
    multipliers: Sequence[int],
    alphas: Sequence[int],
    domain: PlainInterval,
    *,
    profile: Optional[OrderProfile] = None,
    **caps,
) -> SelectionFamily:
    """One certificate per alpha with epsilon = v^(-100*alpha).

    Outer u-adic host intervals are placed one full length apart; for each
    multiplier sharing a factor with u (smallest first) a strictly interior
    composite-base interval is nested before the selection runs, so the
    targets of distinct entries cannot meet.  Disjointness across entries
    is still checked exactly afterwards.
    """
    alphas = list(alphas)
    if not alphas or any(a < 1 for a in alphas) or any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be strictly increasing positive integers")
    if domain.left < 0 or domain.right > 1:
        raise ValueError("domain must sit inside [0, 1]")
    if profile is None:
        profile = order_profile(u, v)

    count = len(alphas)
    level = None
    for d in range(0, 64):
        start = ceil_frac(domain.left * u**d)
        stop = floor_frac(domain.right * u**d)
        if stop - start >= 2 * count - 1:
            level, first_index = d, start
            break
    if level is None:
        raise DomainExhaustedError(f"domain cannot host {count} spaced host intervals")

    non_coprime = sorted({c for c in multipliers if math.gcd(c, u) > 1})
    entries = []
    for offset, alpha in enumerate(alphas):
        outer = AdicInterval(u, level, first_index + 2 * offset + 1)
        region = outer.as_plain()
        for c in non_coprime:
            region = _strict_inner_adic(u * c, region).as_plain()
        epsilon = Fraction(1, v ** (100 * alpha))
        cert = select_revolving(u, v, multipliers, region, epsilon, profile=profile, **caps)
        entries.append((alpha, cert))

    for i, (_, cert_a) in enumerate(entries):
        spans_a = [t.interval for t in cert_a.targets] + [cert_a.interval]
        for _, cert_b in entries[i + 1 :]:
            spans_b = [t.interval for t in cert_b.targets] + [cert_b.interval]
            for iv_a in spans_a:
                for iv_b in spans_b:
                    if iv_a.as_plain().overlaps(iv_b.as_plain()):
                        raise VerificationFailedError(
                            "family entries are not pairwise disjoint"
                        )
    return SelectionFamily(
        entries=tuple(entries),
        spacing_rule="consecutive u-adic host intervals one full length apart",
    )


def _strict_inner_adic(base: int, region: PlainInterval) -> AdicInterval:
    """Leftmost base-adic interval whose closure lies in the open interior."""
    for level in range(0, 256):
        scale = base**level
        g_lo = floor_frac(region.left * scale) + 1  # g/scale > left always holds
        g_hi = ceil_frac(region.right * scale) - 2
        if g_lo <= g_hi:
            return AdicInterval(base, level, g_lo + 1)
    raise DomainExhaustedError("no strictly interior grid interval found")
