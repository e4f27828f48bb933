"""Cross-module property tests: certificates always re-verify, exact
arithmetic stays exact, enclosures stay enclosures."""

from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from adicdoubling.enclosure import ln_enclosure, nth_root_enclosure, pow_enclosure
from adicdoubling.intervals import PlainInterval, smallest_containing
from adicdoubling.numtheory import far_number_check, solve_pairs, order_profile
from adicdoubling.selection import select_revolving, verify_certificate
from adicdoubling.torus import certify_x, find_x, verify_x_certificate

F = Fraction

SMALL_PAIRS = [(3, 2), (5, 2), (5, 3), (7, 2), (7, 3), (9, 2), (9, 4), (25, 2)]
_PROFILES = {}


def cached_profile(u, v):
    if (u, v) not in _PROFILES:
        _PROFILES[(u, v)] = order_profile(u, v)
    return _PROFILES[(u, v)]


@settings(max_examples=30, deadline=None)
@given(
    st.sampled_from(SMALL_PAIRS),
    st.integers(min_value=3, max_value=9),
    st.integers(min_value=0, max_value=5),
    st.sampled_from([[1], [1, 2], [2], [1, 2, 3]]),
)
def test_random_selections_always_verify(pair, eps_pow, window, multipliers):
    u, v = pair
    j_tilde = PlainInterval(F(window, 8), F(window + 3, 8))
    cert = select_revolving(
        u, v, multipliers, j_tilde, F(1, 2**eps_pow), profile=cached_profile(u, v)
    )
    verify_certificate(cert, profile=cached_profile(u, v))
    assert j_tilde.contains(cert.interval.as_plain())
    assert cert.gap <= F(1, 2**eps_pow) * cert.interval.length


@settings(max_examples=20, deadline=None)
@given(
    st.sampled_from(SMALL_PAIRS),
    st.integers(min_value=2, max_value=4),
    st.integers(min_value=0, max_value=6),
    st.integers(min_value=1, max_value=4),
)
def test_solve_pairs_members_verify(pair, m1, k_step, count):
    u, v = pair
    profile = cached_profile(u, v)
    while m1 * profile.phi_v <= profile.m_uv:
        m1 += 1
    modulus = u ** (m1 * profile.phi_v)
    k = 1 + k_step * profile.subgroup_modulus
    if k > modulus:
        k = 1
    for pair_obj in solve_pairs(profile, m1, k, count):
        assert pair_obj.k * v ** (pair_obj.m2 * profile.phi_u) - pair_obj.j * modulus == 1
        assert pair_obj.j % v == v - 1


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from([[3], [5], [3, 5], [3, 7], [6], [3, 5, 7]]),
    st.integers(min_value=2, max_value=6),
)
def test_x_certificates_always_reverify(bases, eps_pow):
    cert = find_x(bases, F(1, 2**eps_pow), x_max=10**5)
    verify_x_certificate(cert)
    # relaxing epsilon keeps the same x certified
    assert certify_x(bases, F(1, 2 ** (eps_pow - 1)), cert.x) is not None


@settings(max_examples=60)
@given(
    st.integers(min_value=2, max_value=9),
    st.fractions(min_value=F(0), max_value=F(3)),
    st.fractions(min_value=F(1, 1000), max_value=F(2)),
)
def test_smallest_containing_is_minimal(base, left, width):
    region = PlainInterval(left, left + width)
    hull = smallest_containing(base, region)
    assert hull.contains(region)
    assert not any(child.contains(region) for child in hull.children())


@settings(max_examples=40)
@given(
    st.fractions(min_value=F(1, 100), max_value=F(99, 100)),
    st.integers(min_value=2, max_value=7),
    st.integers(min_value=1, max_value=6),
    st.integers(min_value=0, max_value=4),
    st.integers(min_value=-3, max_value=10),
)
def test_far_number_is_a_lower_bound(delta, n, max_level, m_probe, k_probe):
    result = far_number_check(delta, n, max_level)
    if m_probe <= max_level:
        assert result.value <= n**m_probe * abs(delta - F(k_probe, n**m_probe))


@settings(max_examples=40)
@given(
    st.fractions(min_value=F(1, 50), max_value=F(50)),
    st.fractions(min_value=F(1, 50), max_value=F(50)),
)
def test_ln_enclosure_is_additive(x, y):
    width = F(1, 10**12)
    lx = ln_enclosure(x, width)
    ly = ln_enclosure(y, width)
    lxy = ln_enclosure(x * y, width)
    combined = lx + ly
    assert combined.lo - width <= lxy.hi
    assert lxy.lo <= combined.hi + width


@settings(max_examples=40)
@given(
    st.fractions(min_value=F(1, 30), max_value=F(30)),
    st.integers(min_value=2, max_value=5),
)
def test_root_enclosure_brackets(x, r):
    enc = nth_root_enclosure(x, r, 25)
    assert enc.lo**r <= x <= enc.hi**r or enc.is_exact
    powered = pow_enclosure(x, F(1, r), 25)
    assert powered.lo <= enc.hi and enc.lo <= powered.hi
