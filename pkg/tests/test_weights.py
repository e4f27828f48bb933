from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adicdoubling.enclosure import ln_enclosure
from adicdoubling.intervals import AdicInterval, PlainInterval
from adicdoubling.measures import lebesgue_tree, reweight_two_sided
from adicdoubling.weights import (
    WeightView,
    adic_step_oscillation,
    ap_functional,
    bmo_oscillation,
    mean_oscillation,
    rh_functional,
    rh_power_ratio,
    stage_adic_family,
    stage_window_family,
    step_window_oscillation,
    vmo_step_diagnostic,
    vmo_step_report,
)

F = Fraction
TWO_PIECE_SPAN = PlainInterval(0, F(1, 2))  # densities 1/4 then 3/4: same
# shape as (1/2, 3/2) after rescaling, which leaves both functionals fixed


@pytest.fixture(scope="module")
def view(single_stage_tree_module):
    return WeightView(single_stage_tree_module)


@pytest.fixture(scope="module")
def single_stage_tree_module():
    tree = lebesgue_tree()
    reweight_two_sided(tree, AdicInterval(2, 0, 1), 1)
    return tree


def test_rh_constant_density(view):
    enc = rh_functional(view, PlainInterval(3, 4), F(2))
    assert enc.is_exact and enc.lo == 1
    enc = rh_functional(view, PlainInterval(3, 4), F(7, 2))
    assert enc.contains(1) and enc.width < F(1, 10**9)


def test_rh_two_piece_sqrt5_over_2(view):
    enc = rh_functional(view, TWO_PIECE_SPAN, F(2))
    # value is sqrt(5)/2: certify via the square
    assert (2 * enc.lo) ** 2 <= 5 <= (2 * enc.hi) ** 2
    assert enc.width < F(1, 10**9)
    assert rh_power_ratio(view, TWO_PIECE_SPAN, 2) == F(5, 4)


def test_ap_two_piece_exact(view):
    enc = ap_functional(view, TWO_PIECE_SPAN, F(2))
    assert enc.is_exact
    assert enc.lo == F(4, 3)


def test_ap_constant_density(view):
    enc = ap_functional(view, PlainInterval(5, 6), F(2))
    assert enc.is_exact and enc.lo == 1


windows = st.tuples(
    st.integers(min_value=-4, max_value=12),
    st.integers(min_value=1, max_value=12),
)


@settings(max_examples=40)
@given(windows, st.sampled_from([F(2), F(3), F(3, 2)]))
def test_rh_ap_jensen_lower_bound(window, r):
    tree = lebesgue_tree()
    reweight_two_sided(tree, AdicInterval(2, 0, 1), 2)
    view = WeightView(tree)
    start, width = window
    span = PlainInterval(F(start, 8), F(start, 8) + F(width, 8))
    assert rh_functional(view, span, r).hi >= 1
    assert ap_functional(view, span, r).hi >= 1


def test_pieces_sum_to_measure(view, single_stage_tree_module):
    span = PlainInterval(F(-1, 3), F(9, 7))
    total = sum((piece.length * density for piece, density in view.pieces(span)), F(0))
    assert total == single_stage_tree_module.measure(span)


def test_mean_oscillation_constant_is_exact_zero(view):
    enc = mean_oscillation(view, PlainInterval(4, 5))
    assert enc.is_exact and enc.lo == 0


def test_mean_oscillation_step_values(view):
    # densities over [0,1) are 1/4, 3/4, 3/4, 9/4 on quarters, so f deviates
    # from its mean log(3/4) by -log 3, 0, 0, +log 3: oscillation (1/2) log 3
    enc = mean_oscillation(view, PlainInterval(0, 1))
    expected = ln_enclosure(F(3), F(1, 10**12)).scale(F(1, 2))
    diff = enc - expected
    assert diff.lo <= 0 <= diff.hi
    assert enc.width < F(1, 10**6)


def test_bmo_window_value_h_union_g():
    tree = lebesgue_tree()
    for alpha in range(1, 9):
        reweight_two_sided(tree, AdicInterval(2, 0, alpha + 1), alpha)
    view = WeightView(tree)
    entry = tree.entries[-1]
    h = entry.h_trace[7]
    g = entry.g_trace[7]
    window = PlainInterval(h.left, g.right)
    enc = mean_oscillation(view, window)
    # the flank masses alone give (alpha/2) log(b/a) = 4 log 3; the reverse
    # refinement inside the flanks only adds variation
    expected = ln_enclosure(F(3), F(1, 10**12)).scale(4)
    assert enc.lo > expected.lo
    assert enc.hi < expected.hi * F(101, 100)

    report = bmo_oscillation(view, stage_window_family(tree, entry))
    two_log3 = ln_enclosure(F(3), F(1, 10**9)).scale(2)
    assert report.supremum.strictly_above(two_log3)
    assert report.supremum.width < F(1, 10**6)


def test_bmo_restricted_supremum_flat():
    tree = lebesgue_tree()
    for alpha in range(1, 5):
        reweight_two_sided(tree, AdicInterval(2, 0, alpha + 1), alpha)
    view = WeightView(tree)
    sups = []
    for entry in tree.entries:
        family = stage_adic_family(tree, 2, entry, pad=2)
        sups.append(bmo_oscillation(view, family).supremum)
    assert sups[-1].hi <= 2 * sups[0].hi


def test_bmo_empty_family():
    tree = lebesgue_tree()
    view = WeightView(tree)
    report = bmo_oscillation(view, [])
    assert report.supremum.is_exact and report.supremum.lo == 0
    assert report.witness is None


def test_step_window_oscillation_values():
    assert step_window_oscillation(F(-1), F(1)) == F(1, 2)
    assert step_window_oscillation(F(-1, 10**9), F(1, 10**9)) == F(1, 2)
    assert step_window_oscillation(F(-1), F(3)) == F(3, 8)
    assert step_window_oscillation(F(1), F(2)) == 0
    assert step_window_oscillation(F(-2), F(-1)) == 0


def test_vmo_step_diagnostic_scales():
    scales = [F(10) ** (-k) for k in range(10)]
    rows = vmo_step_diagnostic(scales)
    assert [value for _, value in rows] == [F(1, 2)] * 10


@pytest.mark.parametrize("base", [2, 3, 5, 6])
def test_adic_step_oscillation_zero(base):
    for level in (-2, 0, 1, 4):
        for index in (-7, -1, 1, 2, 9):
            assert adic_step_oscillation(AdicInterval(base, level, index)) == 0


def test_vmo_report_diagnostics():
    report = vmo_step_report([F(1), F(1, 10)])
    assert report.supremum.lo == F(1, 2)
    diag = report.vmo_diagnostics
    assert all(v == F(1, 2) for _, v in diag["small_scale"])
    assert all(v == F(1, 2) for _, v in diag["large_scale"])
    assert all(v == 0 for _, v in diag["away_from_origin"])


def test_restricted_rh_ap_suprema_flat(finite_tree_35):
    view = WeightView(finite_tree_35)
    for base in (3, 5):
        rh_sups, ap_sups = [], []
        for entry in finite_tree_35.entries:
            family = stage_adic_family(finite_tree_35, base, entry, pad=2)
            rh_sups.append(max(rh_functional(view, s, F(2)).hi for s in family))
            ap_sups.append(max(ap_functional(view, s, F(2)).hi for s in family))
        assert rh_sups[-1] <= 2 * rh_sups[0]
        assert ap_sups[-1] <= 2 * ap_sups[0]


def test_unrestricted_bmo_monotone_in_alpha(eight_stage_tree):
    view = WeightView(eight_stage_tree)
    log_ba_quarter = ln_enclosure(F(3), F(1, 10**9))
    previous = None
    for entry in eight_stage_tree.entries:
        sup = bmo_oscillation(view, stage_window_family(eight_stage_tree, entry)).supremum
        floor = log_ba_quarter.scale(F(entry.alpha, 4))  # (alpha/4) log(b/a)
        assert sup.strictly_above(floor)
        if previous is not None:
            assert sup.hi >= previous.lo
        previous = sup
