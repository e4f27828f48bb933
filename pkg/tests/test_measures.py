import random
from dataclasses import replace
from fractions import Fraction

import pytest

from adicdoubling.errors import ContainmentFailureError, OverlapError, ScheduleError
from adicdoubling.intervals import AdicInterval, PlainInterval, adjacent_equal_pair, y_point, z_point
from adicdoubling.measures import (
    WeightParams,
    anchor_chain_ratios,
    build_compactified,
    build_finite_base_measure,
    default_epsilon_schedule,
    lebesgue_tree,
    reweight_two_sided,
    scan_doubling,
    sibling_ratio_set,
    sibling_ratios,
    strict_epsilon_schedule,
    verify_tree,
)
from adicdoubling.torus import find_x

F = Fraction


def test_weight_params_constraint():
    WeightParams(2, F(1, 2), F(3, 2))
    WeightParams(3, F(1, 2), F(2))
    with pytest.raises(ValueError):
        WeightParams(2, F(1, 2), F(7, 5))
    with pytest.raises(ValueError):
        WeightParams(2, F(3, 2), F(1, 2))


def test_single_forward_step_masses(single_stage_tree):
    tree = single_stage_tree
    assert tree.measure(PlainInterval(0, F(1, 2))) == F(1, 4)
    assert tree.measure(PlainInterval(F(1, 2), 1)) == F(3, 4)
    assert tree.measure(PlainInterval(0, 1)) == 1


def test_h_g_mass_identity(ten_stage_tree):
    for entry in ten_stage_tree.entries:
        alpha = entry.alpha
        h, g = entry.h_trace[alpha - 1], entry.g_trace[alpha - 1]
        mu_h = ten_stage_tree.measure(h.as_plain())
        mu_g = ten_stage_tree.measure(g.as_plain())
        assert mu_h == F(1, 2) ** alpha * entry.anchor.length / 2**alpha
        assert mu_g == F(3, 2) ** alpha * entry.anchor.length / 2**alpha
        assert mu_g / mu_h == F(3) ** alpha
        assert adjacent_equal_pair(h, g)


def test_deep_flanks_agree(ten_stage_tree):
    # the reverse steps align the densities on both sides of Z exactly
    for entry in ten_stage_tree.entries:
        h_final = entry.h_trace[-1]
        g_final = entry.g_trace[-1]
        mu_h = ten_stage_tree.measure(h_final.as_plain())
        mu_g = ten_stage_tree.measure(g_final.as_plain())
        assert mu_h == mu_g


def test_mass_conservation(ten_stage_tree):
    verify_tree(ten_stage_tree)
    for entry in ten_stage_tree.entries:
        assert ten_stage_tree.measure(entry.anchor.as_plain()) == entry.anchor.length


def test_sibling_ratio_sets(ten_stage_tree):
    assert sibling_ratio_set(ten_stage_tree, 2) == {F(1), F(1, 3), F(3)}


def test_q3_tree_sibling_ratios():
    params = WeightParams(3, F(1, 2), F(2))
    tree = lebesgue_tree(3, params)
    reweight_two_sided(tree, AdicInterval(3, 0, 2), 2)
    verify_tree(tree)
    ratios = sibling_ratio_set(tree, 3)
    assert ratios <= {F(1), F(1, 4), F(4)}
    assert F(4) in ratios
    entry = tree.entries[0]
    h, g = entry.h_trace[1], entry.g_trace[1]
    assert tree.measure(g.as_plain()) / tree.measure(h.as_plain()) == 16


def test_overlap_rejected(single_stage_tree):
    with pytest.raises(OverlapError):
        reweight_two_sided(single_stage_tree, AdicInterval(2, 1, 1), 1)


def test_measure_lebesgue_and_additivity():
    tree = lebesgue_tree()
    assert tree.measure(PlainInterval(F(-3, 7), F(22, 7))) == F(25, 7)
    staged = lebesgue_tree()
    reweight_two_sided(staged, AdicInterval(2, 0, 1), 2)
    rng = random.Random(11)
    for _ in range(40):
        a = F(rng.randint(-8, 14), 16)
        b = F(rng.randint(-8, 14), 16)
        c = F(rng.randint(-8, 14), 16)
        a, b, c = sorted((a, b, c))
        if a < b < c:
            left = staged.measure(PlainInterval(a, b))
            right = staged.measure(PlainInterval(b, c))
            assert left + right == staged.measure(PlainInterval(a, c))


def test_measure_matches_brute_force_refinement():
    rng = random.Random(5)
    for _ in range(10):
        tree = lebesgue_tree()
        anchors = [AdicInterval(2, 1, 1 + 2 * i) for i in range(3)]
        alphas = [rng.randint(1, 2) for _ in range(3)]
        for anchor, alpha in zip(anchors, alphas):
            reweight_two_sided(tree, anchor, alpha)
        depth = 1 + max(alphas) * 2 + 2
        span = PlainInterval(0, 3)
        total = F(0)
        cells = 3 * 2**depth
        for i in range(cells):
            cell = AdicInterval(2, depth, i + 1)
            total += tree.density_at(cell.left + cell.length / 2) * cell.length
        assert total == tree.measure(span)


def test_density_positive_everywhere(ten_stage_tree):
    lo, hi = ten_stage_tree.density_extremes()
    assert lo > 0
    assert lo == F(1, 2) ** 11
    assert hi == F(3, 2) ** 11


def test_finite_base_containment_example():
    cert = find_x([3], F(1, 100))
    assert cert.x == 84
    tree = build_finite_base_measure([3], [1], [cert], epsilon_schedule=lambda a: F(1, 100))
    entry = tree.entries[0]
    base, companion = entry.companions[0]
    assert base == 3
    assert companion.as_plain() == PlainInterval(1, 1 + F(1, 3**52))
    assert entry.anchor.as_plain() == PlainInterval(1, 1 + F(1, 2**83))
    assert companion.contains(entry.anchor)
    assert abs(y_point(companion) - z_point(entry.anchor)) <= cert.epsilon * entry.anchor.length


def test_finite_base_untouched_region(finite_tree_35):
    for entry in finite_tree_35.entries:
        alpha = entry.alpha
        probe = PlainInterval(alpha + F(1, 2), alpha + 1)
        assert finite_tree_35.measure(probe) == probe.length
        assert finite_tree_35.density_at(alpha + F(3, 4)) == 1


def test_finite_base_case_analysis_bounds(finite_tree_35):
    # children of the minimal containing interval I_n obey the stated
    # two-sided mass bounds, by which side of Z the point Y lands on
    tree = finite_tree_35
    a, b = tree.params.a, tree.params.b
    for entry in tree.entries:
        size = entry.anchor.length
        z_val = z_point(entry.anchor)
        for base, companion in entry.companions:
            kids = companion.children()
            masses = [tree.measure(k.as_plain()) for k in kids]
            y_val = y_point(companion)
            if y_val > z_val:
                assert a * size / 2 <= masses[0] <= size
                assert b * size / 4 <= masses[1] <= 2 * size
                for m in masses[2:]:
                    assert m == kids[2].length
            else:
                assert a * size / 4 <= masses[0] <= a * size / 2
                assert b * size / 4 <= masses[1] <= size
                assert a * size / 4 <= masses[2] <= 3 * size / 2
                for m in masses[3:]:
                    assert m == kids[3].length


def test_schedule_validation():
    cert = find_x([3], F(1, 2), x_max=100)
    with pytest.raises(ScheduleError):
        build_finite_base_measure([3], [1], [cert], epsilon_schedule=strict_epsilon_schedule)


def test_containment_failure_detected():
    cert = find_x([3], default_epsilon_schedule(1))
    bad = replace(
        cert,
        witnesses=tuple(replace(w, exponent=w.exponent + 3) for w in cert.witnesses),
    )
    with pytest.raises(ContainmentFailureError):
        build_finite_base_measure([3], [1], [bad])


def test_compact_mass_is_one_after_every_stage():
    for prefix in ([1], [1, 2], [1, 2, 3]):
        tree = build_compactified([3], prefix)
        assert tree.measure(PlainInterval(0, 1)) == 1
        verify_tree(tree)


def test_compact_stage_scales_disjoint():
    tree = build_compactified([3, 5], [1, 2])
    levels = [set(entry.record_levels) for entry in tree.entries]
    assert levels[0].isdisjoint(levels[1])
    xs = [entry.x for entry in tree.entries]
    alphas = [entry.alpha for entry in tree.entries]
    assert xs[1] > xs[0] + 2 * alphas[0]


def test_compact_density_extremes_exact():
    tree = build_compactified([3], [1, 2])
    a, b = tree.params.a, tree.params.b
    lo, hi = tree.density_extremes()
    alpha_max = max(e.alpha for e in tree.entries)
    assert lo == a ** (alpha_max + 1)
    assert hi == (3 - a) / 2 * b**alpha_max


def test_compact_anchored_first_step_weights():
    tree = build_compactified([3], [1])
    entry = tree.entries[0]
    x = entry.x
    a = tree.params.a
    # masses of the three anchored pieces carry weights (1, a, (3-a)/2);
    # deeper steps subdivide the pieces without moving their mass
    first = PlainInterval(0, F(1, 2 ** (x + 1)))
    second = PlainInterval(F(1, 2 ** (x + 1)), F(1, 2**x))
    third = PlainInterval(F(1, 2**x), F(1, 2 ** (x - 1)))
    assert tree.measure(first) == first.length
    assert tree.measure(second) == a * second.length
    assert tree.measure(third) == (3 - a) / 2 * third.length
    assert tree.density_at(F(1, 2 ** (x + 2))) == 1


def test_scan_fresh_tree():
    report = scan_doubling(lebesgue_tree())
    assert report.worst_ratio == 1
    assert report.worst_witness is None
    assert report.per_stage == ()


def test_scan_exact_growth(ten_stage_tree):
    report = scan_doubling(ten_stage_tree)
    assert report.worst_ratio == F(3) ** 10
    for stage in report.per_stage:
        assert stage.ratio == F(3) ** stage.alpha
    worst_entry = ten_stage_tree.entries[-1]
    h = worst_entry.h_trace[worst_entry.alpha - 1]
    g = worst_entry.g_trace[worst_entry.alpha - 1]
    assert report.worst_witness == (h.as_plain(), g.as_plain())


def test_scan_ratio_rows_for_csv(ten_stage_tree):
    report = scan_doubling(ten_stage_tree)
    assert all(isinstance(r, str) for _, _, r in report.ratio_rows)
    alphas = {alpha for alpha, _, _ in report.ratio_rows}
    assert alphas == set(range(1, 11))


def test_sibling_reports(finite_tree_35):
    report = scan_doubling(finite_tree_35, bases_to_check=[3, 5])
    assert [s.base for s in report.siblings] == [3, 5]
    for sib in report.siblings:
        assert sib.min_ratio > 0
        assert sib.max_ratio < 30
        assert len(sib.per_stage) == 3


def test_anchor_chain_ratios_flat(finite_tree_35):
    for base in (3, 5):
        worsts = []
        for entry in finite_tree_35.entries:
            worst = max(
                max(r, 1 / r) for r, _, _ in anchor_chain_ratios(finite_tree_35, base, entry)
            )
            worsts.append(worst)
        assert worsts[-1] <= 2 * worsts[0]


def test_full_family_bounded_by_envelope(finite_tree_35):
    import math

    a, b = finite_tree_35.params.a, finite_tree_35.params.b
    for base in (3, 5):
        envelope = (b / a) * (1 / a) ** math.ceil(math.log2(base))
        for entry in finite_tree_35.entries:
            worst = max(
                max(r, 1 / r) for r, _, _ in sibling_ratios(finite_tree_35, base, entry)
            )
            assert worst <= envelope
