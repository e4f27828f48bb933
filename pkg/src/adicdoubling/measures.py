"""Reweighted measures on grid intervals, their exact evaluation, and
empirical doubling scans.

A MeasureTree stores multiplicative density factors against grid
intervals of one base.  The density at a point is the product of the
factors of all recorded intervals containing it, so mass is conserved
node by node as long as each recorded sibling group of factors averages
to one, which every builder here guarantees with a, b satisfying
a(q-1) + b = q exactly.

The two-sided stage drives weight toward the distinguished point Z(I):
it multiplies one child by b and the rest by a, walks one line of
descendants toward Z from the left and one from the right, and after
alpha steps reverses which end is heavy for another alpha steps.  The
pair H/G flanking Z then carries the exact mass ratio (b/a)^alpha, which
is the non-doubling witness, while every sibling ratio stays in
{1, a/b, b/a}.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .errors import ContainmentFailureError, OverlapError, ScheduleError, VerificationFailedError
from .intervals import (
    AdicInterval,
    PlainInterval,
    adic_containing,
    ceil_frac,
    y_point,
    z_point,
)
from .torus import XCertificate, find_x, power_of_two_exponent


@dataclass(frozen=True)
class WeightParams:
    """Reweighting weights: 0 < a < 1 < b with a(q-1) + b = q exactly."""

    q: int
    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        if self.q < 2:
            raise ValueError("q must be >= 2")
        if not (0 < self.a < 1 < self.b):
            raise ValueError("need 0 < a < 1 < b")
        if self.a * (self.q - 1) + self.b != self.q:
            raise ValueError("weights must satisfy a(q-1) + b = q exactly")


DEFAULT_PARAMS = WeightParams(2, Fraction(1, 2), Fraction(3, 2))


@dataclass(frozen=True)
class StageRecord:
    alpha: int
    anchor: AdicInterval
    h_trace: tuple[AdicInterval, ...]
    g_trace: tuple[AdicInterval, ...]
    companions: tuple[tuple[int, AdicInterval], ...] = ()
    x: Optional[int] = None
    style: str = "two-sided"

    @property
    def record_levels(self) -> range:
        return range(self.anchor.level + 1, self.anchor.level + 2 * self.alpha + 1)


class MeasureTree:
    """Sparse multiplicative weight records over one grid base."""

    def __init__(self, grid_base: int = 2, params: Optional[WeightParams] = None,
                 domain: Optional[PlainInterval] = None):
        if params is None:
            params = DEFAULT_PARAMS if grid_base == 2 else None
        if params is None or params.q != grid_base:
            raise ValueError("params.q must match grid_base")
        self.grid_base = grid_base
        self.params = params
        self.domain = domain
        self.factors: dict[tuple[int, int], Fraction] = {}
        self.entries: list[StageRecord] = []
        self._forest: Optional[tuple[list, dict]] = None

    # -- record bookkeeping ------------------------------------------------

    def _set_factor(self, interval: AdicInterval, factor: Fraction) -> None:
        key = (interval.level, interval.index)
        if key in self.factors:
            raise OverlapError(f"interval {interval} already carries a factor")
        self.factors[key] = Fraction(factor)
        self._forest = None

    def _key_interval(self, key: tuple[int, int]) -> AdicInterval:
        return AdicInterval(self.grid_base, key[0], key[1])

    def _ancestor_index(self, key: tuple[int, int], level: int) -> int:
        lvl, idx = key
        return ceil_frac(Fraction(idx, self.grid_base ** (lvl - level)))

    def _build_forest(self):
        if self._forest is not None:
            return self._forest
        levels = sorted({lvl for lvl, _ in self.factors})
        bounds = {key: (self._key_interval(key).left, self._key_interval(key).right)
                  for key in self.factors}
        parent: dict[tuple[int, int], Optional[tuple[int, int]]] = {}
        children: dict[tuple[int, int], list[tuple[int, int]]] = {k: [] for k in self.factors}
        for key in self.factors:
            found = None
            for lvl in reversed([l for l in levels if l < key[0]]):
                cand = (lvl, self._ancestor_index(key, lvl))
                if cand in self.factors:
                    found = cand
                    break
            parent[key] = found
            if found is not None:
                children[found].append(key)
        roots = sorted((k for k, p in parent.items() if p is None),
                       key=lambda k: bounds[k][0])
        for lst in children.values():
            lst.sort(key=lambda k: bounds[k][0])
        self._forest = (roots, children, bounds)
        return self._forest

    # -- evaluation ----------------------------------------------------------

    def density_at(self, point) -> Fraction:
        point = Fraction(point)
        result = Fraction(1)
        for lvl in sorted({l for l, _ in self.factors}):
            key = (lvl, adic_containing(self.grid_base, lvl, point).index)
            if key in self.factors:
                result *= self.factors[key]
        return result

    def _node_mass(self, key, lo, hi, density, children, bounds) -> Fraction:
        density = density * self.factors[key]
        total = density * (hi - lo)
        for child in children[key]:
            c_lo, c_hi = bounds[child]
            if c_lo >= hi:
                break
            o_lo = lo if lo > c_lo else c_lo
            o_hi = hi if hi < c_hi else c_hi
            if o_lo < o_hi:
                total += (self._node_mass(child, o_lo, o_hi, density, children, bounds)
                          - density * (o_hi - o_lo))
        return total

    def measure(self, span: PlainInterval) -> Fraction:
        return self.mass_between(span.left, span.right)

    def mass_between(self, lo: Fraction, hi: Fraction) -> Fraction:
        roots, children, bounds = self._build_forest()
        total = hi - lo
        one = Fraction(1)
        for root in roots:
            r_lo, r_hi = bounds[root]
            if r_lo >= hi:
                break
            o_lo = lo if lo > r_lo else r_lo
            o_hi = hi if hi < r_hi else r_hi
            if o_lo < o_hi:
                total += self._node_mass(root, o_lo, o_hi, one, children, bounds) - (o_hi - o_lo)
        return total

    def pieces(self, span: PlainInterval) -> list[tuple[PlainInterval, Fraction]]:
        """Constant-density pieces tiling span, left to right."""
        roots, children, bounds = self._build_forest()

        def walk(lo, hi, keys, density, out):
            cursor = lo
            for key in keys:
                c_lo, c_hi = bounds[key]
                o_lo = lo if lo > c_lo else c_lo
                o_hi = hi if hi < c_hi else c_hi
                if o_lo >= o_hi:
                    continue
                if cursor < o_lo:
                    out.append((PlainInterval(cursor, o_lo), density))
                walk(o_lo, o_hi, children[key], density * self.factors[key], out)
                cursor = o_hi
            if cursor < hi:
                out.append((PlainInterval(cursor, hi), density))

        out: list[tuple[PlainInterval, Fraction]] = []
        walk(span.left, span.right, roots, Fraction(1), out)
        return out

    def density_extremes(self) -> tuple[Fraction, Fraction]:
        """Exact (min, max) density over all recorded regions."""
        lo, hi = Fraction(1), Fraction(1)
        for entry in self.entries:
            for piece, density in self.pieces(entry.anchor.as_plain()):
                lo = min(lo, density)
                hi = max(hi, density)
        return lo, hi


def lebesgue_tree(grid_base: int = 2, params: Optional[WeightParams] = None,
                  domain: Optional[PlainInterval] = None) -> MeasureTree:
    return MeasureTree(grid_base, params, domain)


def measure_of(tree: MeasureTree, span: PlainInterval) -> Fraction:
    """Exact measure of a bounded interval under the tree's density."""
    return tree.measure(span)


def _redistribute(tree: MeasureTree, node: AdicInterval, heavy: int) -> None:
    a, b = tree.params.a, tree.params.b
    for position, child in enumerate(node.children(), start=1):
        tree._set_factor(child, b if position == heavy else a)


def _walk_lines(tree: MeasureTree, h: AdicInterval, g: AdicInterval, alpha: int):
    """Subdivide the H and G lines for steps 2..2*alpha.

    Forward steps put the heavy weight on the first child of both lines,
    so the descending H-child (the last) keeps factor a while the
    descending G-child (the first) keeps factor b.  The reverse steps put
    the heavy weight on the last child instead: both descents now reverse
    their drift, and after alpha reverse steps the densities flanking Z
    agree at (ab)^alpha.  That deep agreement is what keeps sibling
    ratios of the other grid bases bounded; the masses of H^(alpha) and
    G^(alpha) are never touched again.
    """
    q = tree.grid_base
    h_trace, g_trace = [h], [g]
    for _ in range(2, alpha + 1):
        _redistribute(tree, h, 1)
        _redistribute(tree, g, 1)
        h = h.child(q)
        g = g.child(1)
        h_trace.append(h)
        g_trace.append(g)
    for _ in range(alpha + 1, 2 * alpha + 1):
        _redistribute(tree, h, q)
        _redistribute(tree, g, q)
        h = h.child(q)
        g = g.child(1)
        h_trace.append(h)
        g_trace.append(g)
    return h_trace, g_trace


def _apply_two_sided(tree: MeasureTree, interval: AdicInterval, alpha: int,
                     companions=(), x: Optional[int] = None) -> StageRecord:
    q = tree.grid_base
    _redistribute(tree, interval, q)
    h_trace, g_trace = _walk_lines(tree, interval.child(q - 1), interval.child(q), alpha)
    record = StageRecord(alpha=alpha, anchor=interval, h_trace=tuple(h_trace),
                         g_trace=tuple(g_trace), companions=tuple(companions), x=x)
    tree.entries.append(record)
    return record


def reweight_two_sided(tree: MeasureTree, interval: AdicInterval, alpha: int) -> MeasureTree:
    """Run one 2*alpha-step stage around Z(interval).

    Forward steps leave mass a^alpha * |I|/q^alpha on H and b^alpha *
    |I|/q^alpha on G; the reverse steps subdivide below H and G without
    changing either mass.  The interval must not meet previously
    reweighted subtrees.
    """
    if interval.base != tree.grid_base:
        raise ValueError("interval base must match the tree grid")
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    span = interval.as_plain()
    for entry in tree.entries:
        if span.overlaps(entry.anchor.as_plain()):
            raise OverlapError(f"interval {interval} meets stage alpha={entry.alpha}")
    for key in tree.factors:
        if span.overlaps(tree._key_interval(key).as_plain()):
            raise OverlapError(f"interval {interval} meets an existing record")
    _apply_two_sided(tree, interval, alpha)
    return tree


def default_epsilon_schedule(alpha: int) -> Fraction:
    """The relaxed closeness budget 2^(-2*alpha) actually needed per stage."""
    return Fraction(1, 2 ** (2 * alpha))


def strict_epsilon_schedule(alpha: int) -> Fraction:
    """The aggressive 2^(-100*alpha) budget; certificates at this schedule
    require astronomically large x, so it is not the default."""
    return Fraction(1, 2 ** (100 * alpha))


def _companion_records(anchor: AdicInterval, alpha: int, cert: XCertificate,
                       bases: Sequence[int], epsilon: Fraction,
                       origin_index: Callable[[int, int], int]):
    """Exact containment and closeness checks for the base companions."""
    x = cert.x
    z = Fraction(1, 2**x)
    companions = []
    for n in bases:
        r = cert.exponent_for(n)
        companion = AdicInterval(n, r - 1, origin_index(n, r))
        y = Fraction(1, n**r)
        if not (n - 2) * y + 2 * (y - z) > 0:
            raise ContainmentFailureError(
                f"containment margin fails for base {n} at alpha={alpha}"
            )
        if not companion.contains(anchor):
            raise ContainmentFailureError(f"anchor escapes the base-{n} companion at alpha={alpha}")
        if not abs(y_point(companion) - z_point(anchor)) <= epsilon * anchor.length:
            raise ContainmentFailureError(
                f"|Y - Z| > epsilon * |I| for base {n} at alpha={alpha}"
            )
        companions.append((n, companion))
    return companions


def build_finite_base_measure(
    bases: Sequence[int],
    alphas: Sequence[int],
    certs: Sequence[XCertificate],
    params: WeightParams = DEFAULT_PARAMS,
    epsilon_schedule: Callable[[int], Fraction] = default_epsilon_schedule,
) -> MeasureTree:
    """Dyadic stages anchored at [alpha, alpha + 2^(1-x)) from certified x.

    Every stage verifies, in exact arithmetic, that the dyadic anchor sits
    inside each base companion and that |Y - Z| <= epsilon * |anchor|.
    """
    if params.q != 2:
        raise ValueError("the finite-base construction reweights the dyadic grid")
    bases = list(bases)
    if any(power_of_two_exponent(n) is not None for n in bases):
        raise ValueError("bases must not contain powers of 2")
    if any(n < 3 for n in bases):
        raise ValueError("bases must be >= 3")
    alphas = list(alphas)
    if len(alphas) != len(certs):
        raise ValueError("one certificate per alpha is required")
    if any(a < 1 for a in alphas) or any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be strictly increasing positive integers")

    tree = MeasureTree(2, params)
    for alpha, cert in zip(alphas, certs):
        if cert.epsilon > epsilon_schedule(alpha):
            raise ScheduleError(
                f"certificate epsilon {cert.epsilon} exceeds the schedule at alpha={alpha}"
            )
        x = cert.x
        if x < 2:
            raise ScheduleError("x must be at least 2")
        anchor = AdicInterval(2, x - 1, alpha * 2 ** (x - 1) + 1)
        companions = _companion_records(
            anchor, alpha, cert, bases, cert.epsilon,
            origin_index=lambda n, r, alpha=alpha: alpha * n ** (r - 1) + 1,
        )
        reweight_two_sided(tree, anchor, alpha)
        tree.entries[-1] = replace(tree.entries[-1], companions=tuple(companions), x=x)
    return tree


def _apply_anchored_stage(tree: MeasureTree, anchor: AdicInterval, alpha: int,
                          companions, x: int) -> StageRecord:
    """Compactified stage: mass is pinned at 0 by a three-piece first step.

    The naive first-step triple (1, a, b-1) does not conserve mass
    once a + b = 2 is imposed, so the rightmost weight is solved from
    conservation instead: with (w1, w2) = (1, a) the right child of the
    anchor must carry (3 - a)/2.  See the README for the full accounting.
    """
    a = tree.params.a
    left, right = anchor.children()
    tree._set_factor(left, (1 + a) / 2)
    tree._set_factor(right, (3 - a) / 2)
    inner_left, inner_right = left.children()
    tree._set_factor(inner_left, 2 / (1 + a))
    tree._set_factor(inner_right, 2 * a / (1 + a))
    h_trace, g_trace = _walk_lines(tree, inner_right, right, alpha)
    record = StageRecord(alpha=alpha, anchor=anchor, h_trace=tuple(h_trace),
                         g_trace=tuple(g_trace), companions=tuple(companions),
                         x=x, style="anchored")
    tree.entries.append(record)
    return record


def build_compactified(
    bases: Sequence[int],
    alphas: Sequence[int],
    params: WeightParams = DEFAULT_PARAMS,
    epsilon_schedule: Callable[[int], Fraction] = default_epsilon_schedule,
    x_max: int = 10**6,
) -> MeasureTree:
    """Measure on [0, 1]: every stage anchors at 0 and nests below the
    previous stage's untouched region.

    Each new x must exceed the previous x plus the previous stage's full
    reweighting depth 2*alpha, so the stages touch disjoint dyadic scales.
    """
    if params.q != 2:
        raise ValueError("the compactified construction reweights the dyadic grid")
    bases = list(bases)
    if any(power_of_two_exponent(n) is not None for n in bases) or any(n < 3 for n in bases):
        raise ValueError("bases must be >= 3 and not powers of 2")
    alphas = list(alphas)
    if any(a < 1 for a in alphas) or any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ScheduleError("alphas must be strictly increasing positive integers")

    tree = MeasureTree(2, params, domain=PlainInterval(0, 1))
    prev_x: Optional[int] = None
    prev_alpha: Optional[int] = None
    for alpha in alphas:
        epsilon = epsilon_schedule(alpha)
        x_min = 2 if prev_x is None else prev_x + 2 * prev_alpha + 1
        cert = find_x(bases, epsilon, x_min=x_min, x_max=x_max)
        x = cert.x
        if prev_x is not None and not x > prev_x + 2 * prev_alpha:
            raise ScheduleError("x sequence not separated by the previous reweighting depth")
        anchor = AdicInterval(2, x - 1, 1)
        if len(tree.pieces(anchor.as_plain())) != 1:
            raise ScheduleError("new anchor does not sit in a constant-density region")
        companions = _companion_records(
            anchor, alpha, cert, bases, epsilon, origin_index=lambda n, r: 1
        )
        _apply_anchored_stage(tree, anchor, alpha, companions, x)
        prev_x, prev_alpha = x, alpha
    return tree


def verify_tree(tree: MeasureTree) -> None:
    """Mass conservation at every subdivided node, positivity everywhere."""
    q = tree.grid_base
    groups: dict[tuple[int, int], list[Fraction]] = {}
    for (lvl, idx), factor in tree.factors.items():
        if factor <= 0:
            raise VerificationFailedError("density factor must be positive")
        parent = (lvl - 1, ceil_frac(Fraction(idx, q)))
        groups.setdefault(parent, []).append(factor)
    for parent, factors in groups.items():
        if len(factors) != q:
            raise VerificationFailedError(f"incomplete sibling group under {parent}")
        if sum(factors) != q:
            raise VerificationFailedError(f"mass not conserved under {parent}")


# -- doubling scans ----------------------------------------------------------


@dataclass(frozen=True)
class SiblingReport:
    base: int
    min_ratio: Fraction
    max_ratio: Fraction
    min_witness: Optional[tuple[AdicInterval, AdicInterval]]
    max_witness: Optional[tuple[AdicInterval, AdicInterval]]
    per_stage: tuple[tuple[int, Fraction], ...]  # (alpha, worst ratio)


@dataclass(frozen=True)
class StageWorst:
    alpha: int
    ratio: Fraction
    witness: Optional[tuple[PlainInterval, PlainInterval]]


@dataclass(frozen=True)
class DoublingReport:
    scale_levels: tuple[int, ...]
    worst_ratio: Fraction
    worst_witness: Optional[tuple[PlainInterval, PlainInterval]]
    per_stage: tuple[StageWorst, ...]
    siblings: tuple[SiblingReport, ...]
    ratio_rows: tuple[tuple[int, int, str], ...]  # (alpha, scale level, ratio)


def _stage_boundaries(tree: MeasureTree, entry: StageRecord) -> list[Fraction]:
    points = {entry.anchor.left, entry.anchor.right, z_point(entry.anchor)}
    for iv in entry.h_trace + entry.g_trace:
        points.update((iv.left, iv.right))
    for _, companion in entry.companions:
        points.add(y_point(companion))
    return sorted(points)


def _stage_scales(entry: StageRecord, pad: int = 4) -> range:
    levels = entry.record_levels
    return range(max(0, levels.start - pad), levels.stop + pad)


def scan_doubling(
    tree: MeasureTree,
    scales: Optional[range] = None,
    bases_to_check: Sequence[int] = (),
) -> DoublingReport:
    """Exhaustive finite-scale doubling evidence.

    Adjacent equal-length grid-interval pairs are scanned across every
    record boundary of every stage (which covers the H/G flanks of Z
    exactly, where the worst ratio (b/a)^alpha is attained), and sibling
    groups of the requested bases are scanned wherever they touch record
    boundaries, to four levels beyond the deepest record.
    """
    q = tree.grid_base
    worst = Fraction(1)
    worst_witness = None
    per_stage = []
    ratio_rows = []
    levels_used: set[int] = set()
    for entry in tree.entries:
        stage_scales = scales if scales is not None else _stage_scales(entry)
        levels_used.update(stage_scales)
        boundaries = _stage_boundaries(tree, entry)
        anchor_left, anchor_right = entry.anchor.left, entry.anchor.right
        stage_worst = Fraction(1)
        stage_witness = None
        for level in stage_scales:
            size = Fraction(q) ** (-level)
            level_worst = Fraction(1)
            for z in boundaries:
                if (z / size).denominator != 1:
                    continue  # both pair members must be grid intervals
                if z - size < anchor_left or z + size > anchor_right:
                    continue  # pairs probe the stage's own reweighted region
                mu_left = tree.mass_between(z - size, z)
                mu_right = tree.mass_between(z, z + size)
                ratio = max(mu_right / mu_left, mu_left / mu_right)
                level_worst = max(level_worst, ratio)
                if ratio > stage_worst:
                    stage_worst = ratio
                    stage_witness = (PlainInterval(z - size, z), PlainInterval(z, z + size))
            ratio_rows.append((entry.alpha, level, str(level_worst)))
        per_stage.append(StageWorst(entry.alpha, stage_worst, stage_witness))
        if stage_worst > worst:
            worst = stage_worst
            worst_witness = stage_witness

    siblings = tuple(
        _sibling_report(tree, base) for base in bases_to_check
    )
    return DoublingReport(
        scale_levels=tuple(sorted(levels_used)),
        worst_ratio=worst,
        worst_witness=worst_witness,
        per_stage=tuple(per_stage),
        siblings=siblings,
        ratio_rows=tuple(ratio_rows),
    )


def _sibling_levels_for_base(entry: StageRecord, base: int, q: int, pad: int = 4) -> range:
    # translate the stage's record depth range into base-n levels
    coarse = entry.anchor.level
    deep = entry.anchor.level + 2 * entry.alpha
    lo = 0
    while base ** (lo + 1) <= q ** max(coarse - pad, 0):
        lo += 1
    hi = lo
    while base**hi < q ** (deep + pad):
        hi += 1
    return range(max(lo, 1), hi + 1)


def sibling_ratios(tree: MeasureTree, base: int, entry: StageRecord,
                   pad: int = 4):
    """Yield (ratio, child_i, child_j) over sibling groups touching the
    stage's record boundaries at depths up to the records plus `pad`."""
    boundaries = _stage_boundaries(tree, entry)
    seen = set()
    for level in _sibling_levels_for_base(entry, base, tree.grid_base, pad):
        for z in boundaries:
            center = adic_containing(base, level - 1, z)
            for parent in (
                AdicInterval(base, level - 1, center.index - 1),
                center,
                AdicInterval(base, level - 1, center.index + 1),
            ):
                key = (parent.level, parent.index)
                if key in seen:
                    continue
                seen.add(key)
                kids = parent.children()
                masses = [tree.measure(kid.as_plain()) for kid in kids]
                for i in range(len(kids)):
                    for j in range(i + 1, len(kids)):
                        yield masses[i] / masses[j], kids[i], kids[j]


def _sibling_report(tree: MeasureTree, base: int) -> SiblingReport:
    lo, hi = Fraction(1), Fraction(1)
    lo_wit = hi_wit = None
    per_stage = []
    for entry in tree.entries:
        stage_hi = Fraction(1)
        for ratio, left, right in sibling_ratios(tree, base, entry):
            spread = max(ratio, 1 / ratio)
            if spread > stage_hi:
                stage_hi = spread
            if ratio > hi:
                hi, hi_wit = ratio, (left, right)
            if ratio < lo:
                lo, lo_wit = ratio, (left, right)
        per_stage.append((entry.alpha, stage_hi))
    return SiblingReport(
        base=base, min_ratio=lo, max_ratio=hi,
        min_witness=lo_wit, max_witness=hi_wit, per_stage=tuple(per_stage),
    )


def anchor_chain_ratios(tree: MeasureTree, base: int, entry: StageRecord,
                        coarser_levels: int = 4):
    """Sibling ratios among children of base-adic intervals containing the
    stage anchor.

    These are the instances the containment analysis bounds directly: the
    minimal containing interval and a few coarser ancestors.  Their worst
    ratio stays near b/a at every stage, independent of alpha.
    """
    from .intervals import smallest_containing

    parent = smallest_containing(base, entry.anchor)
    for _ in range(coarser_levels + 1):
        kids = parent.children()
        masses = [tree.measure(kid.as_plain()) for kid in kids]
        for i in range(len(kids)):
            for j in range(i + 1, len(kids)):
                yield masses[i] / masses[j], kids[i], kids[j]
        if parent.level == 0:
            break
        parent = parent.parent()


def sibling_ratio_set(tree: MeasureTree, base: int) -> set[Fraction]:
    """Distinct sibling mass ratios observed over all record-touching groups."""
    observed: set[Fraction] = set()
    for entry in tree.entries:
        for ratio, _, _ in sibling_ratios(tree, base, entry):
            observed.add(ratio)
    return observed
