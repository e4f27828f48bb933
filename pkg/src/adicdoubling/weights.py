"""Computable weight-class functionals over piecewise-constant densities.

Reverse Holder and Muckenhoupt functionals are exact Fractions whenever
their exponents keep everything rational, and certified enclosures
otherwise.  Mean oscillation of log w is handled symbolically: densities
factor into prime powers, so each piecewise log value is an integer
vector over {ln p}, sign questions about rational combinations of ln p
reduce to an exact all-zero test (the logs of distinct primes are
linearly independent over Q) plus enclosure refinement, and only the
final number is ever rounded - outward, with a certified width.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .enclosure import Enclosure, pow_enclosure, refine_linear_form
from .errors import VerificationFailedError
from .intervals import AdicInterval, PlainInterval, z_point
from .measures import MeasureTree, StageRecord, sibling_ratios
from .numtheory import factorize


@dataclass(frozen=True)
class WeightView:
    """Exact evaluation window onto a tree's density w_mu."""

    tree: MeasureTree

    def pieces(self, span: PlainInterval) -> list[tuple[PlainInterval, Fraction]]:
        return self.tree.pieces(span)

    def average(self, span: PlainInterval) -> Fraction:
        return self.tree.measure(span) / span.length


def _average_power(view: WeightView, span: PlainInterval, exponent: Fraction,
                   digits: int) -> Enclosure:
    exponent = Fraction(exponent)
    total: Enclosure | Fraction
    if exponent.denominator == 1:
        exact = sum(
            (piece.length * density ** exponent.numerator for piece, density in view.pieces(span)),
            Fraction(0),
        )
        return Enclosure.exact(exact / span.length)
    total = Enclosure.exact(0)
    for piece, density in view.pieces(span):
        total = total + pow_enclosure(density, exponent, digits).scale(piece.length)
    return total.scale(1 / span.length)


def rh_functional(view: WeightView, span: PlainInterval, r: Fraction,
                  digits: int = 30) -> Enclosure:
    """(average of w^r)^(1/r) / (average of w).

    Exact inner average for integer r; the 1/r-th root is an enclosure
    except in degenerate constant cases.
    """
    r = Fraction(r)
    if r <= 1:
        raise ValueError("reverse Holder exponent must exceed 1")
    inner = _average_power(view, span, r, digits)
    mean = view.average(span)
    if inner.is_exact:
        rooted = pow_enclosure(inner.lo, 1 / r, digits)
    else:
        rooted = Enclosure(
            pow_enclosure(inner.lo, 1 / r, digits).lo,
            pow_enclosure(inner.hi, 1 / r, digits).hi,
        )
    return rooted.scale(1 / mean)


def rh_power_ratio(view: WeightView, span: PlainInterval, r: int) -> Fraction:
    """Fully exact variant: (average of w^r) / (average of w)^r, for integer r."""
    if r <= 1:
        raise ValueError("reverse Holder exponent must exceed 1")
    inner = _average_power(view, span, Fraction(r), digits=0)
    return inner.lo / view.average(span) ** r


def ap_functional(view: WeightView, span: PlainInterval, r: Fraction,
                  digits: int = 30) -> Enclosure:
    """(average of w) * (average of w^(-1/(r-1)))^(r-1).

    Exact whenever 1/(r-1) and r-1 are integers (r = 2 in particular).
    The exponent guard r > max_n(1 - ln n / ln 2) is vacuous
    for r > 1, so only r > 1 is enforced.
    """
    r = Fraction(r)
    if r <= 1:
        raise ValueError("Muckenhoupt exponent must exceed 1")
    dual = -1 / (r - 1)
    inner = _average_power(view, span, dual, digits)
    power = r - 1
    if inner.is_exact and power.denominator == 1:
        return Enclosure.exact(view.average(span) * inner.lo ** power.numerator)
    lo = pow_enclosure(inner.lo, power, digits)
    hi = pow_enclosure(inner.hi, power, digits)
    raised = Enclosure(min(lo.lo, hi.lo), max(lo.hi, hi.hi))
    return raised.scale(view.average(span))


# -- symbolic log-oscillation --------------------------------------------------

_DECOMP_CACHE: dict[Fraction, dict[int, int]] = {}


def _log_vector(density: Fraction) -> dict[int, int]:
    """Integer exponents e_p with density = prod p^e_p."""
    cached = _DECOMP_CACHE.get(density)
    if cached is None:
        cached = dict(factorize(density.numerator))
        for p, e in factorize(density.denominator).items():
            cached[p] = cached.get(p, 0) - e
        cached = {p: e for p, e in cached.items() if e}
        _DECOMP_CACHE[density] = cached
    return cached


def _vector_sign(vector: dict[int, Fraction], start_width: Fraction = Fraction(1, 2**20)) -> int:
    """Sign of sum_p v_p * ln(p); exact zero iff the vector is zero."""
    vector = {p: c for p, c in vector.items() if c != 0}
    if not vector:
        return 0
    width = start_width
    for _ in range(64):
        enc = refine_linear_form(vector, width)
        if enc.lo > 0:
            return 1
        if enc.hi < 0:
            return -1
        width /= 256
    raise VerificationFailedError("log-linear form sign did not resolve")


def _oscillation_vector(view: WeightView, span: PlainInterval) -> dict[int, Fraction]:
    """Coefficients of the mean oscillation of log w over span, as a
    rational combination of {ln p}."""
    pieces = view.pieces(span)
    length = span.length
    piece_vectors = []
    mean: dict[int, Fraction] = {}
    for piece, density in pieces:
        vec = _log_vector(density)
        weight = piece.length / length
        piece_vectors.append((weight, vec))
        for p, e in vec.items():
            mean[p] = mean.get(p, Fraction(0)) + weight * e
    result: dict[int, Fraction] = {}
    for weight, vec in piece_vectors:
        diff = {p: Fraction(vec.get(p, 0)) - mean.get(p, Fraction(0))
                for p in set(vec) | set(mean)}
        sign = _vector_sign(diff)
        for p, c in diff.items():
            result[p] = result.get(p, Fraction(0)) + weight * sign * c
    return {p: c for p, c in result.items() if c != 0}


def mean_oscillation(view: WeightView, span: PlainInterval,
                     target_width: Fraction = Fraction(1, 10**7)) -> Enclosure:
    """Certified enclosure of the mean oscillation of log w_mu over span."""
    return refine_linear_form(_oscillation_vector(view, span), target_width)


@dataclass(frozen=True)
class OscillationReport:
    family: str
    supremum: Enclosure
    witness: Optional[PlainInterval]
    vmo_diagnostics: Optional[dict] = None


def bmo_oscillation(view: WeightView, family: Sequence[PlainInterval],
                    target_width: Fraction = Fraction(1, 10**7),
                    label: str = "family") -> OscillationReport:
    """Supremum of mean oscillation of log w_mu over the family.

    Candidates are compared symbolically (exact ties included); only the
    winning value is turned into an enclosure.
    """
    best_vector: Optional[dict[int, Fraction]] = None
    witness: Optional[PlainInterval] = None
    for span in family:
        vector = _oscillation_vector(view, span)
        if best_vector is None:
            best_vector, witness = vector, span
            continue
        diff = {p: vector.get(p, Fraction(0)) - best_vector.get(p, Fraction(0))
                for p in set(vector) | set(best_vector)}
        if _vector_sign(diff) > 0:
            best_vector, witness = vector, span
    if best_vector is None:
        return OscillationReport(family=label, supremum=Enclosure.exact(0), witness=None)
    return OscillationReport(
        family=label,
        supremum=refine_linear_form(best_vector, target_width),
        witness=witness,
    )


# -- the step-function VMO counterexample -------------------------------------


def step_window_oscillation(left: Fraction, right: Fraction) -> Fraction:
    """Exact mean oscillation of the indicator of [0, oo) over (left, right)."""
    left, right = Fraction(left), Fraction(right)
    if not left < right:
        raise ValueError("empty window")
    if right <= 0 or left >= 0:
        return Fraction(0)
    length = right - left
    return 2 * (-left) * right / length**2


def adic_step_oscillation(interval: AdicInterval) -> Fraction:
    """The indicator of [0, oo) is constant on every grid interval: 0 is a
    grid point at every level, never interior."""
    if interval.left < 0 < interval.right:
        raise AssertionError("grid interval straddling 0 cannot exist")
    return Fraction(0)


def vmo_step_diagnostic(scales: Sequence[Fraction]) -> list[tuple[Fraction, Fraction]]:
    """(scale, symmetric-window oscillation) pairs for the step function.

    The value is exactly 1/2 at every scale, so the small-scale vanishing
    condition of VMO fails even though every grid-restricted oscillation
    is exactly 0.
    """
    return [(Fraction(r), step_window_oscillation(-Fraction(r), Fraction(r))) for r in scales]


def vmo_step_report(scales: Sequence[Fraction]) -> OscillationReport:
    small = vmo_step_diagnostic(scales)
    large = [(Fraction(r), step_window_oscillation(-Fraction(r), Fraction(r)))
             for r in (10**3, 10**6, 10**9)]
    far = [(Fraction(r), step_window_oscillation(Fraction(r), 3 * Fraction(r)))
           for r in (10**3, 10**6, 10**9)]
    return OscillationReport(
        family="symmetric windows at the origin",
        supremum=Enclosure.exact(Fraction(1, 2)),
        witness=PlainInterval(-Fraction(scales[0]), Fraction(scales[0])),
        vmo_diagnostics={"small_scale": small, "large_scale": large, "away_from_origin": far},
    )


# -- interval families ---------------------------------------------------------


def stage_window_family(tree: MeasureTree, entry: StageRecord) -> list[PlainInterval]:
    """Unrestricted candidate windows for one stage: the H/G flank unions
    (where the oscillation extremes provably occur) plus symmetric windows
    across every record boundary."""
    windows = []
    for h, g in zip(entry.h_trace, entry.g_trace):
        windows.append(PlainInterval(h.left, g.right))
    z = z_point(entry.anchor)
    for level in entry.record_levels:
        size = Fraction(tree.grid_base) ** (-level)
        windows.append(PlainInterval(z - size, z + size))
    windows.append(entry.anchor.as_plain())
    return windows


def stage_adic_family(tree: MeasureTree, base: int, entry: StageRecord,
                      pad: int = 4) -> list[PlainInterval]:
    """Base-adic intervals touching the stage's records, down to `pad`
    levels beyond the deepest record."""
    seen = set()
    out = []
    for _, left, right in sibling_ratios(tree, base, entry, pad):
        for kid in (left, right):
            key = (kid.level, kid.index)
            if key not in seen:
                seen.add(key)
                out.append(kid.as_plain())
            parent_key = (kid.level - 1, kid.parent().index)
            if parent_key not in seen:
                seen.add(parent_key)
                out.append(kid.parent().as_plain())
    return out
