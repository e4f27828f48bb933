"""Exact-arithmetic constructions of grid-doubling measures that fail to
be doubling, with machine-checkable certificates for every step."""

from .intervals import (
    AdicInterval,
    PlainInterval,
    Rational,
    adjacent_equal_pair,
    adic_containing,
    largest_adic_inside,
    smallest_containing,
    y_point,
    z_point,
)
from .numtheory import (
    CongruencePair,
    FarNumberResult,
    OrderProfile,
    far_number_check,
    multiplicative_order,
    order_profile,
    solve_pairs,
    totient,
    unique_three_base_solution,
)
from .selection import (
    SelectionCertificate,
    SelectionFamily,
    SelectionTarget,
    build_family,
    select_revolving,
    select_two_base,
    verify_certificate,
)
from .torus import (
    OrbitPoint,
    XCertificate,
    certify_x,
    find_x,
    orbit_point,
    rational_dependence_scan,
    torus_metric,
    verify_x_certificate,
)
from .measures import (
    DoublingReport,
    MeasureTree,
    WeightParams,
    build_compactified,
    build_finite_base_measure,
    lebesgue_tree,
    measure_of,
    reweight_two_sided,
    scan_doubling,
    verify_tree,
)
from .weights import (
    OscillationReport,
    WeightView,
    ap_functional,
    bmo_oscillation,
    mean_oscillation,
    rh_functional,
    vmo_step_diagnostic,
)

__version__ = "0.1.0"
