"""Geodesic-domain engine and simple-pursuit simulator."""

from .domains import (
    ArcPiece,
    ConvexPlanarRegion,
    Domain,
    EuclideanSpace,
    GeodesicPath,
    LinePiece,
    MetricTree,
    PlaneMinusDisks,
    SphereDomain,
    TieBreak,
    TreePiece,
    TreePoint,
)
from .curves import (
    CurveSeries,
    PolygonalCurve,
    asymptotic_ray_fit,
    build_winding_geodesic,
    chord_arc_certificate,
    circumradius_function,
    comparison_angle,
    fit_growth_exponent,
    spherical_length_bound,
    tc_function,
    total_rotation,
    window_total_rotation,
)
from .pursuit import (
    AntipodalOscillator,
    CircleOrbiter,
    EvaderPolicy,
    GeodesicRunner,
    PrescribedCurve,
    PursuitTrace,
    RandomWalkPolicy,
    SpiralPolicy,
    Waypoints,
    pursuit_step,
    run_discrete,
    run_dyadic,
)
from .verify import (
    CheckReport,
    capture_classifier,
    check_angle_sandwich,
    check_separation_monotone,
    check_tc_relation,
    first_variation_check,
    is_cube_free,
    limit_geodesic_diagnostic,
    sqrt_bound_report,
    thinness_sample,
    thue_morse_word,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
