//! Projective heights and radicals of sum-zero tuples, adelic goodness, and
//! the hexagons, quadrilaterals and abc triples built from preperiodic points.

mod adelic;
mod builders;
mod scan;
mod tuple;

pub use adelic::{is_adelically_good, AdelicGoodnessReport, AdelicThresholds};
pub use builders::{
    build_hexagon, build_quadrilateral, chi_indicator, periodic_abc_triple, prop84_gap, rational_roots_of_unity,
};
pub use scan::{
    hexagon_scan, quadrilateral_scan, quality_report, triple_scan, QualityReport, ScanOptions, ScanStats, TupleScan,
};
pub use tuple::{
    abcd_margin, h_plus_minus, per_place_breakdown, proj_height, proj_height_log, support_and_rad, AbcdMargin,
    PlaceBreakdown, ProjTuple, Radical, TupleKind, STRESS_NOTE,
};
