//! Geometry of the `p`-adic filled Julia set at a bad prime `p ∤ d` with
//! `d | v_p(c)`: a `d`-ary tree of disks, the clustering it induces on
//! rational points, transfinite diameters and capacities of tree measures.

mod capacity;
mod diameter;
mod disks;
mod report;
mod valmatrix;

pub use capacity::{
    energy, gamma_limit, idealization_margin, log_diameter_over_lambda, refine_weights, telescoping_check, TreeMeasure,
    WeightVector,
};
pub use diameter::{global_diameter_residual, slice_fraction, transfinite_diameter, Slice};
pub use disks::{
    cluster_at_level, epsilon_equidistribution, level2_buckets, level2_counts, quantization_check,
    tree_prime_valuation, DiskLevel, Equidistribution, PairLevel, Quantization,
};
pub use report::{geometry_report, EquidSummary, GeometryReport, QuantizationOutcome};
pub use valmatrix::{pairwise_valuation_matrix, ValMatrix};
