//! Exact computation of ℚ-rational preperiodic points of `z^d + c`, the
//! non-archimedean disk-tree geometry of their filled Julia sets, and
//! abc/abcd quality of the sum-zero tuples built from them.

pub mod corpus;
pub mod dynamics;
pub mod error;
pub mod exactnum;
pub mod geometry;
pub mod heights;
pub mod report;

pub use error::Error;
