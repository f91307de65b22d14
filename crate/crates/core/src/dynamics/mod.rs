//! The map `z^d + c`: orbits, complete rational preperiodic portraits,
//! escape rates and the algebraic lemma checks on periodic points.

mod escape;
mod lemmas;
mod map;
mod portrait;
mod roots;

pub use escape::{
    check_transformation_rule, escape_rate, escape_rate_value, EscapeRateResult, EscapeStatus, RuleCheck,
};
pub use lemmas::{lemma82_max_margin, newton_coprimality_violations, CoprimalityViolation};
pub use map::{bad_places, UnicriticalMap};
pub use portrait::{find_preperiodic, preperiodic_candidate_grid, CandidateGrid, EmptyReason, Portrait, PortraitPoint};
pub use roots::{eval_f3, f3_roots, min_distance_to_f3_roots, F3Distance};
