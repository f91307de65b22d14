use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("arithmetic on the infinite valuation v_p(0)")]
    InfiniteValuation,
    #[error("{0}: argument must be nonzero")]
    ZeroArgument(&'static str),
    #[error("degree must be at least 2, got {0}")]
    InvalidDegree(u32),
    #[error("precondition refused: {0}")]
    Precondition(String),
    #[error("duplicate point {0}")]
    DuplicatePoint(String),
    #[error("need at least {need} points, got {have}")]
    TooFewPoints { need: usize, have: usize },
    #[error("degenerate {kind}: side {side} vanishes")]
    DegenerateTuple { kind: &'static str, side: &'static str },
    #[error("coordinate {0} is zero")]
    ZeroCoordinate(usize),
    #[error("coordinates do not sum to zero")]
    NotSumZero,
    #[error("unsupported root of unity {0}: only ±1 lie in ℚ")]
    UnsupportedRootOfUnity(String),
    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),
    #[error("root finder did not converge after {iterations} iterations")]
    RootFinderNoConvergence { iterations: usize },
    #[error("slice weight is undefined: ambient weight is zero")]
    UndefinedSlice,
    #[error("h(c) = 0: adelic-goodness thresholds degenerate")]
    HeightZero,
    #[error("invalid abc pair: {0}")]
    InvalidPair(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::InvalidWeights(_) | Error::NotPrime(_) | Error::InvalidDegree(_) => 2,
            Error::Precondition(_) | Error::TooFewPoints { .. } | Error::UnsupportedRootOfUnity(_) => 3,
            Error::RootFinderNoConvergence { .. } => 4,
            _ => 1,
        }
    }
}
