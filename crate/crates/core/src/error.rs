use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("a star needs at least two edges")]
    EmptyGraph,
    #[error("edge {0} has zero conductivity")]
    ZeroConductivity(u32),
    #[error("edge {0} has a non-positive length")]
    NonpositiveLength(u32),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("bad partition: D={d}, N={n}")]
    BadPartition { d: usize, n: usize },
    #[error("one sign class is empty")]
    DegeneratePartition,
    #[error("topology not supported by this operation")]
    UnsupportedTopology,
    #[error("network is resonant (margin {margin:e})")]
    ResonantNetwork { margin: f64 },
    #[error("conductivity is resonant: |k-| equals the forbidden ratio {ratio}")]
    ResonantConductivity { ratio: f64 },
    #[error("Neumann-only network needs a zero-mean source (mean {mean:e})")]
    IncompatibleSource { mean: f64 },
    #[error("function shape does not match the network")]
    ShapeMismatch,
    #[error("no sign change on bracket ({0}, {1})")]
    NoSignChange(f64, f64),
    #[error("length ratio {0} looks rational")]
    RationalRatioSuspected(f64),
    #[error("operation expects a pseudo-operator spectrum")]
    WrongOperator,
    #[error("operation is not defined for this basis")]
    WrongBasis,
    #[error("Gram block is ill-conditioned (condition {0:e})")]
    IllConditionedGram(f64),
    #[error("state has excited modes outside the subspace X")]
    NotInSubspaceX,
    #[error("requested truncation {requested} exceeds the {available} available modes")]
    TruncationTooLarge { requested: usize, available: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = core::result::Result<T, Error>;
