use signet_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("mesh width {h} exceeds min length/8 = {limit}")]
    MeshTooCoarse { h: f64, limit: f64 },
    #[error("eigenvalue search failed: {0}")]
    ConvergenceFailure(String),
    #[error("finite-difference system is singular")]
    SingularSystem,
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PartialEq for Error {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Error::Core(a), Error::Core(b)) => a == b,
            (Error::Parse { line: a, reason: r }, Error::Parse { line: b, reason: s }) => a == b && r == s,
            (Error::MeshTooCoarse { h: a, .. }, Error::MeshTooCoarse { h: b, .. }) => a == b,
            (Error::ConvergenceFailure(a), Error::ConvergenceFailure(b)) => a == b,
            (Error::SingularSystem, Error::SingularSystem) => true,
            (Error::Csv(a), Error::Csv(b)) => a == b,
            _ => false,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
