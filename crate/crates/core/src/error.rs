use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("power budget {budget} is below the digital floor {required}")]
    InfeasiblePower { required: f64, budget: f64 },
    #[error("distance {0} is not in the constellation table")]
    DistanceNotFound(f64),
    #[error("distortion is not convex in the linear coefficient (curvature {0})")]
    NonConvex(f64),
    #[error("no feasible point in the search space")]
    NoFeasiblePoint,
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the error stems from user configuration rather than a runtime
    /// failure.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::InvalidParameter(_))
    }
}
