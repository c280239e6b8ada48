//! Error types shared across the library and the CLI.

use thiserror::Error;

/// Library-wide error type.
///
/// Each variant maps to one of the CLI exit-code categories:
/// usage (2), data (3), numerical (4), io (5).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("degenerate tail spacing: {0}")]
    DegenerateTail(String),

    #[error("degenerate scale: {0}")]
    DegenerateScale(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("simulation error: {0}")]
    Simulation(String),

    #[error("unstable subsampling: {0}")]
    UnstableSubsampling(String),

    #[error("quantile range error: {0}")]
    QuantileRange(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Machine-readable category label, also used to pick the CLI exit code.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) | Error::QuantileRange(_) => "usage",
            Error::Data(_) => "data",
            Error::Solver(_)
            | Error::DegenerateTail(_)
            | Error::DegenerateScale(_)
            | Error::Simulation(_)
            | Error::UnstableSubsampling(_) => "numerical",
            Error::Io { .. } => "io",
        }
    }

    /// CLI exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "usage" => 2,
            "data" => 3,
            "numerical" => 4,
            "io" => 5,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
