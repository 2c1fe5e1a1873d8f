use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("linear predictor overflows at zone {zone} (psi = {psi})")]
    NumericRange { zone: usize, psi: f64 },

    #[error("zone {zone} has no neighbours (island); its CAR conditional is undefined")]
    Island { zone: usize },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("row {row}: {message}")]
    Validation { row: usize, message: String },

    #[error("conflicting adjacency records for ({a}, {b}): row {first_row} has {first_lanes} lanes, row {second_row} has {second_lanes}")]
    Conflict {
        a: String,
        b: String,
        first_row: usize,
        first_lanes: u32,
        second_row: usize,
        second_lanes: u32,
    },

    #[error("row {row}: unknown zone id `{id}`")]
    Reference { row: usize, id: String },

    #[error("covariate spec error: {0}")]
    Spec(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("diagnostic undefined: {0}")]
    DiagnosticUndefined(String),

    #[error("summary error: {0}")]
    Summary(String),

    #[error("sampler aborted at iteration {iteration}: {reason}\nstate dump:\n{dump}")]
    SamplerAbort {
        iteration: usize,
        reason: String,
        dump: String,
    },

    #[error("grid too narrow: tail mass bound {bound:e} exceeds {limit:e}")]
    GridTooNarrow { bound: f64, limit: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
