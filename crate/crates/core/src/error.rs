use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated a documented domain constraint.
    #[error("domain error: {0}")]
    Domain(String),
    /// The operation is not valid for the object's configuration.
    #[error("state error: {0}")]
    State(String),
    /// A Monte Carlo search could not reach its target.
    #[error("estimation error: {0}")]
    Estimation(String),
    /// Input data could not be turned into a dataset.
    #[error("ingestion error: {0}")]
    Ingest(String),
    /// A numeric cell failed to parse. Rows and columns are 1-based.
    #[error("ingestion error: row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        row: usize,
        column: usize,
        value: String,
    },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    /// No anomalies exist, so the data forms a single class.
    #[error("not separable: {0}")]
    NotSeparable(String),
    #[error("inconsistent report: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
