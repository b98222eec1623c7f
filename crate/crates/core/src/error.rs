use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The local-mixture factor `1 + λ·A` is not positive at a record.
    #[error("local-mixture factor {value:e} is not positive at record {index}")]
    BoundaryViolation { index: usize, value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("point is not on the region boundary (min q = {min_q:e})")]
    NotOnBoundary { min_q: f64 },

    #[error("degenerate supporting-plane normal at y = {0}")]
    DegenerateNormal(f64),

    #[error("optimizer failure: {0}")]
    Optimizer(String),

    #[error("no admissible baseline increment at event {event} (time {time})")]
    NoAdmissibleRoot { event: usize, time: f64 },

    #[error("profile likelihood failed at beta = {beta:?}: {source}")]
    Profile { beta: Vec<f64>, source: Box<Error> },

    #[error("simulation bench: {0}")]
    Bench(String),
}
