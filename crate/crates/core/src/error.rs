use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("state space too large: {size:.3e} states exceed the exact-inference guard of {guard}")]
    StateSpaceTooLarge { size: f64, guard: u64 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("record {record}: vertex {vertex} has state {state}, expected < {states}")]
    AssignmentOutOfRange {
        record: usize,
        vertex: usize,
        state: usize,
        states: usize,
    },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("belief entry {0} is negative beyond tolerance")]
    NegativeBelief(f64),

    #[error("inference did not converge within {sweeps} sweeps")]
    NotConverged { sweeps: usize },

    #[error("trace has no parameter snapshots")]
    MissingSnapshots,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        match err.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse(format!("{other:?}")),
        }
    }
}
