use thiserror::Error;

/// Errors produced by the certification, bound and search routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cannot parse {what} from {input:?}: {reason}")]
    Parse {
        what: &'static str,
        input: String,
        reason: String,
    },

    /// The certified minimization could not close the gap between its lower
    /// and upper bound within the refinement budget.
    #[error("certification gap {gap:e} still above tol {tol:e} after {rounds} refinement rounds")]
    CertificationBudget { rounds: u32, gap: f64, tol: f64 },

    /// A certification failure inside a value matrix, tagged with its cell.
    #[error("value matrix cell (member {member}, interval {interval}): {source}")]
    Cell {
        member: usize,
        interval: usize,
        source: Box<Error>,
    },

    #[error("{what} = {value} exceeds the configured cap {cap}")]
    TooLarge {
        what: &'static str,
        value: u64,
        cap: u64,
    },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("set is not B_{h}[{g}]: {count} representations of {witness}")]
    NotBhg {
        h: u32,
        g: u64,
        witness: u64,
        count: u64,
    },

    /// The sinc equation degenerates to its x -> 0 limit, so no positive
    /// cardinality constant exists.
    #[error("degenerate bound: {0}")]
    Degenerate(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
