use std::fmt;

use crate::solvers::SolverReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("block list is empty")]
    EmptyBlocks,

    #[error("block {index} has zero size ({rows}x{cols})")]
    ZeroSizedBlock { index: usize, rows: usize, cols: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("negative measurement {value} at index {index}")]
    NegativeMeasurement { index: usize, value: f64 },

    #[error("off-block entry at ({row}, {col}) has modulus {modulus:e}")]
    OffBlockMass { row: usize, col: usize, modulus: f64 },

    #[error("reference vector is zero")]
    ZeroReference,

    #[error("measurement vector is zero")]
    ZeroMeasurements,

    #[error("empty truncation set for {consecutive} consecutive iterations (at iteration {iteration})")]
    NonProgress { iteration: usize, consecutive: usize },

    #[error("operator is rank deficient: smallest singular value {smallest:e}, largest {largest:e}")]
    RankDeficient { smallest: f64, largest: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("{0}")]
    BlockFailures(Box<BlockFailures>),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Failures from the blocking step, with whatever blocks did finish.
#[derive(Debug)]
pub struct BlockFailures {
    pub failures: Vec<(usize, Error)>,
    pub completed: Vec<(usize, SolverReport)>,
}

impl fmt::Display for BlockFailures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} block solve(s) failed:", self.failures.len())?;
        for (index, err) in &self.failures {
            write!(f, " [block {index}: {err}]")?;
        }
        write!(f, " ({} completed)", self.completed.len())
    }
}
