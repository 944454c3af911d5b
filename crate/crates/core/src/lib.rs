//! Block-based phase retrieval.
//!
//! A measurement operator in K-rectangular-block-diagonal form splits the
//! recovery of `x` from `|Hx|` into K independent small problems. Each block
//! is recovered up to an unknown phase; a handful of extra global
//! measurements pin down those K phases, and the blocks are merged.
//!
//! * [`linalg`], [`krbd`]: containers and the K-RBD operator.
//! * [`forward`]: measurement models, noise, NMSE.
//! * [`solvers`]: truncated Wirtinger flow, alternating projections and the
//!   unit-modulus phase tuner.
//! * [`blockpr`]: the blocking / phase tuning / merge pipeline.
//! * [`io`]: the `BPR1` binary format and a CSV debugging form.

pub mod blockpr;
pub mod error;
pub mod forward;
pub mod instance;
pub mod io;
pub mod krbd;
pub mod linalg;
pub mod rng;
pub mod solvers;

pub use blockpr::{block_pr_solve, build_tuning_matrix, merge, phase_tune, solve_blocks, BlockSolveOutput, StageTimes};
pub use error::{Error, Result};
pub use forward::{add_noise_intensity, align_global_phase, apply, measure, nmse, residual, NoiseSpec};
pub use instance::{BlockPRInstance, MeasurementKind, PRInstance};
pub use krbd::{concat_blocks, split_signal, BlockPartition, KrbdMatrix, MeasurementOperator, Operator};
pub use linalg::{ComplexVec, DenseMatrix, C64};
pub use solvers::{APParams, ApInit, SolverKind, SolverReport, SolverSpec, WFParams};
