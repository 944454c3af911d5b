//! The two-step block pipeline.
//!
//! 1. Blocking: solve the K independent sub-problems `y_i = |H_i x_i|`, each
//!    with its own derived seed, on a pool of at most `parallelism` workers.
//! 2. Phase tuning: each estimate is only known up to a phase, `x̂_i =
//!    x_i e^{jφ_i}`. With extra global measurements `ỹ = |A x|` and
//!    `A = [A_0 … A_{K-1}]`, the correction factors solve the K-dimensional
//!    problem `ỹ = |B d|` with `B = [A_0 x̂_0 … A_{K-1} x̂_{K-1}]`.
//!
//! The merged estimate is `[d_0 x̂_0, …, d_{K-1} x̂_{K-1}]`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{BlockFailures, Error, Result};
use crate::instance::{BlockPRInstance, MeasurementKind};
use crate::krbd::BlockPartition;
use crate::linalg::{dot, phase, ComplexVec, DenseMatrix, C64};
use crate::rng::derive_seed;
use crate::solvers::{solve_with_spec, SolverKind, SolverReport, SolverSpec};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub blocking_s: f64,
    pub tuning_s: f64,
    pub merge_s: f64,
}

impl StageTimes {
    pub fn total(&self) -> f64 {
        self.blocking_s + self.tuning_s + self.merge_s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockSolveOutput {
    pub block_estimates: Vec<ComplexVec>,
    pub per_block_reports: Vec<SolverReport>,
    pub d_hat: ComplexVec,
    pub tuning_report: SolverReport,
    pub stage_times: StageTimes,
}

/// Seed used for block `index` under master seed `seed`.
pub fn block_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, index as u64)
}

type BlockResult = Result<(ComplexVec, SolverReport)>;

/// Runs `job(i)` for `i in 0..count` on up to `workers` threads; results are
/// returned in index order regardless of completion order.
fn run_pool<F>(count: usize, workers: usize, job: F) -> Vec<BlockResult>
where
    F: Fn(usize) -> BlockResult + Sync,
{
    let workers = workers.clamp(1, count.max(1));
    if workers == 1 {
        return (0..count).map(job).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<BlockResult>>> = Mutex::new((0..count).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let result = job(i);
                slots.lock().expect("worker panicked")[i] = Some(result);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|s| s.expect("every index is claimed once"))
        .collect()
}

/// Blocking step: solves every diagonal sub-problem independently.
///
/// Block `i` uses seed [`block_seed`]`(spec.seed, i)`, so the output does not
/// depend on `parallelism` or scheduling. On failure the error lists every
/// failed block along with the reports of those that finished.
pub fn solve_blocks(
    instance: &BlockPRInstance,
    spec: &SolverSpec,
    parallelism: usize,
) -> Result<(Vec<ComplexVec>, Vec<SolverReport>)> {
    spec.validate()?;
    let krbd = instance.krbd();
    let partition = krbd.partition();
    let base = &instance.base;
    let results = run_pool(krbd.num_blocks(), parallelism, |i| {
        let block_spec = spec.clone().with_seed(block_seed(spec.seed, i));
        let y = &base.measurements[partition.row_range(i)];
        solve_with_spec(&block_spec, krbd.block(i), y, base.kind)
    });

    let mut estimates = Vec::with_capacity(results.len());
    let mut reports = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    let mut completed = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok((z, report)) => {
                completed.push((i, report.clone()));
                estimates.push(z);
                reports.push(report);
            }
            Err(e) => failures.push((i, e)),
        }
    }
    if !failures.is_empty() {
        return Err(Error::BlockFailures(Box::new(BlockFailures { failures, completed })));
    }
    Ok((estimates, reports))
}

/// `B[:, i] = A_i x̂_i` where `A_i` are the partition's column slices of `a`.
pub fn build_tuning_matrix(
    block_estimates: &[ComplexVec],
    a: &DenseMatrix,
    partition: &BlockPartition,
) -> Result<DenseMatrix> {
    if a.cols() != partition.total_cols() {
        return Err(Error::DimensionMismatch {
            context: "tuning matrix columns vs N",
            expected: partition.total_cols(),
            found: a.cols(),
        });
    }
    if block_estimates.len() != partition.num_blocks() {
        return Err(Error::DimensionMismatch {
            context: "block estimate count",
            expected: partition.num_blocks(),
            found: block_estimates.len(),
        });
    }
    for (i, est) in block_estimates.iter().enumerate() {
        if est.len() != partition.col_sizes()[i] {
            return Err(Error::DimensionMismatch {
                context: "block estimate length",
                expected: partition.col_sizes()[i],
                found: est.len(),
            });
        }
    }
    let k = partition.num_blocks();
    let ranges: Vec<_> = (0..k).map(|i| partition.col_range(i)).collect();
    Ok(DenseMatrix::from_fn(a.rows(), k, |r, i| {
        dot(&a.row(r)[ranges[i].clone()], &block_estimates[i])
    }))
}

/// Phase tuning step; the result always has unit-modulus entries.
pub fn phase_tune(b: &DenseMatrix, y_t: &[f64], spec: &SolverSpec) -> Result<(ComplexVec, SolverReport)> {
    let (d, report) = solve_with_spec(spec, b, y_t, MeasurementKind::Magnitude)?;
    let d = match spec.kind {
        SolverKind::UnitModulusTuner => d,
        _ => ComplexVec::from_vec(d.iter().map(|v| phase(*v)).collect()),
    };
    Ok((d, report))
}

/// `[d_0 x̂_0, …, d_{K-1} x̂_{K-1}]`.
pub fn merge(block_estimates: &[ComplexVec], d_hat: &[C64]) -> Result<ComplexVec> {
    if block_estimates.is_empty() {
        return Err(Error::EmptyBlocks);
    }
    if block_estimates.len() != d_hat.len() {
        return Err(Error::DimensionMismatch {
            context: "phase factors vs blocks",
            expected: block_estimates.len(),
            found: d_hat.len(),
        });
    }
    let out = block_estimates
        .iter()
        .zip(d_hat)
        .flat_map(|(x, d)| x.iter().map(move |v| v * d))
        .collect();
    Ok(ComplexVec::from_vec(out))
}

/// Full pipeline: blocking, tuning-matrix assembly, phase tuning, merge.
///
/// With a single block, phase tuning is skipped (`d̂ = [1]`) and the
/// estimate is returned untouched.
pub fn block_pr_solve(
    instance: &BlockPRInstance,
    block_spec: &SolverSpec,
    tune_spec: &SolverSpec,
    parallelism: usize,
) -> Result<(ComplexVec, BlockSolveOutput)> {
    let start = Instant::now();
    let (estimates, reports) = solve_blocks(instance, block_spec, parallelism)?;
    let blocking_s = start.elapsed().as_secs_f64();

    let partition = instance.krbd().partition();
    let start = Instant::now();
    let (d_hat, tuning_report) = if partition.num_blocks() == 1 {
        (
            ComplexVec::from_vec(vec![C64::new(1.0, 0.0)]),
            SolverReport {
                iterations: 0,
                final_residual: 0.0,
                restarts_used: 0,
                wall_time_seconds: 0.0,
                converged: true,
            },
        )
    } else {
        let b = build_tuning_matrix(&estimates, &instance.tuning_matrix, partition)?;
        let y_t = instance
            .base
            .kind
            .convert(&instance.tuning_measurements, MeasurementKind::Magnitude);
        phase_tune(&b, &y_t, tune_spec)?
    };
    let tuning_s = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let x_hat = if partition.num_blocks() == 1 {
        estimates[0].clone()
    } else {
        merge(&estimates, &d_hat)?
    };
    let merge_s = start.elapsed().as_secs_f64();

    Ok((
        x_hat,
        BlockSolveOutput {
            block_estimates: estimates,
            per_block_reports: reports,
            d_hat,
            tuning_report,
            stage_times: StageTimes {
                blocking_s,
                tuning_s,
                merge_s,
            },
        },
    ))
}
