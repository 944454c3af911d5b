use std::time::Instant;

use bpr_core::blockpr::block_seed;
use bpr_core::rng::derive_seed;
use bpr_core::solvers::solve_with_spec;
use bpr_core::{block_pr_solve, nmse, DenseMatrix, MeasurementKind, SolverSpec};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{BenchError, Result};
use crate::generate::gen_instance;

/// Stream indices for solver seeds, disjoint from the instance streams.
const BLOCK_SOLVER_STREAM: u64 = 16;
const TUNE_SOLVER_STREAM: u64 = 17;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub nmse: f64,
    pub blocking_s: f64,
    pub tuning_s: f64,
    pub merge_s: f64,
    pub total_s: f64,
    pub monolithic_s: Option<f64>,
    pub monolithic_nmse: Option<f64>,
    /// `monolithic_s / total_s`
    pub speedup: Option<f64>,
    pub blocks_converged: bool,
    pub tuning_converged: bool,
    pub monolithic_converged: Option<bool>,
}

/// Solver specs for one trial: the configured solvers with seeds derived from
/// the trial seed.
pub fn trial_specs(cfg: &ExperimentConfig, trial_seed: u64) -> (SolverSpec, SolverSpec) {
    (
        cfg.solver
            .clone()
            .with_seed(derive_seed(trial_seed, BLOCK_SOLVER_STREAM)),
        cfg.tune_solver
            .clone()
            .with_seed(derive_seed(trial_seed, TUNE_SOLVER_STREAM)),
    )
}

fn stack_rows(top: &DenseMatrix, bottom: &DenseMatrix) -> DenseMatrix {
    let mut data = top.data().to_vec();
    data.extend_from_slice(bottom.data());
    DenseMatrix::new(top.rows() + bottom.rows(), top.cols(), data).expect("matching column counts")
}

/// Block pipeline on one generated instance, optionally timed against the
/// base solver on the densified problem.
///
/// The monolithic run treats the whole matrix as a single block, so it gets
/// the block-0 seed; with `K = 1` both runs perform identical work.
pub fn run_trial(cfg: &ExperimentConfig, trial_seed: u64, compare_monolithic: bool) -> Result<TrialRecord> {
    let generated = gen_instance(cfg, trial_seed)?;
    let instance = &generated.instance;
    let k = instance.num_blocks();
    let (block_spec, tune_spec) = trial_specs(cfg, trial_seed);

    let start = Instant::now();
    let (x_hat, output) = block_pr_solve(instance, &block_spec, &tune_spec, cfg.parallelism_for(k))?;
    let total_s = start.elapsed().as_secs_f64();
    let err = nmse(&generated.truth, &x_hat)?;

    let mut record = TrialRecord {
        n: cfg.n,
        k,
        seed: trial_seed,
        nmse: err,
        blocking_s: output.stage_times.blocking_s,
        tuning_s: output.stage_times.tuning_s,
        merge_s: output.stage_times.merge_s,
        total_s,
        monolithic_s: None,
        monolithic_nmse: None,
        speedup: None,
        blocks_converged: output.per_block_reports.iter().all(|r| r.converged),
        tuning_converged: output.tuning_report.converged,
        monolithic_converged: None,
    };

    if compare_monolithic {
        let mut dense = instance.krbd().to_dense();
        let mut y = instance.base.measurements.clone();
        if cfg.baseline_include_tuning_rows {
            dense = stack_rows(&dense, &instance.tuning_matrix);
            y.extend_from_slice(&instance.tuning_measurements);
        }
        let mono_spec = block_spec.clone().with_seed(block_seed(block_spec.seed, 0));
        let start = Instant::now();
        let (z, report) = solve_with_spec(&mono_spec, &dense, &y, MeasurementKind::Intensity)?;
        let monolithic_s = start.elapsed().as_secs_f64();
        record.monolithic_s = Some(monolithic_s);
        record.monolithic_nmse = Some(nmse(&generated.truth, &z)?);
        record.monolithic_converged = Some(report.converged);
        record.speedup = Some(monolithic_s / total_s);
    }
    Ok(record)
}

/// [`run_trial`] with the error tagged by trial index.
pub fn run_indexed_trial(
    cfg: &ExperimentConfig,
    index: usize,
    trial_seed: u64,
    compare_monolithic: bool,
) -> Result<TrialRecord> {
    run_trial(cfg, trial_seed, compare_monolithic).map_err(|e| match e {
        BenchError::Core(source) => BenchError::Trial { trial: index, source },
        other => other,
    })
}
