mod common;

use bpr_core::solvers::solve_with_spec;
use bpr_core::{
    block_pr_solve, build_tuning_matrix, measure, merge, nmse, phase_tune, solve_blocks, split_signal, BlockPRInstance,
    ComplexVec, DenseMatrix, Error, MeasurementKind, PRInstance, SolverSpec, C64,
};
use common::{block_instance, cis, gaussian, signal};

fn tuning_magnitudes(inst: &BlockPRInstance) -> Vec<f64> {
    inst.base
        .kind
        .convert(&inst.tuning_measurements, MeasurementKind::Magnitude)
}

#[test]
fn single_block_matches_dense_solver_bitwise() {
    for seed in 0..5 {
        let (inst, _) = block_instance(32, 1, 6.0, 20.0, seed);
        let spec = SolverSpec::wf(seed).with_restarts(2);
        let (x_hat, out) = block_pr_solve(&inst, &spec, &SolverSpec::tuner(0), 1).unwrap();
        let dense = inst.krbd().to_dense();
        let direct_spec = spec.clone().with_seed(bpr_core::blockpr::block_seed(spec.seed, 0));
        let (z, _) = solve_with_spec(
            &direct_spec,
            &dense,
            &inst.base.measurements,
            MeasurementKind::Intensity,
        )
        .unwrap();
        assert_eq!(x_hat, z);
        assert_eq!(out.d_hat.as_slice(), &[C64::new(1.0, 0.0)]);
    }
}

#[test]
fn blocks_recover_noiseless_subproblems() {
    let mut good = 0;
    for t in 0..100 {
        let (inst, x) = block_instance(128, 4, 6.0, 20.0, 100 + t);
        let (est, _) = solve_blocks(&inst, &SolverSpec::wf(t).with_restarts(3), 1).unwrap();
        let parts = split_signal(&x, inst.krbd().partition()).unwrap();
        if est.iter().zip(&parts).all(|(e, p)| nmse(p, e).unwrap() <= 1e-6) {
            good += 1;
        }
    }
    assert!(good >= 90, "{good}/100 trials with every block recovered");
}

#[test]
fn failing_block_is_isolated() {
    let (mut inst, _) = block_instance(32, 4, 6.0, 20.0, 9);
    let rows = inst.krbd().partition().row_range(2);
    inst.base.measurements[rows].fill(0.0);
    let err = solve_blocks(&inst, &SolverSpec::wf(1), 2).unwrap_err();
    let Error::BlockFailures(f) = err else {
        panic!("expected block failures, got {err:?}");
    };
    assert_eq!(f.failures.iter().map(|(i, _)| *i).collect::<Vec<_>>(), vec![2]);
    assert_eq!(f.completed.iter().map(|(i, _)| *i).collect::<Vec<_>>(), vec![0, 1, 3]);
}

#[test]
fn output_does_not_depend_on_parallelism() {
    for seed in 0..3 {
        let (inst, _) = block_instance(64, 4, 6.0, 20.0, 200 + seed);
        let block_spec = SolverSpec::wf(seed).with_restarts(2);
        let tune_spec = SolverSpec::tuner(seed + 1);
        let (reference, _) = block_pr_solve(&inst, &block_spec, &tune_spec, 1).unwrap();
        for p in [2, 3, 4, 8] {
            let (x_hat, _) = block_pr_solve(&inst, &block_spec, &tune_spec, p).unwrap();
            assert_eq!(x_hat, reference, "parallelism {p}");
        }
    }
}

#[test]
fn rotating_one_true_block_is_absorbed() {
    let (inst, x) = block_instance(64, 4, 6.0, 20.0, 31);
    let partition = inst.krbd().partition().clone();
    let mut rotated = x.to_vec();
    for v in &mut rotated[partition.col_range(1)] {
        *v *= cis(1.1);
    }
    let y = measure(inst.krbd(), &rotated, MeasurementKind::Intensity).unwrap();
    for (a, b) in y.iter().zip(&inst.base.measurements) {
        assert!((a - b).abs() <= 1e-9 * b.max(1.0));
    }
    let mut modified = inst.clone();
    modified.tuning_measurements = measure(&inst.tuning_matrix, &rotated, MeasurementKind::Intensity).unwrap();

    let block_spec = SolverSpec::wf(4).with_restarts(3);
    let tune_spec = SolverSpec::tuner(5);
    let (a, _) = block_pr_solve(&inst, &block_spec, &tune_spec, 1).unwrap();
    let (b, _) = block_pr_solve(&modified, &block_spec, &tune_spec, 1).unwrap();
    let e1 = nmse(&x, &a).unwrap();
    let e2 = nmse(&ComplexVec::new(rotated).unwrap(), &b).unwrap();
    assert!((e1 - e2).abs() <= 1e-9, "{e1:.3e} vs {e2:.3e}");
}

/// Block estimates `x_i · e^{jφ_i}`.
fn injected(x: &ComplexVec, inst: &BlockPRInstance, phis: &[f64]) -> Vec<ComplexVec> {
    split_signal(x, inst.krbd().partition())
        .unwrap()
        .iter()
        .zip(phis)
        .map(|(p, &phi)| p.scaled(cis(phi)))
        .collect()
}

#[test]
fn exact_estimates_tune_to_equal_phases() {
    let (inst, x) = block_instance(32, 4, 6.0, 20.0, 41);
    let est = injected(&x, &inst, &[0.0; 4]);
    let b = build_tuning_matrix(&est, &inst.tuning_matrix, inst.krbd().partition()).unwrap();
    let (d, _) = phase_tune(&b, &tuning_magnitudes(&inst), &SolverSpec::tuner(2)).unwrap();
    for v in d.iter() {
        assert!((v - d[0]).norm() <= 1e-8);
    }
    assert!(nmse(&x, &merge(&est, &d).unwrap()).unwrap() <= 1e-10);
}

#[test]
fn injected_phases_are_recovered() {
    let phis = [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI, 0.3];
    for seed in 0..10 {
        let (inst, x) = block_instance(32, 4, 6.0, 20.0, 50 + seed);
        let est = injected(&x, &inst, &phis);
        let b = build_tuning_matrix(&est, &inst.tuning_matrix, inst.krbd().partition()).unwrap();
        let (d, _) = phase_tune(&b, &tuning_magnitudes(&inst), &SolverSpec::tuner(seed)).unwrap();
        for i in 0..4 {
            let err = (d[i] * d[0].conj() - cis(-phis[i]) * cis(phis[0])).norm();
            assert!(err <= 1e-6, "seed {seed}, block {i}: {err:.3e}");
        }
    }
}

#[test]
fn one_tuning_row_per_block_often_fails() {
    let non_converged = (0..20)
        .filter(|&seed| {
            let (inst, x) = block_instance(32, 4, 6.0, 1.0, 70 + seed);
            let phis: Vec<f64> = (0..4).map(|i| 0.9 * i as f64 + seed as f64).collect();
            let est = injected(&x, &inst, &phis);
            let b = build_tuning_matrix(&est, &inst.tuning_matrix, inst.krbd().partition()).unwrap();
            let (_, report) = phase_tune(&b, &tuning_magnitudes(&inst), &SolverSpec::tuner(seed)).unwrap();
            !report.converged
        })
        .count();
    assert!(non_converged >= 1, "L = K never failed in 20 trials");
}

#[test]
fn perfect_inputs_merge_to_truth() {
    let (inst, x) = block_instance(32, 4, 6.0, 20.0, 61);
    let phis = [0.4, -1.0, 2.5, 3.0];
    let est = injected(&x, &inst, &phis);
    let common_phase = cis(0.77);
    let d: Vec<C64> = phis.iter().map(|&p| cis(-p) * common_phase).collect();
    assert!(nmse(&x, &merge(&est, &d).unwrap()).unwrap() <= 1e-12);
}

#[test]
fn tight_residuals_imply_tight_nmse() {
    let mut checked = 0;
    for seed in 0..20 {
        let (inst, x) = block_instance(16, 2, 6.0, 20.0, 80 + seed);
        let mut block_spec = SolverSpec::alt_proj(seed).with_restarts(10);
        block_spec.ap.tol = 1e-13;
        block_spec.ap.max_iters = 5000;
        let (x_hat, out) = block_pr_solve(&inst, &block_spec, &SolverSpec::tuner(seed), 1).unwrap();
        let tight = out.per_block_reports.iter().all(|r| r.final_residual <= 1e-10)
            && out.tuning_report.final_residual <= 1e-10;
        if tight {
            checked += 1;
            assert!(nmse(&x, &x_hat).unwrap() <= 1e-8);
        }
    }
    assert!(checked > 0);
}

#[test]
fn tuning_matrix_columns_are_block_products() {
    let (inst, x) = block_instance(12, 3, 6.0, 20.0, 90);
    let parts = split_signal(&x, inst.krbd().partition()).unwrap();
    let b = build_tuning_matrix(&parts, &inst.tuning_matrix, inst.krbd().partition()).unwrap();
    let ones = vec![C64::new(1.0, 0.0); 3];
    let via_b = measure(&b, &ones, MeasurementKind::Magnitude).unwrap();
    let direct = measure(&inst.tuning_matrix, &x, MeasurementKind::Magnitude).unwrap();
    for (a, d) in via_b.iter().zip(&direct) {
        assert!((a - d).abs() <= 1e-12 * d.max(1.0));
    }
}

#[test]
fn dense_operator_is_not_a_block_instance() {
    let h = gaussian(12, 2, 1);
    let x = signal(2, 2);
    let base = common::intensity_instance(h, &x);
    let a = DenseMatrix::identity(2);
    assert!(BlockPRInstance::new(base, a, vec![1.0, 1.0], 1.0).is_err());
    let _: Option<PRInstance> = None;
}
