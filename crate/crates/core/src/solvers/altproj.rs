//! Alternating projections on magnitudes `a = |Hx|`: project onto the
//! magnitude constraint (`v = a ⊙ phase(Hz)`), then back onto the range of
//! `H` by least squares.

use crate::error::{Error, Result};
use crate::forward::{l2, magnitude_residual};
use crate::instance::{MeasurementKind, PRInstance};
use crate::krbd::MeasurementOperator;
use crate::linalg::{phase, ComplexVec, C64};
use crate::rng::{complex_normal_vec, seeded};

use super::lstsq::LeastSquares;
use super::{best_of_restarts, check_rows, spectral_init, APParams, ApInit, Attempt, SolverReport, WFParams};

pub(crate) fn initial_point<O: MeasurementOperator + ?Sized>(
    op: &O,
    a: &[f64],
    init: ApInit,
    seed: u64,
) -> Result<Vec<C64>> {
    match init {
        ApInit::Random => Ok(complex_normal_vec(&mut seeded(seed), op.cols())),
        ApInit::Spectral => {
            let b: Vec<f64> = a.iter().map(|v| v * v).collect();
            Ok(spectral_init(op, &b, &WFParams::default(), seed)?.into_inner())
        }
    }
}

/// Runs projections from `z0`; `history` receives the residual after each
/// iteration when provided.
pub(crate) fn iterate<O: MeasurementOperator + ?Sized>(
    op: &O,
    ls: &LeastSquares,
    a: &[f64],
    params: &APParams,
    z0: Vec<C64>,
    mut history: Option<&mut Vec<f64>>,
) -> Attempt {
    let a_norm = l2(a);
    let mut z = z0;
    let mut hz = vec![C64::new(0.0, 0.0); op.rows()];
    let mut v = vec![C64::new(0.0, 0.0); op.rows()];
    op.apply_into(&z, &mut hz);
    let mut residual = magnitude_residual(&hz, a, a_norm);
    let mut iterations = 0;
    while iterations < params.max_iters {
        for ((vr, u), &m) in v.iter_mut().zip(&hz).zip(a) {
            *vr = phase(*u) * m;
        }
        ls.solve_into(&v, &mut z);
        op.apply_into(&z, &mut hz);
        residual = magnitude_residual(&hz, a, a_norm);
        iterations += 1;
        if let Some(h) = history.as_deref_mut() {
            h.push(residual);
        }
        if residual <= params.tol {
            break;
        }
    }
    Attempt {
        z,
        iterations,
        converged: residual <= params.tol,
        residual,
    }
}

fn zero_solution(n: usize) -> (ComplexVec, SolverReport) {
    (
        ComplexVec::zeros(n),
        SolverReport {
            iterations: 0,
            final_residual: 0.0,
            restarts_used: 0,
            wall_time_seconds: 0.0,
            converged: true,
        },
    )
}

pub(crate) fn solve<O: MeasurementOperator + ?Sized>(
    op: &O,
    a: &[f64],
    params: &APParams,
    seed: u64,
    restarts: usize,
) -> Result<(ComplexVec, SolverReport)> {
    check_rows(op, a.len())?;
    params.validate()?;
    let ls = op.least_squares()?;
    if l2(a) == 0.0 {
        return Ok(zero_solution(op.cols()));
    }
    best_of_restarts(restarts, seed, |_, s| {
        let z0 = initial_point(op, a, params.init, s)?;
        Ok(iterate(op, &ls, a, params, z0, None))
    })
}

fn magnitudes(instance: &PRInstance) -> Result<&[f64]> {
    if instance.kind != MeasurementKind::Magnitude {
        return Err(Error::InvalidParams(
            "alternating projections expect magnitude measurements".into(),
        ));
    }
    Ok(&instance.measurements)
}

/// Alternating projections with a single seeded start.
pub fn altproj_solve(instance: &PRInstance, params: &APParams, seed: u64) -> Result<(ComplexVec, SolverReport)> {
    solve(instance.operator.as_dyn(), magnitudes(instance)?, params, seed, 1)
}

/// Runs alternating projections from `z0`, returning the final iterate and
/// the residual after every iteration.
pub fn altproj_trace(instance: &PRInstance, params: &APParams, z0: &ComplexVec) -> Result<(ComplexVec, Vec<f64>)> {
    let op = instance.operator.as_dyn();
    let a = magnitudes(instance)?;
    params.validate()?;
    if z0.len() != op.cols() {
        return Err(Error::DimensionMismatch {
            context: "starting point length",
            expected: op.cols(),
            found: z0.len(),
        });
    }
    if l2(a) == 0.0 {
        return Err(Error::ZeroMeasurements);
    }
    let ls = op.least_squares()?;
    let mut history = Vec::new();
    let attempt = iterate(op, &ls, a, params, z0.to_vec(), Some(&mut history));
    Ok((ComplexVec::from_vec(attempt.z), history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{measure, nmse};
    use crate::linalg::DenseMatrix;
    use crate::rng::complex_normal;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_fixed_point_takes_one_iteration() {
        let x = ComplexVec::new(vec![c(1.0, 2.0), c(-3.0, 0.5)]).unwrap();
        let h = DenseMatrix::identity(2);
        let a = measure(&h, &x, MeasurementKind::Magnitude).unwrap();
        let inst = PRInstance::new(h, a, MeasurementKind::Magnitude, None).unwrap();
        let (z, hist) = altproj_trace(&inst, &APParams::default(), &x).unwrap();
        assert_eq!(hist.len(), 1);
        assert!(hist[0] <= 1e-15);
        assert!(nmse(&x, &z).unwrap() < 1e-30);
    }

    #[test]
    fn zero_magnitudes_give_zero_signal() {
        let inst = PRInstance::new(DenseMatrix::identity(3), vec![0.0; 3], MeasurementKind::Magnitude, None).unwrap();
        let (z, report) = altproj_solve(&inst, &APParams::default(), 9).unwrap();
        assert!(report.converged);
        assert!(z.iter().all(|v| *v == c(0.0, 0.0)));
    }

    #[test]
    fn residual_never_increases() {
        let mut rng = seeded(21);
        let h = DenseMatrix::from_fn(48, 8, |_, _| complex_normal(&mut rng));
        let x = complex_normal_vec(&mut rng, 8);
        let a = measure(&h, &x, MeasurementKind::Magnitude).unwrap();
        let inst = PRInstance::new(h, a, MeasurementKind::Magnitude, None).unwrap();
        let z0 = ComplexVec::new(complex_normal_vec(&mut rng, 8)).unwrap();
        let (_, hist) = altproj_trace(&inst, &APParams::default(), &z0).unwrap();
        for w in hist.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn intensity_instances_are_rejected() {
        let inst = PRInstance::new(DenseMatrix::identity(1), vec![1.0], MeasurementKind::Intensity, None).unwrap();
        assert!(altproj_solve(&inst, &APParams::default(), 0).is_err());
    }
}
