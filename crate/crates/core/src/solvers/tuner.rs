//! Phase tuning: recover unit-modulus `d` from `y = |B d|`, where column `i`
//! of `B` is the tuning matrix applied to block estimate `i`.
//!
//! Alternating projections as in [`super::altproj`], except that after every
//! least-squares step each entry is pushed back onto the unit circle.

use crate::error::Result;
use crate::forward::{l2, magnitude_residual};
use crate::krbd::MeasurementOperator;
use crate::linalg::{ComplexVec, DenseMatrix, C64};
use crate::rng::seeded;

use super::{best_of_restarts, check_rows, APParams, Attempt, SolverReport};

/// Entries smaller than this are reset to `1` rather than normalized.
const RESET_FLOOR: f64 = 1e-14;

fn renormalize(d: &mut [C64]) {
    for v in d {
        let m = v.norm();
        *v = if m < RESET_FLOOR { C64::new(1.0, 0.0) } else { *v / m };
    }
}

pub(crate) fn solve<O: MeasurementOperator + ?Sized>(
    op: &O,
    y: &[f64],
    params: &APParams,
    seed: u64,
    restarts: usize,
) -> Result<(ComplexVec, SolverReport)> {
    check_rows(op, y.len())?;
    params.validate()?;
    let ls = op.least_squares()?;
    let k = op.cols();
    let y_norm = l2(y);
    if y_norm == 0.0 {
        return Ok((
            ComplexVec::from_vec(vec![C64::new(1.0, 0.0); k]),
            SolverReport {
                iterations: 0,
                final_residual: 0.0,
                restarts_used: 0,
                wall_time_seconds: 0.0,
                converged: false,
            },
        ));
    }

    best_of_restarts(restarts, seed, |_, s| {
        let mut rng = seeded(s);
        let mut d: Vec<C64> = (0..k)
            .map(|_| C64::from_polar(1.0, rand::Rng::random_range(&mut rng, 0.0..std::f64::consts::TAU)))
            .collect();
        let mut bd = vec![C64::new(0.0, 0.0); op.rows()];
        let mut v = bd.clone();
        op.apply_into(&d, &mut bd);
        let mut residual = magnitude_residual(&bd, y, y_norm);
        let mut iterations = 0;
        while iterations < params.max_iters {
            for ((vr, u), &m) in v.iter_mut().zip(&bd).zip(y) {
                *vr = crate::linalg::phase(*u) * m;
            }
            ls.solve_into(&v, &mut d);
            renormalize(&mut d);
            op.apply_into(&d, &mut bd);
            residual = magnitude_residual(&bd, y, y_norm);
            iterations += 1;
            if residual <= params.tol {
                break;
            }
        }
        Ok(Attempt {
            z: d,
            iterations,
            converged: residual <= params.tol,
            residual,
        })
    })
}

/// Unit-modulus phase tuning on an `L × K` matrix `b` with magnitudes `y`.
pub fn unit_modulus_tune(
    b: &DenseMatrix,
    y: &[f64],
    params: &APParams,
    seed: u64,
    restarts: usize,
) -> Result<(ComplexVec, SolverReport)> {
    solve(b, y, params, seed, restarts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::measure;
    use crate::instance::MeasurementKind;
    use crate::rng::complex_normal;

    #[test]
    fn single_block_is_pure_global_phase() {
        let mut rng = seeded(3);
        let b = DenseMatrix::from_fn(20, 1, |_, _| complex_normal(&mut rng));
        let y = measure(&b, &[C64::from_polar(1.0, 1.1)], MeasurementKind::Magnitude).unwrap();
        let (d, report) = unit_modulus_tune(&b, &y, &APParams::default(), 5, 50).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d[0].norm() - 1.0).abs() <= 1e-15);
        assert!(report.final_residual <= 1e-10);
    }

    #[test]
    fn zero_measurements_reset_to_ones() {
        let b = DenseMatrix::identity(3);
        let (d, report) = unit_modulus_tune(&b, &[0.0; 3], &APParams::default(), 0, 50).unwrap();
        assert!(d.iter().all(|v| *v == C64::new(1.0, 0.0)));
        assert!(!report.converged);
    }

    #[test]
    fn renormalize_resets_tiny_entries() {
        let mut d = vec![C64::new(0.0, 1e-15), C64::new(3.0, 4.0)];
        renormalize(&mut d);
        assert_eq!(d[0], C64::new(1.0, 0.0));
        assert!((d[1] - C64::new(0.6, 0.8)).norm() < 1e-16);
    }
}
