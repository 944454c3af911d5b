//! Truncated Wirtinger flow on intensity measurements `b = |Hx|²`.
//!
//! Initialization is spectral: the leading eigenvector of the
//! measurement-weighted row covariance `(1/M) Σ_{r∈T} b_r h̄_r h_rᵀ`, where
//! `T` drops rows with `b_r > trunc_y² · mean(b)`, scaled so `‖z0‖²` estimates
//! `‖x‖²`. Each gradient step uses the Poisson-likelihood gradient restricted
//! to rows whose predicted amplitude and residual are not outliers.

use crate::error::{Error, Result};
use crate::forward::{l2, magnitude_residual};
use crate::instance::{MeasurementKind, PRInstance};
use crate::krbd::MeasurementOperator;
use crate::linalg::{norm, ComplexVec, C64};
use crate::rng::{complex_normal, complex_normal_vec, derive_seed, seeded};

use super::{best_of_restarts, check_rows, Attempt, SolverReport, WFParams};

/// Iterations in a row with an empty truncation set before giving up.
const MAX_EMPTY_STREAK: usize = 10;

/// Spectral initial estimate from intensities `b`.
pub fn spectral_init<O: MeasurementOperator + ?Sized>(
    op: &O,
    b: &[f64],
    params: &WFParams,
    seed: u64,
) -> Result<ComplexVec> {
    check_rows(op, b.len())?;
    let m = op.rows();
    let n = op.cols();
    let mean_b = b.iter().sum::<f64>() / m as f64;
    if mean_b.is_nan() || mean_b <= 0.0 {
        return Err(Error::ZeroMeasurements);
    }

    let cutoff = params.trunc_y * params.trunc_y * mean_b;
    let weights: Vec<f64> = b
        .iter()
        .map(|&v| if v <= cutoff { v / m as f64 } else { 0.0 })
        .collect();

    let mut v = complex_normal_vec(&mut seeded(seed), n);
    normalize(&mut v);
    let mut hv = vec![C64::new(0.0, 0.0); m];
    let mut next = vec![C64::new(0.0, 0.0); n];
    for _ in 0..params.init_power_iters {
        op.apply_into(&v, &mut hv);
        for (h, w) in hv.iter_mut().zip(&weights) {
            *h *= w;
        }
        op.adjoint_into(&hv, &mut next);
        if norm(&next) == 0.0 {
            break;
        }
        std::mem::swap(&mut v, &mut next);
        normalize(&mut v);
    }

    let row_norms = op.row_norms_sq();
    let mean_row = row_norms.iter().sum::<f64>() / m as f64;
    let scale = (n as f64 * mean_b / mean_row).sqrt();
    Ok(ComplexVec::from_vec(v.into_iter().map(|c| c * scale).collect()))
}

/// Adds complex Gaussian noise with the same per-entry RMS as `z`.
///
/// The spectral estimate barely depends on the power-method start, so
/// restarts past the first perturb it; otherwise every restart would land in
/// the same basin.
fn jitter(z: &mut [C64], seed: u64) {
    let scale = norm(z) / (z.len() as f64).sqrt();
    let mut rng = seeded(seed);
    for v in z.iter_mut() {
        *v += complex_normal(&mut rng) * scale;
    }
}

fn normalize(v: &mut [C64]) {
    let s = norm(v);
    if s > 0.0 {
        v.iter_mut().for_each(|c| *c /= s);
    }
}

/// Truncated WF from a given starting point. The residual is checked before
/// the first step, so a starting point that already fits the data returns
/// with zero iterations.
fn iterate<O: MeasurementOperator + ?Sized>(op: &O, b: &[f64], params: &WFParams, z0: Vec<C64>) -> Result<Attempt> {
    let m = op.rows();
    let n = op.cols();
    let sqrt_n = (n as f64).sqrt();
    let row_norms: Vec<f64> = op.row_norms_sq().into_iter().map(f64::sqrt).collect();
    let magnitudes: Vec<f64> = b.iter().map(|v| v.max(0.0).sqrt()).collect();
    let a_norm = l2(&magnitudes);
    if a_norm == 0.0 {
        return Err(Error::ZeroMeasurements);
    }

    let mut z = z0;
    let mut hz = vec![C64::new(0.0, 0.0); m];
    let mut weighted = vec![C64::new(0.0, 0.0); m];
    let mut grad = vec![C64::new(0.0, 0.0); n];
    op.apply_into(&z, &mut hz);
    let mut residual = magnitude_residual(&hz, &magnitudes, a_norm);
    let mut iterations = 0;
    let mut empty_streak = 0;
    let step = params.step_size / m as f64;

    while residual > params.tol && iterations < params.max_iters {
        let z_norm = norm(&z);
        let misfit_l1: f64 = hz.iter().zip(b).map(|(u, &y)| (y - u.norm_sqr()).abs()).sum();
        let misfit_bound = params.trunc_h / m as f64 * misfit_l1;

        let mut kept = 0;
        for (r, (u, w)) in hz.iter().zip(weighted.iter_mut()).enumerate() {
            *w = C64::new(0.0, 0.0);
            let amp = u.norm();
            let denom = row_norms[r] * z_norm;
            if denom == 0.0 || amp == 0.0 {
                continue;
            }
            let ratio = sqrt_n * amp / denom;
            if ratio < params.trunc_lb || ratio > params.trunc_ub {
                continue;
            }
            let power = amp * amp;
            if (b[r] - power).abs() > misfit_bound * ratio {
                continue;
            }
            *w = u * (2.0 * (power - b[r]) / power);
            kept += 1;
        }

        iterations += 1;
        if kept == 0 {
            empty_streak += 1;
            if empty_streak >= MAX_EMPTY_STREAK {
                return Err(Error::NonProgress {
                    iteration: iterations,
                    consecutive: empty_streak,
                });
            }
            continue;
        }
        empty_streak = 0;

        op.adjoint_into(&weighted, &mut grad);
        for (zi, g) in z.iter_mut().zip(&grad) {
            *zi -= g * step;
        }
        op.apply_into(&z, &mut hz);
        residual = magnitude_residual(&hz, &magnitudes, a_norm);
        if !residual.is_finite() {
            return Err(Error::NonFinite("wirtinger flow iterate"));
        }
    }

    Ok(Attempt {
        z,
        iterations,
        converged: residual <= params.tol,
        residual,
    })
}

pub(crate) fn solve<O: MeasurementOperator + ?Sized>(
    op: &O,
    b: &[f64],
    params: &WFParams,
    seed: u64,
    restarts: usize,
) -> Result<(ComplexVec, SolverReport)> {
    check_rows(op, b.len())?;
    params.validate()?;
    best_of_restarts(restarts, seed, |r, s| {
        let mut z0 = spectral_init(op, b, params, s)?.into_inner();
        if r > 0 {
            jitter(&mut z0, derive_seed(s, 1));
        }
        iterate(op, b, params, z0)
    })
}

fn intensities(instance: &PRInstance) -> Result<&[f64]> {
    if instance.kind != MeasurementKind::Intensity {
        return Err(Error::InvalidParams(
            "Wirtinger flow expects intensity measurements".into(),
        ));
    }
    Ok(&instance.measurements)
}

/// Truncated Wirtinger flow with a single spectral start.
pub fn wf_solve(instance: &PRInstance, params: &WFParams, seed: u64) -> Result<(ComplexVec, SolverReport)> {
    solve(instance.operator.as_dyn(), intensities(instance)?, params, seed, 1)
}

/// Truncated Wirtinger flow from a caller-supplied starting point.
pub fn wf_solve_from(instance: &PRInstance, params: &WFParams, z0: &ComplexVec) -> Result<(ComplexVec, SolverReport)> {
    let op = instance.operator.as_dyn();
    let b = intensities(instance)?;
    params.validate()?;
    if z0.len() != op.cols() {
        return Err(Error::DimensionMismatch {
            context: "starting point length",
            expected: op.cols(),
            found: z0.len(),
        });
    }
    best_of_restarts(1, 0, |_, _| iterate(op, b, params, z0.to_vec()))
}
