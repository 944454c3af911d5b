//! Measurement models, noise injection and error metrics.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::MeasurementKind;
use crate::krbd::MeasurementOperator;
use crate::linalg::{dot_conj, ComplexVec, C64};
use crate::rng::seeded;

fn check_cols<O: MeasurementOperator + ?Sized>(op: &O, len: usize) -> Result<()> {
    if op.cols() != len {
        return Err(Error::DimensionMismatch {
            context: "operator columns vs signal length",
            expected: op.cols(),
            found: len,
        });
    }
    Ok(())
}

/// Exact product `H x`.
pub fn apply<O: MeasurementOperator + ?Sized>(op: &O, x: &[C64]) -> Result<ComplexVec> {
    check_cols(op, x.len())?;
    let mut out = vec![C64::new(0.0, 0.0); op.rows()];
    op.apply_into(x, &mut out);
    Ok(ComplexVec::from_vec(out))
}

/// `|H x|` or `|H x|²`, elementwise.
pub fn measure<O: MeasurementOperator + ?Sized>(op: &O, x: &[C64], kind: MeasurementKind) -> Result<Vec<f64>> {
    let hx = apply(op, x)?;
    Ok(match kind {
        MeasurementKind::Magnitude => hx.iter().map(|v| v.norm()).collect(),
        MeasurementKind::Intensity => hx.iter().map(|v| v.norm_sqr()).collect(),
    })
}

/// Additive real Gaussian noise on intensities at a given SNR.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// `f64::INFINITY` means noiseless.
    pub snr_db: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(snr_db: f64, seed: u64) -> Self {
        Self { snr_db, seed }
    }

    pub fn noiseless() -> Self {
        Self {
            snr_db: f64::INFINITY,
            seed: 0,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.snr_db == f64::INFINITY
    }

    /// `σ² = mean(b²) · 10^(−snr/10)`.
    pub fn noise_variance(&self, b: &[f64]) -> f64 {
        if self.is_noiseless() || b.is_empty() {
            return 0.0;
        }
        let power = b.iter().map(|v| v * v).sum::<f64>() / b.len() as f64;
        power * 10f64.powf(-self.snr_db / 10.0)
    }
}

/// Returns `max(b + w, 0)` with `w` i.i.d. `N(0, σ²)` per [`NoiseSpec`].
pub fn add_noise_intensity(b: &[f64], spec: &NoiseSpec) -> Vec<f64> {
    let variance = spec.noise_variance(b);
    if variance == 0.0 {
        return b.to_vec();
    }
    let normal = Normal::new(0.0, variance.sqrt()).expect("finite positive std");
    let mut rng = seeded(spec.seed);
    b.iter().map(|&v| (v + normal.sample(&mut rng)).max(0.0)).collect()
}

/// Unit-modulus `c` minimizing `‖x_ref − c·x_est‖₂`; `1` when the two
/// vectors are orthogonal.
pub fn align_global_phase(x_ref: &[C64], x_est: &[C64]) -> Result<C64> {
    if x_ref.len() != x_est.len() {
        return Err(Error::DimensionMismatch {
            context: "phase alignment lengths",
            expected: x_ref.len(),
            found: x_est.len(),
        });
    }
    let inner = dot_conj(x_est, x_ref);
    let modulus = inner.norm();
    Ok(if modulus == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        inner / modulus
    })
}

/// `‖x_ref − c·x_est‖² / ‖x_ref‖²` after optimal global phase alignment.
pub fn nmse(x_ref: &[C64], x_est: &[C64]) -> Result<f64> {
    let c = align_global_phase(x_ref, x_est)?;
    let reference = crate::linalg::norm_sqr(x_ref);
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    let err: f64 = x_ref.iter().zip(x_est).map(|(r, e)| (r - c * e).norm_sqr()).sum();
    Ok(err / reference)
}

/// `‖ |H z| − a ‖₂ / ‖a‖₂`.
pub fn residual<O: MeasurementOperator + ?Sized>(op: &O, a: &[f64], z: &[C64]) -> Result<f64> {
    if a.len() != op.rows() {
        return Err(Error::DimensionMismatch {
            context: "magnitudes vs operator rows",
            expected: op.rows(),
            found: a.len(),
        });
    }
    let hz = apply(op, z)?;
    let a_norm = l2(a);
    if a_norm == 0.0 {
        return Err(Error::ZeroMeasurements);
    }
    Ok(magnitude_residual(&hz, a, a_norm))
}

pub(crate) fn l2(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Residual from a precomputed `H z`.
pub(crate) fn magnitude_residual(hz: &[C64], a: &[f64], a_norm: f64) -> f64 {
    let err: f64 = hz
        .iter()
        .zip(a)
        .map(|(u, m)| {
            let d = u.norm() - m;
            d * d
        })
        .sum();
    err.sqrt() / a_norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krbd::KrbdMatrix;
    use crate::linalg::DenseMatrix;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn hadamard2() -> DenseMatrix {
        DenseMatrix::from_rows(&[vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(-1.0, 0.0)]]).unwrap()
    }

    #[test]
    fn apply_examples() {
        let x = [c(3.0, 4.0), c(1.0, 0.0)];
        assert_eq!(apply(&DenseMatrix::identity(2), &x).unwrap().as_slice(), &x);

        let y = apply(&hadamard2(), &[c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert_eq!(y.as_slice(), &[c(1.0, 1.0), c(1.0, -1.0)]);

        let k = KrbdMatrix::from_blocks(vec![
            DenseMatrix::from_rows(&[vec![c(2.0, 0.0)]]).unwrap(),
            DenseMatrix::from_rows(&[vec![c(3.0, 0.0)]]).unwrap(),
        ])
        .unwrap();
        let y = apply(&k, &[c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert_eq!(y.as_slice(), &[c(2.0, 0.0), c(0.0, 3.0)]);

        assert!(apply(&k, &[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn measure_examples() {
        let id = DenseMatrix::identity(1);
        assert_eq!(
            measure(&id, &[c(3.0, 4.0)], MeasurementKind::Magnitude).unwrap(),
            vec![5.0]
        );
        assert_eq!(
            measure(&id, &[c(3.0, 4.0)], MeasurementKind::Intensity).unwrap(),
            vec![25.0]
        );

        let m = measure(&hadamard2(), &[c(1.0, 0.0), c(0.0, 1.0)], MeasurementKind::Magnitude).unwrap();
        for v in m {
            assert!((v - 2f64.sqrt()).abs() < 1e-15);
        }

        let zero = measure(&hadamard2(), &[c(0.0, 0.0); 2], MeasurementKind::Intensity).unwrap();
        assert_eq!(zero, vec![0.0, 0.0]);
    }

    #[test]
    fn infinite_snr_is_identity() {
        let b = vec![1.0, 2.0, 3.0];
        assert_eq!(add_noise_intensity(&b, &NoiseSpec::new(f64::INFINITY, 9)), b);
    }

    #[test]
    fn noise_is_clamped_at_zero() {
        // One tiny entry among large ones: the noise std dwarfs it.
        let mut b = vec![100.0; 64];
        b[0] = 1e-9;
        let mut clamped = false;
        for seed in 0..32 {
            let out = add_noise_intensity(&b, &NoiseSpec::new(0.0, seed));
            assert!(out.iter().all(|&v| v >= 0.0));
            clamped |= out.contains(&0.0);
        }
        assert!(clamped);
    }

    #[test]
    fn noise_is_reproducible() {
        let b: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let spec = NoiseSpec::new(20.0, 1234);
        let a = add_noise_intensity(&b, &spec);
        let b2 = add_noise_intensity(&b, &spec);
        assert!(a.iter().zip(&b2).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_ne!(a, add_noise_intensity(&b, &NoiseSpec::new(20.0, 1235)));
    }

    #[test]
    fn alignment_examples() {
        let x = [c(1.0, 2.0), c(-0.5, 0.25)];
        let rotated: Vec<C64> = x.iter().map(|v| v * c(0.0, 1.0)).collect();
        let cc = align_global_phase(&x, &rotated).unwrap();
        assert!((cc - c(0.0, -1.0)).norm() < 1e-12);
        assert!((align_global_phase(&x, &x).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(align_global_phase(&x, &[c(0.0, 0.0); 2]).unwrap(), c(1.0, 0.0));
        assert!(align_global_phase(&x, &x[..1]).is_err());
    }

    #[test]
    fn nmse_examples() {
        let x = [c(1.0, 2.0), c(-0.5, 0.25), c(0.0, 1.0)];
        let rot = C64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
        let est: Vec<C64> = x.iter().map(|v| v * rot).collect();
        assert!(nmse(&x, &est).unwrap() <= 1e-24);
        assert_eq!(nmse(&x, &[c(0.0, 0.0); 3]).unwrap(), 1.0);
        assert!(matches!(
            nmse(&[c(0.0, 0.0)], &[c(1.0, 0.0)]),
            Err(Error::ZeroReference)
        ));

        let unit = [c(0.6, 0.0), c(0.0, 0.8)];
        let eps = 1e-3;
        let perturbed = [unit[0] + eps, unit[1]];
        // one ulp of slack: ‖unit‖² rounds just below 1
        assert!(nmse(&unit, &perturbed).unwrap() <= eps * eps * (1.0 + 1e-12));
    }

    #[test]
    fn residual_examples() {
        let id = DenseMatrix::identity(1);
        assert_eq!(residual(&id, &[5.0], &[c(3.0, 4.0)]).unwrap(), 0.0);
        assert_eq!(residual(&hadamard2(), &[1.0, 2.0], &[c(0.0, 0.0); 2]).unwrap(), 1.0);
        assert!(matches!(
            residual(&id, &[0.0], &[c(1.0, 0.0)]),
            Err(Error::ZeroMeasurements)
        ));
    }
}
