#![allow(dead_code)]

use bpr_core::rng::{complex_normal_vec, seeded};
use bpr_core::{
    measure, BlockPRInstance, BlockPartition, ComplexVec, DenseMatrix, KrbdMatrix, MeasurementKind, PRInstance, C64,
};

pub fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    DenseMatrix::new(rows, cols, complex_normal_vec(&mut seeded(seed), rows * cols)).unwrap()
}

pub fn signal(n: usize, seed: u64) -> ComplexVec {
    ComplexVec::new(complex_normal_vec(&mut seeded(seed), n)).unwrap()
}

pub fn intensity_instance(h: DenseMatrix, x: &[C64]) -> PRInstance {
    let b = measure(&h, x, MeasurementKind::Intensity).unwrap();
    PRInstance::new(h, b, MeasurementKind::Intensity, None).unwrap()
}

pub fn magnitude_instance(h: DenseMatrix, x: &[C64]) -> PRInstance {
    let a = measure(&h, x, MeasurementKind::Magnitude).unwrap();
    PRInstance::new(h, a, MeasurementKind::Magnitude, None).unwrap()
}

/// Noiseless block instance with `k` equal Gaussian blocks of `n / k`
/// columns, `alpha`-oversampled, and `round(beta k)` tuning rows.
pub fn block_instance(n: usize, k: usize, alpha: f64, beta: f64, seed: u64) -> (BlockPRInstance, ComplexVec) {
    let x = signal(n, seed);
    let partition = BlockPartition::oversampled(vec![n / k; k], alpha).unwrap();
    let blocks = (0..k)
        .map(|i| gaussian(partition.row_sizes()[i], n / k, seed ^ (0x100 + i as u64)))
        .collect();
    let krbd = KrbdMatrix::from_blocks(blocks).unwrap();
    let l = bpr_core::instance::tuning_rows(beta, k);
    let a = gaussian(l, n, seed ^ 0xA5A5);
    let y = measure(&krbd, &x, MeasurementKind::Intensity).unwrap();
    let y_t = measure(&a, &x, MeasurementKind::Intensity).unwrap();
    let base = PRInstance::new(krbd, y, MeasurementKind::Intensity, None).unwrap();
    (BlockPRInstance::new(base, a, y_t, beta).unwrap(), x)
}

pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}
