//! Synthetic instances: i.i.d. complex Gaussian signal, K diagonal blocks
//! of shape `⌈α N/K⌉ × N/K`, and a dense `L × N` tuning matrix with
//! `L = round(β K)`, all from the same ensemble.

use bpr_core::rng::{complex_normal, complex_normal_vec, derive_seed, seeded, SeededRng};
use bpr_core::{
    add_noise_intensity, measure, BlockPRInstance, BlockPartition, ComplexVec, DenseMatrix, KrbdMatrix,
    MeasurementKind, NoiseSpec, PRInstance, C64,
};
use rand::Rng;

use crate::config::{ExperimentConfig, MatrixKind};
use crate::error::Result;

/// Independent random streams derived from one trial seed.
#[derive(Clone, Copy)]
enum Stream {
    Signal = 0,
    Blocks = 1,
    Tuning = 2,
    BlockNoise = 3,
    TuningNoise = 4,
}

pub fn stream_seed(trial_seed: u64, stream: u64) -> u64 {
    derive_seed(trial_seed, stream)
}

fn draw_matrix(rng: &mut SeededRng, rows: usize, cols: usize, kind: MatrixKind) -> DenseMatrix {
    match kind {
        MatrixKind::Gaussian => DenseMatrix::from_fn(rows, cols, |_, _| complex_normal(rng)),
        MatrixKind::Binary01 => DenseMatrix::from_fn(rows, cols, |_, _| {
            C64::new(if rng.random_bool(0.5) { 1.0 } else { 0.0 }, 0.0)
        }),
    }
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub instance: BlockPRInstance,
    pub truth: ComplexVec,
}

pub fn gen_instance(cfg: &ExperimentConfig, trial_seed: u64) -> Result<Generated> {
    cfg.validate()?;
    let k = cfg.resolved_k()?;
    let n = cfg.n;
    let partition = BlockPartition::oversampled(vec![n / k; k], cfg.alpha)?;
    let l = bpr_core::instance::tuning_rows(cfg.beta, k);
    let seed = |s: Stream| stream_seed(trial_seed, s as u64);

    let truth = ComplexVec::new(complex_normal_vec(&mut seeded(seed(Stream::Signal)), n))?;

    let mut rng = seeded(seed(Stream::Blocks));
    let blocks = partition
        .row_sizes()
        .iter()
        .zip(partition.col_sizes())
        .map(|(&m, &nb)| draw_matrix(&mut rng, m, nb, cfg.matrix_kind))
        .collect();
    let krbd = KrbdMatrix::from_blocks(blocks)?;
    let a = draw_matrix(&mut seeded(seed(Stream::Tuning)), l, n, cfg.matrix_kind);

    let noise = |stream: Stream| match cfg.snr_db {
        Some(snr) => NoiseSpec::new(snr, seed(stream)),
        None => NoiseSpec::noiseless(),
    };
    let y = add_noise_intensity(
        &measure(&krbd, &truth, MeasurementKind::Intensity)?,
        &noise(Stream::BlockNoise),
    );
    let clean_t = measure(&a, &truth, MeasurementKind::Intensity)?;
    let y_t = if cfg.noisy_tuning {
        add_noise_intensity(&clean_t, &noise(Stream::TuningNoise))
    } else {
        clean_t
    };

    let base = PRInstance::new(krbd, y, MeasurementKind::Intensity, cfg.snr_db)?;
    let instance = BlockPRInstance::new(base, a, y_t, cfg.beta)?;
    Ok(Generated { instance, truth })
}
