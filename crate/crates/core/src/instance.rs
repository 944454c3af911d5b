use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krbd::{KrbdMatrix, Operator};
use crate::linalg::DenseMatrix;

/// Whether measurements are `|Hx|` or `|Hx|²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementKind {
    Magnitude,
    Intensity,
}

impl MeasurementKind {
    /// Converts `values` of this kind into `target` kind. Intensities are
    /// clamped at zero before the square root.
    pub fn convert(self, values: &[f64], target: MeasurementKind) -> Vec<f64> {
        match (self, target) {
            (a, b) if a == b => values.to_vec(),
            (MeasurementKind::Intensity, MeasurementKind::Magnitude) => {
                values.iter().map(|v| v.max(0.0).sqrt()).collect()
            }
            _ => values.iter().map(|v| v * v).collect(),
        }
    }
}

fn validate_measurements(values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite("measurements"));
        }
        if value < 0.0 {
            return Err(Error::NegativeMeasurement { index, value });
        }
    }
    Ok(())
}

/// A phase retrieval problem: operator, measurements and their kind.
#[derive(Clone, Debug, PartialEq)]
pub struct PRInstance {
    pub operator: Operator,
    pub measurements: Vec<f64>,
    pub kind: MeasurementKind,
    /// SNR of the noise that was added, in dB; `None` when noiseless.
    pub snr_db: Option<f64>,
}

impl PRInstance {
    pub fn new(
        operator: impl Into<Operator>,
        measurements: Vec<f64>,
        kind: MeasurementKind,
        snr_db: Option<f64>,
    ) -> Result<Self> {
        let operator = operator.into();
        if measurements.len() != operator.rows() {
            return Err(Error::DimensionMismatch {
                context: "measurements vs operator rows",
                expected: operator.rows(),
                found: measurements.len(),
            });
        }
        validate_measurements(&measurements)?;
        Ok(Self {
            operator,
            measurements,
            kind,
            snr_db,
        })
    }

    pub fn measurements_as(&self, kind: MeasurementKind) -> Vec<f64> {
        self.kind.convert(&self.measurements, kind)
    }
}

/// A block-structured problem plus the `L = βK` global tuning measurements.
/// Tuning measurements share the base instance's [`MeasurementKind`].
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPRInstance {
    pub base: PRInstance,
    pub tuning_matrix: DenseMatrix,
    pub tuning_measurements: Vec<f64>,
    pub beta: f64,
}

impl BlockPRInstance {
    pub fn new(base: PRInstance, tuning_matrix: DenseMatrix, tuning_measurements: Vec<f64>, beta: f64) -> Result<Self> {
        let Operator::Krbd(krbd) = &base.operator else {
            return Err(Error::InvalidParams("block instance needs a K-RBD operator".into()));
        };
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParams(format!("beta must be positive, got {beta}")));
        }
        let expected_rows = tuning_rows(beta, krbd.num_blocks());
        if tuning_matrix.rows() != expected_rows {
            return Err(Error::DimensionMismatch {
                context: "tuning rows vs round(beta * K)",
                expected: expected_rows,
                found: tuning_matrix.rows(),
            });
        }
        if tuning_matrix.cols() != base.operator.cols() {
            return Err(Error::DimensionMismatch {
                context: "tuning matrix columns vs N",
                expected: base.operator.cols(),
                found: tuning_matrix.cols(),
            });
        }
        if tuning_measurements.len() != tuning_matrix.rows() {
            return Err(Error::DimensionMismatch {
                context: "tuning measurements vs tuning rows",
                expected: tuning_matrix.rows(),
                found: tuning_measurements.len(),
            });
        }
        validate_measurements(&tuning_measurements)?;
        Ok(Self {
            base,
            tuning_matrix,
            tuning_measurements,
            beta,
        })
    }

    pub fn krbd(&self) -> &KrbdMatrix {
        match &self.base.operator {
            Operator::Krbd(k) => k,
            Operator::Dense(_) => unreachable!("checked in BlockPRInstance::new"),
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.krbd().num_blocks()
    }
}

/// `L = round(β K)`, at least one row.
pub fn tuning_rows(beta: f64, k: usize) -> usize {
    ((beta * k as f64).round() as usize).max(1)
}
