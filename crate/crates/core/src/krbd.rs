//! K-rectangular block diagonal (K-RBD) operators.
//!
//! A K-RBD matrix has non-zero entries only in K non-overlapping diagonal
//! rectangular blocks. Only the blocks are stored; the off-block zeros exist
//! logically and are materialized solely by [`KrbdMatrix::to_dense`].

use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{ComplexVec, DenseMatrix, C64};
use crate::solvers::lstsq::LeastSquares;

/// Row and column sizes of the diagonal blocks.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BlockPartition {
    row_sizes: Vec<usize>,
    col_sizes: Vec<usize>,
}

impl BlockPartition {
    pub fn new(row_sizes: Vec<usize>, col_sizes: Vec<usize>) -> Result<Self> {
        if row_sizes.is_empty() {
            return Err(Error::EmptyBlocks);
        }
        if row_sizes.len() != col_sizes.len() {
            return Err(Error::DimensionMismatch {
                context: "partition block count",
                expected: row_sizes.len(),
                found: col_sizes.len(),
            });
        }
        for (index, (&rows, &cols)) in row_sizes.iter().zip(&col_sizes).enumerate() {
            if rows == 0 || cols == 0 {
                return Err(Error::ZeroSizedBlock { index, rows, cols });
            }
        }
        Ok(Self { row_sizes, col_sizes })
    }

    /// `K` equal blocks of shape `(M/K) × (N/K)`; both divisions must be exact.
    pub fn equal(rows: usize, cols: usize, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyBlocks);
        }
        if !rows.is_multiple_of(k) || !cols.is_multiple_of(k) {
            return Err(Error::InvalidParams(format!(
                "{rows}x{cols} cannot be split into {k} equal blocks"
            )));
        }
        Self::new(vec![rows / k; k], vec![cols / k; k])
    }

    /// Blocks with the given column sizes and `m_i = ⌈α n_i⌉` rows each.
    pub fn oversampled(col_sizes: Vec<usize>, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParams(format!("alpha must be positive, got {alpha}")));
        }
        let row_sizes = col_sizes
            .iter()
            .map(|&n| (alpha * n as f64 - 1e-9).ceil() as usize)
            .collect();
        Self::new(row_sizes, col_sizes)
    }

    pub fn num_blocks(&self) -> usize {
        self.row_sizes.len()
    }

    pub fn row_sizes(&self) -> &[usize] {
        &self.row_sizes
    }

    pub fn col_sizes(&self) -> &[usize] {
        &self.col_sizes
    }

    pub fn total_rows(&self) -> usize {
        self.row_sizes.iter().sum()
    }

    pub fn total_cols(&self) -> usize {
        self.col_sizes.iter().sum()
    }

    pub fn row_range(&self, block: usize) -> Range<usize> {
        let start: usize = self.row_sizes[..block].iter().sum();
        start..start + self.row_sizes[block]
    }

    pub fn col_range(&self, block: usize) -> Range<usize> {
        let start: usize = self.col_sizes[..block].iter().sum();
        start..start + self.col_sizes[block]
    }

    fn block_of(ranges: &[Range<usize>], index: usize) -> usize {
        ranges.partition_point(|r| r.end <= index)
    }
}

/// Block-diagonal operator holding only its `K` diagonal blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct KrbdMatrix {
    partition: BlockPartition,
    blocks: Vec<DenseMatrix>,
}

impl KrbdMatrix {
    /// Assembles a K-RBD operator; the partition is read off the block shapes.
    pub fn from_blocks(blocks: Vec<DenseMatrix>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::EmptyBlocks);
        }
        let partition = BlockPartition::new(
            blocks.iter().map(DenseMatrix::rows).collect(),
            blocks.iter().map(DenseMatrix::cols).collect(),
        )?;
        Ok(Self { partition, blocks })
    }

    /// Extracts the diagonal blocks of `full`, provided every off-block entry
    /// has modulus at most `tol`. The error names the largest offender.
    pub fn from_dense(full: &DenseMatrix, partition: BlockPartition, tol: f64) -> Result<Self> {
        if partition.total_rows() != full.rows() {
            return Err(Error::DimensionMismatch {
                context: "partition rows vs dense rows",
                expected: full.rows(),
                found: partition.total_rows(),
            });
        }
        if partition.total_cols() != full.cols() {
            return Err(Error::DimensionMismatch {
                context: "partition cols vs dense cols",
                expected: full.cols(),
                found: partition.total_cols(),
            });
        }
        let k = partition.num_blocks();
        let row_ranges: Vec<_> = (0..k).map(|i| partition.row_range(i)).collect();
        let col_ranges: Vec<_> = (0..k).map(|i| partition.col_range(i)).collect();

        let mut worst: Option<(usize, usize, f64)> = None;
        for r in 0..full.rows() {
            let block = BlockPartition::block_of(&row_ranges, r);
            for (c, v) in full.row(r).iter().enumerate() {
                if col_ranges[block].contains(&c) {
                    continue;
                }
                let modulus = v.norm();
                if modulus > tol && worst.is_none_or(|(_, _, m)| modulus > m) {
                    worst = Some((r, c, modulus));
                }
            }
        }
        if let Some((row, col, modulus)) = worst {
            return Err(Error::OffBlockMass { row, col, modulus });
        }

        let blocks = (0..k)
            .map(|i| {
                let rows = row_ranges[i].clone();
                let cols = col_ranges[i].clone();
                DenseMatrix::from_fn(rows.len(), cols.len(), |r, c| full[(rows.start + r, cols.start + c)])
            })
            .collect();
        Ok(Self { partition, blocks })
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn blocks(&self) -> &[DenseMatrix] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &DenseMatrix {
        &self.blocks[i]
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Full `M × N` matrix including the off-block zeros.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut full = DenseMatrix::zeros(self.partition.total_rows(), self.partition.total_cols());
        for (i, block) in self.blocks.iter().enumerate() {
            let r0 = self.partition.row_range(i).start;
            let c0 = self.partition.col_range(i).start;
            for r in 0..block.rows() {
                for c in 0..block.cols() {
                    full.set(r0 + r, c0 + c, block[(r, c)]);
                }
            }
        }
        full
    }
}

/// Linear measurement operator as seen by the solvers.
pub trait MeasurementOperator: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// `out = H x`
    fn apply_into(&self, x: &[C64], out: &mut [C64]);
    /// `out = Hᴴ w`
    fn adjoint_into(&self, w: &[C64], out: &mut [C64]);
    fn row_norms_sq(&self) -> Vec<f64>;
    /// Precomputed solver for `min_z ‖H z − v‖₂`.
    fn least_squares(&self) -> Result<LeastSquares>;
}

impl MeasurementOperator for DenseMatrix {
    fn rows(&self) -> usize {
        DenseMatrix::rows(self)
    }

    fn cols(&self) -> usize {
        DenseMatrix::cols(self)
    }

    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        DenseMatrix::apply_into(self, x, out)
    }

    fn adjoint_into(&self, w: &[C64], out: &mut [C64]) {
        DenseMatrix::adjoint_into(self, w, out)
    }

    fn row_norms_sq(&self) -> Vec<f64> {
        DenseMatrix::row_norms_sq(self)
    }

    fn least_squares(&self) -> Result<LeastSquares> {
        LeastSquares::factor(self)
    }
}

impl MeasurementOperator for KrbdMatrix {
    fn rows(&self) -> usize {
        self.partition.total_rows()
    }

    fn cols(&self) -> usize {
        self.partition.total_cols()
    }

    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        for (i, block) in self.blocks.iter().enumerate() {
            let rows = self.partition.row_range(i);
            let cols = self.partition.col_range(i);
            block.apply_into(&x[cols], &mut out[rows]);
        }
    }

    fn adjoint_into(&self, w: &[C64], out: &mut [C64]) {
        for (i, block) in self.blocks.iter().enumerate() {
            let rows = self.partition.row_range(i);
            let cols = self.partition.col_range(i);
            block.adjoint_into(&w[rows], &mut out[cols]);
        }
    }

    fn row_norms_sq(&self) -> Vec<f64> {
        self.blocks.iter().flat_map(DenseMatrix::row_norms_sq).collect()
    }

    fn least_squares(&self) -> Result<LeastSquares> {
        LeastSquares::factor_blocks(self)
    }
}

/// Either operator representation.
#[derive(Clone, Debug, PartialEq)]
pub enum Operator {
    Dense(DenseMatrix),
    Krbd(KrbdMatrix),
}

impl Operator {
    pub fn as_dyn(&self) -> &dyn MeasurementOperator {
        match self {
            Operator::Dense(m) => m,
            Operator::Krbd(m) => m,
        }
    }

    pub fn rows(&self) -> usize {
        self.as_dyn().rows()
    }

    pub fn cols(&self) -> usize {
        self.as_dyn().cols()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Operator::Dense(m) => m.clone(),
            Operator::Krbd(m) => m.to_dense(),
        }
    }
}

impl From<DenseMatrix> for Operator {
    fn from(m: DenseMatrix) -> Self {
        Operator::Dense(m)
    }
}

impl From<KrbdMatrix> for Operator {
    fn from(m: KrbdMatrix) -> Self {
        Operator::Krbd(m)
    }
}

/// Splits `x` into contiguous sub-vectors of the partition's column sizes.
pub fn split_signal(x: &ComplexVec, partition: &BlockPartition) -> Result<Vec<ComplexVec>> {
    if x.len() != partition.total_cols() {
        return Err(Error::DimensionMismatch {
            context: "signal length vs partition columns",
            expected: partition.total_cols(),
            found: x.len(),
        });
    }
    Ok((0..partition.num_blocks())
        .map(|i| ComplexVec::from_vec(x[partition.col_range(i)].to_vec()))
        .collect())
}

/// Concatenates block vectors in index order; inverse of [`split_signal`].
pub fn concat_blocks(parts: &[ComplexVec]) -> Result<ComplexVec> {
    if parts.is_empty() {
        return Err(Error::EmptyBlocks);
    }
    let total = parts.iter().map(|p| p.len()).sum();
    let mut out = Vec::with_capacity(total);
    for p in parts {
        out.extend_from_slice(p);
    }
    Ok(ComplexVec::from_vec(out))
}
