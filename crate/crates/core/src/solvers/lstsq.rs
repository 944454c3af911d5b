//! Precomputed least-squares solves `min_z ‖H z − v‖₂` via thin QR.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::krbd::{BlockPartition, KrbdMatrix};
use crate::linalg::{ComplexVec, DenseMatrix, C64};

/// Relative singular-value floor below which an operator is rank deficient.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct DenseLeastSquares {
    q: DMatrix<C64>,
    r: DMatrix<C64>,
}

impl DenseLeastSquares {
    pub fn factor(h: &DenseMatrix) -> Result<Self> {
        if h.rows() < h.cols() {
            return Err(Error::DimensionMismatch {
                context: "least squares needs rows >= cols",
                expected: h.cols(),
                found: h.rows(),
            });
        }
        let qr = h.to_nalgebra().qr();
        let q = qr.q();
        let r = qr.r();
        let sv = r.clone().singular_values();
        let largest = sv.iter().cloned().fold(0.0, f64::max);
        let smallest = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if largest == 0.0 || smallest <= RANK_TOL * largest {
            return Err(Error::RankDeficient { smallest, largest });
        }
        Ok(Self { q, r })
    }

    pub fn rows(&self) -> usize {
        self.q.nrows()
    }

    pub fn cols(&self) -> usize {
        self.r.ncols()
    }

    fn solve_into(&self, v: &[C64], out: &mut [C64]) {
        let qv = self.q.ad_mul(&DVector::from_column_slice(v));
        let z = self
            .r
            .solve_upper_triangular(&qv)
            .expect("R is nonsingular after the rank check");
        out.copy_from_slice(z.as_slice());
    }
}

/// A factored operator; block-diagonal operators factor per block.
#[derive(Clone, Debug)]
pub enum LeastSquares {
    Dense(DenseLeastSquares),
    Blocks {
        parts: Vec<DenseLeastSquares>,
        partition: BlockPartition,
    },
}

impl LeastSquares {
    pub fn factor(h: &DenseMatrix) -> Result<Self> {
        DenseLeastSquares::factor(h).map(LeastSquares::Dense)
    }

    pub fn factor_blocks(h: &KrbdMatrix) -> Result<Self> {
        let parts = h
            .blocks()
            .iter()
            .map(DenseLeastSquares::factor)
            .collect::<Result<_>>()?;
        Ok(LeastSquares::Blocks {
            parts,
            partition: h.partition().clone(),
        })
    }

    pub fn rows(&self) -> usize {
        match self {
            LeastSquares::Dense(d) => d.rows(),
            LeastSquares::Blocks { partition, .. } => partition.total_rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            LeastSquares::Dense(d) => d.cols(),
            LeastSquares::Blocks { partition, .. } => partition.total_cols(),
        }
    }

    /// Writes `argmin_z ‖H z − v‖` into `out`.
    pub fn solve_into(&self, v: &[C64], out: &mut [C64]) {
        match self {
            LeastSquares::Dense(d) => d.solve_into(v, out),
            LeastSquares::Blocks { parts, partition } => {
                for (i, part) in parts.iter().enumerate() {
                    part.solve_into(&v[partition.row_range(i)], &mut out[partition.col_range(i)]);
                }
            }
        }
    }

    pub fn solve(&self, v: &[C64]) -> Result<ComplexVec> {
        if v.len() != self.rows() {
            return Err(Error::DimensionMismatch {
                context: "least squares right-hand side",
                expected: self.rows(),
                found: v.len(),
            });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.cols()];
        self.solve_into(v, &mut out);
        Ok(ComplexVec::from_vec(out))
    }
}

/// Factors a dense operator for repeated least-squares solves.
pub fn pinv_factor(op: &DenseMatrix) -> Result<LeastSquares> {
    LeastSquares::factor(op)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_returns_input() {
        let ls = pinv_factor(&DenseMatrix::identity(3)).unwrap();
        let v = [c(1.0, -2.0), c(0.5, 0.0), c(0.0, 3.0)];
        let z = ls.solve(&v).unwrap();
        for (a, b) in z.iter().zip(&v) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn column_of_ones_gives_mean() {
        let h = DenseMatrix::from_rows(&[vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]]).unwrap();
        let z = pinv_factor(&h).unwrap().solve(&[c(1.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert!((z[0] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn rank_deficient_is_rejected() {
        let h = DenseMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(2.0, 0.0), c(4.0, 0.0)],
            vec![c(3.0, 0.0), c(6.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(pinv_factor(&h), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn wide_matrix_is_rejected() {
        let h = DenseMatrix::from_fn(1, 2, |_, _| c(1.0, 0.0));
        assert!(pinv_factor(&h).is_err());
    }

    #[test]
    fn rhs_length_is_checked() {
        let ls = pinv_factor(&DenseMatrix::identity(2)).unwrap();
        assert!(ls.solve(&[c(1.0, 0.0)]).is_err());
    }
}
