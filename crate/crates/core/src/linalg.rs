//! Complex vector and dense matrix containers.
//!
//! Every inner product in this crate goes through [`dot`], which accumulates
//! in ascending index order with no reassociation. Two code paths that reduce
//! the same numbers in the same order therefore agree bit for bit, which is
//! what makes a one-block K-RBD operator interchangeable with its dense form.

use std::ops::{Deref, Index};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Canonical inner product `Σ_k a_k b_k` (no conjugation), ascending `k`.
#[inline]
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// `Σ_k conj(a_k) b_k`, ascending `k`.
#[inline]
pub fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * y;
    }
    acc
}

#[inline]
pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum()
}

#[inline]
pub fn norm(a: &[C64]) -> f64 {
    norm_sqr(a).sqrt()
}

/// Unit-modulus phase of `v`, with `phase(0) = 1`.
#[inline]
pub fn phase(v: C64) -> C64 {
    let m = v.norm();
    if m == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        v / m
    }
}

fn check_finite(values: &[C64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// A non-empty vector of finite complex entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<C64>", into = "Vec<C64>")]
pub struct ComplexVec(Vec<C64>);

impl ComplexVec {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::DimensionMismatch {
                context: "complex vector length",
                expected: 1,
                found: 0,
            });
        }
        check_finite(&entries, "complex vector")?;
        Ok(Self(entries))
    }

    /// Wraps solver output without re-validating; callers guarantee the
    /// invariants.
    pub(crate) fn from_vec(entries: Vec<C64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self(entries)
    }

    pub fn zeros(len: usize) -> Self {
        Self::from_vec(vec![C64::new(0.0, 0.0); len.max(1)])
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.0)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self::from_vec(self.0.iter().map(|v| v * factor).collect())
    }
}

impl Deref for ComplexVec {
    type Target = [C64];

    fn deref(&self) -> &[C64] {
        &self.0
    }
}

impl TryFrom<Vec<C64>> for ComplexVec {
    type Error = Error;

    fn try_from(value: Vec<C64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ComplexVec> for Vec<C64> {
    fn from(value: ComplexVec) -> Self {
        value.0
    }
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ZeroSizedBlock { index: 0, rows, cols });
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "dense matrix entries",
                expected: rows * cols,
                found: data.len(),
            });
        }
        check_finite(&data, "dense matrix")?;
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row vectors of equal length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let data: Vec<C64> = rows.iter().flatten().copied().collect();
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn set(&mut self, r: usize, c: usize, value: C64) {
        self.data[r * self.cols + c] = value;
    }

    /// `out = self · x`, one canonical [`dot`] per row.
    pub fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = dot(row, x);
        }
    }

    /// `out = selfᴴ · w`, accumulating rows in ascending order.
    pub fn adjoint_into(&self, w: &[C64], out: &mut [C64]) {
        debug_assert_eq!(w.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.fill(C64::new(0.0, 0.0));
        for (wr, row) in w.iter().zip(self.data.chunks_exact(self.cols)) {
            if *wr == C64::new(0.0, 0.0) {
                continue;
            }
            for (o, h) in out.iter_mut().zip(row) {
                *o += h.conj() * wr;
            }
        }
    }

    pub fn row_norms_sq(&self) -> Vec<f64> {
        self.data.chunks_exact(self.cols).map(norm_sqr).collect()
    }

    /// Columns `start..start + width` as a new matrix.
    pub fn column_slice(&self, start: usize, width: usize) -> DenseMatrix {
        assert!(start + width <= self.cols, "column slice out of range");
        let mut data = Vec::with_capacity(self.rows * width);
        for r in 0..self.rows {
            data.extend_from_slice(&self.row(r)[start..start + width]);
        }
        DenseMatrix {
            rows: self.rows,
            cols: width,
            data,
        }
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}
