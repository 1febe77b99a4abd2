//! Dense and coordinate-format matrices plus the reductions the sampler needs.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::spectral::{self, SpectralConfig};

/// Neumaier-compensated running sum. Terms are added in the order given.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut acc = CompensatedSum::default();
    for x in terms {
        acc.add(x);
    }
    acc.value()
}

/// Immutable `rows x cols` real matrix stored row-major. Entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDimension { rows, cols });
        }
        let expected = rows
            .checked_mul(cols)
            .ok_or(Error::InvalidRequest("matrix size overflows usize"))?;
        if data.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                found: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::ShapeMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self::new(n, n, data)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            data[i * n + i] = *d;
        }
        Self::new(n, n, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// Always false; a valid matrix has at least one cell.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    /// Row-major entries.
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// `c * self`. Fails only if the product overflows to infinity.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.rows, self.cols, self.data.iter().map(|v| c * v).collect())
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|v| **v != 0.0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == 0.0)
    }

    /// `sqrt(sum X_ij^2)`, summed row-major with compensation.
    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.frobenius_norm_sq())
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        compensated_sum(self.data.iter().map(|v| v * v))
    }

    /// `sum |X_ij|`, summed row-major with compensation.
    pub fn entry_abs_sum(&self) -> f64 {
        compensated_sum(self.data.iter().map(|v| v.abs()))
    }

    /// `||X||_F^2 / ||X||_2^2` with the spectral norm from power iteration
    /// at relative tolerance `spectral_tol`.
    pub fn stable_rank(&self, spectral_tol: f64) -> Result<f64> {
        let fro_sq = self.frobenius_norm_sq();
        if fro_sq == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        let cfg = SpectralConfig {
            tol: spectral_tol,
            ..SpectralConfig::default()
        };
        let sigma = spectral::spectral_norm(self, &cfg)?.value;
        Ok(fro_sq / (sigma * sigma))
    }

    /// `y = X v`.
    pub fn mul_vec(&self, v: &[f64], y: &mut [f64]) {
        debug_assert_eq!(v.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (yi, row) in y.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *yi = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    /// `y = X^T v`.
    pub fn mul_vec_transpose(&self, v: &[f64], y: &mut [f64]) {
        debug_assert_eq!(v.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        y.iter_mut().for_each(|x| *x = 0.0);
        for (vi, row) in v.iter().zip(self.data.chunks_exact(self.cols)) {
            if *vi == 0.0 {
                continue;
            }
            for (yj, a) in y.iter_mut().zip(row) {
                *yj += vi * a;
            }
        }
    }
}

/// A single stored coordinate entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

impl Triple {
    pub fn new(row: usize, col: usize, value: f64) -> Self {
        Self { row, col, value }
    }
}

/// Coordinate-format sparse matrix. Indices are range-checked at
/// construction; duplicates are allowed until [`SparseCoo::canonicalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCoo {
    rows: usize,
    cols: usize,
    triples: Vec<Triple>,
}

impl SparseCoo {
    pub fn new(rows: usize, cols: usize, triples: Vec<Triple>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDimension { rows, cols });
        }
        for t in &triples {
            if t.row >= rows || t.col >= cols {
                return Err(Error::IndexOutOfRange {
                    row: t.row,
                    col: t.col,
                    rows,
                    cols,
                });
            }
            if !t.value.is_finite() {
                return Err(Error::NonFinite {
                    row: t.row,
                    col: t.col,
                });
            }
        }
        Ok(Self {
            rows,
            cols,
            triples,
        })
    }

    pub fn empty(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, Vec::new())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    /// Number of stored triples.
    pub fn nnz(&self) -> usize {
        self.triples.len()
    }

    /// Sorts row-major and sums duplicate coordinates into one triple.
    pub fn canonicalize(mut self) -> Self {
        self.triples.sort_by_key(|t| (t.row, t.col));
        let mut merged: Vec<Triple> = Vec::with_capacity(self.triples.len());
        for t in self.triples {
            match merged.last_mut() {
                Some(last) if last.row == t.row && last.col == t.col => last.value += t.value,
                _ => merged.push(t),
            }
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            triples: merged,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut data = vec![0.0; self.rows * self.cols];
        for t in &self.triples {
            data[t.row * self.cols + t.col] += t.value;
        }
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// `y = S v`.
    pub fn mul_vec(&self, v: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|x| *x = 0.0);
        for t in &self.triples {
            y[t.row] += t.value * v[t.col];
        }
    }

    /// `y = S^T v`.
    pub fn mul_vec_transpose(&self, v: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|x| *x = 0.0);
        for t in &self.triples {
            y[t.col] += t.value * v[t.row];
        }
    }
}

/// Free-function form of [`SparseCoo::to_dense`].
pub fn coo_to_dense(s: &SparseCoo) -> DenseMatrix {
    s.to_dense()
}
