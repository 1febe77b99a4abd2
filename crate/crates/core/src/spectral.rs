//! Spectral norm by power iteration on `A^T A`.
//!
//! The iteration starts from a seeded random unit vector and alternates
//! `w = A v`, `z = A^T w`. With `v` unit-norm the Rayleigh quotient of `A^T A`
//! is `||A v||^2`; iteration stops once successive quotients differ by less
//! than `tol` relatively and the eigen-residual `||A^T A v - q v||` is below
//! `tol q`. The estimate is the square root of the final quotient.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SparseCoo};
use crate::rng;
use crate::sampler::SparseSketch;

/// A real linear map `R^cols -> R^rows` with access to its adjoint.
pub trait LinearOperator {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// `y = A x`, overwriting `y`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// `y = A^T x`, overwriting `y`.
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for DenseMatrix {
    fn rows(&self) -> usize {
        DenseMatrix::rows(self)
    }
    fn cols(&self) -> usize {
        DenseMatrix::cols(self)
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec(x, y)
    }
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec_transpose(x, y)
    }
}

impl LinearOperator for SparseCoo {
    fn rows(&self) -> usize {
        SparseCoo::rows(self)
    }
    fn cols(&self) -> usize {
        SparseCoo::cols(self)
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec(x, y)
    }
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec_transpose(x, y)
    }
}

/// `A^T` as an operator, without copying `A`.
pub struct Transposed<'a, A: ?Sized>(pub &'a A);

impl<A: LinearOperator + ?Sized> LinearOperator for Transposed<'_, A> {
    fn rows(&self) -> usize {
        self.0.cols()
    }
    fn cols(&self) -> usize {
        self.0.rows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply_transpose(x, y)
    }
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply(x, y)
    }
}

/// The residual `S - X` applied lazily: `O(nnz(S) + mn)` per product.
pub struct SketchResidual<'a> {
    sketch: &'a SparseCoo,
    target: &'a DenseMatrix,
}

impl<'a> SketchResidual<'a> {
    pub fn new(sketch: &'a SparseCoo, target: &'a DenseMatrix) -> Result<Self> {
        if sketch.rows() != target.rows() || sketch.cols() != target.cols() {
            return Err(Error::ShapeMismatch {
                expected: target.len(),
                found: sketch.rows() * sketch.cols(),
            });
        }
        Ok(Self { sketch, target })
    }
}

impl LinearOperator for SketchResidual<'_> {
    fn rows(&self) -> usize {
        self.target.rows()
    }
    fn cols(&self) -> usize {
        self.target.cols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.target.mul_vec(x, y);
        y.iter_mut().for_each(|v| *v = -*v);
        for t in self.sketch.triples() {
            y[t.row] += t.value * x[t.col];
        }
    }
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.target.mul_vec_transpose(x, y);
        y.iter_mut().for_each(|v| *v = -*v);
        for t in self.sketch.triples() {
            y[t.col] += t.value * x[t.row];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConfig {
    /// Relative change threshold on the Rayleigh quotient.
    pub tol: f64,
    pub max_iters: usize,
    /// Seed of the random start vector.
    pub seed: u64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iters: 5000,
            seed: 0x5eed,
        }
    }
}

impl SpectralConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidRequest("spectral tolerance must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidRequest("max_iters must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn norm2(v: &[f64]) -> f64 {
    // Scaled to stay clear of overflow for large entries.
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let ss: f64 = v.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * libm::sqrt(ss)
}

/// Largest singular value of `a`. Non-convergence within `max_iters` is
/// reported through [`SpectralEstimate::converged`], not as an error.
pub fn spectral_norm<A: LinearOperator + ?Sized>(
    a: &A,
    cfg: &SpectralConfig,
) -> Result<SpectralEstimate> {
    cfg.validate()?;
    let (m, n) = (a.rows(), a.cols());
    let mut gen = rng::seeded(cfg.seed);
    let mut v: Vec<f64> = (0..n).map(|_| 2.0 * rng::uniform(&mut gen) - 1.0).collect();
    let nv = norm2(&v);
    if nv == 0.0 {
        v[0] = 1.0;
    } else {
        v.iter_mut().for_each(|x| *x /= nv);
    }

    let mut w = vec![0.0; m];
    let mut z = vec![0.0; n];
    let mut prev = f64::NAN;
    let mut best = 0.0f64;
    for iter in 1..=cfg.max_iters {
        a.apply(&v, &mut w);
        let sigma = norm2(&w);
        best = best.max(sigma);
        let quotient = sigma * sigma;

        a.apply_transpose(&w, &mut z);
        let nz = norm2(&z);
        if nz == 0.0 {
            // A v = 0 (or A^T A v = 0): only possible from this start if A is zero
            // on the current Krylov space; the best estimate so far stands.
            return Ok(SpectralEstimate {
                value: best,
                iterations: iter,
                converged: best == 0.0,
            });
        }
        // Some eigenvalue of A^T A lies within ||A^T A v - q v|| of q, so the
        // residual test guards against stalling on a small eigengap.
        let settled = iter > 1 && (quotient - prev).abs() <= cfg.tol * quotient;
        if settled {
            let r: Vec<f64> = z.iter().zip(&v).map(|(zi, vi)| zi - quotient * vi).collect();
            if norm2(&r) <= cfg.tol * quotient {
                return Ok(SpectralEstimate {
                    value: sigma,
                    iterations: iter,
                    converged: true,
                });
            }
        }
        prev = quotient;
        for (vi, zi) in v.iter_mut().zip(&z) {
            *vi = zi / nz;
        }
    }
    Ok(SpectralEstimate {
        value: best,
        iterations: cfg.max_iters,
        converged: false,
    })
}

/// `||S - X||_2` for a sketch of `x`, without forming the dense difference.
pub fn sketch_error(x: &DenseMatrix, sketch: &SparseSketch, cfg: &SpectralConfig) -> Result<f64> {
    let residual = SketchResidual::new(&sketch.matrix, x)?;
    Ok(spectral_norm(&residual, cfg)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Triple;
    use alloc::vec;

    fn cfg() -> SpectralConfig {
        SpectralConfig::default()
    }

    #[test]
    fn identity_has_unit_norm() {
        for n in [1, 3, 17] {
            let est = spectral_norm(&DenseMatrix::identity(n).unwrap(), &cfg()).unwrap();
            assert!((est.value - 1.0).abs() < 1e-9);
            assert!(est.converged);
        }
    }

    #[test]
    fn rank_one_row() {
        let x = DenseMatrix::from_rows(&[[3.0, 4.0], [0.0, 0.0]]).unwrap();
        let est = spectral_norm(&x, &cfg()).unwrap();
        assert!((est.value - 5.0).abs() < 5e-6);
    }

    #[test]
    fn diagonal() {
        let d = DenseMatrix::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let est = spectral_norm(&d, &cfg()).unwrap();
        assert!((est.value - 3.0).abs() < 3e-8);
    }

    #[test]
    fn zero_matrix_is_zero() {
        let est = spectral_norm(&DenseMatrix::zeros(3, 2).unwrap(), &cfg()).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.converged);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let d = DenseMatrix::from_diagonal(&[1.0, 0.999_999]).unwrap();
        let tight = SpectralConfig {
            tol: 1e-15,
            max_iters: 3,
            seed: 1,
        };
        let est = spectral_norm(&d, &tight).unwrap();
        assert!(!est.converged);
        assert_eq!(est.iterations, 3);
        assert!(est.value <= 1.0 + 1e-12);
    }

    #[test]
    fn rejects_bad_config() {
        let x = DenseMatrix::identity(2).unwrap();
        let bad = SpectralConfig { tol: 0.0, ..cfg() };
        assert!(spectral_norm(&x, &bad).is_err());
        let bad = SpectralConfig { max_iters: 0, ..cfg() };
        assert!(spectral_norm(&x, &bad).is_err());
    }

    #[test]
    fn residual_operator_matches_dense_difference() {
        let x = DenseMatrix::from_rows(&[[1.0, -2.0, 0.5], [0.0, 3.0, 1.0]]).unwrap();
        let s = SparseCoo::new(2, 3, vec![Triple::new(0, 0, 2.0), Triple::new(1, 1, 6.0)]).unwrap();
        let r = SketchResidual::new(&s, &x).unwrap();
        let diff = DenseMatrix::from_rows(&[[1.0, 2.0, -0.5], [0.0, 3.0, -1.0]]).unwrap();
        let v = [0.3, -1.0, 2.0];
        let (mut y1, mut y2) = ([0.0; 2], [0.0; 2]);
        r.apply(&v, &mut y1);
        diff.mul_vec(&v, &mut y2);
        assert!(y1.iter().zip(&y2).all(|(a, b)| (a - b).abs() < 1e-12));
        let u = [1.5, -0.5];
        let (mut z1, mut z2) = ([0.0; 3], [0.0; 3]);
        r.apply_transpose(&u, &mut z1);
        diff.mul_vec_transpose(&u, &mut z2);
        assert!(z1.iter().zip(&z2).all(|(a, b)| (a - b).abs() < 1e-12));

        let wrong = SparseCoo::empty(3, 2).unwrap();
        assert!(SketchResidual::new(&wrong, &x).is_err());
    }

    #[test]
    fn transposed_operator_same_norm() {
        let x = DenseMatrix::from_rows(&[[1.0, 2.0, 0.0], [0.5, -1.0, 4.0]]).unwrap();
        let a = spectral_norm(&x, &cfg()).unwrap().value;
        let b = spectral_norm(&Transposed(&x), &cfg()).unwrap().value;
        assert!((a - b).abs() < 1e-6 * a);
    }
}
