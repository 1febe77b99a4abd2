//! Element-wise sampling distributions over the cells of a matrix.
//!
//! The hybrid distribution averages the squared-entry (L2) and absolute-entry
//! (L1) distributions:
//!
//! ```text
//! p_ij = 1/2 * (X_ij^2 / ||X||_F^2 + |X_ij| / sum|X|)
//! ```
//!
//! Any distribution `p` satisfying `p_ij >= beta/2 * (X_ij^2/||X||_F^2 +
//! |X_ij|/sum|X|)` at every cell admits the sample-size guarantees in
//! [`crate::bounds`] with that `beta`; [`beta_certificate`] computes the
//! largest such `beta` in `(0, 1]`, or 0 if none exists.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::matrix::{compensated_sum, DenseMatrix};

/// Allowed deviation of `sum p` from 1.
pub const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistributionKind {
    Hybrid,
    PureL2,
    PureL1,
    Custom,
}

impl DistributionKind {
    pub const BUILTIN: [DistributionKind; 3] = [Self::Hybrid, Self::PureL1, Self::PureL2];

    pub fn name(self) -> &'static str {
        match self {
            Self::Hybrid => "hybrid",
            Self::PureL2 => "l2",
            Self::PureL1 => "l1",
            Self::Custom => "custom",
        }
    }

    /// Builds the distribution of this kind for `x`. `Custom` has no
    /// canonical construction and is rejected.
    pub fn build(self, x: &DenseMatrix) -> Result<SamplingDistribution> {
        match self {
            Self::Hybrid => hybrid_distribution(x),
            Self::PureL2 => l2_distribution(x),
            Self::PureL1 => l1_distribution(x),
            Self::Custom => Err(Error::InvalidRequest(
                "custom distributions must be supplied explicitly",
            )),
        }
    }
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for DistributionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hybrid" => Ok(Self::Hybrid),
            "l2" => Ok(Self::PureL2),
            "l1" => Ok(Self::PureL1),
            "custom" => Ok(Self::Custom),
            _ => Err(Error::InvalidRequest("unknown distribution kind")),
        }
    }
}

/// Probabilities over the `rows x cols` cells, row-major, with the
/// beta-certificate of the matrix they were built for.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingDistribution {
    rows: usize,
    cols: usize,
    probs: Vec<f64>,
    kind: DistributionKind,
    beta_certificate: f64,
}

impl SamplingDistribution {
    /// Wraps user-supplied probabilities for `x`. The certificate is computed
    /// from `(x, probs)`; it is 0 when some nonzero cell has no mass.
    pub fn custom(x: &DenseMatrix, probs: Vec<f64>) -> Result<Self> {
        let beta = beta_certificate(x, &probs)?;
        Ok(Self {
            rows: x.rows(),
            cols: x.cols(),
            probs,
            kind: DistributionKind::Custom,
            beta_certificate: beta,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn prob(&self, row: usize, col: usize) -> f64 {
        self.probs[row * self.cols + col]
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn beta_certificate(&self) -> f64 {
        self.beta_certificate
    }

    pub(crate) fn check_shape(&self, x: &DenseMatrix) -> Result<()> {
        if self.rows != x.rows() || self.cols != x.cols() {
            return Err(Error::ShapeMismatch {
                expected: x.len(),
                found: self.probs.len(),
            });
        }
        Ok(())
    }
}

struct Norms {
    fro_sq: f64,
    abs_sum: f64,
}

fn norms(x: &DenseMatrix) -> Result<Norms> {
    let fro_sq = x.frobenius_norm_sq();
    let abs_sum = x.entry_abs_sum();
    if fro_sq == 0.0 || abs_sum == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok(Norms { fro_sq, abs_sum })
}

fn from_weights(
    x: &DenseMatrix,
    kind: DistributionKind,
    weight: impl Fn(f64, &Norms) -> f64,
) -> Result<SamplingDistribution> {
    let n = norms(x)?;
    let probs: Vec<f64> = x.as_slice().iter().map(|v| weight(*v, &n)).collect();
    let beta = certificate_with(x, &probs, &n);
    Ok(SamplingDistribution {
        rows: x.rows(),
        cols: x.cols(),
        probs,
        kind,
        beta_certificate: beta,
    })
}

#[inline]
fn l2_weight(v: f64, n: &Norms) -> f64 {
    v * v / n.fro_sq
}

#[inline]
fn l1_weight(v: f64, n: &Norms) -> f64 {
    v.abs() / n.abs_sum
}

/// The hybrid L1/L2 distribution; its certificate is 1.
pub fn hybrid_distribution(x: &DenseMatrix) -> Result<SamplingDistribution> {
    from_weights(x, DistributionKind::Hybrid, |v, n| {
        0.5 * (l2_weight(v, n) + l1_weight(v, n))
    })
}

/// `p_ij = X_ij^2 / ||X||_F^2` (no truncation of small entries).
pub fn l2_distribution(x: &DenseMatrix) -> Result<SamplingDistribution> {
    from_weights(x, DistributionKind::PureL2, l2_weight)
}

/// `p_ij = |X_ij| / sum|X|`.
pub fn l1_distribution(x: &DenseMatrix) -> Result<SamplingDistribution> {
    from_weights(x, DistributionKind::PureL1, l1_weight)
}

/// Largest `beta` in `[0, 1]` with `p_ij >= beta/2 * (X_ij^2/||X||_F^2 +
/// |X_ij|/sum|X|)` at every nonzero cell. Zero cells impose no constraint.
pub fn beta_certificate(x: &DenseMatrix, probs: &[f64]) -> Result<f64> {
    if probs.len() != x.len() {
        return Err(Error::ShapeMismatch {
            expected: x.len(),
            found: probs.len(),
        });
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidProbabilities("entries must be finite and nonnegative"));
    }
    if (compensated_sum(probs.iter().copied()) - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidProbabilities("entries must sum to 1"));
    }
    let n = norms(x)?;
    Ok(certificate_with(x, probs, &n))
}

fn certificate_with(x: &DenseMatrix, probs: &[f64], n: &Norms) -> f64 {
    x.as_slice()
        .iter()
        .zip(probs)
        .filter(|(v, _)| **v != 0.0)
        .map(|(v, p)| 2.0 * p / (l2_weight(*v, n) + l1_weight(*v, n)))
        .fold(1.0f64, f64::min)
}
