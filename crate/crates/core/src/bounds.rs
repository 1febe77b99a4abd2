//! Sample sizes and concentration quantities for element-wise sparsification.
//!
//! Write `F = ||X||_F`, `L = ln((m + n) / delta)`. A distribution with
//! certificate `beta` gives `||S(X) - X||_2 <= epsilon` with probability at
//! least `1 - delta` once `s` reaches
//!
//! ```text
//! case I  (epsilon <= F):  6 max(m,n) L F^2 / (beta epsilon^2)
//! case II (epsilon >  F):  6 max(m,n) L F   / (beta epsilon)
//! ```
//!
//! Both are relaxations of the tighter
//!
//! ```text
//! (4 n F^2 + 2 epsilon sqrt(mn) F) L / (beta epsilon^2)
//! ```
//!
//! which is what the matrix Bernstein tail
//! `(m + n) exp(-(s epsilon^2 / 2) / (rho^2 + gamma epsilon / 3))`
//! yields with `gamma = 3 sqrt(mn) F / beta` (a.s. bound on `||M_t||_2`) and
//! `rho^2 = 2 n F^2 / beta` (bound on `||E[M_t M_t^T]||_2`), where
//! `M_t = X_ij / p_ij e_i e_j^T - X` is one centred sample.

use alloc::vec;

use crate::distributions::SamplingDistribution;
use crate::error::{Error, Result};
use crate::matrix::{compensated_sum, DenseMatrix, SparseCoo, Triple};
use crate::spectral::{spectral_norm, SketchResidual, SpectralConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRequest {
    pub m: usize,
    pub n: usize,
    /// Absolute spectral-error target.
    pub epsilon: f64,
    pub delta: f64,
    pub beta: f64,
    /// `||X||_F`.
    pub frobenius: f64,
    pub stable_rank: Option<f64>,
}

impl BoundRequest {
    pub fn new(m: usize, n: usize, epsilon: f64, delta: f64, beta: f64, frobenius: f64) -> Result<Self> {
        let req = Self {
            m,
            n,
            epsilon,
            delta,
            beta,
            frobenius,
            stable_rank: None,
        };
        req.validate()?;
        Ok(req)
    }

    pub fn with_stable_rank(mut self, stable_rank: f64) -> Result<Self> {
        self.stable_rank = Some(stable_rank);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::EmptyDimension {
                rows: self.m,
                cols: self.n,
            });
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidRequest("epsilon must be positive and finite"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidRequest("delta must lie in (0, 1)"));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::InvalidRequest("beta must lie in (0, 1]"));
        }
        if !(self.frobenius > 0.0 && self.frobenius.is_finite()) {
            return Err(Error::InvalidRequest("frobenius norm must be positive and finite"));
        }
        if let Some(sr) = self.stable_rank {
            if !(sr > 0.0 && sr.is_finite()) {
                return Err(Error::InvalidRequest("stable rank must be positive and finite"));
            }
        }
        Ok(())
    }

    fn log_term(&self) -> f64 {
        libm::log((self.m + self.n) as f64 / self.delta)
    }

    fn max_dim(&self) -> f64 {
        self.m.max(self.n) as f64
    }
}

/// Which simplified sample-size form applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundCase {
    /// `epsilon <= ||X||_F`.
    CaseI,
    /// `epsilon > ||X||_F`.
    CaseII,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub s_theorem1: u64,
    pub case_used: BoundCase,
    pub s_unsimplified: u64,
    pub s_corollary: Option<u64>,
    pub gamma: f64,
    pub rho2: f64,
    /// Bernstein tail at `s = s_unsimplified`.
    pub tail_at_s: f64,
}

fn ceil_count(x: f64) -> u64 {
    // Saturating float-to-int cast; s >= 1 always.
    (libm::ceil(x) as u64).max(1)
}

/// Real-valued simplified bound and its case. Ties go to case I.
pub fn theorem1_bound(req: &BoundRequest) -> (f64, BoundCase) {
    let base = 6.0 * req.max_dim() * req.log_term() / req.beta;
    if req.epsilon <= req.frobenius {
        let ratio = req.frobenius / req.epsilon;
        (base * ratio * ratio, BoundCase::CaseI)
    } else {
        (base * req.frobenius / req.epsilon, BoundCase::CaseII)
    }
}

pub fn sample_size_theorem1(req: &BoundRequest) -> (u64, BoundCase) {
    let (s, case) = theorem1_bound(req);
    (ceil_count(s), case)
}

/// Real-valued `(4 n F^2 + 2 epsilon sqrt(mn) F) ln((m+n)/delta) / (beta epsilon^2)`.
pub fn unsimplified_bound(req: &BoundRequest) -> f64 {
    let f = req.frobenius;
    let (m, n) = (req.m as f64, req.n as f64);
    let numer = 4.0 * n * f * f + 2.0 * req.epsilon * libm::sqrt(m * n) * f;
    numer * req.log_term() / (req.beta * req.epsilon * req.epsilon)
}

pub fn sample_size_unsimplified(req: &BoundRequest) -> u64 {
    ceil_count(unsimplified_bound(req))
}

/// Real-valued stable-rank form `6 max(m,n) ln((m+n)/delta) sr / (beta epsilon_rel^2)`.
pub fn corollary_bound(req: &BoundRequest, epsilon_rel: f64) -> Result<f64> {
    let sr = req
        .stable_rank
        .ok_or(Error::InvalidRequest("stable rank is required for the stable-rank bound"))?;
    if !(epsilon_rel > 0.0 && epsilon_rel.is_finite()) {
        return Err(Error::InvalidRequest("epsilon_rel must be positive and finite"));
    }
    let required = epsilon_rel * epsilon_rel;
    if sr < required {
        return Err(Error::HypothesisViolated {
            stable_rank: sr,
            required,
        });
    }
    Ok(6.0 * req.max_dim() * req.log_term() * sr / (req.beta * required))
}

/// Samples guaranteeing `||X - S(X)||_2 <= epsilon_rel ||X||_2`; requires
/// `sr(X) >= epsilon_rel^2`.
pub fn sample_size_corollary(req: &BoundRequest, epsilon_rel: f64) -> Result<u64> {
    corollary_bound(req, epsilon_rel).map(ceil_count)
}

/// `(m + n) exp(-(s epsilon^2 / 2) / (rho^2 + gamma epsilon / 3))`. This is a
/// bound and may exceed 1.
pub fn bernstein_tail(m: usize, n: usize, s: u64, epsilon: f64, rho2: f64, gamma: f64) -> f64 {
    let exponent = -(s as f64 * epsilon * epsilon / 2.0) / (rho2 + gamma * epsilon / 3.0);
    (m + n) as f64 * libm::exp(exponent)
}

/// `(gamma, rho^2) = (3 sqrt(mn) F / beta, 2 n F^2 / beta)` from sizes and `F`.
pub fn gamma_rho_from_norm(m: usize, n: usize, frobenius: f64, beta: f64) -> (f64, f64) {
    let gamma = 3.0 * libm::sqrt((m * n) as f64) * frobenius / beta;
    let rho2 = 2.0 * n as f64 * frobenius * frobenius / beta;
    (gamma, rho2)
}

pub fn gamma_rho_bounds(x: &DenseMatrix, beta: f64) -> Result<(f64, f64)> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidRequest("beta must lie in (0, 1]"));
    }
    let f = x.frobenius_norm();
    if f == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok(gamma_rho_from_norm(x.rows(), x.cols(), f, beta))
}

/// All quantities for one request. `s_corollary` is present when the request
/// carries a stable rank satisfying the hypothesis at
/// `epsilon_rel = epsilon / ||X||_2 = epsilon sqrt(sr) / F`.
pub fn bound_report(req: &BoundRequest) -> Result<BoundReport> {
    req.validate()?;
    let (s_theorem1, case_used) = sample_size_theorem1(req);
    let s_unsimplified = sample_size_unsimplified(req);
    let s_corollary = req.stable_rank.and_then(|sr| {
        let epsilon_rel = req.epsilon * libm::sqrt(sr) / req.frobenius;
        sample_size_corollary(req, epsilon_rel).ok()
    });
    let (gamma, rho2) = gamma_rho_from_norm(req.m, req.n, req.frobenius, req.beta);
    let tail_at_s = bernstein_tail(req.m, req.n, s_unsimplified, req.epsilon, rho2, gamma);
    Ok(BoundReport {
        s_theorem1,
        case_used,
        s_unsimplified,
        s_corollary,
        gamma,
        rho2,
        tail_at_s,
    })
}

/// `||X_ij / p_ij e_i e_j^T - X||_2` for the outcome `(i, j)`.
pub fn mt_spectral_norm(
    x: &DenseMatrix,
    d: &SamplingDistribution,
    cell: (usize, usize),
    cfg: &SpectralConfig,
) -> Result<f64> {
    let (i, j) = cell;
    if i >= x.rows() || j >= x.cols() {
        return Err(Error::IndexOutOfRange {
            row: i,
            col: j,
            rows: x.rows(),
            cols: x.cols(),
        });
    }
    if d.rows() != x.rows() || d.cols() != x.cols() {
        return Err(Error::ShapeMismatch {
            expected: x.len(),
            found: d.probs().len(),
        });
    }
    let p = d.prob(i, j);
    if !(p > 0.0) {
        return Err(Error::ZeroProbabilityCell { row: i, col: j });
    }
    let single = SparseCoo::new(x.rows(), x.cols(), vec![Triple::new(i, j, x.get(i, j) / p)])?;
    let residual = SketchResidual::new(&single, x)?;
    Ok(spectral_norm(&residual, cfg)?.value)
}

fn second_moment_diagonal(
    x: &DenseMatrix,
    d: &SamplingDistribution,
    by_row: bool,
) -> Result<alloc::vec::Vec<f64>> {
    if d.rows() != x.rows() || d.cols() != x.cols() {
        return Err(Error::ShapeMismatch {
            expected: x.len(),
            found: d.probs().len(),
        });
    }
    let (m, n) = (x.rows(), x.cols());
    let outer = if by_row { m } else { n };
    let inner = if by_row { n } else { m };
    let mut diag = vec![0.0; outer];
    for (a, slot) in diag.iter_mut().enumerate() {
        let mut terms = vec![0.0; inner];
        for (b, t) in terms.iter_mut().enumerate() {
            let (i, j) = if by_row { (a, b) } else { (b, a) };
            let v = x.get(i, j);
            if v == 0.0 {
                continue;
            }
            let p = d.prob(i, j);
            if !(p > 0.0) {
                return Err(Error::ZeroProbabilityCell { row: i, col: j });
            }
            *t = v * v / p;
        }
        *slot = compensated_sum(terms);
    }
    Ok(diag)
}

fn diag_minus_gram(diag: &[f64], rows_of: &DenseMatrix) -> Result<DenseMatrix> {
    // rows_of is X (for X X^T) or X^T (for X^T X).
    let k = rows_of.rows();
    let mut out = vec![0.0; k * k];
    for a in 0..k {
        for b in a..k {
            let g: f64 = compensated_sum(rows_of.row(a).iter().zip(rows_of.row(b)).map(|(u, v)| u * v));
            out[a * k + b] = -g;
            out[b * k + a] = -g;
        }
        out[a * k + a] += diag[a];
    }
    DenseMatrix::new(k, k, out)
}

/// `E[M_t M_t^T] = sum_ij (X_ij^2 / p_ij) e_i e_i^T - X X^T` (`m x m`).
/// Requires `p_ij > 0` wherever `X_ij != 0`.
pub fn exact_second_moment(x: &DenseMatrix, d: &SamplingDistribution) -> Result<DenseMatrix> {
    let diag = second_moment_diagonal(x, d, true)?;
    diag_minus_gram(&diag, x)
}

/// `E[M_t^T M_t] = sum_ij (X_ij^2 / p_ij) e_j e_j^T - X^T X` (`n x n`).
pub fn exact_second_moment_transpose(x: &DenseMatrix, d: &SamplingDistribution) -> Result<DenseMatrix> {
    let diag = second_moment_diagonal(x, d, false)?;
    diag_minus_gram(&diag, &x.transpose())
}
