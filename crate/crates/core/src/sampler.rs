//! i.i.d. with-replacement cell sampling and the sparse sketch it induces.
//!
//! Given `s` sampled cells `(i_t, j_t)` the sketch is
//!
//! ```text
//! S(X) = 1/s * sum_t X[i_t, j_t] / p[i_t, j_t] * e_{i_t} e_{j_t}^T
//! ```
//!
//! Repeated cells accumulate into one coordinate entry, so a cell drawn `c`
//! times holds `(c / s) * X_ij / p_ij`.
//!
//! Draws use Vose's alias method. Each draw consumes exactly two uniform
//! variates from the seeded stream, in this order: the first picks the slot
//! `floor(u * mn)`, the second is the coin deciding between the slot and its
//! alias.

use alloc::vec;
use alloc::vec::Vec;

use crate::distributions::{DistributionKind, SamplingDistribution};
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SparseCoo, Triple};
use crate::rng;

/// Alias table over the `rows * cols` cells of a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    rows: usize,
    cols: usize,
    prob: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    /// Vose's construction, `O(mn)`. Cells with zero probability are given a
    /// zero keep-threshold and are therefore never returned.
    pub fn new(d: &SamplingDistribution) -> Self {
        let probs = d.probs();
        let size = probs.len();
        let scale = size as f64;
        let mut scaled: Vec<f64> = probs.iter().map(|p| p * scale).collect();
        let mut prob = vec![0.0; size];
        let mut alias: Vec<usize> = (0..size).collect();

        let mut small = Vec::new();
        let mut large = Vec::new();
        // Zero cells sit on top of the small stack so they are paired first,
        // before rounding drift can exhaust the large stack.
        for (k, w) in scaled.iter().enumerate() {
            if *w >= 1.0 {
                large.push(k);
            } else if *w > 0.0 {
                small.push(k);
            }
        }
        small.extend((0..size).filter(|k| scaled[*k] == 0.0));

        loop {
            let (Some(&l), Some(&g)) = (small.last(), large.last()) else {
                break;
            };
            small.pop();
            prob[l] = scaled[l];
            alias[l] = g;
            scaled[g] = (scaled[g] + scaled[l]) - 1.0;
            if scaled[g] < 1.0 {
                large.pop();
                small.push(g);
            }
        }
        // Leftovers are 1 up to rounding.
        for k in large.into_iter().chain(small) {
            prob[k] = if probs[k] > 0.0 { 1.0 } else { 0.0 };
        }
        Self {
            rows: d.rows(),
            cols: d.cols(),
            prob,
            alias,
        }
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Keep-thresholds per slot.
    pub fn thresholds(&self) -> &[f64] {
        &self.prob
    }

    pub fn aliases(&self) -> &[usize] {
        &self.alias
    }

    /// Cell probabilities implied by the table:
    /// `(prob[k] + sum_{alias[j] = k} (1 - prob[j])) / mn`.
    pub fn implied_probabilities(&self) -> Vec<f64> {
        let size = self.prob.len();
        let mut out = self.prob.clone();
        for (j, a) in self.alias.iter().enumerate() {
            out[*a] += 1.0 - self.prob[j];
        }
        out.iter_mut().for_each(|p| *p /= size as f64);
        out
    }

    /// One draw, returned as a row-major flat cell index.
    #[inline]
    pub fn draw_index<R: rand_chacha::rand_core::RngCore + ?Sized>(&self, gen: &mut R) -> usize {
        let size = self.prob.len();
        let slot = ((rng::uniform(gen) * size as f64) as usize).min(size - 1);
        let coin = rng::uniform(gen);
        if coin < self.prob[slot] {
            slot
        } else {
            self.alias[slot]
        }
    }
}

/// The sampled multiset of cells together with the seed that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    pub pairs: Vec<(usize, usize)>,
    pub seed: u64,
}

impl SampleSet {
    pub fn s(&self) -> usize {
        self.pairs.len()
    }
}

/// `S(X)` in coordinate form, canonical (sorted, duplicates folded).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSketch {
    pub matrix: SparseCoo,
    pub s: usize,
    pub source_seed: u64,
    pub distribution_kind: DistributionKind,
}

impl SparseSketch {
    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    /// Stored entries over `mn`.
    pub fn nnz_ratio(&self) -> f64 {
        self.matrix.nnz() as f64 / (self.matrix.rows() * self.matrix.cols()) as f64
    }
}

/// `s` independent draws from `table`; a pure function of `(table, s, seed)`.
pub fn draw_samples(table: &AliasTable, s: usize, seed: u64) -> Result<SampleSet> {
    if s == 0 {
        return Err(Error::InvalidRequest("sample count must be at least 1"));
    }
    let mut gen = rng::seeded(seed);
    let cols = table.cols;
    let pairs = (0..s)
        .map(|_| {
            let k = table.draw_index(&mut gen);
            (k / cols, k % cols)
        })
        .collect();
    Ok(SampleSet { pairs, seed })
}

/// Builds `S(X)` from the sampled cells. Cells whose rescaled value is
/// exactly zero (possible only for custom distributions with mass on zero
/// entries) are not stored.
pub fn sampling_operator(
    x: &DenseMatrix,
    d: &SamplingDistribution,
    omega: &SampleSet,
) -> Result<SparseSketch> {
    d.check_shape(x)?;
    let s = omega.s();
    if s == 0 {
        return Err(Error::InvalidRequest("sample set is empty"));
    }
    let cols = x.cols();
    let mut flat = Vec::with_capacity(s);
    for &(i, j) in &omega.pairs {
        if i >= x.rows() || j >= cols {
            return Err(Error::IndexOutOfRange {
                row: i,
                col: j,
                rows: x.rows(),
                cols,
            });
        }
        if !(d.prob(i, j) > 0.0) {
            return Err(Error::ZeroProbabilitySample { row: i, col: j });
        }
        flat.push(i * cols + j);
    }
    flat.sort_unstable();

    let mut triples = Vec::new();
    let mut rest = flat.as_slice();
    while let Some(&k) = rest.first() {
        let run = rest.iter().take_while(|c| **c == k).count();
        rest = &rest[run..];
        let (i, j) = (k / cols, k % cols);
        let value = x.get(i, j) / d.prob(i, j) * (run as f64 / s as f64);
        if value != 0.0 {
            triples.push(Triple::new(i, j, value));
        }
    }
    Ok(SparseSketch {
        matrix: SparseCoo::new(x.rows(), cols, triples)?,
        s,
        source_seed: omega.seed,
        distribution_kind: d.kind(),
    })
}

/// End-to-end sparsification of `x` with `s` samples from the builtin
/// distribution `kind`.
pub fn sparsify(x: &DenseMatrix, s: usize, seed: u64, kind: DistributionKind) -> Result<SparseSketch> {
    let d = kind.build(x)?;
    let table = AliasTable::new(&d);
    let omega = draw_samples(&table, s, seed)?;
    sampling_operator(x, &d, &omega)
}

/// `E[S(X)] = sum_ij p_ij * (X_ij / p_ij) e_i e_j^T`: `X` restricted to the
/// support of `d`.
pub fn exact_expectation(x: &DenseMatrix, d: &SamplingDistribution) -> Result<DenseMatrix> {
    d.check_shape(x)?;
    let data = x
        .as_slice()
        .iter()
        .zip(d.probs())
        .map(|(v, p)| if *p > 0.0 { p * (v / p) } else { 0.0 })
        .collect();
    DenseMatrix::new(x.rows(), x.cols(), data)
}
