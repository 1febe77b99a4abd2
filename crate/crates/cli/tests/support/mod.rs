#![allow(dead_code)]

use elemsparse_core::DenseMatrix;
use serde::Deserialize;

/// splitmix64, mirrored by `crates/core/tests/fixtures/gen_spectral_oracle.py`.
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

pub fn uniform_matrix(seed: u64, max_dim: u64) -> DenseMatrix {
    let mut rng = SplitMix64::new(seed);
    let m = 1 + (rng.next_u64() % max_dim) as usize;
    let n = 1 + (rng.next_u64() % max_dim) as usize;
    let data = (0..m * n).map(|_| 2.0 * rng.uniform() - 1.0).collect();
    DenseMatrix::new(m, n, data).unwrap()
}

/// Like `uniform_matrix` but roughly a fifth of the entries are exact zeros
/// and one entry is forced nonzero.
pub fn sparse_uniform_matrix(seed: u64, max_dim: u64) -> DenseMatrix {
    let mut rng = SplitMix64::new(seed);
    let m = 1 + (rng.next_u64() % max_dim) as usize;
    let n = 1 + (rng.next_u64() % max_dim) as usize;
    let mut data: Vec<f64> = (0..m * n)
        .map(|_| {
            let keep = rng.uniform() >= 0.2;
            let v = 2.0 * rng.uniform() - 1.0;
            if keep { v } else { 0.0 }
        })
        .collect();
    data[0] = 0.75;
    DenseMatrix::new(m, n, data).unwrap()
}

#[derive(Deserialize)]
pub struct UniformCase {
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub sigma_max: f64,
}

#[derive(Deserialize)]
pub struct SpectralOracle {
    pub uniform_cases: Vec<UniformCase>,
}

pub fn spectral_oracle() -> SpectralOracle {
    let text = include_str!("../../../core/tests/fixtures/spectral_oracle.json");
    serde_json::from_str(text).unwrap()
}

pub fn svd_sigma_max(x: &DenseMatrix) -> f64 {
    nalgebra::DMatrix::from_row_slice(x.rows(), x.cols(), x.as_slice())
        .singular_values()
        .max()
}

pub fn min_eigenvalue(x: &DenseMatrix) -> f64 {
    nalgebra::DMatrix::from_row_slice(x.rows(), x.cols(), x.as_slice())
        .symmetric_eigenvalues()
        .min()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
