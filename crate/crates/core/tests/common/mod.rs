#![allow(dead_code)]

use elemsparse_core::DenseMatrix;
use serde::Deserialize;

/// splitmix64, mirrored by `fixtures/gen_spectral_oracle.py`.
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

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

pub fn uniform_matrix(seed: u64, max_dim: u64) -> DenseMatrix {
    let mut rng = SplitMix64::new(seed);
    let m = 1 + (rng.next_u64() % max_dim) as usize;
    let n = 1 + (rng.next_u64() % max_dim) as usize;
    let data = (0..m * n).map(|_| 2.0 * rng.uniform() - 1.0).collect();
    DenseMatrix::new(m, n, data).unwrap()
}

pub fn gaussian_matrix(seed: u64, m: usize, n: usize) -> DenseMatrix {
    let mut rng = SplitMix64::new(seed);
    DenseMatrix::new(m, n, (0..m * n).map(|_| rng.normal()).collect()).unwrap()
}

#[derive(Deserialize)]
pub struct UniformCase {
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub sigma_max: f64,
}

#[derive(Deserialize)]
pub struct GaussianCase {
    pub seed: u64,
    pub sigma_max: f64,
    pub stable_rank: f64,
}

#[derive(Deserialize)]
pub struct SpectralOracle {
    pub uniform_cases: Vec<UniformCase>,
    pub gaussian_20x20: GaussianCase,
}

pub fn spectral_oracle() -> SpectralOracle {
    let text = include_str!("../fixtures/spectral_oracle.json");
    serde_json::from_str(text).unwrap()
}

/// Full-SVD largest singular value via nalgebra.
pub fn svd_sigma_max(x: &DenseMatrix) -> f64 {
    let a = nalgebra::DMatrix::from_row_slice(x.rows(), x.cols(), x.as_slice());
    a.singular_values().max()
}

/// Smallest eigenvalue of a symmetric matrix via nalgebra.
pub fn min_eigenvalue(x: &DenseMatrix) -> f64 {
    let a = nalgebra::DMatrix::from_row_slice(x.rows(), x.cols(), x.as_slice());
    a.symmetric_eigenvalues().min()
}
