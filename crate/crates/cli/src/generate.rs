//! Seeded test-matrix ensembles.
//!
//! All generators draw from ChaCha8 seeded with `seed_from_u64(seed)` and fill
//! entries row-major, so a `(kind, m, n, seed)` spec always yields the same
//! matrix.
//!
//! - `gaussian`: i.i.d. standard normals.
//! - `power-law`: `sign * U^(-1/alpha)` with `U` uniform on `(0, 1]`, a fair
//!   random sign and `alpha = POWER_LAW_ALPHA`.
//! - `low-rank-plus-noise`: `U V^T + sigma G` with `U` (`m x k`), `V`
//!   (`n x k`) and `G` standard normal, `k = min(LOW_RANK, m, n)` and
//!   `sigma = LOW_RANK_NOISE`.
//! - `binary`: i.i.d. fair `+-1`.

use std::fmt;
use std::str::FromStr;

use elemsparse_core::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{HarnessError, Result};

pub const POWER_LAW_ALPHA: f64 = 2.0;
pub const LOW_RANK: usize = 5;
pub const LOW_RANK_NOISE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Gaussian,
    PowerLaw,
    LowRankPlusNoise,
    Binary,
}

impl GeneratorKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::PowerLaw => "power-law",
            Self::LowRankPlusNoise => "low-rank-plus-noise",
            Self::Binary => "binary",
        }
    }
}

impl FromStr for GeneratorKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Self::Gaussian),
            "power-law" | "powerlaw" => Ok(Self::PowerLaw),
            "low-rank-plus-noise" | "low-rank" => Ok(Self::LowRankPlusNoise),
            "binary" => Ok(Self::Binary),
            other => Err(HarnessError::InvalidSpec(format!("unknown generator '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, m: usize, n: usize, seed: u64) -> Self {
        Self { kind, m, n, seed }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.kind.name(), self.m, self.n, self.seed)
    }
}

/// Parses `kind,m,n,seed`.
impl FromStr for GeneratorSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [kind, m, n, seed] = parts.as_slice() else {
            return Err(HarnessError::InvalidSpec(format!(
                "expected 'kind,m,n,seed', got '{s}'"
            )));
        };
        let dim = |v: &str, what: &str| -> Result<usize> {
            v.parse()
                .map_err(|_| HarnessError::InvalidSpec(format!("invalid {what} '{v}'")))
        };
        Ok(Self {
            kind: kind.parse()?,
            m: dim(m, "row count")?,
            n: dim(n, "column count")?,
            seed: seed
                .parse()
                .map_err(|_| HarnessError::InvalidSpec(format!("invalid seed '{seed}'")))?,
        })
    }
}

pub fn generate_matrix(spec: &GeneratorSpec) -> Result<DenseMatrix> {
    let (m, n) = (spec.m, spec.n);
    if m == 0 || n == 0 {
        return Err(HarnessError::InvalidSpec(format!(
            "dimensions must be positive, got {m}x{n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let data: Vec<f64> = match spec.kind {
        GeneratorKind::Gaussian => (0..m * n).map(|_| rng.sample(StandardNormal)).collect(),
        GeneratorKind::Binary => (0..m * n)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect(),
        GeneratorKind::PowerLaw => (0..m * n)
            .map(|_| {
                let u = 1.0 - rng.random::<f64>();
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * u.powf(-1.0 / POWER_LAW_ALPHA)
            })
            .collect(),
        GeneratorKind::LowRankPlusNoise => {
            let k = LOW_RANK.min(m).min(n);
            let u: Vec<f64> = (0..m * k).map(|_| rng.sample(StandardNormal)).collect();
            let v: Vec<f64> = (0..n * k).map(|_| rng.sample(StandardNormal)).collect();
            let mut out = Vec::with_capacity(m * n);
            for i in 0..m {
                for j in 0..n {
                    let low: f64 = (0..k).map(|r| u[i * k + r] * v[j * k + r]).sum();
                    let noise: f64 = rng.sample(StandardNormal);
                    out.push(low + LOW_RANK_NOISE * noise);
                }
            }
            out
        }
    };
    Ok(DenseMatrix::new(m, n, data)?)
}
