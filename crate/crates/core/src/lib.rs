//! Randomized element-wise matrix sparsification.
//!
//! A dense matrix `X` is replaced by a sparse unbiased estimate built from `s`
//! cells drawn i.i.d. (with replacement) from an importance distribution that
//! mixes the squared-entry and absolute-entry distributions. Alongside the
//! sampler the crate carries the sample-size calculators and matrix Bernstein
//! quantities that govern the spectral-norm error of the estimate, and a
//! power-iteration spectral norm used to measure that error.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod bounds;
pub mod distributions;
mod error;
pub mod matrix;
pub mod rng;
pub mod sampler;
pub mod spectral;

pub use bounds::{BoundCase, BoundReport, BoundRequest};
pub use distributions::{DistributionKind, SamplingDistribution};
pub use error::{Error, Result};
pub use matrix::{DenseMatrix, SparseCoo};
pub use sampler::{AliasTable, SampleSet, SparseSketch};
pub use spectral::{LinearOperator, SpectralConfig, SpectralEstimate};
