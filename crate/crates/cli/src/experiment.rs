//! Monte-Carlo validation of the sparsification guarantee.
//!
//! A run fixes one matrix, one distribution and one sample size `s`, then
//! sketches the matrix `trials` times with seeds `base_seed + t` and measures
//! `||S(X) - X||_2` each time. The empirical failure rate
//! `#{error > epsilon} / trials` is compared against `delta`.
//!
//! Trials run on a rayon pool capped at `jobs` threads; each trial owns its
//! RNG and buffers, and results are collected in trial order, so the output
//! does not depend on scheduling.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use elemsparse_core::bounds::{self, BoundCase, BoundReport, BoundRequest};
use elemsparse_core::rng::trial_seed;
use elemsparse_core::sampler::{draw_samples, sampling_operator};
use elemsparse_core::spectral::{sketch_error, spectral_norm};
use elemsparse_core::{AliasTable, DenseMatrix, DistributionKind, SamplingDistribution, SpectralConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::generate::{generate_matrix, GeneratorSpec};
use crate::io::{create_file, load_matrix, MatrixFormat};

pub const SCHEMA_VERSION: u32 = 1;

/// Process exit codes of the `experiment` command.
pub mod exit_code {
    pub const PASS: u8 = 0;
    pub const ERROR: u8 = 1;
    pub const GUARANTEE_VIOLATED: u8 = 2;
}

#[derive(Debug, Clone)]
pub enum MatrixSource {
    File {
        path: PathBuf,
        format: Option<MatrixFormat>,
    },
    Generated(GeneratorSpec),
    Inline(DenseMatrix),
}

impl MatrixSource {
    pub fn load(&self) -> Result<DenseMatrix> {
        match self {
            Self::File { path, format } => load_matrix(path, *format),
            Self::Generated(spec) => generate_matrix(spec),
            Self::Inline(x) => Ok(x.clone()),
        }
    }

    fn describe(&self) -> String {
        match self {
            Self::File { path, .. } => format!("file:{}", path.display()),
            Self::Generated(spec) => format!("generate:{spec}"),
            Self::Inline(x) => format!("inline:{}x{}", x.rows(), x.cols()),
        }
    }
}

/// Error target, either absolute or relative to a norm of `X`.
///
/// A relative target `r` means `r * ||X||_2` for the stable-rank bound form
/// and `r * ||X||_F` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonSpec {
    Absolute(f64),
    Relative(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundForm {
    Theorem1,
    #[default]
    Unsimplified,
    Corollary,
}

impl BoundForm {
    pub fn name(self) -> &'static str {
        match self {
            Self::Theorem1 => "theorem1",
            Self::Unsimplified => "unsimplified",
            Self::Corollary => "corollary",
        }
    }
}

impl fmt::Display for BoundForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundForm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem1" => Ok(Self::Theorem1),
            "unsimplified" => Ok(Self::Unsimplified),
            "corollary" => Ok(Self::Corollary),
            other => Err(HarnessError::Config(format!("unknown bound form '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(HarnessError::Config(format!("unknown output format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OutputSpec {
    pub path: PathBuf,
    pub format: OutputFormat,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub source: MatrixSource,
    pub dist_kind: DistributionKind,
    pub epsilon: EpsilonSpec,
    pub delta: f64,
    pub s_override: Option<usize>,
    pub bound_form: BoundForm,
    pub trials: usize,
    pub base_seed: u64,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    pub spectral: SpectralConfig,
    pub output: Option<OutputSpec>,
}

impl ExperimentConfig {
    pub fn new(source: MatrixSource, epsilon: EpsilonSpec, delta: f64) -> Self {
        Self {
            source,
            dist_kind: DistributionKind::Hybrid,
            epsilon,
            delta,
            s_override: None,
            bound_form: BoundForm::default(),
            trials: 100,
            base_seed: 0,
            jobs: 0,
            spectral: SpectralConfig::default(),
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        match self.epsilon {
            EpsilonSpec::Absolute(e) | EpsilonSpec::Relative(e) if e > 0.0 && e.is_finite() => {}
            _ => return Err(HarnessError::Config("epsilon must be positive".into())),
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(HarnessError::Config("delta must lie in (0, 1)".into()));
        }
        if self.s_override == Some(0) {
            return Err(HarnessError::Config("s must be at least 1".into()));
        }
        if self.dist_kind == DistributionKind::Custom {
            return Err(HarnessError::Config("experiments need a builtin distribution".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixSummary {
    pub source: String,
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    pub frobenius_norm: f64,
    pub spectral_norm: f64,
    pub stable_rank: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReportRecord {
    pub s_theorem1: u64,
    pub case_used: &'static str,
    pub s_unsimplified: u64,
    pub s_corollary: Option<u64>,
    pub gamma: f64,
    pub rho2: f64,
    pub tail_at_s: f64,
}

impl From<&BoundReport> for BoundReportRecord {
    fn from(r: &BoundReport) -> Self {
        Self {
            s_theorem1: r.s_theorem1,
            case_used: match r.case_used {
                BoundCase::CaseI => "case_i",
                BoundCase::CaseII => "case_ii",
            },
            s_unsimplified: r.s_unsimplified,
            s_corollary: r.s_corollary,
            gamma: r.gamma,
            rho2: r.rho2,
            tail_at_s: r.tail_at_s,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub error: f64,
    pub nnz: usize,
    pub failed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub schema_version: u32,
    pub matrix: MatrixSummary,
    pub distribution: &'static str,
    pub beta_certificate: f64,
    pub bound_form: BoundForm,
    pub epsilon: f64,
    pub delta: f64,
    pub s_used: u64,
    pub s_overridden: bool,
    pub bound_report: BoundReportRecord,
    pub trials: Vec<TrialRecord>,
    pub empirical_failure_rate: f64,
    pub median_error: f64,
    pub p90_error: f64,
    /// Mean over trials of stored sketch entries / mn.
    pub nnz_ratio: f64,
    pub passed: bool,
    /// Per-trial seconds, in trial order. Never part of pass/fail and kept
    /// last so it can be stripped when comparing runs.
    pub wall_times_secs: Vec<f64>,
}

impl ExperimentResult {
    pub fn errors(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.error).collect()
    }

    pub fn exit_code(&self) -> u8 {
        if self.passed {
            exit_code::PASS
        } else {
            exit_code::GUARANTEE_VIOLATED
        }
    }
}

/// Everything about the matrix and the sample size that does not depend on
/// the trials.
struct Prepared {
    x: DenseMatrix,
    summary: MatrixSummary,
    epsilon: f64,
    report: BoundReport,
    s: u64,
}

fn prepare(cfg: &ExperimentConfig, beta: impl FnOnce(&DenseMatrix) -> Result<f64>) -> Result<Prepared> {
    cfg.validate()?;
    let x = cfg.source.load()?;
    if x.is_zero() {
        return Err(elemsparse_core::Error::ZeroMatrix.into());
    }
    let fro = x.frobenius_norm();
    let two = spectral_norm(&x, &cfg.spectral)?.value;
    let stable_rank = fro * fro / (two * two);
    let epsilon = match (cfg.epsilon, cfg.bound_form) {
        (EpsilonSpec::Absolute(e), _) => e,
        (EpsilonSpec::Relative(r), BoundForm::Corollary) => r * two,
        (EpsilonSpec::Relative(r), _) => r * fro,
    };
    let beta = beta(&x)?;
    if !(beta > 0.0) {
        return Err(HarnessError::Config(
            "distribution has a zero beta-certificate; no sample-size guarantee applies".into(),
        ));
    }
    let req = BoundRequest::new(x.rows(), x.cols(), epsilon, cfg.delta, beta, fro)?
        .with_stable_rank(stable_rank)?;
    let report = bounds::bound_report(&req)?;
    let s = match (cfg.s_override, cfg.bound_form) {
        (Some(s), _) => s as u64,
        (None, BoundForm::Theorem1) => report.s_theorem1,
        (None, BoundForm::Unsimplified) => report.s_unsimplified,
        (None, BoundForm::Corollary) => bounds::sample_size_corollary(&req, epsilon / two)?,
    };
    let summary = MatrixSummary {
        source: cfg.source.describe(),
        rows: x.rows(),
        cols: x.cols(),
        nnz: x.nnz(),
        frobenius_norm: fro,
        spectral_norm: two,
        stable_rank,
    };
    Ok(Prepared {
        x,
        summary,
        epsilon,
        report,
        s,
    })
}

struct TrialOutcome {
    error: f64,
    nnz: usize,
    secs: f64,
}

fn run_trials(
    x: &DenseMatrix,
    d: &SamplingDistribution,
    s: u64,
    cfg: &ExperimentConfig,
) -> Result<Vec<TrialOutcome>> {
    let s = usize::try_from(s)
        .map_err(|_| HarnessError::Config(format!("sample size {s} does not fit in memory")))?;
    let table = AliasTable::new(d);
    let trial = |t: usize| -> Result<TrialOutcome> {
        let start = Instant::now();
        let omega = draw_samples(&table, s, trial_seed(cfg.base_seed, t as u64))?;
        let sketch = sampling_operator(x, d, &omega)?;
        let error = sketch_error(x, &sketch, &cfg.spectral)?;
        Ok(TrialOutcome {
            error,
            nnz: sketch.nnz(),
            secs: start.elapsed().as_secs_f64(),
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..cfg.trials).into_par_iter().map(trial).collect())
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Nearest-rank percentile, `q` in `(0, 1]`.
pub(crate) fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let rank = (q * v.len() as f64).ceil() as usize;
    v[rank.clamp(1, v.len()) - 1]
}

fn builtin_certificate(kind: DistributionKind) -> impl FnOnce(&DenseMatrix) -> Result<f64> {
    move |x| Ok(kind.build(x)?.beta_certificate())
}

/// The sample size `run_experiment` would use for `cfg`, without running
/// any trials.
pub fn sample_size(cfg: &ExperimentConfig) -> Result<u64> {
    Ok(prepare(cfg, builtin_certificate(cfg.dist_kind))?.s)
}

/// Runs the configured experiment and writes the output file, if any.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let mut dist = None;
    let prep = prepare(cfg, |x| {
        let d = cfg.dist_kind.build(x)?;
        let beta = d.beta_certificate();
        dist = Some(d);
        Ok(beta)
    })?;
    let d = dist.expect("distribution built during preparation");
    let outcomes = run_trials(&prep.x, &d, prep.s, cfg)?;

    let mn = prep.x.len() as f64;
    let trials: Vec<TrialRecord> = outcomes
        .iter()
        .enumerate()
        .map(|(t, o)| TrialRecord {
            trial: t,
            seed: trial_seed(cfg.base_seed, t as u64),
            error: o.error,
            nnz: o.nnz,
            failed: o.error > prep.epsilon,
        })
        .collect();
    let errors: Vec<f64> = trials.iter().map(|t| t.error).collect();
    let failures = trials.iter().filter(|t| t.failed).count();
    let rate = failures as f64 / cfg.trials as f64;
    let result = ExperimentResult {
        schema_version: SCHEMA_VERSION,
        matrix: prep.summary,
        distribution: cfg.dist_kind.name(),
        beta_certificate: d.beta_certificate(),
        bound_form: cfg.bound_form,
        epsilon: prep.epsilon,
        delta: cfg.delta,
        s_used: prep.s,
        s_overridden: cfg.s_override.is_some(),
        bound_report: (&prep.report).into(),
        empirical_failure_rate: rate,
        median_error: median(&errors),
        p90_error: percentile(&errors, 0.9),
        nnz_ratio: outcomes.iter().map(|o| o.nnz as f64 / mn).sum::<f64>() / cfg.trials as f64,
        passed: rate <= cfg.delta,
        wall_times_secs: outcomes.iter().map(|o| o.secs).collect(),
        trials,
    };
    if let Some(out) = &cfg.output {
        write_experiment(&result, &out.path, out.format)?;
    }
    Ok(result)
}

pub fn write_experiment(result: &ExperimentResult, path: &Path, format: OutputFormat) -> Result<()> {
    let mut w = create_file(path)?;
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, result)?;
            writeln!(w)?;
        }
        OutputFormat::Csv => {
            let mut wtr = csv::Writer::from_writer(&mut w);
            wtr.write_record(["trial", "seed", "s", "error", "failed", "nnz", "wall_time_secs"])?;
            for (t, secs) in result.trials.iter().zip(&result.wall_times_secs) {
                wtr.write_record([
                    t.trial.to_string(),
                    t.seed.to_string(),
                    result.s_used.to_string(),
                    t.error.to_string(),
                    t.failed.to_string(),
                    t.nnz.to_string(),
                    secs.to_string(),
                ])?;
            }
            wtr.flush()?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct KindSummary {
    pub kind: &'static str,
    pub beta_certificate: f64,
    pub median_error: f64,
    pub p90_error: f64,
    pub failure_rate: f64,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub kind: &'static str,
    pub trial: usize,
    pub seed: u64,
    pub error: f64,
    pub nnz: usize,
}

/// Hybrid, L1 and L2 sampling at one shared `s` and shared seeds. `s` is the
/// configured bound evaluated at `beta = 1` (or the override); it certifies
/// only the hybrid distribution.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub schema_version: u32,
    pub matrix: MatrixSummary,
    pub bound_form: BoundForm,
    pub epsilon: f64,
    pub delta: f64,
    pub s_used: u64,
    pub kinds: Vec<KindSummary>,
    pub rows: Vec<ComparisonRow>,
}

/// Runs every builtin distribution with the configuration's `s`, trials and
/// seeds. `cfg.dist_kind` is ignored. There is no pass/fail outcome.
pub fn compare_distributions(cfg: &ExperimentConfig) -> Result<Comparison> {
    let cfg = ExperimentConfig {
        dist_kind: DistributionKind::Hybrid,
        ..cfg.clone()
    };
    let prep = prepare(&cfg, |_| Ok(1.0))?;
    let mut kinds = Vec::new();
    let mut rows = Vec::new();
    for kind in DistributionKind::BUILTIN {
        let d = kind.build(&prep.x)?;
        let outcomes = run_trials(&prep.x, &d, prep.s, &cfg)?;
        let errors: Vec<f64> = outcomes.iter().map(|o| o.error).collect();
        for (t, o) in outcomes.iter().enumerate() {
            rows.push(ComparisonRow {
                kind: kind.name(),
                trial: t,
                seed: trial_seed(cfg.base_seed, t as u64),
                error: o.error,
                nnz: o.nnz,
            });
        }
        kinds.push(KindSummary {
            kind: kind.name(),
            beta_certificate: d.beta_certificate(),
            median_error: median(&errors),
            p90_error: percentile(&errors, 0.9),
            failure_rate: errors.iter().filter(|e| **e > prep.epsilon).count() as f64 / cfg.trials as f64,
            errors,
        });
    }
    let cmp = Comparison {
        schema_version: SCHEMA_VERSION,
        matrix: prep.summary,
        bound_form: cfg.bound_form,
        epsilon: prep.epsilon,
        delta: cfg.delta,
        s_used: prep.s,
        kinds,
        rows,
    };
    if let Some(out) = &cfg.output {
        write_comparison(&cmp, &out.path, out.format)?;
    }
    Ok(cmp)
}

pub fn write_comparison(cmp: &Comparison, path: &Path, format: OutputFormat) -> Result<()> {
    let mut w = create_file(path)?;
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, cmp)?;
            writeln!(w)?;
        }
        OutputFormat::Csv => {
            let mut wtr = csv::Writer::from_writer(&mut w);
            wtr.write_record(["kind", "trial", "seed", "s", "error", "nnz", "beta_certificate"])?;
            for row in &cmp.rows {
                let beta = cmp
                    .kinds
                    .iter()
                    .find(|k| k.kind == row.kind)
                    .map_or(f64::NAN, |k| k.beta_certificate);
                wtr.write_record([
                    row.kind.to_string(),
                    row.trial.to_string(),
                    row.seed.to_string(),
                    cmp.s_used.to_string(),
                    row.error.to_string(),
                    row.nnz.to_string(),
                    beta.to_string(),
                ])?;
            }
            wtr.flush()?;
        }
    }
    w.flush()?;
    Ok(())
}
