use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use elemsparse::experiment::{
    self, exit_code, BoundForm, BoundReportRecord, EpsilonSpec, ExperimentConfig, MatrixSource,
    OutputFormat, OutputSpec,
};
use elemsparse::generate::GeneratorSpec;
use elemsparse::io::{create_file, write_matrix_market};
use elemsparse::{HarnessError, Result};
use elemsparse_core::bounds::{self, BoundRequest};
use elemsparse_core::sampler::sparsify;
use elemsparse_core::spectral::spectral_norm;
use elemsparse_core::{DistributionKind, SpectralConfig};
use serde::Serialize;

/// Randomized element-wise matrix sparsification.
#[derive(Debug, Parser)]
#[command(name = "elemsparse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sketch one matrix and write the sketch as Matrix Market.
    Sparsify(SparsifyArgs),
    /// Print sample sizes and concentration quantities as JSON.
    Bounds(BoundsArgs),
    /// Monte-Carlo check of the error guarantee (exit 0 pass, 2 violated).
    Experiment(ExperimentArgs),
    /// Hybrid vs L1 vs L2 at a shared sample size and shared seeds.
    Compare(ExperimentArgs),
}

#[derive(Debug, Args)]
struct MatrixArgs {
    /// Matrix file (Matrix Market or CSV).
    #[arg(long, conflicts_with = "generate")]
    input: Option<PathBuf>,
    /// Input format: mm or csv. Inferred from the extension when omitted.
    #[arg(long)]
    format: Option<String>,
    /// Generated matrix: kind,m,n,seed with kind one of gaussian,
    /// power-law, low-rank-plus-noise, binary.
    #[arg(long)]
    generate: Option<String>,
}

impl MatrixArgs {
    fn is_set(&self) -> bool {
        self.input.is_some() || self.generate.is_some()
    }

    fn source(&self) -> Result<MatrixSource> {
        match (&self.input, &self.generate) {
            (Some(path), None) => Ok(MatrixSource::File {
                path: path.clone(),
                format: self.format.as_deref().map(str::parse).transpose()?,
            }),
            (None, Some(spec)) => Ok(MatrixSource::Generated(spec.parse::<GeneratorSpec>()?)),
            _ => Err(HarnessError::Config("pass exactly one of --input or --generate".into())),
        }
    }
}

#[derive(Debug, Args)]
struct TargetArgs {
    /// Absolute spectral-error target.
    #[arg(long, conflicts_with = "epsilon_rel")]
    epsilon: Option<f64>,
    /// Error target relative to ||X||_2 (corollary form) or ||X||_F.
    #[arg(long)]
    epsilon_rel: Option<f64>,
    /// Failure probability.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Sample-size formula: theorem1, unsimplified or corollary.
    #[arg(long, default_value = "unsimplified")]
    bound_form: String,
}

impl TargetArgs {
    fn epsilon(&self) -> Result<EpsilonSpec> {
        match (self.epsilon, self.epsilon_rel) {
            (Some(e), None) => Ok(EpsilonSpec::Absolute(e)),
            (None, Some(r)) => Ok(EpsilonSpec::Relative(r)),
            _ => Err(HarnessError::Config("pass one of --epsilon or --epsilon-rel".into())),
        }
    }
}

#[derive(Debug, Args)]
struct SparsifyArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    /// Sampling distribution: hybrid, l1 or l2.
    #[arg(long, default_value = "hybrid")]
    dist: String,
    /// Sample count; computed from the error target when omitted.
    #[arg(long)]
    s: Option<usize>,
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// ||X||_F, required without a matrix.
    #[arg(long)]
    frobenius: Option<f64>,
    #[arg(long)]
    stable_rank: Option<f64>,
    /// Distribution certificate; with a matrix it defaults to the certificate
    /// of --dist, otherwise to 1.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value = "hybrid")]
    dist: String,
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    #[arg(long, default_value = "hybrid")]
    dist: String,
    #[command(flatten)]
    target: TargetArgs,
    /// Fixed sample count instead of the bound.
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Base seed; trial t uses seed + t.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or csv.
    #[arg(long, default_value = "json")]
    out_format: String,
}

impl ExperimentArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::new(self.matrix.source()?, self.target.epsilon()?, self.target.delta);
        cfg.dist_kind = parse_dist(&self.dist)?;
        cfg.bound_form = self.target.bound_form.parse()?;
        cfg.s_override = self.s;
        cfg.trials = self.trials;
        cfg.base_seed = self.seed;
        cfg.jobs = self.jobs;
        let format: OutputFormat = self.out_format.parse()?;
        cfg.output = self.out.clone().map(|path| OutputSpec { path, format });
        Ok(cfg)
    }
}

fn parse_dist(s: &str) -> Result<DistributionKind> {
    match s.parse::<DistributionKind>() {
        Ok(DistributionKind::Custom) | Err(_) => Err(HarnessError::Config(format!(
            "unknown distribution '{s}' (expected hybrid, l1 or l2)"
        ))),
        Ok(k) => Ok(k),
    }
}

fn open_output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create_file(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn cmd_sparsify(args: &SparsifyArgs) -> Result<u8> {
    let kind = parse_dist(&args.dist)?;
    let source = args.matrix.source()?;
    let x = source.load()?;
    let s = match args.s {
        Some(s) => s,
        None => {
            let inline = MatrixSource::Inline(x.clone());
            let mut cfg = ExperimentConfig::new(inline, args.target.epsilon()?, args.target.delta);
            cfg.dist_kind = kind;
            cfg.bound_form = args.target.bound_form.parse()?;
            cfg.trials = 1;
            let probe = experiment::sample_size(&cfg)?;
            usize::try_from(probe).map_err(|_| HarnessError::Config(format!("s = {probe} too large")))?
        }
    };
    if s == 0 {
        return Err(HarnessError::Config("s must be at least 1".into()));
    }
    let sketch = sparsify(&x, s, args.seed, kind)?;
    let comment = format!(
        "elemsparse sketch: dist={} s={} seed={} nnz={} nnz_ratio={}",
        kind,
        s,
        args.seed,
        sketch.nnz(),
        sketch.nnz_ratio()
    );
    write_matrix_market(open_output(args.out.as_ref())?, &sketch.matrix, Some(&comment))?;
    eprintln!("{comment}");
    Ok(exit_code::PASS)
}

#[derive(Serialize)]
struct BoundsOutput {
    schema_version: u32,
    m: usize,
    n: usize,
    epsilon: f64,
    delta: f64,
    beta: f64,
    frobenius: f64,
    stable_rank: Option<f64>,
    report: BoundReportRecord,
}

fn cmd_bounds(args: &BoundsArgs) -> Result<u8> {
    let eps = args.target.epsilon()?;
    let cfg = SpectralConfig::default();
    let (m, n, fro, sr, two, beta) = if args.matrix.is_set() {
        let x = args.matrix.source()?.load()?;
        let fro = x.frobenius_norm();
        let two = spectral_norm(&x, &cfg)?.value;
        let beta = match args.beta {
            Some(b) => b,
            None => parse_dist(&args.dist)?.build(&x)?.beta_certificate(),
        };
        (x.rows(), x.cols(), fro, Some(fro * fro / (two * two)), Some(two), beta)
    } else {
        let need = |v: Option<f64>, what: &str| {
            v.ok_or_else(|| HarnessError::Config(format!("--{what} is required without a matrix")))
        };
        let m = args.m.ok_or_else(|| HarnessError::Config("--m is required without a matrix".into()))?;
        let n = args.n.ok_or_else(|| HarnessError::Config("--n is required without a matrix".into()))?;
        let fro = need(args.frobenius, "frobenius")?;
        let two = args.stable_rank.map(|sr| fro / sr.sqrt());
        (m, n, fro, args.stable_rank, two, args.beta.unwrap_or(1.0))
    };
    let form: BoundForm = args.target.bound_form.parse()?;
    let epsilon = match eps {
        EpsilonSpec::Absolute(e) => e,
        EpsilonSpec::Relative(r) if form == BoundForm::Corollary => {
            r * two.ok_or_else(|| HarnessError::Config("relative corollary target needs a stable rank".into()))?
        }
        EpsilonSpec::Relative(r) => r * fro,
    };
    let mut req = BoundRequest::new(m, n, epsilon, args.target.delta, beta, fro)?;
    if let Some(sr) = sr {
        req = req.with_stable_rank(sr)?;
    }
    let out = BoundsOutput {
        schema_version: experiment::SCHEMA_VERSION,
        m,
        n,
        epsilon,
        delta: args.target.delta,
        beta,
        frobenius: fro,
        stable_rank: sr,
        report: (&bounds::bound_report(&req)?).into(),
    };
    let mut w = open_output(args.out.as_ref())?;
    serde_json::to_writer_pretty(&mut w, &out)?;
    writeln!(w)?;
    Ok(exit_code::PASS)
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<u8> {
    let result = experiment::run_experiment(&args.config()?)?;
    eprintln!(
        "s={} epsilon={} failure_rate={} delta={} median_error={} nnz_ratio={} -> {}",
        result.s_used,
        result.epsilon,
        result.empirical_failure_rate,
        result.delta,
        result.median_error,
        result.nnz_ratio,
        if result.passed { "PASS" } else { "VIOLATED" }
    );
    Ok(result.exit_code())
}

fn cmd_compare(args: &ExperimentArgs) -> Result<u8> {
    let cmp = experiment::compare_distributions(&args.config()?)?;
    eprintln!("s={} epsilon={}", cmp.s_used, cmp.epsilon);
    for k in &cmp.kinds {
        eprintln!(
            "{:>6}  beta={:.6}  median={:.6}  p90={:.6}",
            k.kind, k.beta_certificate, k.median_error, k.p90_error
        );
    }
    Ok(exit_code::PASS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit_code::ERROR } else { exit_code::PASS });
        }
    };
    let outcome = match &cli.command {
        Command::Sparsify(a) => cmd_sparsify(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code::ERROR)
        }
    }
}
