//! End-to-end tests of the `elemsparse` binary and the harness library.

use std::path::Path;
use std::process::{Command, Output};

use elemsparse::experiment::{
    compare_distributions, exit_code, run_experiment, EpsilonSpec, ExperimentConfig, MatrixSource,
};
use elemsparse::generate::{GeneratorKind, GeneratorSpec};
use elemsparse::io::{load_matrix, read_matrix_market, MatrixFormat};
use elemsparse::HarnessError;
use elemsparse_core::bounds::{bound_report, sample_size_unsimplified};
use elemsparse_core::{BoundRequest, DenseMatrix};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_elemsparse"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn x34() -> DenseMatrix {
    DenseMatrix::from_rows(&[[3.0, 4.0], [0.0, 0.0]]).unwrap()
}

#[test]
fn single_entry_matrix_is_reproduced_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "c.csv", "2.5\n");
    let out = run(&["experiment", "--input", &input, "--epsilon", "1e-9", "--s", "3", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(exit_code::PASS as i32), "{out:?}");
}

#[test]
fn invalid_configuration_exits_one() {
    for args in [
        vec!["experiment", "--generate", "gaussian,5,5,1", "--epsilon", "1", "--delta", "1.5"],
        vec!["experiment", "--generate", "gaussian,5,5,1", "--epsilon", "1", "--trials", "0"],
        vec!["experiment", "--generate", "cauchy,5,5,1", "--epsilon", "1"],
        vec!["experiment", "--input", "/nonexistent/m.mtx", "--epsilon", "1"],
        vec!["experiment", "--generate", "gaussian,5,5,1"],
        vec!["experiment", "--generate", "gaussian,5,5,1", "--epsilon", "1", "--dist", "l3"],
        vec!["experiment", "--bogus-flag"],
        vec!["frobnicate"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(exit_code::ERROR as i32), "{args:?}");
    }
}

#[test]
fn undersampled_target_exits_two() {
    let out = run(&[
        "experiment",
        "--generate",
        "gaussian,20,20,3",
        "--epsilon-rel",
        "0.01",
        "--s",
        "10",
        "--trials",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(exit_code::GUARANTEE_VIOLATED as i32), "{out:?}");
}

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["experiment", "--help"]).status.code(), Some(0));
}

#[test]
fn sparsify_writes_readable_matrix_market() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sketch.mtx");
    let out = bin()
        .args(["sparsify", "--generate", "binary,12,9,4", "--s", "40", "--seed", "8", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = std::fs::read_to_string(&out_path).unwrap();
    let sketch = read_matrix_market(text.as_bytes()).unwrap();
    assert_eq!((sketch.rows(), sketch.cols()), (12, 9));
    let nnz = sketch.as_slice().iter().filter(|v| **v != 0.0).count();
    assert!(nnz > 0 && nnz <= 40);

    // Same seed, same sketch; stdout and file output agree.
    let again = run(&["sparsify", "--generate", "binary,12,9,4", "--s", "40", "--seed", "8"]);
    assert!(again.status.success());
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn sparsify_sample_count_defaults_to_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("s.mtx");
    let out = bin()
        .args(["sparsify", "--generate", "gaussian,6,5,2", "--epsilon-rel", "0.9", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let x = elemsparse::generate::generate_matrix(&GeneratorSpec::new(GeneratorKind::Gaussian, 6, 5, 2)).unwrap();
    let fro = x.frobenius_norm();
    let req = BoundRequest::new(6, 5, 0.9 * fro, 0.1, 1.0, fro).unwrap();
    let expected = format!("s={}", sample_size_unsimplified(&req));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains(&expected), "{stderr}");
}

#[test]
fn bounds_json_matches_library() {
    let out = run(&[
        "bounds", "--m", "100", "--n", "100", "--frobenius", "10", "--epsilon", "1", "--stable-rank", "10",
    ]);
    assert!(out.status.success(), "{out:?}");
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let req = BoundRequest::new(100, 100, 1.0, 0.1, 1.0, 10.0)
        .unwrap()
        .with_stable_rank(10.0)
        .unwrap();
    let rep = bound_report(&req).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["report"]["s_theorem1"], 456_055);
    assert_eq!(v["report"]["s_theorem1"], rep.s_theorem1);
    assert_eq!(v["report"]["s_unsimplified"], rep.s_unsimplified);
    assert_eq!(v["report"]["case_used"], "case_i");
    assert_eq!(v["report"]["gamma"].as_f64().unwrap(), rep.gamma);
    assert_eq!(v["report"]["rho2"].as_f64().unwrap(), rep.rho2);
    assert_eq!(v["report"]["s_corollary"], rep.s_corollary.unwrap());
}

#[test]
fn bounds_for_a_matrix_use_its_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "x.csv", "3,4\n0,0\n");
    let out = run(&["bounds", "--input", &input, "--dist", "l1", "--epsilon", "1"]);
    assert!(out.status.success(), "{out:?}");
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["beta"].as_f64().unwrap() - 50.0 / 53.0).abs() < 1e-12);
    assert_eq!(v["frobenius"].as_f64().unwrap(), 5.0);
}

#[test]
fn compare_reports_every_kind_on_shared_seeds() {
    let mut cfg = ExperimentConfig::new(MatrixSource::Inline(x34()), EpsilonSpec::Relative(0.5), 0.1);
    cfg.trials = 7;
    let cmp = compare_distributions(&cfg).unwrap();
    assert_eq!(cmp.rows.len(), 3 * 7);
    let beta = |name: &str| cmp.kinds.iter().find(|k| k.kind == name).unwrap().beta_certificate;
    assert_eq!(beta("hybrid"), 1.0);
    assert!((beta("l1") - 50.0 / 53.0).abs() < 1e-12);
    assert!((beta("l2") - 126.0 / 138.0).abs() < 1e-12);
    for kind in ["hybrid", "l1", "l2"] {
        let seeds: Vec<u64> = cmp.rows.iter().filter(|r| r.kind == kind).map(|r| r.seed).collect();
        assert_eq!(seeds, (0..7).collect::<Vec<u64>>());
    }
}

#[test]
fn compare_csv_has_one_row_per_kind_and_trial() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("cmp.csv");
    let out = bin()
        .args([
            "compare", "--generate", "power-law,10,8,1", "--epsilon-rel", "0.5", "--trials", "4",
            "--out-format", "csv", "--out",
        ])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let mut rdr = csv::Reader::from_path(&out_path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(headers.iter().collect::<Vec<_>>(), ["kind", "trial", "seed", "s", "error", "nnz", "beta_certificate"]);
    assert_eq!(rdr.records().count(), 12);
}

#[test]
fn kinds_coincide_on_constant_magnitude_matrices() {
    // With |X_ij| constant all three distributions are uniform.
    let x = DenseMatrix::new(4, 5, (0..20).map(|k| if k % 3 == 0 { -2.0 } else { 2.0 }).collect()).unwrap();
    let mut cfg = ExperimentConfig::new(MatrixSource::Inline(x), EpsilonSpec::Relative(0.5), 0.1);
    cfg.trials = 10;
    cfg.s_override = Some(30);
    let cmp = compare_distributions(&cfg).unwrap();
    let errors: Vec<&Vec<f64>> = cmp.kinds.iter().map(|k| &k.errors).collect();
    for pair in errors.windows(2) {
        for (a, b) in pair[0].iter().zip(pair[1]) {
            assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{a} vs {b}");
        }
    }
    assert!(cmp.kinds.iter().all(|k| (k.beta_certificate - 1.0).abs() < 1e-12));
}

#[test]
fn sixteenfold_samples_quarter_the_median_error() {
    let spec = GeneratorSpec::new(GeneratorKind::Gaussian, 50, 60, 7);
    let median_at = |s| {
        let mut cfg = ExperimentConfig::new(MatrixSource::Generated(spec), EpsilonSpec::Relative(0.5), 0.2);
        cfg.s_override = Some(s);
        cfg.trials = 40;
        run_experiment(&cfg).unwrap().median_error
    };
    let ratio = median_at(9087 / 16) / median_at(9087);
    assert!((4.0 * 0.65..=4.0 * 1.35).contains(&ratio), "ratio {ratio}");
}

#[test]
fn experiment_json_and_csv_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("r.json");
    let csv_path = dir.path().join("r.csv");
    for (path, fmt) in [(&json_path, "json"), (&csv_path, "csv")] {
        let out = bin()
            .args(["experiment", "--generate", "binary,15,10,2", "--epsilon-rel", "0.6", "--trials", "6"])
            .args(["--bound-form", "theorem1", "--out-format", fmt, "--out"])
            .arg(path)
            .output()
            .unwrap();
        assert!(matches!(out.status.code(), Some(0) | Some(2)), "{out:?}");
    }
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["bound_form"], "theorem1");
    assert_eq!(v["trials"].as_array().unwrap().len(), 6);
    assert_eq!(v["wall_times_secs"].as_array().unwrap().len(), 6);
    let rate = v["empirical_failure_rate"].as_f64().unwrap();
    assert_eq!(v["passed"].as_bool().unwrap(), rate <= 0.1);

    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(rdr.headers().unwrap().len(), 7);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    for (t, row) in rows.iter().enumerate() {
        assert_eq!(row[0].parse::<usize>().unwrap(), t);
        assert_eq!(row[2], v["s_used"].to_string());
    }
}

#[test]
fn load_matrix_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let mm = write(
        dir.path(),
        "a.mtx",
        "%%MatrixMarket matrix coordinate real general\n% note\n2 3 2\n1 1 1.5\n2 3 -2\n",
    );
    let x = load_matrix(Path::new(&mm), None).unwrap();
    assert_eq!(x, DenseMatrix::from_rows(&[[1.5, 0.0, 0.0], [0.0, 0.0, -2.0]]).unwrap());

    let csv = write(dir.path(), "b.txt", "1, 2\n3, 4\n");
    let x = load_matrix(Path::new(&csv), Some(MatrixFormat::Csv)).unwrap();
    assert_eq!(x, DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap());

    let ragged = write(dir.path(), "c.csv", "1,2\n3\n");
    match load_matrix(Path::new(&ragged), None) {
        Err(HarnessError::Dimension { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }

    let missing = dir.path().join("missing.mtx");
    assert!(matches!(load_matrix(&missing, None), Err(HarnessError::Io { .. })));
}
