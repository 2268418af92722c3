//! End-to-end tests of the command-line binary: the documented invocation
//! shapes, output formats, exit-status conventions, environment-variable
//! resolution, and warm-cache byte reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn harmfrob(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_harmfrob"));
    cmd.args(args);
    // Isolate from whatever the ambient shell exports.
    cmd.env_remove("HARMFROB_CACHE_DIR");
    cmd.env_remove("HARMFROB_PRECISION");
    cmd
}

fn run(args: &[&str]) -> Output {
    harmfrob(args).output().expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn assert_status(output: &Output, expected: i32, context: &str) {
    assert!(
        output.status.code() == Some(expected),
        "{context}: expected exit {expected}, got {:?}\nstdout: {}\nstderr: {}",
        output.status.code(),
        stdout_of(output),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn zeta1_at_two_prints_the_exact_zero_marker() {
    let output = run(&["zeta1", "--p", "5", "--alpha", "1", "--n", "2", "--prec", "10"]);
    assert_status(&output, 0, "zeta1");
    let text = stdout_of(&output);
    assert!(
        text.contains("0 + O(5^10)"),
        "zeta_(5,1)(2) must print as zero to the requested precision, got: {text}"
    );
}

#[test]
fn finite_mzv_writes_one_csv_row_per_prime_with_zero_at_five() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let output = run(&[
        "finite-mzv",
        "--index",
        "1,1",
        "--pmax",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_status(&output, 0, "finite-mzv");
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next() == Some("index,p,residue"), "csv header");
    let rows: Vec<&str> = lines.collect();
    let primes_to_50 = 15; // 2, 3, 5, ..., 47
    assert!(rows.len() == primes_to_50, "one row per prime, got {}", rows.len());
    assert!(
        rows.iter().any(|r| *r == "\"1,1\",5,0"),
        "the depth-two residue at p = 5 must vanish; rows: {rows:?}"
    );
}

#[test]
fn verify_quick_suite_passes_and_is_seed_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for name in ["r1.json", "r2.json"] {
        let out = dir.path().join(name);
        let output = run(&[
            "verify",
            "--suite",
            "quick",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_status(&output, 0, "verify quick");
        assert!(
            stdout_of(&output).contains("6 of 6 checks passed"),
            "console summary lists every check"
        );
        let mut parsed: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
        assert!(parsed["all_passed"] == serde_json::json!(true));
        for report in parsed["reports"].as_array_mut().unwrap() {
            report["millis"] = serde_json::json!(0);
        }
        reports.push(parsed);
    }
    assert!(
        reports[0] == reports[1],
        "the same suite and seed must reproduce the same report"
    );
}

fn cache_snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn warm_cache_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cache = cache.to_str().unwrap();
    let table_args = |out: &str| {
        vec![
            "adjoint".to_string(),
            "--p".into(),
            "5".into(),
            "--weight".into(),
            "4".into(),
            "--depth".into(),
            "2".into(),
            "--prec".into(),
            "5".into(),
            "--cache-dir".into(),
            cache.to_string(),
            "--out".into(),
            out.to_string(),
        ]
    };
    let out1 = dir.path().join("table1.csv");
    let out2 = dir.path().join("table2.csv");
    let cold_args: Vec<String> = table_args(out1.to_str().unwrap());
    let cold_refs: Vec<&str> = cold_args.iter().map(|s| s.as_str()).collect();
    assert_status(&run(&cold_refs), 0, "cold adjoint table");
    let cold_cache = cache_snapshot(Path::new(cache));
    assert!(!cold_cache.is_empty(), "the cold run populates the cache");

    let warm_args: Vec<String> = table_args(out2.to_str().unwrap());
    let warm_refs: Vec<&str> = warm_args.iter().map(|s| s.as_str()).collect();
    assert_status(&run(&warm_refs), 0, "warm adjoint table");
    assert!(
        fs::read(&out1).unwrap() == fs::read(&out2).unwrap(),
        "warm rerun must write a byte-identical table"
    );
    assert!(
        cache_snapshot(Path::new(cache)) == cold_cache,
        "warm rerun must leave the cache files untouched"
    );

    // The same holds for the single-value table command.
    let har = |out: &str| {
        vec![
            "har", "--p", "7", "--alpha", "1", "--index", "2,1", "--prec", "6", "--cache-dir",
            cache, "--out", out,
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>()
    };
    let h1 = dir.path().join("h1.csv");
    let h2 = dir.path().join("h2.csv");
    for out in [&h1, &h2] {
        let args = har(out.to_str().unwrap());
        let refs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
        assert_status(&run(&refs), 0, "har with cache");
    }
    assert!(fs::read(&h1).unwrap() == fs::read(&h2).unwrap());
}

#[test]
fn usage_errors_exit_with_two() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["har", "--p", "9", "--index", "2"],
        vec!["har", "--p", "5", "--index", "2,x"],
        vec!["har", "--p", "5", "--index", "2", "--prec", "0"],
        vec!["zeta1", "--p", "5", "--n", "1"],
        vec!["verify", "--suite", "nosuch"],
        vec!["verify", "--suite", "quick", "--param", "bogus_key=3"],
        vec!["expand-sigma", "--index", "2", "--p", "5"],
        vec!["adjoint", "--p", "5", "--b", "2"],
        vec!["cache-gc"],
        vec!["no-such-subcommand"],
    ];
    for args in cases {
        let output = run(&args);
        assert_status(&output, 2, &format!("args {args:?}"));
    }
}

#[test]
fn runtime_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("not-a-directory");
    fs::write(&file, "x").unwrap();
    let output = run(&["har", "--p", "5", "--index", "2", "--cache-dir", file.to_str().unwrap()]);
    assert_status(&output, 1, "cache dir collides with a file");
}

#[test]
fn environment_supplies_precision_and_flags_override_it() {
    let mut cmd = harmfrob(&["har", "--p", "5", "--index", "2"]);
    cmd.env("HARMFROB_PRECISION", "4");
    let output = cmd.output().unwrap();
    assert_status(&output, 0, "env precision");
    assert!(
        stdout_of(&output).contains("O(5^4)"),
        "HARMFROB_PRECISION must set the target precision"
    );

    let mut cmd = harmfrob(&["har", "--p", "5", "--index", "2", "--prec", "6"]);
    cmd.env("HARMFROB_PRECISION", "4");
    let output = cmd.output().unwrap();
    assert_status(&output, 0, "flag precision");
    assert!(
        stdout_of(&output).contains("O(5^6)"),
        "an explicit --prec must override the environment"
    );
}

#[test]
fn environment_supplies_the_cache_directory() {
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = harmfrob(&["har", "--p", "5", "--index", "3", "--prec", "6"]);
    cmd.env("HARMFROB_CACHE_DIR", dir.path());
    let output = cmd.output().unwrap();
    assert_status(&output, 0, "env cache dir");
    assert!(
        dir.path().join("har-p5.cache").exists(),
        "the cache file lands in HARMFROB_CACHE_DIR"
    );
}

#[test]
fn output_format_resolves_from_flag_then_extension() {
    let output = run(&["har", "--p", "5", "--index", "2", "--prec", "5", "--format", "json"]);
    assert_status(&output, 0, "json format");
    let parsed: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert!(parsed["p"] == serde_json::json!(5));
    assert!(parsed["index"] == serde_json::json!([2]));
    assert!(parsed["digits"].is_array());

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("value.csv");
    let output = run(&["har", "--p", "5", "--index", "2", "--prec", "5", "--out", out.to_str().unwrap()]);
    assert_status(&output, 0, "csv by extension");
    let csv = fs::read_to_string(&out).unwrap();
    assert!(
        csv.starts_with("index,p,alpha,rel_precision,valuation,digits\n"),
        "a .csv output path selects the CSV format: {csv}"
    );
}

#[test]
fn cache_gc_reports_and_compacts() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    for prec in ["4", "6"] {
        let output = run(&[
            "har", "--p", "5", "--index", "2,1", "--prec", prec, "--cache-dir", cache,
        ]);
        assert_status(&output, 0, "populate cache");
    }
    let path = dir.path().join("har-p5.cache");
    assert!(fs::read_to_string(&path).unwrap().lines().count() == 2);
    let output = run(&["cache-gc", "--cache-dir", cache]);
    assert_status(&output, 0, "cache-gc");
    assert!(
        fs::read_to_string(&path).unwrap().lines().count() == 1,
        "gc keeps only the most precise record"
    );
}

#[test]
fn expand_sigma_symbolic_and_numeric_modes() {
    let output = run(&["expand-sigma", "--index", "2", "--weight-cutoff", "4"]);
    assert_status(&output, 0, "symbolic expansion");
    let text = stdout_of(&output);
    assert!(text.contains("har_m"), "symbolic mode lists the expansion terms: {text}");

    let output = run(&[
        "expand-sigma", "--index", "2", "--weight-cutoff", "6", "--p", "5", "--mmax", "6",
        "--prec", "5",
    ]);
    assert_status(&output, 0, "numeric expansion check");
    assert!(stdout_of(&output).starts_with("PASS sigma-expansion"));
}
