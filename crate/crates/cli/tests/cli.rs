use std::path::PathBuf;

use ordloc_cli::{body, run, CliError, RunConfig, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, EXIT_VERIFY};

fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name);
    p.display().to_string()
}

/// Runs in process; returns (exit code, stdout, stderr).
fn ordloc(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ordloc").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn ok(args: &[&str]) -> String {
    let (code, out, err) = ordloc(args);
    assert_eq!(code, EXIT_OK, "{args:?}: {err}");
    out
}

fn line<'a>(out: &'a str, label: &str) -> &'a str {
    out.lines()
        .find(|l| l.split_whitespace().next() == Some(label))
        .unwrap_or_else(|| panic!("no `{label}` in\n{out}"))
}

fn csv_rows(out: &str) -> Vec<Vec<String>> {
    body(out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn estimate_examples() {
    let out = ok(&[
        "estimate", "--x1", "23.077", "--x2", "22.654", "--sigma2", "0.418", "--rho", "0.626",
    ]);
    assert!(line(&out, "mle").ends_with("(22.8655, 22.8655)"));
    assert!(line(&out, "blee").ends_with("(23.077, 22.654)"));
    assert!(line(&out, "bz-squared").ends_with("(22.704102, 23.026898)"));
    assert!(line(&out, "bz-absolute").ends_with("(22.705489, 23.025511)"));

    let out = ok(&[
        "estimate", "--x1", "0", "--x2", "1", "--sigma2", "1", "--rho", "0",
    ]);
    assert!(line(&out, "mle").ends_with("(0, 1)"));

    let out = ok(&[
        "estimate",
        "--x1",
        "1",
        "--x2",
        "0",
        "--estimators",
        "isotonic:0.75",
        "--format",
        "csv",
    ]);
    assert_eq!(csv_rows(&out), vec![vec!["isotonic:0.75", "0.75", "0.25"]]);

    let out = ok(&[
        "estimate", "--x1", "-1", "--x2", "-3", "--rho", "-0.5", "--loss", "squared", "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["estimates"].as_array().unwrap().len(), 3);
    assert_eq!(v["estimates"][2]["estimator"], "bz-squared");
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["estimate", "--x1", "1"],
        vec!["estimate", "--x1", "1", "--x2", "2", "--rho", "1"],
        vec!["estimate", "--x1", "1", "--x2", "2", "--sigma", "-1"],
        vec![
            "estimate", "--x1", "1", "--x2", "2", "--sigma", "1", "--sigma2", "1",
        ],
        vec!["estimate", "--x1", "1", "--x2", "2", "--estimators", "nope"],
        vec!["exact", "--estimators", ""],
        vec!["simulate", "--estimators", "blee,blee"],
        vec!["simulate", "--n", "1"],
        vec!["simulate", "--lambda-step", "0"],
        vec!["simulate", "--lambda-min", "-1"],
        vec!["simulate", "--format", "text"],
        vec!["analyze", "--input", "/definitely/not/here.csv"],
        vec!["frobnicate"],
    ] {
        let (code, out, err) = ordloc(&args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
        assert!(out.is_empty());
        assert!(!err.is_empty());
    }
    let (code, out, _) = ordloc(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("simulate"));
}

#[test]
fn exit_code_mapping() {
    let numeric = CliError::Core(ordloc::Error::RootNoConvergence {
        iterations: 200,
        lo: 0.0,
        hi: 1.0,
    });
    assert_eq!(numeric.exit_code(), EXIT_NUMERIC);
    assert_eq!(
        CliError::Core(ordloc::Error::Data("x".into())).exit_code(),
        EXIT_USAGE
    );
    assert_eq!(
        CliError::Verification { failed: 1 }.exit_code(),
        EXIT_VERIFY
    );
}

#[test]
fn malformed_input_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.csv");
    std::fs::write(&p, "group,x1,x2\na,1,2\nb,x,3\n").unwrap();
    let (code, _, err) = ordloc(&["analyze", "--input", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("row 2"), "{err}");
    std::fs::write(&p, "").unwrap();
    assert_eq!(
        ordloc(&["analyze", "--input", p.to_str().unwrap()]).0,
        EXIT_USAGE
    );
}

#[test]
fn analyze_fixtures() {
    let out = ok(&[
        "analyze",
        "--input",
        &fixture("table2.csv"),
        "--sigma2",
        "0.418",
        "--rho",
        "0.626",
    ]);
    assert!(line(&out, "means").ends_with("(23.076923, 22.653846)"));
    let mle = line(&out, "mle");
    assert!(mle.contains("(22.865385, 22.865385)") && mle.contains("published (22.86, 22.86)"));
    assert!(line(&out, "bz-squared").contains("published (22.77, 22.96)"));
    assert!(line(&out, "bz-absolute").contains("published (22.71, 23.03)"));

    let out = ok(&["analyze", "--input", &fixture("table1.csv")]);
    assert!(line(&out, "means").ends_with("(22.185185, 23.166667)"));
    let strip = |l: &str| l.split_whitespace().skip(1).collect::<Vec<_>>().join(" ");
    assert_eq!(strip(line(&out, "mle")), strip(line(&out, "blee")));
    assert!(!out.contains("published"));

    let out = ok(&[
        "analyze",
        "--input",
        &fixture("table2.csv"),
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["summary"]["n"], 13);
    assert_eq!(v["published"].as_array().unwrap().len(), 3);
}

#[test]
fn simulate_panels() {
    let out = ok(&[
        "simulate",
        "--sigma",
        "10",
        "--rho",
        "0.9",
        "--loss",
        "absolute",
        "--estimators",
        "blee",
        "--lambda-max",
        "1",
        "--lambda-step",
        "0.5",
        "--n",
        "20000",
    ]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 3);
    let analytic = 2.0 * 10.0 * (2.0 / std::f64::consts::PI).sqrt();
    for r in rows {
        assert_eq!(r[1], "blee");
        assert_eq!(r[2], "absolute");
        let (risk, se): (f64, f64) = (r[3].parse().unwrap(), r[4].parse().unwrap());
        assert!((risk - analytic).abs() < 3.0 * se, "{risk} {se}");
    }

    let out = ok(&[
        "simulate",
        "--estimators",
        "mle",
        "--lambda-min",
        "0.3",
        "--lambda-max",
        "0.3",
        "--n",
        "50",
    ]);
    assert_eq!(csv_rows(&out).len(), 1);
}

#[test]
fn exact_table() {
    let out = ok(&[
        "exact",
        "--estimators",
        "blee,mle",
        "--lambda-max",
        "2",
        "--lambda-step",
        "0.5",
    ]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 10);
    for r in rows.iter().filter(|r| r[1] == "blee") {
        assert!((r[3].parse::<f64>().unwrap() - 2.0).abs() < 1e-7);
    }
    let mle0: f64 = rows.iter().find(|r| r[0] == "0" && r[1] == "mle").unwrap()[3]
        .parse()
        .unwrap();
    assert!(mle0 < 2.0);
    assert_eq!(rows[0][0..2], ["0".to_string(), "blee".to_string()]);
}

#[test]
fn headers_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sim.csv");
    let runs: Vec<Vec<String>> = vec![
        vec![
            "estimate", "--x1", "2", "--x2", "1.5", "--sigma2", "0.3", "--rho", "0.2",
        ],
        vec![
            "simulate",
            "--n",
            "300",
            "--seed",
            "9",
            "--estimators",
            "blee,bz,isotonic:0.7",
            "--loss",
            "absolute",
        ],
        vec![
            "simulate",
            "--n",
            "300",
            "--format",
            "json",
            "--lambda-max",
            "0.5",
            "--lambda-step",
            "0.25",
        ],
        vec![
            "exact",
            "--estimators",
            "mle",
            "--lambda-max",
            "1",
            "--lambda-step",
            "0.5",
            "--tol",
            "1e-7",
        ],
        vec![
            "analyze",
            "--input",
            &fixture("table1.csv"),
            "--format",
            "csv",
        ],
        vec!["verify", "--quick", "--loss", "squared"],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for args in runs {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = ok(&refs);
        let cfg = RunConfig::from_header(&first).unwrap();
        let replay: Vec<String> = cfg.to_args();
        let refs2: Vec<&str> = replay.iter().map(String::as_str).collect();
        let second = ok(&refs2);
        assert_eq!(first, second, "{args:?} vs {replay:?}");
        assert_eq!(RunConfig::from_header(&second).unwrap(), cfg);
    }

    // --output writes the same bytes to the file
    let p = out_path.to_str().unwrap();
    let (code, stdout, _) = ordloc(&["simulate", "--n", "100", "--output", p]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.is_empty());
    let written = std::fs::read_to_string(&out_path).unwrap();
    let cfg = RunConfig::from_header(&written).unwrap();
    assert_eq!(cfg.output.as_deref(), Some(out_path.as_path()));
    assert_eq!(cfg.n, Some(100));
}

#[test]
fn verify_exit_codes() {
    let out = ok(&["verify", "--quick"]);
    assert!(out
        .lines()
        .filter(|l| !l.starts_with('#'))
        .all(|l| l.starts_with("PASS")));

    let (code, out, err) = ordloc(&["verify", "--quick", "--inject-loss", "odd"]);
    assert_eq!(code, EXIT_VERIFY);
    assert!(
        out.lines()
            .any(|l| l.starts_with("FAIL  loss odd: evenness")),
        "{out}"
    );
    assert!(err.contains("failed"));

    let (code, out, _) = ordloc(&[
        "verify",
        "--quick",
        "--inject-loss",
        "odd",
        "--format",
        "json",
    ]);
    assert_eq!(code, EXIT_VERIFY);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], false);
}

#[test]
fn threads_flag_is_not_in_config() {
    let a = ok(&["simulate", "--n", "200", "--threads", "1"]);
    let b = ok(&["--threads", "3", "simulate", "--n", "200"]);
    assert_eq!(a, b);
    assert_eq!(ordloc(&["simulate", "--threads", "0"]).0, EXIT_USAGE);
}
