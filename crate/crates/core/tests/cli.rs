use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chaosfit::pce::{design_matrix, sample_germ, BasisSpec, Family, SampleSet};
use chaosfit::RandomStream;
use nalgebra::DVector;
use serde_json::Value;

fn chaosfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaosfit"))
        .args(args)
        .env_remove("CHAOSFIT_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes samples of `2 + 1.5 psi_(1,0,0) - 0.8 psi_(1,1,0) + 0.5 psi_(0,0,3)`
/// on a Hermite germ.
fn sparse_pce_csv(dir: &Path, m: usize) -> PathBuf {
    let spec = BasisSpec::uniform(Family::HermiteGaussian, 3, 3).unwrap();
    let idx = spec.total_order_index_set().unwrap();
    let mut c = DVector::zeros(idx.len());
    for (beta, value) in [
        ("(0,0,0)", 2.0),
        ("(1,0,0)", 1.5),
        ("(1,1,0)", -0.8),
        ("(0,0,3)", 0.5),
    ] {
        let j = idx.iter().position(|b| b.to_string() == beta).unwrap();
        c[j] = value;
    }
    let pts = sample_germ(&spec, m, &mut RandomStream::new(77, 0));
    let y = design_matrix(&spec, &idx, &pts).unwrap() * c;
    let path = dir.join("samples.csv");
    SampleSet::new(pts, y).unwrap().write_csv(&path).unwrap();
    path
}

#[test]
fn fit_recovers_the_generating_support() {
    let dir = tempfile::tempdir().unwrap();
    let data = sparse_pce_csv(dir.path(), 45);
    let out = dir.path().join("fit");
    let run = chaosfit(&[
        "fit",
        "--data",
        s(&data),
        "--dims",
        "3",
        "--degree",
        "3",
        "--out",
        s(&out),
        "--seed",
        "4",
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));

    let artifact: Value =
        serde_json::from_str(&fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    let coeffs: Vec<f64> = artifact["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let index_set = artifact["index_set"].as_array().unwrap();
    assert_eq!(index_set.len(), coeffs.len() + 1);
    let mut order: Vec<usize> = (0..coeffs.len()).collect();
    order.sort_by(|&a, &b| coeffs[b].abs().total_cmp(&coeffs[a].abs()));
    let top: Vec<String> = order[..3]
        .iter()
        .map(|&j| index_set[j + 1].to_string())
        .collect();
    for want in ["[1,0,0]", "[1,1,0]", "[0,0,3]"] {
        assert!(top.contains(&want.to_string()), "{top:?}");
    }
    // Centering y with the sample mean leaves an offset the non-constant columns cannot absorb.
    assert!(artifact["cv_error"].as_f64().unwrap() < 0.3);
    let offset = artifact["offset"].as_f64().unwrap();
    assert!((offset - 2.0).abs() < 0.5);

    let stem = fs::read_to_string(out.join("coefficients.csv")).unwrap();
    let mut lines = stem.lines();
    assert_eq!(lines.next(), Some("rank,index,coefficient"));
    assert!(lines.next().unwrap().starts_with("0,\"(0,0,0)\","));
    assert_eq!(stem.lines().count(), coeffs.len() + 2);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let data = sparse_pce_csv(dir.path(), 30);
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "3", "1"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let run = chaosfit(&[
            "fit",
            "--data",
            s(&data),
            "--degree",
            "3",
            "--threads",
            threads,
            "--out",
            s(&out),
        ]);
        assert_eq!(code(&run), 0, "{}", stderr(&run));
        let scan = chaosfit(&[
            "cv-scan",
            "--n",
            "60",
            "--s",
            "4",
            "--m",
            "24",
            "--k-folds",
            "6",
            "--threads",
            threads,
            "--out",
            s(&out.join("scan")),
        ]);
        assert_eq!(code(&scan), 0, "{}", stderr(&scan));
        let files = [
            "fit.json",
            "coefficients.csv",
            "cv_scan.csv",
            "scan/cv_scan.csv",
            "scan/cv_profile.json",
        ];
        outputs.push(files.map(|f| fs::read(out.join(f)).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn mixed_families_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let spec = BasisSpec::new(vec![Family::HermiteGaussian, Family::LegendreUniform], 2).unwrap();
    let pts = sample_germ(&spec, 25, &mut RandomStream::new(5, 0));
    let y = DVector::from_iterator(25, pts.row_iter().map(|r| r[0] + r[1] * r[1]));
    let data = dir.path().join("mixed.csv");
    SampleSet::new(pts, y).unwrap().write_csv(&data).unwrap();
    let out = dir.path().join("out");
    let run = chaosfit(&[
        "fit",
        "--data",
        s(&data),
        "--families",
        "hermite,legendre",
        "--degree",
        "2",
        "--out",
        s(&out),
        "--k-folds",
        "5",
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let artifact: Value =
        serde_json::from_str(&fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    assert_eq!(
        artifact["basis"]["families"],
        serde_json::json!(["hermite-gaussian", "legendre-uniform"])
    );
}

#[test]
fn exit_codes_separate_config_data_and_solver_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = sparse_pce_csv(dir.path(), 12);
    let out = dir.path().join("out");

    assert_eq!(code(&chaosfit(&["fit", "--bogus"])), 2);
    assert_eq!(code(&chaosfit(&["fit", "--out", s(&out)])), 2);
    assert_eq!(
        code(&chaosfit(&["fit", "--data", s(&data), "--solver", "lars"])),
        2
    );

    let config = dir.path().join("bad.json");
    fs::write(&config, r#"{"k-folds": 5, "no-such-key": 1}"#).unwrap();
    let run = chaosfit(&[
        "fit",
        "--data",
        s(&data),
        "--config",
        s(&config),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&run), 2);
    assert!(stderr(&run).contains("no-such-key"));

    let missing = dir.path().join("missing.csv");
    assert_eq!(
        code(&chaosfit(&["fit", "--data", s(&missing), "--out", s(&out)])),
        3
    );

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let run = chaosfit(&["fit", "--data", s(&empty), "--out", s(&out)]);
    assert_eq!(code(&run), 3);
    assert!(stderr(&run).contains("empty.csv"), "{}", stderr(&run));

    let broken = dir.path().join("broken.csv");
    fs::write(&broken, "xi_1,xi_2,y\n0.1,0.2,1.0\n0.3,abc,2.0\n").unwrap();
    let run = chaosfit(&["fit", "--data", s(&broken), "--out", s(&out)]);
    assert_eq!(code(&run), 3);
    assert!(stderr(&run).contains("line 3"), "{}", stderr(&run));

    let run = chaosfit(&["fit", "--data", s(&data), "--dims", "4", "--out", s(&out)]);
    assert_eq!(code(&run), 3);

    // 12 rows cannot support least squares on 19 columns.
    let run = chaosfit(&[
        "fit",
        "--data",
        s(&data),
        "--degree",
        "3",
        "--solver",
        "ols",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&run), 4, "{}", stderr(&run));
}

fn scan_rows(out: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(out.join("cv_scan.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn flags_override_config_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(
        &config,
        r#"{"lambda-count": 5, "seed": 3, "n": 50, "s": 3, "m": 20, "k-folds": 4, "solver": "cd"}"#,
    )
    .unwrap();

    let a = dir.path().join("a");
    assert_eq!(
        code(&chaosfit(&[
            "cv-scan",
            "--config",
            s(&config),
            "--out",
            s(&a)
        ])),
        0
    );
    assert_eq!(scan_rows(&a).len(), 5);

    let b = dir.path().join("b");
    assert_eq!(
        code(&chaosfit(&[
            "cv-scan",
            "--config",
            s(&config),
            "--lambda-count",
            "7",
            "--out",
            s(&b)
        ])),
        0
    );
    assert_eq!(scan_rows(&b).len(), 7);

    // The environment seed only applies when nothing else sets one.
    let c = dir.path().join("c");
    let run = Command::new(env!("CARGO_BIN_EXE_chaosfit"))
        .args(["cv-scan", "--config", s(&config), "--out", s(&c)])
        .env("CHAOSFIT_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(code(&run), 0);
    assert_eq!(
        fs::read(a.join("cv_scan.csv")).unwrap(),
        fs::read(c.join("cv_scan.csv")).unwrap()
    );

    let plain = dir.path().join("plain.json");
    fs::write(
        &plain,
        r#"{"lambda-count": 5, "n": 50, "s": 3, "m": 20, "k-folds": 4, "solver": "cd"}"#,
    )
    .unwrap();
    let d = dir.path().join("d");
    let run = Command::new(env!("CARGO_BIN_EXE_chaosfit"))
        .args(["cv-scan", "--config", s(&plain), "--out", s(&d)])
        .env("CHAOSFIT_SEED", "3")
        .output()
        .unwrap();
    assert_eq!(code(&run), 0);
    assert_eq!(
        fs::read(a.join("cv_scan.csv")).unwrap(),
        fs::read(d.join("cv_scan.csv")).unwrap()
    );
}

#[test]
fn cv_scan_lists_lambda_descending_with_zero_regime_first() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan");
    let run = chaosfit(&[
        "cv-scan",
        "--n",
        "80",
        "--s",
        "5",
        "--m",
        "30",
        "--k-folds",
        "10",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let rows = scan_rows(&out);
    assert_eq!(rows.len(), 15);
    let lambdas: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(lambdas.windows(2).all(|w| w[0] > w[1]));
    assert_eq!(rows[0][1], "1.0000000000000000e0");
}

#[test]
fn converge_and_phase_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv");
    let run = chaosfit(&[
        "converge",
        "--n",
        "60",
        "--s",
        "3",
        "--m0",
        "6",
        "--delta-m",
        "6",
        "--m-max",
        "48",
        "--k-folds",
        "5",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let table = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(
        table.lines().next(),
        Some("m,cv_error,validation_error,solution_error,lambda_star,stop_flag")
    );
    assert_eq!(table.lines().count(), 9);
    assert!(table.lines().filter(|l| l.ends_with(",true")).count() <= 1);
    assert!(out.join("history.csv").exists());

    let out = dir.path().join("phase");
    let run = chaosfit(&[
        "phase",
        "--n",
        "30",
        "--nodes",
        "4",
        "--trials",
        "2",
        "--k-folds",
        "5",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let table = fs::read_to_string(out.join("phase.csv")).unwrap();
    assert_eq!(
        table.lines().next(),
        Some("delta,rho,m,s,success_rate,mean_error")
    );
    for line in table.lines().skip(1) {
        let rate: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert!([0.0, 0.5, 1.0].contains(&rate));
    }
    assert_eq!(table.lines().count(), 5);
}

#[test]
fn converge_runs_on_a_data_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = sparse_pce_csv(dir.path(), 40);
    let out = dir.path().join("conv");
    let run = chaosfit(&[
        "converge",
        "--data",
        s(&data),
        "--degree",
        "3",
        "--m0",
        "10",
        "--delta-m",
        "10",
        "--k-folds",
        "5",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let table = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
    let run = chaosfit(&[
        "converge",
        "--data",
        s(&data),
        "--degree",
        "3",
        "--m-max",
        "41",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&run), 3);
}
