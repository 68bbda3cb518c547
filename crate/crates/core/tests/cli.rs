//! End-to-end runs of the `nnts` binary and its library entry points.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::process::Command;

use clap::Parser;
use nnts::cli::data::{Table, Units};
use nnts::cli::formula::Formula;
use nnts::cli::report::{FitReport, PredictionReport};
use nnts::cli::{plot_figures, Cli};
use nnts::model::{fit_regression, fit_time_series, Estimator};
use nnts::sphere::CircleKind;
use tempfile::TempDir;

const FORMULA: &str = "I(distance<=27)*(distance-27)";

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn nnts(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_nnts"))
        .arg("--quiet")
        .args(args)
        .output()
        .unwrap()
}

fn code(args: &[&str]) -> i32 {
    nnts(args).status.code().unwrap()
}

fn ok(args: &[&str]) {
    let out = nnts(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fit_periwinkle(dir: &Path, circle: &str, m: &str) {
    let peri = fixture("periwinkle.csv");
    ok(&[
        "fit",
        "-i",
        s(&peri),
        "--units",
        "deg",
        "--m",
        m,
        "--circle",
        circle,
        "--formula",
        FORMULA,
        "--out",
        s(dir),
    ]);
}

fn predictions(dir: &Path) -> PredictionReport {
    serde_json::from_str(&std::fs::read_to_string(dir.join("predictions.json")).unwrap()).unwrap()
}

#[test]
fn regression_round_trip_is_bit_exact() {
    let dir = TempDir::new().unwrap();
    let peri = fixture("periwinkle.csv");
    for circle in ["great", "small"] {
        fit_periwinkle(dir.path(), circle, "8");
        let report = FitReport::read(&dir.path().join("fit.json")).unwrap();
        assert_eq!(report.n, 31);
        ok(&[
            "predict",
            "-i",
            s(&peri),
            "--report",
            s(&dir.path().join("fit.json")),
            "--out",
            s(dir.path()),
        ]);

        let table = Table::read(&peri).unwrap();
        let thetas = table.angles("direction_deg", Units::Deg).unwrap();
        let x = table.design(&Formula::parse(FORMULA).unwrap()).unwrap();
        let kind = if circle == "great" {
            CircleKind::Great
        } else {
            CircleKind::Small
        };
        let direct = fit_regression(&thetas, &x, 8, kind, &Estimator::Ols).unwrap();
        let preds = predictions(dir.path());
        assert_eq!(preds.predictions.len(), 31);
        for (p, f) in preds.predictions.iter().zip(&direct.forecasts) {
            assert_eq!(p.params, f.params.to_real(), "{circle} row {}", p.index);
        }
        assert_eq!(report.rows[0].tests.loglik, Some(direct.validation.loglik));
    }
}

#[test]
fn time_series_round_trip_is_bit_exact() {
    let dir = TempDir::new().unwrap();
    let wind = fixture("wind.csv");
    let fit = dir.path().join("fit.json");
    ok(&[
        "fit",
        "-i",
        s(&wind),
        "--units",
        "deg",
        "--m",
        "4",
        "--ar-order",
        "2",
        "--out",
        s(dir.path()),
    ]);
    ok(&["predict", "-i", s(&wind), "--report", s(&fit), "--out", s(dir.path())]);
    let thetas = Table::read(&wind).unwrap().angles("direction_deg", Units::Deg).unwrap();
    let direct = fit_time_series(&thetas, 4, CircleKind::Great, 2).unwrap();
    let preds = predictions(dir.path());
    // in-sample one-step forecasts plus the forecast for the next hour
    assert_eq!(preds.predictions.len(), direct.forecasts.len() + 1);
    for (p, f) in preds.predictions.iter().zip(&direct.forecasts) {
        assert_eq!(p.params, f.params.to_real());
    }
    assert_eq!(preds.predictions.last().unwrap().index, 72);
}

#[test]
fn fit_output_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let peri = fixture("periwinkle.csv");
    for dir in [&a, &b] {
        ok(&[
            "fit",
            "-i",
            s(&peri),
            "--formula",
            FORMULA,
            "--alpha-penalty",
            "1",
            "--lambda",
            "1se",
            "--seed",
            "7",
            "--out",
            s(dir.path()),
        ]);
    }
    for name in ["fit.json", "fit.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
    let report = FitReport::read(&a.path().join("fit.json")).unwrap();
    assert_eq!(report.rows.len(), 8);
    assert!(report
        .rows
        .iter()
        .all(|r| r.lambda.is_some() && r.r2_uncentered.is_none()));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = s(dir.path());
    let peri = fixture("periwinkle.csv");
    let p = s(&peri);
    // usage
    assert_eq!(code(&["fit"]), 1);
    assert_eq!(code(&["fit", "-i", p, "--out", out]), 1);
    assert_eq!(
        code(&["fit", "-i", p, "--formula", "distance", "--ar-order", "1", "--out", out]),
        1
    );
    assert_eq!(
        code(&[
            "fit",
            "-i",
            p,
            "--formula",
            "distance",
            "--alpha-penalty",
            "1.5",
            "--out",
            out
        ]),
        1
    );
    assert_eq!(
        code(&["fit", "-i", p, "--formula", "distance", "--m", "0..2", "--out", out]),
        1
    );
    assert_eq!(code(&["fit", "-i", p, "--formula", "depth", "--out", out]), 1);
    assert_eq!(code(&["fit", "-i", p, "--formula", "distance +", "--out", out]), 1);
    // data
    assert_eq!(
        code(&[
            "fit",
            "-i",
            "/nonexistent/data.csv",
            "--formula",
            "distance",
            "--out",
            out
        ]),
        2
    );
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "distance,direction_deg\n10,40\n12,abc\n30,80\n").unwrap();
    let run = nnts(&["fit", "-i", s(&bad), "--formula", "distance", "--out", out]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("line 3"));
    // numerical: an all-zero regressor has no least-squares solution
    assert_eq!(
        code(&["fit", "-i", p, "--formula", "distance*0", "--m", "1", "--out", out]),
        3
    );
    // the failed runs leave nothing behind
    assert!(!dir.path().join("fit.json").exists());
}

#[test]
fn validate_matches_fit() {
    let dir = TempDir::new().unwrap();
    let peri = fixture("periwinkle.csv");
    fit_periwinkle(dir.path(), "small", "1..8");
    let fit = dir.path().join("fit.json");
    ok(&[
        "validate",
        "-i",
        s(&peri),
        "--report",
        s(&fit),
        "--m",
        "8",
        "--out",
        s(dir.path()),
    ]);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("validation.json")).unwrap()).unwrap();
    let report = FitReport::read(&fit).unwrap();
    let row = report.row(8).unwrap();
    assert_eq!(v["rows"][0]["tests"]["loglik"].as_f64(), row.tests.loglik);
    assert_eq!(v["rows"][0]["tests"]["p_range"].as_f64(), Some(row.tests.p_range));
    let uniform = v["uniform"]["tests"]["loglik"].as_f64().unwrap();
    assert!((uniform + 31.0 * TAU.ln()).abs() < 1e-12);
    let csv = std::fs::read_to_string(dir.path().join("fit.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 1 + 8);
    assert!(csv.lines().nth(1).unwrap().starts_with("0,"));
}

#[test]
fn plots_are_written() {
    let dir = TempDir::new().unwrap();
    let peri = fixture("periwinkle.csv");
    fit_periwinkle(dir.path(), "small", "8");
    let fit = dir.path().join("fit.json");
    let args = [
        "nnts",
        "plot",
        "-i",
        s(&peri),
        "--report",
        s(&fit),
        "--out",
        s(dir.path()),
    ];
    ok(&args[1..]);
    for name in [
        "uniform.svg",
        "density_m8.svg",
        "scatter_m8_x1.svg",
        "mean_m8.svg",
        "variance_m8.svg",
    ] {
        let svg = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"), "{name}");
    }
    let Cli {
        command: nnts::cli::Command::Plot(plot),
        ..
    } = Cli::parse_from(args)
    else {
        unreachable!()
    };
    let figs = plot_figures(&plot).unwrap();
    let get = |n: &str| &figs.iter().find(|(name, _)| name == n).unwrap().1.series[0].points;
    assert!(get("uniform.svg").iter().all(|p| (p.1 - 1.0 / TAU).abs() < 1e-15));
    // mean direction in degrees is flat past distance 27, near 82°
    let past: Vec<f64> = get("mean_m8.svg").iter().filter(|p| p.0 > 27.0).map(|p| p.1).collect();
    assert!(!past.is_empty());
    assert!(
        past.iter()
            .all(|v| (v - past[0]).abs() < 1e-9 && (v - 82.0).abs() < 3.0),
        "{past:?}"
    );
}

#[test]
fn simulate_writes_tables() {
    let dir = TempDir::new().unwrap();
    ok(&[
        "simulate",
        "--case",
        "3",
        "--n",
        "200",
        "--m",
        "1..2",
        "--replicates",
        "5",
        "--seed",
        "3",
        "--out",
        s(dir.path()),
    ]);
    let csv = std::fs::read_to_string(dir.path().join("simulation.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("case,circle,eigenvectors,n,m,beta1"));
    assert_eq!(lines.count(), 1);
    assert!(dir.path().join("simulation.json").exists());
    assert_eq!(code(&["simulate", "--case", "9", "--out", s(dir.path())]), 1);
}
