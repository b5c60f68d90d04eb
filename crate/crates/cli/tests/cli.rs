use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn zeno(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeno"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn golden_headers() {
    let sweep = stdout(&zeno(&["sweep", "--n-max", "2"]));
    assert_eq!(
        sweep.lines().next(),
        Some("n,p_exact,p_first_order,p_dominant,p_ideal")
    );
    let table = stdout(&zeno(&["table1"]));
    assert_eq!(
        table.lines().next(),
        Some("t_up2,n_opt_estimate,n_opt_exact,p_estimate,p_exact")
    );
    let opt = stdout(&zeno(&["opt", "--t-up2", "0.99", "--format", "csv"]));
    assert_eq!(
        opt.lines().next(),
        Some("theta,t_up_mod2,n_opt_exact,p_at_exact,n_opt_estimate,p_estimate,search_ceiling,ceiling_hit,no_finite_optimum")
    );
}

#[test]
fn table1_rows() {
    let table = stdout(&zeno(&["table1"]));
    let expected = [
        ("0.99", "16", "16", 0.69, 0.73),
        ("0.999", "50", "50", 0.90, 0.91),
        ("0.9999", "157", "157", 0.97, 0.97),
    ];
    let got = rows(&table);
    assert_eq!(got.len(), 3);
    for (row, (t, est, exact, p_est, p_exact)) in got.iter().zip(expected) {
        assert_eq!(
            (row[0].as_str(), row[1].as_str(), row[2].as_str()),
            (t, est, exact)
        );
        assert!((row[3].parse::<f64>().unwrap() - p_est).abs() <= 0.005);
        assert!((row[4].parse::<f64>().unwrap() - p_exact).abs() <= 0.005);
    }
}

#[test]
fn ideal_sweep_rises_from_zero() {
    let sweep = stdout(&zeno(&["sweep", "--n-max", "10"]));
    let got = rows(&sweep);
    assert_eq!(got.len(), 10);
    assert_eq!(got[0][2], "", "first-order column is empty at N = 1");
    let p: Vec<f64> = got.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(p[0] < 1e-30);
    assert!(p.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn lossy_sweep_peaks_once() {
    let sweep = stdout(&zeno(&["sweep", "--t-up2", "0.9999", "--n-max", "1000"]));
    let p: Vec<f64> = rows(&sweep).iter().map(|r| r[1].parse().unwrap()).collect();
    let peaks: Vec<usize> = (1..p.len() - 1)
        .filter(|&i| p[i] > p[i - 1] && p[i] >= p[i + 1])
        .collect();
    assert_eq!(peaks, vec![156]);
}

#[test]
fn down_transmission_barely_moves_the_curve() {
    let base = stdout(&zeno(&["sweep", "--t-up2", "0.999", "--n-max", "300"]));
    for down2 in ["0.0001", "0.01"] {
        let other = stdout(&zeno(&[
            "sweep",
            "--t-up2",
            "0.999",
            "--t-down2",
            down2,
            "--phase-down",
            "-1.2",
            "--n-max",
            "300",
        ]));
        let bound = 10.0 * (down2.parse::<f64>().unwrap() / 0.999).sqrt();
        for (a, b) in rows(&base).iter().zip(rows(&other)) {
            let (pa, pb): (f64, f64) = (a[1].parse().unwrap(), b[1].parse().unwrap());
            assert!((pa - pb).abs() <= bound);
        }
    }
}

#[test]
fn worked_estimate_report() {
    let r = json(&zeno(&["opt", "--t-up2", "0.99975"]));
    assert_eq!(r["n_opt_estimate"], 99);
    assert!((r["p_estimate"].as_f64().unwrap() - 0.95).abs() <= 0.005);
    assert_eq!(r["ceiling_hit"], false);
}

#[test]
fn ideal_mirror_has_no_finite_optimum() {
    let r = json(&zeno(&["opt"]));
    assert_eq!(r["no_finite_optimum"], true);
    assert_eq!(r["ceiling_hit"], true);
}

#[test]
fn small_spin_flips_shift_the_optimum_little() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "flip.toml",
        "t_up_up2 = 0.999\nt_down_up2 = 1e-4\nt_down_up_phase = 0.7\nr_down_down2 = 0.9999\n",
    );
    let flip = json(&zeno(&["opt", "--config", &cfg]));
    let diag = json(&zeno(&["opt", "--t-up2", "0.999"]));
    let (a, b) = (
        flip["n_opt_exact"].as_i64().unwrap(),
        diag["n_opt_exact"].as_i64().unwrap(),
    );
    assert!((a - b).abs() <= 2, "{a} vs {b}");
}

#[test]
fn general_reports() {
    let dir = tempfile::tempdir().unwrap();
    let lossless = write_config(
        dir.path(),
        "a1.toml",
        "a = 1.0\nb = -0.1\nalpha1 = 0.5\nt_total = 2.0\n",
    );
    let r = json(&zeno(&["general", "--config", &lossless]));
    assert!((r["p_opt"].as_f64().unwrap() - (-0.1f64).exp()).abs() <= 1e-12);
    assert!(r["n_opt"].is_null());
    assert!(r["note"].as_str().unwrap().contains("infinite frequency"));

    let table = write_config(dir.path(), "t.toml", "a = 0.9999\n");
    let r = json(&zeno(&["general", "--config", &table]));
    assert_eq!(r["n_opt"].as_f64().unwrap().round(), 157.0);
    let (n, star) = (r["n_opt"].as_f64().unwrap(), r["n_star"].as_f64().unwrap());
    assert!((n - star).abs() <= 0.1 * star);
    assert!(r["stationarity_residual"].as_f64().unwrap().abs() <= 1e-2);
}

#[test]
fn flags_override_file_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "t_up2 = 0.99\ntheta = 1.0\n");
    let r = json(&zeno(&[
        "opt",
        "--config",
        &cfg,
        "--t-up2",
        "0.999",
        "--theta",
        "1.5707963267948966",
    ]));
    assert_eq!(r["t_up_mod2"].as_f64().unwrap(), 0.999);
    assert_eq!(r["n_opt_exact"], 50);
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), "u.toml", "t_upp2 = 0.9\n");
    let out = zeno(&["sweep", "--config", &unknown]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("t_upp2"));

    let out = zeno(&["opt", "--n-min", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("n_min"));

    let out = zeno(&["sweep", "--t-up2", "1.5"]);
    assert_eq!(out.status.code(), Some(1));

    let out = zeno(&["sweep", "--format", "xml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn io_errors() {
    let out = zeno(&["sweep", "--config", "/nonexistent/zeno.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let out = zeno(&["sweep", "--n-max", "3", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "k.toml", "a = 0.3\n");
    let out = zeno(&["general", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<_> = (0..2)
        .map(|i| {
            let path = dir.path().join(format!("run{i}.csv"));
            let p = path.to_string_lossy().into_owned();
            stdout(&zeno(&[
                "sweep",
                "--t-up2",
                "0.999",
                "--t-down2",
                "0.001",
                "--n-max",
                "500",
                "--out",
                &p,
            ]));
            fs::read(path).unwrap()
        })
        .collect();
    assert_eq!(files[0], files[1]);
    let text = String::from_utf8(files[0].clone()).unwrap();
    assert_eq!(text.lines().count(), 501);
}

#[test]
fn json_sweep_marks_missing_first_order_as_null() {
    let r = json(&zeno(&["sweep", "--n-max", "2", "--format", "json"]));
    assert!(r[0]["p_first_order"].is_null());
    assert_eq!(r[1]["n"], 2);
}
