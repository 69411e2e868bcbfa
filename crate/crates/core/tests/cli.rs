use std::path::Path;
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

fn hexsep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hexsep"))
        .args(args)
        .env_remove("HEXSEP_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Horizontal band of regular points plus planted outliers on both sides.
fn two_band(path: &Path, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::from("x,y,z\n");
    for _ in 0..300 {
        let x: f64 = rng.random();
        let y = 0.5 + rng.random_range(-0.01..0.01);
        text += &format!("{x},{y},{}\n", rng.random::<f64>() * 1e-3);
    }
    for k in 0..20 {
        let x: f64 = rng.random();
        let side = if k % 2 == 0 { 1.0 } else { -1.0 };
        let y = 0.5 + side * rng.random_range(0.15..0.2);
        text += &format!("{x},{y},{}\n", rng.random::<f64>() * 1e-3);
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn threshold_rows() {
    let o = hexsep(&["threshold", "--M", "10", "--N", "3"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let s = header.iter().position(|h| *h == "s").unwrap();
    assert_eq!(row[s], "180");

    let o = hexsep(&["threshold", "--M", "8", "--rho", "0.5", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["k"], 9);

    let o = hexsep(&["threshold", "--M", "4", "--N", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("N > M"));
}

#[test]
fn simulate_is_worker_independent() {
    let dir = TempDir::new().unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "8"] {
        let out = dir.path().join(format!("w{workers}.csv"));
        let o = hexsep(&[
            "simulate", "--n", "60", "--trials", "40", "--radii", "0.05,0.1,0.15,0.2,0.3", "--workers", workers,
            "--seed", "3", "--output", path_str(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(std::fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn hex_estimates_never_exceed_continuum() {
    let o = hexsep(&["simulate", "--n", "50", "--rho", "0.6", "--mode", "both", "--trials", "50"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    let (cont, hex): (Vec<_>, Vec<_>) = rows.iter().partition(|r| &r[2] == "continuum");
    assert_eq!(cont.len(), hex.len());
    assert!(!cont.is_empty());
    for (c, h) in cont.iter().zip(&hex) {
        assert_eq!(c[3], h[3]);
        assert!(h[5].parse::<f64>().unwrap() <= c[5].parse::<f64>().unwrap());
    }
}

#[test]
fn empty_radii_is_a_usage_error() {
    let o = hexsep(&["simulate", "--n", "50", "--radii", ""]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("radii list is empty"));
}

#[test]
fn seed_sources_in_order() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# defaults\nseed = 77\ntrials = 5\nradii = 0.2\n").unwrap();
    let seed_of = |o: &Output| {
        let out = stdout(o);
        out.lines().nth(1).unwrap().split(',').next_back().unwrap().to_string()
    };
    let base = ["simulate", "--n", "20", "--mode", "continuum"];

    let o = hexsep(&base);
    assert_eq!(seed_of(&o), "20240521");
    let o = Command::new(env!("CARGO_BIN_EXE_hexsep")).args(base).env("HEXSEP_SEED", "12").output().unwrap();
    assert_eq!(seed_of(&o), "12");
    let mut with_cfg = base.to_vec();
    with_cfg.extend(["--config", path_str(&cfg)]);
    let o = Command::new(env!("CARGO_BIN_EXE_hexsep")).args(&with_cfg).env("HEXSEP_SEED", "12").output().unwrap();
    assert_eq!(seed_of(&o), "77");
    assert_eq!(stdout(&o).lines().count(), 2);
    with_cfg.extend(["--seed", "4"]);
    let o = hexsep(&with_cfg);
    assert_eq!(seed_of(&o), "4");
}

#[test]
fn detect_separates_two_bands() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("bands.csv");
    let output = dir.path().join("report.json");
    two_band(&input, 5);
    let o = hexsep(&["detect", "--input", path_str(&input), "--header", "--output", path_str(&output)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&output).unwrap();
    let keys = [
        "\"version\"", "\"command\"", "\"input\"", "\"seed\"", "\"gamma\"", "\"separable\"", "\"transform\"",
        "\"points\"", "\"clusters\"", "\"hyperplane\"", "\"anomalies\"", "\"detector\"", "\"support_vectors\"",
        "\"warnings\"",
    ];
    let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));

    let v: Value = serde_json::from_str(&text).unwrap();
    assert!(v["version"].as_str().unwrap().starts_with("hexsep "));
    assert!(!v["anomalies"]["anomalous_points"].as_array().unwrap().is_empty());
    assert_eq!(v["detector"]["training_accuracy"], 1.0);
    let theta_gamma = v["detector"]["theta_gamma"].as_f64().unwrap();
    let d = v["anomalies"]["distances"].as_array().unwrap();
    for i in v["anomalies"]["anomalous_points"].as_array().unwrap() {
        assert!(d[i.as_u64().unwrap() as usize].as_f64().unwrap().abs() >= theta_gamma);
    }
    for i in v["anomalies"]["regular_points"].as_array().unwrap() {
        assert!(d[i.as_u64().unwrap() as usize].as_f64().unwrap().abs() < theta_gamma);
    }
    let x_star = &v["support_vectors"]["x_star"];
    assert!(v["support_vectors"]["equivalency_class"].as_array().unwrap().iter().any(|e| &e["index"] == x_star));

    let again = dir.path().join("again.json");
    hexsep(&["detect", "--input", path_str(&input), "--header", "--output", path_str(&again)]);
    assert_eq!(std::fs::read(&output).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn tight_blob_is_not_separable() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("blob.csv");
    let text: String = (0..40).map(|i| format!("{},{}\n", 0.5 + 1e-4 * i as f64, 0.5 - 1e-4 * i as f64)).collect();
    std::fs::write(&input, text).unwrap();
    let o = hexsep(&["detect", "--input", path_str(&input)]);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["separable"], false);
    assert!(v["anomalies"]["anomalous_points"].as_array().unwrap().is_empty());
    assert!(v["detector"].is_null());
    let o = hexsep(&["sv", "--input", path_str(&input)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_cell_names_its_position() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("bad.csv");
    std::fs::write(&input, "a,b\n0.1,0.2\n0.3,0.4\n0.5,oops\n").unwrap();
    let o = hexsep(&["detect", "--input", path_str(&input), "--header"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("row 4, column 2") && err.contains("oops"), "{err}");
}

#[test]
fn cluster_and_sv_reports() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("bands.csv");
    two_band(&input, 6);
    let o = hexsep(&["cluster", "--input", path_str(&input), "--header"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let assignment = v["clusters"]["assignment"].as_array().unwrap();
    assert_eq!(assignment.len(), 320);
    assert_eq!(v["transform"]["raw_dim"], 3);

    let cfg = dir.path().join("sv.cfg");
    std::fs::write(&cfg, format!("input={}\nheader=true\ngamma=0.9\n", input.display())).unwrap();
    let o = hexsep(&["sv", "--config", path_str(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["gamma"], 0.9);
    assert!(!v["support_vectors"]["anomaly_side"].as_array().unwrap().is_empty());
}
