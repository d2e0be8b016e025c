use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn skewspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skewspec"))
        .args(args)
        .env_remove("SKEWSPEC_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn sidecar(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn usage_and_validation_exit_codes() {
    let o = skewspec(&[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));

    let o = skewspec(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for cmd in ["density", "edges", "resonance-grid", "suitability-grid", "trace-curve", "fastvar-check", "perturb-suite", "good-x"] {
        assert!(stdout(&o).contains(cmd), "{cmd} missing from help");
    }
    let o = skewspec(&["resonance-grid", "--help"]);
    for flag in ["--window", "--E", "--nx", "--ny", "--tol", "--h", "--threads", "--out", "--seed"] {
        assert!(stdout(&o).contains(flag), "{flag} missing from help");
    }

    assert_eq!(skewspec(&["edges", "--bogus"]).status.code(), Some(2));
    assert_eq!(skewspec(&["edges", "--h", "-1"]).status.code(), Some(2));
    assert_eq!(skewspec(&["density", "--N", "1"]).status.code(), Some(2));
    assert_eq!(skewspec(&["--threads", "0", "edges"]).status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_3() {
    let o = skewspec(&["trace-curve", "--E", "100", "--nx", "10"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn density_defaults_and_csv() {
    let o = skewspec(&["density", "--N", "20,40"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,delta,E_low,E_high,runtime_s,delta_naive,max_span"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "20");
    assert_eq!(rows[1][0], "40");
    for r in &rows {
        let delta: f64 = r[1].parse().unwrap();
        assert!(delta > 0.0 && delta < 4.0);
    }
}

#[test]
fn edges_report() {
    let o = skewspec(&["edges", "--h", "0.1", "--N", "200"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let col = |name: &str| -> f64 { row[header.iter().position(|h| *h == name).unwrap()].parse().unwrap() };
    assert!(col("emax_N") >= 2.1 - 1e-3 && col("emax_N") <= 2.2);
    assert!(col("emin_N") >= -2.2 && col("emin_N") <= -2.1 + 1e-3);
}

#[test]
fn grid_outputs_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let out = dir.path().join(name);
        let o = skewspec(&[
            "--threads", threads, "--out", out.to_str().unwrap(),
            "resonance-grid", "--nx", "64", "--ny", "48",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let one = run("1", "one.pgm");
    let three = run("3", "three.pgm");
    let a = std::fs::read(&one).unwrap();
    assert_eq!(a, std::fs::read(&three).unwrap());

    let header = b"P5\n64 48\n255\n";
    assert_eq!(&a[..header.len()], header);
    assert_eq!(a.len(), header.len() + 64 * 48);
    assert!(a[header.len()..].iter().all(|&v| v == 0 || v == 255));

    let meta = sidecar(&dir.path().join("one.pgm.json"));
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(meta["threads"], 1);
    assert_eq!(meta["seed"], 0);
    assert!(meta["model"]["h"].as_f64().unwrap() == 0.1);
    assert!(meta["command"].to_string().contains("64"));
    assert_eq!(sidecar(&dir.path().join("three.pgm.json"))["threads"], 3);
}

#[test]
fn csv_grid_and_explicit_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.csv");
    let meta = dir.path().join("meta.json");
    let o = skewspec(&[
        "suitability-grid", "--N", "2", "--nx", "12", "--ny", "10",
        "--out", out.to_str().unwrap(), "--sidecar", meta.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 12 * 10);
    assert!(!dir.path().join("grid.csv.json").exists());
    let m = sidecar(&meta);
    assert!(m["summary"]["unsuitable_measure"].is_number());
}

#[test]
fn threads_env_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_skewspec"))
        .args(["--threads", "1", "--out", out.to_str().unwrap(), "edges", "--N", "50"])
        .env("SKEWSPEC_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(sidecar(&dir.path().join("e.csv.json"))["threads"], 2);
}

#[test]
fn suites_are_seed_deterministic() {
    let args = ["--seed", "7", "perturb-suite", "--cases", "5"];
    let a = skewspec(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = Command::new(env!("CARGO_BIN_EXE_skewspec"))
        .args(args)
        .env("SKEWSPEC_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("suite,case,value,bound,pass\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true") || l.ends_with(",1")), "{text}");
}

#[test]
fn sampling_function_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.json");
    std::fs::write(&f, r#"{"coeffs": [[1, 1.0, 0.0]], "loja_F": 1.0, "loja_exp": 1.0}"#).unwrap();
    let from_file = skewspec(&["edges", "--N", "40", "--f", f.to_str().unwrap()]);
    let builtin = skewspec(&["edges", "--N", "40", "--amplitude", "2"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, builtin.stdout);

    std::fs::write(&f, "{").unwrap();
    assert_eq!(skewspec(&["edges", "--f", f.to_str().unwrap()]).status.code(), Some(2));
}
