use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_narrow-escape")).args(args).env_remove("RAYON_NUM_THREADS").output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn mfpt_asymptotic_records() {
    let v = json(&bin(&["mfpt", "--eps", "0.1", "--method", "asymptotic", "--start", "center"]));
    assert_eq!(v["value"], 3.24573227);
    assert_eq!(v["error_order"], "O(eps)");
    assert_eq!(v["asymptotic"]["leading"], 2.30258509);
    assert_eq!(v["manifest"]["command"]["name"], "mfpt");
    assert!(v["manifest"]["timestamp"].is_string() && v["manifest"]["version"].is_string());
    let m = json(&bin(&["mfpt", "--eps", "0.1", "--method", "asymptotic", "--start", "max"]));
    assert_eq!(m["value"], 3.68887945);
}

#[test]
fn mfpt_series_and_rescaling() {
    let v = json(&bin(&["mfpt", "--eps", "0.1", "--method", "series", "--start", "center", "--radius", "2", "--diffusivity", "0.5"]));
    let value = v["value"].as_f64().unwrap();
    assert!((value - 3.245732).abs() <= 0.2);
    let phys = v["value_physical"].as_f64().unwrap();
    assert!((phys - 8.0 * value).abs() <= 1e-7 * phys);
    let p = json(&bin(&["mfpt", "--eps", "0.2", "--method", "grid", "--start", "point", "--r", "0.5", "--theta", "1", "--n-r", "64", "--n-theta", "256"]));
    assert!(p["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["mfpt", "--eps", "0.1", "--method", "bogus"],
        vec!["mfpt", "--eps", "0.1", "--start", "point", "--r", "0.5"],
        vec!["mfpt", "--eps", "0.1", "--method", "asymptotic", "--start", "point", "--r", "0.5", "--theta", "0"],
        vec!["mfpt", "--eps", "4", "--method", "series"],
        vec!["mfpt", "--eps", "0.1", "--threads", "0"],
        vec!["sweep", "--eps", "0.1"],
    ] {
        let out = bin(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn sweep_csv_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let run = bin(&["sweep", "--eps", "0.2,0.1,0.05", "--methods", "asymptotic,series", "--out", path(&out), "--threads", "1"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eps,method,start,value,stderr,order");
    assert_eq!(lines.len(), 7);
    for method in ["asymptotic", "series"] {
        let values: Vec<f64> = lines[1..]
            .iter()
            .map(|l| l.split(',').collect::<Vec<_>>())
            .filter(|f| f[1] == method)
            .map(|f| f[3].parse().unwrap())
            .collect();
        assert_eq!(values.len(), 3);
        assert!(values.windows(2).all(|w| w[0] < w[1]), "{method}: {values:?}");
    }
    let sidecar = dir.path().join("sweep.csv.manifest.json");
    let manifest = std::fs::read(&sidecar).unwrap();

    let replayed = dir.path().join("replayed.csv");
    let r = bin(&["replay", path(&sidecar), "--out", path(&replayed), "--threads", "8"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(std::fs::read(&replayed).unwrap(), text.as_bytes());
    assert_eq!(std::fs::read(dir.path().join("replayed.csv.manifest.json")).unwrap(), manifest);

    // replay to the sidecar's own target
    std::fs::remove_file(&out).unwrap();
    assert!(bin(&["replay", path(&sidecar)]).status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), text);
}

#[test]
fn mc_record_replays_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("mc.json");
    let out = bin(&["mfpt", "--eps", "0.3", "--method", "mc", "--paths", "300", "--dt", "1e-3", "--seed", "9", "--threads", "1", "--out", path(&first)]);
    let v = json(&out);
    assert!(v["stderr"].as_f64().unwrap() > 0.0);
    assert_eq!(v["details"]["n_absorbed"], 300);
    let again = bin(&["replay", path(&first), "--threads", "8"]);
    assert!(again.status.success());
    assert_eq!(again.stdout, std::fs::read(&first).unwrap());
}

#[test]
fn flux_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("flux.csv");
    let v = json(&bin(&["flux", "--eps", "0.1", "--out", path(&out)]));
    let cons = v["conservation"].as_f64().unwrap();
    assert!((cons + std::f64::consts::PI).abs() <= 0.02 * std::f64::consts::PI);
    let f0 = v["f_asymptotic_center"].as_f64().unwrap();
    assert!((f0 + 10.0).abs() < 0.1);
    assert!(v["f_asymptotic_0_99"].as_f64().unwrap().abs() > f0.abs());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "alpha,f_asymptotic,f_series");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 201);
    assert_eq!(rows[0][0], -0.999);
    assert_eq!(rows[200][0], 0.999);
    let center = &rows[100];
    assert_eq!(center[0], 0.0);
    assert!((center[1] + 10.0).abs() < 0.1 && (center[2] + 10.0).abs() < 0.5, "{center:?}");
    assert!(dir.path().join("flux.csv.manifest.json").exists());
}

#[test]
fn validate_reduced_suite() {
    let out = bin(&["validate", "--paths", "20000", "--dt", "1e-3"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}\n{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 9, "{text}");
    assert!(text.contains("0.443147"));
}
