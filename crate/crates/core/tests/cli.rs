use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rmtedge"));
    c.env_remove("RMTEDGE_THREADS").env_remove("RMTEDGE_OUTPUT_DIR");
    c
}

fn two_atom() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/two_atom_cusp.json")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Splits a CSV emission into its provenance header and body.
fn split(text: &str) -> (serde_json::Value, &str) {
    let (head, body) = text.split_once('\n').unwrap();
    let prov = serde_json::from_str(head.strip_prefix("# ").expect("provenance line")).unwrap();
    (prov, body)
}

#[test]
fn quick_validation_passes() {
    let o = run(&["validate", "--quick"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    let (_, body) = split(&text);
    assert!(body.starts_with("check,status,detail"));
    assert!(body.lines().skip(1).all(|l| l.contains(",PASS,")));
}

#[test]
fn density_csv_has_provenance() {
    let spec = two_atom();
    let o = run(&["density", "--spec", spec.to_str().unwrap(), "--range", "0:4", "--points", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let (prov, body) = split(&text);
    assert_eq!(prov["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(prov["config_hash"].as_str().unwrap().len(), 64);
    assert!(prov.get("seed").is_some());
    let rows: Vec<Vec<f64>> = body
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r[1] >= 0.0));
    // one bump on each side of the cusp near 1.876
    assert!(rows.iter().any(|r| r[0] > 1.88 && r[1] > 0.01));
}

#[test]
fn identical_configs_give_identical_bodies() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = run(&["-o", p.to_str().unwrap(), "simulate", "--N", "12", "--reps", "40", "--seed", "11"]);
        assert_eq!(o.status.code(), Some(0));
    }
    let ta = std::fs::read_to_string(&a).unwrap();
    let tb = std::fs::read_to_string(&b).unwrap();
    assert_eq!(ta, tb);
    let o = run(&["-o", b.to_str().unwrap(), "simulate", "--N", "12", "--reps", "40", "--seed", "12"]);
    assert_eq!(o.status.code(), Some(0));
    let tc = std::fs::read_to_string(&b).unwrap();
    assert_ne!(split(&ta).0["config_hash"], split(&tc).0["config_hash"]);
    assert_eq!(split(&tc).0["seed"], 12);
}

#[test]
fn hard_edge_expansion_residuals_shrink() {
    let body_for = |n: &str| {
        let o = run(&["hard-edge", "--expansion", "--alpha", "2", "--N", n, "--s", "1:9:9"]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        let (_, body) = split(&text);
        assert!(body.starts_with("s,F_alpha,correction,prediction,finiteN_det,residual"));
        body.lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
            .collect::<Vec<_>>()
    };
    let r100 = body_for("100");
    let r200 = body_for("200");
    assert_eq!(r100.len(), 9);
    // s = 1 and s = 4 sit away from the sign change of the residual
    for i in [0, 3] {
        let ratio = r100[i] / r200[i];
        assert!((3.2..=4.8).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn show_config_prints_defaults() {
    let o = run(&["hard-edge", "--show-config"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["command"], "hard-edge");
    assert_eq!(v["hard_edge"]["alpha"], 2);
    assert_eq!(v["hard_edge"]["N"], 100);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"command":"pearcey","pearcey":{"order":40,"typo":1}}"#).unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["density"]).status.code(), Some(2));
    assert_eq!(run(&["pearcey", "--order", "2"]).status.code(), Some(2));
    assert_eq!(run(&["hard-edge", "--s", "0:1"]).status.code(), Some(2));
    assert_eq!(run(&["--no-such-flag"]).status.code(), Some(2));
    assert_eq!(run(&["density", "--spec", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"command":"pearcey","pearcey":{"tau":1.0,"grid_points":3}}"#).unwrap();
    let o = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(split(&text).1.lines().count(), 1 + 9);
    let o = run(&["--config", cfg.to_str().unwrap(), "pearcey", "--gap", "--s=-1", "--t", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = split(&text).1.lines().nth(1).unwrap().to_string();
    let det: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!(det > 0.0 && det < 1.0);
}

#[test]
fn output_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .env("RMTEDGE_OUTPUT_DIR", dir.path())
        .args(["-o", "grid.csv", "pearcey", "--grid=-1:1:2"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("grid.csv").exists());
}

#[test]
fn numerical_failures_exit_three() {
    let o = run(&["pearcey", "--grid=-40:40:3"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
