use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superint"))
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, cfg: &Value) -> PathBuf {
    let path = dir.path().join("run.json");
    fs::write(&path, serde_json::to_vec_pretty(cfg).unwrap()).unwrap();
    path
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn simulate_harmonic_matches_cosine() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        &json!({
            "params": {"N": 1, "n": [1], "k": [0.0], "omega": 1.0},
            "state": {"q": [1.0], "p": [0.0]},
            "integrator": {"method": "yoshida4", "dt": 1e-3, "t_end": 2.0 * TAU}
        }),
    );
    let out = dir.path().join("out");
    let o = run("simulate", &cfg, &out, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x1,p1"));
    let mut rows = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((v[1] - v[0].cos()).abs() < 1e-6, "{line}");
        rows += 1;
    }
    assert!(rows > 12_000);

    let meta = read_json(out.join("trajectory.json"));
    assert_eq!(meta["method"], "yoshida4");
    assert_eq!(meta["dt"], 1e-3);
    assert_eq!(meta["seed"], 0);
    assert_eq!(meta["config"]["params"]["n"], json!([1]));
    assert!(meta["version"].is_string());
}

#[test]
fn missing_config_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = run("simulate", &dir.path().join("nope.json"), dir.path(), &[]);
    assert_eq!(code(&o), 3);
    assert!(!o.stderr.is_empty());
}

#[test]
fn malformed_and_conflicting_configs_exit_3() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{ not json").unwrap();
    assert_eq!(code(&run("verify", &path, dir.path(), &[])), 3);

    let both = write_config(
        &dir,
        &json!({
            "params": {"N": 1, "n": [1], "k": [0.0], "omega": 1.0},
            "state": {"q": [1.0], "p": [0.0]},
            "sampler": {}
        }),
    );
    assert_eq!(code(&run("simulate", &both, dir.path(), &[])), 3);
}

#[test]
fn unknown_subcommand_exits_3_and_help_exits_0() {
    let bin = env!("CARGO_BIN_EXE_superint");
    let o = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(code(&o), 3);
    let o = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(code(&o), 0);
}

#[test]
fn crossing_the_exclusion_radius_exits_2_with_the_time() {
    let dir = TempDir::new().unwrap();
    // Pericentre of this orbit is near x = 0.30, inside the radius 0.5.
    let cfg = write_config(
        &dir,
        &json!({
            "params": {"N": 1, "n": [1], "k": [1.0], "omega": 1.0, "exclusion_radius": 0.5},
            "state": {"q": [1.0], "p": [-3.0]},
            "integrator": {"dt": 1e-3, "t_end": 3.0}
        }),
    );
    let o = run("simulate", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(code(&o), 2);
    let msg = String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("exclusion radius") && msg.contains("t = 0."), "{msg}");
}

fn verify_config(n: &[u32], k: &[f64], dt_fraction: f64) -> Value {
    json!({
        "params": {"N": n.len(), "n": n, "k": k, "omega": 1.0},
        "sampler": {},
        "seed": 1,
        "integrator": {"method": "yoshida4", "dt": dt_fraction * TAU}
    })
}

#[test]
fn verify_passes_on_the_k2_zero_case() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, &verify_config(&[1, 2], &[1.0, 0.0], 2.5e-4));
    let out = dir.path().join("out");
    let o = run("verify", &cfg, &out, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report = read_json(out.join("report.json"));
    assert_eq!(report["report"]["passed"], true);
    assert_eq!(report["report"]["rank"]["rank"], 3);
    assert_eq!(report["config"]["seed"], 1);
}

#[test]
fn verify_fails_when_the_integrals_are_corrupted() {
    let dir = TempDir::new().unwrap();
    let mut cfg = verify_config(&[1, 2], &[1.0, 0.0], 2.5e-4);
    cfg["perturb_k"] = json!(0.05);
    let cfg = write_config(&dir, &cfg);
    let o = run("verify", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn verify_three_planes_reports_rank_five() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, &verify_config(&[1, 2, 2], &[0.7, 1.3, 0.4], 1e-4));
    let out = dir.path().join("out");
    let o = run("verify", &cfg, &out, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report = read_json(out.join("report.json"));
    assert_eq!(report["report"]["rank"]["rank"], 5);
    assert_eq!(report["report"]["rank"]["expected"], 5);
}

#[test]
fn scan_streams_one_line_per_point_and_summarises() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        &json!({
            "sampler": {},
            "seed": 3,
            "integrator": {"dt": 2.5e-4 * TAU},
            "suites": {"reduce_check": false, "period": false},
            "samples": 20,
            "rank_states": 5,
            "grid": {"n": [[1, 1], [1, 2]], "k": [[0.5, 1.0], [1.0]], "omega": [1.0]}
        }),
    );
    let out = dir.path().join("out");
    let o = run("scan", &cfg, &out, &[]);
    let jsonl = fs::read_to_string(out.join("scan.jsonl")).unwrap();
    let lines: Vec<Value> = jsonl.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0]["points"], 4);
    assert_eq!(lines[0]["config"]["seed"], 3);
    for (i, entry) in lines[1..].iter().enumerate() {
        assert_eq!(entry["index"], i);
    }
    // Points 1 and 3 pair two-plane n with a one-element k.
    assert!(lines[2]["error"].is_string() && lines[4]["error"].is_string());
    assert_eq!(lines[1]["report"]["passed"], true);
    assert_eq!(lines[3]["report"]["passed"], true);

    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("passed 2 of 4; failed 0; errors 2"), "{stdout}");
    assert_eq!(code(&o), 1);
}

#[test]
fn reduce_check_within_bound_exits_0() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        &json!({
            "params": {"N": 2, "n": [1, 2], "k": [0.5, 0.8], "omega": 1.0},
            "state": {"q": [1.1, 0.7], "p": [0.3, -0.4]},
            "integrator": {"dt": 2.5e-4 * TAU},
            "reduce_bound": 1e-6
        }),
    );
    let out = dir.path().join("out");
    let o = run("reduce-check", &cfg, &out, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report = read_json(out.join("reduce_check.json"));
    assert!(report["report"]["max_dev"].as_f64().unwrap() < 1e-6);
    assert_eq!(report["report"]["pass"], true);
    assert!(report["report"]["compared_until"].as_f64().unwrap() > 4.99 * TAU);
}

#[test]
fn reduce_check_above_bound_exits_1() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        &json!({
            "params": {"N": 2, "n": [1, 2], "k": [0.5, 0.8], "omega": 1.0},
            "state": {"q": [1.1, 0.7], "p": [0.3, -0.4]},
            "integrator": {"method": "verlet2", "dt": 1e-2},
            "reduce_bound": 1e-12
        }),
    );
    assert_eq!(code(&run("reduce-check", &cfg, &dir.path().join("out"), &[])), 1);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        &json!({
            "params": {"N": 2, "n": [1, 2], "k": [1.0, 0.0], "omega": 1.0},
            "sampler": {},
            "integrator": {"dt": 2.5e-4 * TAU, "t_end": 2.0 * TAU},
            "samples": 20,
            "rank_states": 5
        }),
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(code(&run("simulate", &cfg, out, &["--seed", "7"])), 0);
        run("verify", &cfg, out, &["--seed", "7"]);
    }
    for file in ["trajectory.csv", "trajectory.json", "report.json"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    // The override is what gets recorded.
    assert_eq!(read_json(a.join("report.json"))["config"]["seed"], 7);

    let c = dir.path().join("c");
    run("simulate", &cfg, &c, &["--seed", "8"]);
    assert_ne!(fs::read(a.join("trajectory.csv")).unwrap(), fs::read(c.join("trajectory.csv")).unwrap());
}
