use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use superint::analysis::{survey, verify, ReduceCheckReport, SurveyEntry, VerificationReport};
use superint::dynamics::{base_period, default_dt, integrate_oracle};
use superint::reduction::consistency_check;
use superint::{integrate, Method, PhasePoint, SystemKind, SystemParams};

use crate::config::RunConfig;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

fn write_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Write {
        path: path.display().to_string(),
        source,
    }
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(write_error(dir))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize");
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(write_error(path))
}

#[derive(Serialize)]
struct SimulateMeta<'a> {
    version: &'a str,
    config: &'a RunConfig,
    params: &'a SystemParams,
    system: SystemKind,
    method: Method,
    dt: Option<f64>,
    seed: u64,
    initial_state: &'a PhasePoint,
    samples: usize,
    csv: &'a str,
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let params = cfg.params()?;
    let s0 = cfg.initial_state(params);
    let t_end = cfg.integrator.t_end.unwrap_or(s0.t + base_period(params));
    let traj = match cfg.integrator.method {
        Method::OracleRK54 => integrate_oracle(params, cfg.system, &s0, t_end, cfg.integrator.tol)?,
        m => {
            let dt = cfg.integrator.dt.unwrap_or_else(|| default_dt(params));
            integrate(params, cfg.system, &s0, dt, t_end, m)?
        }
    };

    prepare_out(out)?;
    let csv_path = out.join("trajectory.csv");
    let file = fs::File::create(&csv_path).map_err(write_error(&csv_path))?;
    let mut w = BufWriter::new(file);
    traj.write_csv(&mut w).map_err(write_error(&csv_path))?;
    w.flush().map_err(write_error(&csv_path))?;

    let meta = SimulateMeta {
        version: VERSION,
        config: cfg,
        params,
        system: cfg.system,
        method: traj.method,
        dt: traj.dt,
        seed: cfg.seed,
        initial_state: &s0,
        samples: traj.len(),
        csv: "trajectory.csv",
    };
    write_json(&out.join("trajectory.json"), &meta)?;
    Ok(Outcome::Pass)
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    version: &'a str,
    config: &'a RunConfig,
    report: &'a T,
}

pub fn verify_cmd(cfg: &RunConfig, out: &Path) -> Result<(Outcome, VerificationReport), CliError> {
    let params = cfg.params()?;
    let initial = cfg.state.as_ref().map(|_| cfg.initial_state(params));
    let report = verify(params, cfg.system, initial, cfg.seed, &cfg.suite_config())?;
    prepare_out(out)?;
    write_json(
        &out.join("report.json"),
        &Envelope {
            version: VERSION,
            config: cfg,
            report: &report,
        },
    )?;
    let outcome = if report.passed { Outcome::Pass } else { Outcome::Fail };
    Ok((outcome, report))
}

#[derive(Serialize)]
struct ScanHeader<'a> {
    version: &'a str,
    config: &'a RunConfig,
    points: usize,
}

pub fn scan(cfg: &RunConfig, out: &Path) -> Result<(Outcome, Vec<SurveyEntry>), CliError> {
    if cfg.state.is_some() {
        return Err(CliError::Config(
            "scan draws its states from \"sampler\"; an explicit \"state\" cannot fit every grid point".into(),
        ));
    }
    let points = cfg.grid_points()?;
    let entries = survey(&points, cfg.system, cfg.seed, &cfg.suite_config());

    prepare_out(out)?;
    let path: PathBuf = out.join("scan.jsonl");
    let mut buf = Vec::new();
    let header = ScanHeader {
        version: VERSION,
        config: cfg,
        points: points.len(),
    };
    serde_json::to_writer(&mut buf, &header).expect("header serializes");
    buf.push(b'\n');
    for e in &entries {
        serde_json::to_writer(&mut buf, e).expect("survey entries serialize");
        buf.push(b'\n');
    }
    fs::write(&path, buf).map_err(write_error(&path))?;

    let all_pass = entries
        .iter()
        .all(|e| e.report.as_ref().is_some_and(|r| r.passed));
    Ok((if all_pass { Outcome::Pass } else { Outcome::Fail }, entries))
}

/// Plain-text pass table for the scan summary.
pub fn scan_summary(entries: &[SurveyEntry]) -> String {
    let mut s = String::from("index  N  n            k                        omega  result\n");
    let (mut passed, mut failed, mut errors) = (0, 0, 0);
    for e in entries {
        let (dim, n, k, omega) = match &e.params {
            Some(p) => (
                p.dim().to_string(),
                format!("{:?}", p.n()),
                format!("{:?}", p.k()),
                p.omega().to_string(),
            ),
            None => ("-".into(), "-".into(), "-".into(), "-".into()),
        };
        let result = match (&e.report, &e.error) {
            (Some(r), _) if r.passed => {
                passed += 1;
                "pass".to_string()
            }
            (Some(_), _) => {
                failed += 1;
                "FAIL".to_string()
            }
            (None, err) => {
                errors += 1;
                format!("error: {}", err.as_deref().unwrap_or("unknown"))
            }
        };
        s.push_str(&format!(
            "{:<6} {:<2} {:<12} {:<24} {:<6} {}\n",
            e.index, dim, n, k, omega, result
        ));
    }
    s.push_str(&format!(
        "passed {passed} of {}; failed {failed}; errors {errors}\n",
        entries.len()
    ));
    s
}

pub fn reduce_check(cfg: &RunConfig, out: &Path) -> Result<(Outcome, ReduceCheckReport), CliError> {
    let params = cfg.params()?;
    if cfg.system != SystemKind::Reduced {
        return Err(CliError::Config(
            "reduce-check starts from a reduced state; set \"system\": \"reduced\"".into(),
        ));
    }
    if cfg.integrator.method == Method::OracleRK54 {
        return Err(CliError::Config(
            "reduce-check compares fixed-step runs; use verlet2 or yoshida4".into(),
        ));
    }
    let s0 = cfg.initial_state(params);
    s0.check(params, SystemKind::Reduced)?;
    let dt = cfg.integrator.dt.unwrap_or_else(|| default_dt(params));
    let t_end = cfg
        .integrator
        .t_end
        .unwrap_or(s0.t + 5.0 * base_period(params));
    let report = consistency_check(params, &s0.to_reduced(), t_end, dt, cfg.integrator.method)?;
    let pass = report.max_dev < cfg.reduce_bound;
    let report = ReduceCheckReport {
        report,
        bound: cfg.reduce_bound,
        pass,
    };
    prepare_out(out)?;
    write_json(
        &out.join("reduce_check.json"),
        &Envelope {
            version: VERSION,
            config: cfg,
            report: &report,
        },
    )?;
    Ok((if pass { Outcome::Pass } else { Outcome::Fail }, report))
}
