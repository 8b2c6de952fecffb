//! JSON run configuration.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use superint::analysis::SuiteConfig;
use superint::model::RawParams;
use superint::sampling::StateSampler;
use superint::{Method, PhasePoint, SystemKind, SystemParams};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<SystemParams>,
    #[serde(default = "default_system")]
    pub system: SystemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<StateSampler>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub suites: SuiteFlags,
    /// Random states per bracket pair.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_rank_states")]
    pub rank_states: usize,
    #[serde(default = "default_reduce_bound")]
    pub reduce_bound: f64,
    /// Test hook: shifts `k` inside integral evaluation only.
    #[serde(default)]
    pub perturb_k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    #[serde(default)]
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Local error tolerance for `oracle_rk54`.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self {
            method: default_method(),
            dt: None,
            t_end: None,
            tol: default_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteFlags {
    #[serde(default = "yes")]
    pub conservation: bool,
    #[serde(default = "yes")]
    pub brackets: bool,
    #[serde(default = "yes")]
    pub rank: bool,
    #[serde(default = "yes")]
    pub period: bool,
    #[serde(default = "yes", alias = "reduce-check")]
    pub reduce_check: bool,
}

impl Default for SuiteFlags {
    fn default() -> Self {
        Self {
            conservation: true,
            brackets: true,
            rank: true,
            period: true,
            reduce_check: true,
        }
    }
}

/// Cartesian product of the listed values; `n` and `k` entries are whole
/// vectors and must agree in length point by point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: Vec<Vec<f64>>,
    pub k: Vec<Vec<f64>>,
    #[serde(default = "default_omegas")]
    pub omega: Vec<f64>,
}

fn default_system() -> SystemKind {
    SystemKind::Reduced
}
fn default_samples() -> usize {
    100
}
fn default_rank_states() -> usize {
    20
}
fn default_reduce_bound() -> f64 {
    1e-6
}
fn default_method() -> Method {
    Method::Yoshida4
}
fn default_tol() -> f64 {
    1e-10
}
fn default_omegas() -> Vec<f64> {
    vec![1.0]
}
fn yes() -> bool {
    true
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|source| CliError::ParseConfig {
            path: path.display().to_string(),
            source,
        })?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        if self.state.is_some() == self.sampler.is_some() {
            return Err(CliError::Config(
                "exactly one of \"state\" and \"sampler\" must be given".into(),
            ));
        }
        if let Some(dt) = self.integrator.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(CliError::Config(format!("integrator.dt must be positive, got {dt}")));
            }
        }
        if !(self.integrator.tol > 0.0) {
            return Err(CliError::Config("integrator.tol must be positive".into()));
        }
        if !(self.reduce_bound > 0.0) {
            return Err(CliError::Config("reduce_bound must be positive".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<&SystemParams, CliError> {
        self.params
            .as_ref()
            .ok_or_else(|| CliError::Config("\"params\" is required for this command".into()))
    }

    /// Explicit state, or one drawn from the sampler with the run seed.
    pub fn initial_state(&self, params: &SystemParams) -> PhasePoint {
        match (&self.state, &self.sampler) {
            (Some(s), _) => PhasePoint {
                t: s.t,
                q: s.q.clone(),
                p: s.p.clone(),
            },
            (None, Some(sampler)) => sampler.sample_many(params, self.system, 1, self.seed).remove(0),
            (None, None) => unreachable!("checked at load time"),
        }
    }

    pub fn suite_config(&self) -> SuiteConfig {
        SuiteConfig {
            conservation: self.suites.conservation,
            brackets: self.suites.brackets,
            rank: self.suites.rank,
            period: self.suites.period,
            reduce_check: self.suites.reduce_check,
            method: self.integrator.method,
            dt: self.integrator.dt,
            t_end: self.integrator.t_end,
            bracket_samples: self.samples,
            rank_states: self.rank_states,
            reduce_bound: self.reduce_bound,
            sampler: self.sampler.unwrap_or_default(),
            perturb_k: self.perturb_k,
            ..SuiteConfig::default()
        }
    }

    /// Grid points in row-major order (`n`, then `k`, then `omega`).
    /// Invalid combinations are kept as errors so the survey can report them.
    pub fn grid_points(&self) -> Result<Vec<superint::Result<SystemParams>>, CliError> {
        let grid = self
            .grid
            .as_ref()
            .ok_or_else(|| CliError::Config("\"grid\" is required for scan".into()))?;
        let mut points = Vec::new();
        for n in &grid.n {
            for k in &grid.k {
                for &omega in &grid.omega {
                    let raw = RawParams {
                        dim: n.len() as i64,
                        n: n.clone(),
                        k: k.clone(),
                        omega,
                        exclusion_radius: None,
                    };
                    points.push(SystemParams::try_from(raw));
                }
            }
        }
        Ok(points)
    }
}
