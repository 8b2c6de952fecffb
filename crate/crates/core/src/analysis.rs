//! Superintegrability verdicts: conservation drift, functional independence
//! and orbit closure, plus the batch driver that runs them per parameter
//! point.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{base_period, default_dt, integrate, step, Method, PhasePoint, SystemKind, Trajectory};
use crate::error::{Error, Result};
use crate::invariants::{
    evaluate, full_integral_set, reduced_integral_set, relative_drift, series, EvalOptions,
    IntegralId,
};
use crate::model::SystemParams;
use crate::poisson::{commutation_report_with, default_pairs, gradient, BracketResult, Integral};
use crate::reduction::{consistency_check, ConsistencyReport};
use crate::sampling::StateSampler;

/// Relative drift accepted for a conserved integral.
pub const DRIFT_TOLERANCE: f64 = 1e-6;
/// Default relative singular-value threshold for the rank verdict.
pub const DEFAULT_RANK_THRESHOLD: f64 = 1e-8;
/// Fraction of sampled states that must agree with the expected rank.
pub const RANK_AGREEMENT: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftEntry {
    pub id: IntegralId,
    /// Observed verdict: drift below the tolerance.
    pub conserved: bool,
    pub max_rel_drift: f64,
    /// Whether the integral should be conserved for these parameters.
    pub expected: bool,
}

impl DriftEntry {
    pub fn pass(&self) -> bool {
        self.conserved == self.expected
    }
}

/// Maximum relative drift of each integral along `traj`.
pub fn conservation_report(
    params: &SystemParams,
    traj: &Trajectory,
    ids: &[IntegralId],
    opts: EvalOptions,
) -> Result<Vec<DriftEntry>> {
    conservation_report_with(params, params, traj, ids, opts, DRIFT_TOLERANCE)
}

/// As [`conservation_report`], with the Hamiltonians evaluated using
/// `system` and every other integral using `integrals`.
pub fn conservation_report_with(
    system: &SystemParams,
    integrals: &SystemParams,
    traj: &Trajectory,
    ids: &[IntegralId],
    opts: EvalOptions,
    tolerance: f64,
) -> Result<Vec<DriftEntry>> {
    ids.iter()
        .map(|&id| {
            let params = if matches!(id, IntegralId::HFull | IntegralId::HReduced) {
                system
            } else {
                integrals
            };
            let values = series(params, traj.kind, &traj.states, id, opts)?;
            let drift = relative_drift(&values);
            Ok(DriftEntry {
                id,
                conserved: drift < tolerance,
                max_rel_drift: drift,
                expected: id.is_conserved(system),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankResult {
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Rank of the Jacobian of `ids` with respect to all phase coordinates.
///
/// Rows hold the gradient of the real part of each integral. A singular
/// value counts when it exceeds `rel_threshold · σ_max`.
pub fn independence_rank(
    params: &SystemParams,
    kind: SystemKind,
    ids: &[IntegralId],
    state: &PhasePoint,
    rel_threshold: f64,
    opts: EvalOptions,
) -> Result<RankResult> {
    state.check(params, kind)?;
    let cols = 2 * kind.config_dim(params);
    let mut jac = DMatrix::<f64>::zeros(ids.len(), cols);
    for (row, &id) in ids.iter().enumerate() {
        id.validate(params, kind)?;
        let f = Integral {
            params,
            kind,
            id,
            opts,
        };
        let (_, grad) = gradient(&f, state)?;
        for (col, g) in grad.iter().enumerate() {
            jac[(row, col)] = g.re;
        }
    }
    let mut sv: Vec<f64> = jac.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let rank = if sigma_max > 0.0 {
        sv.iter().filter(|&&s| s > rel_threshold * sigma_max).count()
    } else {
        0
    };
    Ok(RankResult {
        rank,
        singular_values: sv,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub ids: Vec<IntegralId>,
    pub expected: usize,
    /// Most common rank over the sampled states.
    pub rank: usize,
    /// Fraction of states whose rank equals `expected`.
    pub agreement: f64,
    pub states: usize,
    pub rel_threshold: f64,
    /// Spectrum at the first sampled state.
    pub singular_values: Vec<f64>,
    pub pass: bool,
}

/// Rank verdict over `count` seeded generic states.
#[allow(clippy::too_many_arguments)]
pub fn rank_vote(
    params: &SystemParams,
    kind: SystemKind,
    ids: &[IntegralId],
    expected: usize,
    count: usize,
    seed: u64,
    rel_threshold: f64,
    sampler: &StateSampler,
) -> Result<RankReport> {
    let states = sampler.sample_many(params, kind, count.max(1), seed);
    let results = states
        .iter()
        .map(|s| independence_rank(params, kind, ids, s, rel_threshold, EvalOptions::NORMALIZED))
        .collect::<Result<Vec<_>>>()?;
    let mut counts = vec![0usize; ids.len() + 1];
    for r in &results {
        counts[r.rank] += 1;
    }
    // Highest count wins; ties go to the larger rank.
    let rank = (0..counts.len())
        .rev()
        .max_by_key(|&r| counts[r])
        .unwrap_or(0);
    let agreement = counts.get(expected).copied().unwrap_or(0) as f64 / results.len() as f64;
    Ok(RankReport {
        ids: ids.to_vec(),
        expected,
        rank,
        agreement,
        states: results.len(),
        rel_threshold,
        singular_values: results[0].singular_values.clone(),
        pass: rank == expected && agreement >= RANK_AGREEMENT,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodEstimate {
    pub period: f64,
    pub closure: f64,
}

/// Squared phase-space distance with momenta scaled by `1/ω`.
fn distance_sq(a: &PhasePoint, b: &PhasePoint, inv_omega: f64) -> f64 {
    let dq: f64 = a.q.iter().zip(&b.q).map(|(x, y)| (x - y) * (x - y)).sum();
    let dp: f64 = a.p.iter().zip(&b.p).map(|(x, y)| (x - y) * (x - y)).sum();
    dq + dp * inv_omega * inv_omega
}

/// First return of `traj` to its initial state.
///
/// After the orbit has moved away by more than `10·tol`, each local minimum
/// of the squared distance is located with a parabola through the three
/// bracketing samples. The state at that time is recomputed with a partial
/// step from the preceding sample, and the first one closer than `tol` is
/// reported with its measured distance.
pub fn period_estimate(params: &SystemParams, traj: &Trajectory, tol: f64) -> Option<PeriodEstimate> {
    let states = &traj.states;
    if states.len() < 3 {
        return None;
    }
    let inv_omega = 1.0 / params.omega();
    let start = &states[0];
    let d2: Vec<f64> = states.iter().map(|s| distance_sq(s, start, inv_omega)).collect();
    let depart = (10.0 * tol) * (10.0 * tol);
    let first_away = d2.iter().position(|&d| d > depart)?;
    // Adaptive trajectories have no fixed step; a short Yoshida4 hop is
    // accurate enough to place the refined point.
    let method = match traj.method {
        Method::OracleRK54 => Method::Yoshida4,
        m => m,
    };
    for i in first_away.max(1)..d2.len() - 1 {
        if !(d2[i] <= d2[i - 1] && d2[i] <= d2[i + 1]) {
            continue;
        }
        let (t0, t1, t2) = (states[i - 1].t, states[i].t, states[i + 1].t);
        let (t_min, f_min) = parabola_min(t0, t1, t2, d2[i - 1], d2[i], d2[i + 1]);
        if f_min > tol * tol * 4.0 {
            continue;
        }
        let base = if t_min >= t1 { i } else { i - 1 };
        let h = t_min - states[base].t;
        let refined = if h > 0.0 {
            match step(params, traj.kind, &states[base], h, method) {
                Ok(s) => s,
                Err(_) => continue,
            }
        } else {
            states[base].clone()
        };
        let closure = distance_sq(&refined, start, inv_omega).sqrt();
        if closure < tol {
            return Some(PeriodEstimate {
                period: t_min - start.t,
                closure,
            });
        }
    }
    None
}

/// Vertex of the parabola through three points; falls back to the middle
/// sample when the points are collinear.
fn parabola_min(t0: f64, t1: f64, t2: f64, f0: f64, f1: f64, f2: f64) -> (f64, f64) {
    let denom = (t0 - t1) * (t0 - t2) * (t1 - t2);
    let a = (t2 * (f1 - f0) + t1 * (f0 - f2) + t0 * (f2 - f1)) / denom;
    let b = (t2 * t2 * (f0 - f1) + t1 * t1 * (f2 - f0) + t0 * t0 * (f1 - f2)) / denom;
    if !(a > 0.0) || !a.is_finite() {
        return (t1, f1);
    }
    let c = f1 - a * t1 * t1 - b * t1;
    let t = (-b / (2.0 * a)).clamp(t0, t2);
    (t, a * t * t + b * t + c)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Least common multiple of `π·a_i/(b_i ω)`.
fn lcm_of_periods(parts: &[(u64, u64)], omega: f64) -> f64 {
    let (mut num, mut den) = (1u64, 0u64);
    for &(a, b) in parts {
        let g = gcd(a, b);
        let (a, b) = (a / g, b / g);
        num = num / gcd(num, a) * a;
        den = gcd(den, b);
    }
    PI * num as f64 / (den.max(1) as f64 * omega)
}

/// Common period of the reduced system: coordinate `i` repeats after
/// `π/(n_i ω)` when `k_i ≠ 0` and after `2π/(n_i ω)` when `k_i = 0`.
pub fn expected_reduced_period(params: &SystemParams) -> f64 {
    let parts: Vec<(u64, u64)> = params
        .n()
        .iter()
        .zip(params.k())
        .map(|(&n, &k)| (if k != 0.0 { 1 } else { 2 }, n as u64))
        .collect();
    lcm_of_periods(&parts, params.omega())
}

/// Common period `2π/(ω·gcd(n))` of the full oscillator.
pub fn expected_full_period(params: &SystemParams) -> f64 {
    let parts: Vec<(u64, u64)> = params.n().iter().map(|&n| (2, n as u64)).collect();
    lcm_of_periods(&parts, params.omega())
}

/// Leading power of `|F|` under momentum dilation `p → λp`, from
/// `λ = 10³` and `2·10³`.
pub fn observed_momentum_degree(
    params: &SystemParams,
    kind: SystemKind,
    state: &PhasePoint,
    id: IntegralId,
) -> Result<f64> {
    let at = |lambda: f64| -> Result<f64> {
        let mut s = state.clone();
        s.p.iter_mut().for_each(|p| *p *= lambda);
        Ok(evaluate(params, kind, &s, id, EvalOptions::RAW)?.as_complex().norm())
    };
    let (a, b) = (at(1e3)?, at(2e3)?);
    if a == 0.0 {
        return Err(Error::InvalidArgument(format!("{id} vanishes at this state")));
    }
    Ok((b / a).log2())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeEntry {
    pub id: IntegralId,
    pub degree: f64,
}

/// Which checks to run and with what numerical settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub conservation: bool,
    pub brackets: bool,
    pub rank: bool,
    pub period: bool,
    pub reduce_check: bool,
    pub method: Method,
    /// Step for conservation and reduce-check runs; `10⁻³·2π/ω` if absent.
    pub dt: Option<f64>,
    /// End of the conservation run; ten base periods if absent.
    pub t_end: Option<f64>,
    pub drift_tolerance: f64,
    pub bracket_samples: usize,
    pub rank_states: usize,
    pub rank_threshold: f64,
    /// Step for the closure run; `10⁻⁴·2π/ω` if absent.
    pub period_dt: Option<f64>,
    pub period_tolerance: f64,
    /// Length of the reduce-check run in base periods.
    pub reduce_periods: f64,
    pub reduce_bound: f64,
    pub sampler: StateSampler,
    /// Test hook: shift every `k_i` by this amount when evaluating integrals
    /// (never in the dynamics). Zero in normal runs.
    pub perturb_k: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            conservation: true,
            brackets: true,
            rank: true,
            period: true,
            reduce_check: true,
            method: Method::Yoshida4,
            dt: None,
            t_end: None,
            drift_tolerance: DRIFT_TOLERANCE,
            bracket_samples: 100,
            rank_states: 20,
            rank_threshold: DEFAULT_RANK_THRESHOLD,
            period_dt: None,
            period_tolerance: 1e-4,
            reduce_periods: 5.0,
            reduce_bound: 1e-6,
            sampler: StateSampler::default(),
            perturb_k: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    pub expected: f64,
    pub estimate: Option<PeriodEstimate>,
    pub dt: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReduceCheckReport {
    #[serde(flatten)]
    pub report: ConsistencyReport,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub params: SystemParams,
    pub system: SystemKind,
    pub seed: u64,
    pub initial_state: PhasePoint,
    pub drifts: Vec<DriftEntry>,
    pub brackets: Vec<BracketResult>,
    pub rank: Option<RankReport>,
    pub period: Option<PeriodReport>,
    pub reduce_check: Option<ReduceCheckReport>,
    pub momentum_degrees: Vec<DegreeEntry>,
    pub passed: bool,
}

/// Integrals tracked by the conservation suite.
pub fn conservation_ids(params: &SystemParams, kind: SystemKind) -> Vec<IntegralId> {
    match kind {
        SystemKind::Reduced => std::iter::once(IntegralId::HReduced)
            .chain(reduced_integral_set(params))
            .collect(),
        SystemKind::Full => std::iter::once(IntegralId::HFull)
            .chain(full_integral_set(params))
            .chain((1..=params.dim()).map(IntegralId::IMod))
            .collect(),
    }
}

/// Integral set whose Jacobian rank is checked, with its expected rank:
/// `2N−1` for the reduced system, `3N−1` for the rotation-invariant set of
/// the full system.
pub fn rank_ids(params: &SystemParams, kind: SystemKind) -> (Vec<IntegralId>, usize) {
    let n = params.dim();
    match kind {
        SystemKind::Reduced => (reduced_integral_set(params), 2 * n - 1),
        SystemKind::Full => (full_integral_set(params), 3 * n - 1),
    }
}

/// Runs the enabled suites for one parameter point.
///
/// `initial` defaults to a state drawn from the sampler with `seed`.
pub fn verify(
    params: &SystemParams,
    kind: SystemKind,
    initial: Option<PhasePoint>,
    seed: u64,
    cfg: &SuiteConfig,
) -> Result<VerificationReport> {
    let initial = match initial {
        Some(s) => s,
        None => cfg.sampler.sample_many(params, kind, 1, seed).remove(0),
    };
    initial.check(params, kind)?;
    let integrals = if cfg.perturb_k != 0.0 {
        params.with_k_shift(cfg.perturb_k)
    } else {
        params.clone()
    };
    let period = base_period(params);
    let dt = cfg.dt.unwrap_or_else(|| default_dt(params));

    let drifts = if cfg.conservation {
        let traj = integrate(
            params,
            kind,
            &initial,
            dt,
            cfg.t_end.unwrap_or(initial.t + 10.0 * period),
            cfg.method,
        )?;
        conservation_report_with(
            params,
            &integrals,
            &traj,
            &conservation_ids(params, kind),
            EvalOptions::NORMALIZED,
            cfg.drift_tolerance,
        )?
    } else {
        Vec::new()
    };

    let brackets = if cfg.brackets {
        commutation_report_with(
            params,
            &integrals,
            kind,
            &default_pairs(params, kind),
            cfg.bracket_samples,
            seed,
            &cfg.sampler,
        )?
    } else {
        Vec::new()
    };

    let rank = if cfg.rank {
        let (ids, expected) = rank_ids(params, kind);
        Some(rank_vote(
            &integrals,
            kind,
            &ids,
            expected,
            cfg.rank_states,
            seed,
            cfg.rank_threshold,
            &cfg.sampler,
        )?)
    } else {
        None
    };

    let period_report = if cfg.period {
        let expected = match kind {
            SystemKind::Reduced => expected_reduced_period(params),
            SystemKind::Full => expected_full_period(params),
        };
        let dt = cfg.period_dt.unwrap_or(1e-4 * period);
        let traj = integrate(
            params,
            kind,
            &initial,
            dt,
            initial.t + expected.max(2.0 * period) + 0.05 * period,
            cfg.method,
        )?;
        let estimate = period_estimate(params, &traj, cfg.period_tolerance);
        let pass = estimate.is_some_and(|e| {
            e.closure < cfg.period_tolerance && (e.period - expected).abs() <= 1e-4 * expected
        });
        Some(PeriodReport {
            expected,
            estimate,
            dt,
            pass,
        })
    } else {
        None
    };

    let reduce_check = if cfg.reduce_check
        && kind == SystemKind::Reduced
        && params.require_nonnegative_k().is_ok()
    {
        let report = consistency_check(
            params,
            &initial.to_reduced(),
            initial.t + cfg.reduce_periods * period,
            dt,
            cfg.method,
        )?;
        Some(ReduceCheckReport {
            pass: report.max_dev < cfg.reduce_bound,
            bound: cfg.reduce_bound,
            report,
        })
    } else {
        None
    };

    let momentum_degrees = match kind {
        SystemKind::Reduced => (1..params.dim())
            .map(|l| {
                let id = IntegralId::QReduced(l);
                observed_momentum_degree(params, kind, &initial, id)
                    .map(|degree| DegreeEntry { id, degree })
            })
            .collect::<Result<Vec<_>>>()?,
        SystemKind::Full => Vec::new(),
    };

    let passed = drifts.iter().all(DriftEntry::pass)
        && brackets.iter().all(|b| b.pass)
        && rank.as_ref().is_none_or(|r| r.pass)
        && period_report.as_ref().is_none_or(|p| p.pass)
        && reduce_check.as_ref().is_none_or(|r| r.pass);

    Ok(VerificationReport {
        params: params.clone(),
        system: kind,
        seed,
        initial_state: initial,
        drifts,
        brackets,
        rank,
        period: period_report,
        reduce_check,
        momentum_degrees,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyEntry {
    pub index: usize,
    pub params: Option<SystemParams>,
    pub report: Option<VerificationReport>,
    pub error: Option<String>,
}

/// Runs [`verify`] at every grid point in parallel; failures are recorded
/// per point and do not stop the survey. Output order follows the grid.
pub fn survey(
    points: &[Result<SystemParams>],
    kind: SystemKind,
    seed: u64,
    cfg: &SuiteConfig,
) -> Vec<SurveyEntry> {
    points
        .par_iter()
        .enumerate()
        .map(|(index, point)| {
            let outcome = point
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|p| verify(p, kind, None, seed, cfg).map(|r| (p.clone(), r)));
            match outcome {
                Ok((p, report)) => SurveyEntry {
                    index,
                    params: Some(p),
                    report: Some(report),
                    error: None,
                },
                Err(e) => SurveyEntry {
                    index,
                    params: point.as_ref().ok().cloned(),
                    report: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
