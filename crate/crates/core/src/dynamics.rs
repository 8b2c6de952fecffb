//! Hamiltonians, forces and time stepping for the full oscillator and the
//! reduced system.
//!
//! Both Hamiltonians are kinetic-plus-potential, so the production
//! integrators are position-Verlet splittings. An adaptive Dormand–Prince
//! 5(4) integrator is kept alongside as an independent oracle.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FullState, ReducedState, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Full,
    Reduced,
}

impl SystemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::Full => "full",
            SystemKind::Reduced => "reduced",
        }
    }

    /// Configuration dimension for the given parameters.
    pub fn config_dim(self, params: &SystemParams) -> usize {
        match self {
            SystemKind::Full => params.full_dim(),
            SystemKind::Reduced => params.dim(),
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "verlet2")]
    Verlet2,
    #[serde(rename = "yoshida4")]
    Yoshida4,
    #[serde(rename = "oracle_rk54")]
    OracleRK54,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Verlet2 => "verlet2",
            Method::Yoshida4 => "yoshida4",
            Method::OracleRK54 => "oracle_rk54",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Kind-agnostic phase point: positions `q`, momenta `p`, time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub t: f64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl From<FullState> for PhasePoint {
    fn from(s: FullState) -> Self {
        PhasePoint {
            t: s.t,
            q: s.y,
            p: s.phat,
        }
    }
}

impl From<ReducedState> for PhasePoint {
    fn from(s: ReducedState) -> Self {
        PhasePoint {
            t: s.t,
            q: s.x,
            p: s.p,
        }
    }
}

impl PhasePoint {
    pub fn to_full(&self) -> FullState {
        FullState {
            y: self.q.clone(),
            phat: self.p.clone(),
            t: self.t,
        }
    }

    pub fn to_reduced(&self) -> ReducedState {
        ReducedState {
            x: self.q.clone(),
            p: self.p.clone(),
            t: self.t,
        }
    }

    pub fn check(&self, params: &SystemParams, kind: SystemKind) -> Result<()> {
        let d = kind.config_dim(params);
        if self.q.len() != d || self.p.len() != d {
            return Err(Error::LengthMismatch {
                what: "phase point",
                expected: d,
                actual: self.q.len().min(self.p.len()),
            });
        }
        if !self.t.is_finite() || self.q.iter().chain(&self.p).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("phase point"));
        }
        if kind == SystemKind::Reduced {
            params.check_reduced_positions(&self.q, self.t)?;
        }
        Ok(())
    }
}

/// Time-ordered sequence of phase points of one system kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub kind: SystemKind,
    pub method: Method,
    /// Fixed step size; `None` for the adaptive oracle.
    pub dt: Option<f64>,
    pub states: Vec<PhasePoint>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn first(&self) -> &PhasePoint {
        &self.states[0]
    }

    pub fn last(&self) -> &PhasePoint {
        &self.states[self.states.len() - 1]
    }

    /// Individual step sizes between consecutive samples.
    pub fn step_sizes(&self) -> Vec<f64> {
        self.states.windows(2).map(|w| w[1].t - w[0].t).collect()
    }

    /// CSV with header `t,x1..xD,p1..pD`, 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let d = self.states.first().map_or(0, |s| s.q.len());
        let mut header = String::from("t");
        for i in 1..=d {
            header.push_str(&format!(",x{i}"));
        }
        for i in 1..=d {
            header.push_str(&format!(",p{i}"));
        }
        writeln!(w, "{header}")?;
        for s in &self.states {
            let mut line = format_f64(s.t);
            for v in s.q.iter().chain(&s.p) {
                line.push(',');
                line.push_str(&format_f64(*v));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// 17 significant digits, scientific notation.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn hamiltonian_full(params: &SystemParams, s: &FullState) -> f64 {
    let w2 = params.omega() * params.omega();
    let kinetic: f64 = 0.5 * s.phat.iter().map(|p| p * p).sum::<f64>();
    let potential: f64 = s
        .y
        .iter()
        .enumerate()
        .map(|(j, y)| {
            let n = params.coord_multiplier(j) as f64;
            n * n * y * y
        })
        .sum::<f64>();
    kinetic + 0.5 * w2 * potential
}

pub fn hamiltonian_reduced(params: &SystemParams, s: &ReducedState) -> Result<f64> {
    params.check_reduced_positions(&s.x, s.t)?;
    let kinetic = 0.5 * s.p.iter().map(|p| p * p).sum::<f64>();
    Ok(kinetic + reduced_potential(params, &s.x))
}

fn reduced_potential(params: &SystemParams, x: &[f64]) -> f64 {
    let w2 = params.omega() * params.omega();
    x.iter()
        .zip(params.n().iter().zip(params.k()))
        .map(|(&xi, (&ni, &ki))| {
            let n = ni as f64;
            let centrifugal = if ki != 0.0 { ki / (xi * xi) } else { 0.0 };
            0.5 * (centrifugal + w2 * n * n * xi * xi)
        })
        .sum()
}

pub fn force_full(params: &SystemParams, s: &FullState) -> Vec<f64> {
    let mut out = vec![0.0; s.y.len()];
    full_force_into(params, &s.y, &mut out);
    out
}

pub fn force_reduced(params: &SystemParams, s: &ReducedState) -> Result<Vec<f64>> {
    let mut out = vec![0.0; s.x.len()];
    reduced_force_into(params, &s.x, s.t, &mut out)?;
    Ok(out)
}

fn full_force_into(params: &SystemParams, y: &[f64], out: &mut [f64]) {
    let w2 = params.omega() * params.omega();
    for (j, (o, &yj)) in out.iter_mut().zip(y).enumerate() {
        let n = params.coord_multiplier(j) as f64;
        *o = -w2 * n * n * yj;
    }
}

fn reduced_force_into(params: &SystemParams, x: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
    params.check_reduced_positions(x, t)?;
    let w2 = params.omega() * params.omega();
    for (i, (o, &xi)) in out.iter_mut().zip(x).enumerate() {
        let n = params.n()[i] as f64;
        let k = params.k()[i];
        let centrifugal = if k != 0.0 { k / (xi * xi * xi) } else { 0.0 };
        *o = centrifugal - w2 * n * n * xi;
    }
    Ok(())
}

/// Energy of an arbitrary phase point of either kind.
pub fn hamiltonian(params: &SystemParams, kind: SystemKind, s: &PhasePoint) -> Result<f64> {
    match kind {
        SystemKind::Full => Ok(hamiltonian_full(params, &s.to_full())),
        SystemKind::Reduced => {
            params.check_reduced_positions(&s.q, s.t)?;
            let kinetic = 0.5 * s.p.iter().map(|p| p * p).sum::<f64>();
            Ok(kinetic + reduced_potential(params, &s.q))
        }
    }
}

fn force_into(
    params: &SystemParams,
    kind: SystemKind,
    q: &[f64],
    t: f64,
    out: &mut [f64],
) -> Result<()> {
    match kind {
        SystemKind::Full => {
            full_force_into(params, q, out);
            Ok(())
        }
        SystemKind::Reduced => reduced_force_into(params, q, t, out),
    }
}

/// Yoshida's triple-jump weights `(w1, w0)` with `w0 = 1 − 2 w1`.
pub fn yoshida_weights() -> (f64, f64) {
    let w1 = 1.0 / (2.0 - 2f64.cbrt());
    (w1, 1.0 - 2.0 * w1)
}

/// Drift–kick–drift position Verlet in place.
fn verlet_in_place(
    params: &SystemParams,
    kind: SystemKind,
    q: &mut [f64],
    p: &mut [f64],
    t: f64,
    h: f64,
    force: &mut [f64],
) -> Result<()> {
    let half = 0.5 * h;
    for (qi, pi) in q.iter_mut().zip(p.iter()) {
        *qi += half * pi;
    }
    force_into(params, kind, q, t + half, force)?;
    for (pi, fi) in p.iter_mut().zip(force.iter()) {
        *pi += h * fi;
    }
    for (qi, pi) in q.iter_mut().zip(p.iter()) {
        *qi += half * pi;
    }
    Ok(())
}

/// One symplectic step. Steps ending inside the exclusion region are
/// rejected with `SingularState`; the caller decides whether to retry
/// with a smaller `dt`.
pub fn step(
    params: &SystemParams,
    kind: SystemKind,
    s: &PhasePoint,
    dt: f64,
    method: Method,
) -> Result<PhasePoint> {
    let mut force = vec![0.0; s.q.len()];
    let mut out = s.clone();
    step_in_place(params, kind, &mut out, dt, method, &mut force)?;
    Ok(out)
}

fn step_in_place(
    params: &SystemParams,
    kind: SystemKind,
    s: &mut PhasePoint,
    dt: f64,
    method: Method,
    force: &mut [f64],
) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let t0 = s.t;
    match method {
        Method::Verlet2 => verlet_in_place(params, kind, &mut s.q, &mut s.p, t0, dt, force)?,
        Method::Yoshida4 => {
            let (w1, w0) = yoshida_weights();
            let mut t = t0;
            for w in [w1, w0, w1] {
                verlet_in_place(params, kind, &mut s.q, &mut s.p, t, w * dt, force)?;
                t += w * dt;
            }
        }
        Method::OracleRK54 => {
            return Err(Error::InvalidArgument(
                "the oracle is adaptive; use integrate_oracle".into(),
            ))
        }
    }
    s.t = t0 + dt;
    if kind == SystemKind::Reduced {
        params.check_reduced_positions(&s.q, s.t)?;
    }
    Ok(())
}

/// Fixed-step integration sampled at every step.
pub fn integrate(
    params: &SystemParams,
    kind: SystemKind,
    s0: &PhasePoint,
    dt: f64,
    t_end: f64,
    method: Method,
) -> Result<Trajectory> {
    s0.check(params, kind)?;
    if !(t_end > s0.t) {
        return Err(Error::InvalidArgument(format!(
            "t_end = {t_end} must exceed the start time {}",
            s0.t
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let span = (t_end - s0.t) / dt;
    let steps = if (span - span.round()).abs() < 1e-9 * span.max(1.0) {
        span.round()
    } else {
        span.ceil()
    } as usize;

    let mut states = Vec::with_capacity(steps + 1);
    states.push(s0.clone());
    let mut cur = s0.clone();
    let mut force = vec![0.0; s0.q.len()];
    for i in 1..=steps {
        step_in_place(params, kind, &mut cur, dt, method, &mut force)?;
        // Re-anchor time to avoid accumulating rounding in t.
        cur.t = s0.t + i as f64 * dt;
        states.push(cur.clone());
    }
    Ok(Trajectory {
        kind,
        method,
        dt: Some(dt),
        states,
    })
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive Dormand–Prince 5(4) integration with mixed absolute/relative
/// per-step error control `tol`. Every accepted step is recorded.
pub fn integrate_oracle(
    params: &SystemParams,
    kind: SystemKind,
    s0: &PhasePoint,
    t_end: f64,
    tol: f64,
) -> Result<Trajectory> {
    s0.check(params, kind)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    if !(t_end > s0.t) {
        return Err(Error::InvalidArgument(format!(
            "t_end = {t_end} must exceed the start time {}",
            s0.t
        )));
    }
    let d = s0.q.len();
    let m = 2 * d;
    let rhs = |t: f64, y: &[f64], out: &mut [f64]| -> Result<()> {
        out[..d].copy_from_slice(&y[d..]);
        force_into(params, kind, &y[..d], t, &mut out[d..])
    };

    let mut y: Vec<f64> = s0.q.iter().chain(&s0.p).copied().collect();
    let mut t = s0.t;
    let fastest = params.n().iter().copied().max().unwrap_or(1) as f64 * params.omega();
    let mut h = (0.1 * tol.powf(0.2) / fastest).min(t_end - t);

    let mut k1 = vec![0.0; m];
    let mut k2 = vec![0.0; m];
    let mut k3 = vec![0.0; m];
    let mut k4 = vec![0.0; m];
    let mut k5 = vec![0.0; m];
    let mut k6 = vec![0.0; m];
    let mut k7 = vec![0.0; m];
    let mut tmp = vec![0.0; m];
    let mut y_new = vec![0.0; m];
    rhs(t, &y, &mut k1)?;

    let mut states = vec![s0.clone()];
    while t < t_end {
        let min_h = 1e-14 * t.abs().max(1.0);
        if h < min_h {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        let stages = (|| -> Result<()> {
            for i in 0..m {
                tmp[i] = y[i] + h * A21 * k1[i];
            }
            rhs(t + C2 * h, &tmp, &mut k2)?;
            for i in 0..m {
                tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            rhs(t + C3 * h, &tmp, &mut k3)?;
            for i in 0..m {
                tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            rhs(t + C4 * h, &tmp, &mut k4)?;
            for i in 0..m {
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            rhs(t + C5 * h, &tmp, &mut k5)?;
            for i in 0..m {
                tmp[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            rhs(t + h, &tmp, &mut k6)?;
            for i in 0..m {
                y_new[i] = y[i]
                    + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            rhs(t + h, &y_new, &mut k7)
        })();

        if let Err(e) = stages {
            if e.is_singular() {
                // A stage landed in the exclusion region: retry smaller.
                h *= 0.25;
                continue;
            }
            return Err(e);
        }

        let mut err_sq = 0.0;
        for i in 0..m {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = tol + tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale) * (e / scale);
        }
        let err = (err_sq / m as f64).sqrt();

        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            y.copy_from_slice(&y_new);
            k1.copy_from_slice(&k7);
            states.push(PhasePoint {
                t,
                q: y[..d].to_vec(),
                p: y[d..].to_vec(),
            });
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }

    Ok(Trajectory {
        kind,
        method: Method::OracleRK54,
        dt: None,
        states,
    })
}

/// Default fixed step `10⁻³ · 2π/ω`.
pub fn default_dt(params: &SystemParams) -> f64 {
    1e-3 * base_period(params)
}

/// Base period `2π/ω`.
pub fn base_period(params: &SystemParams) -> f64 {
    std::f64::consts::TAU / params.omega()
}
