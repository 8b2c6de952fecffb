//! Multipolar coordinates, the angular-momentum level set and the map
//! between the full oscillator and the reduced system.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, Method, PhasePoint, SystemKind, Trajectory};
use crate::error::{Error, Result};
use crate::model::{FullState, ReducedState, SystemParams};

/// Per-plane polar data: radius, radial momentum, angle, angular momentum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultipolarCoords {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// Angles in `[0, 2π)`.
    pub phi: Vec<f64>,
    pub ell: Vec<f64>,
    pub t: f64,
}

pub fn to_multipolar(params: &SystemParams, s: &FullState) -> Result<MultipolarCoords> {
    s.check(params)?;
    let n = params.dim();
    let mut m = MultipolarCoords {
        x: Vec::with_capacity(n),
        p: Vec::with_capacity(n),
        phi: Vec::with_capacity(n),
        ell: Vec::with_capacity(n),
        t: s.t,
    };
    for l in 0..n {
        let (y1, y2) = (s.y[2 * l], s.y[2 * l + 1]);
        let (p1, p2) = (s.phat[2 * l], s.phat[2 * l + 1]);
        let r = y1.hypot(y2);
        if !(r > params.exclusion_radius()) {
            return Err(Error::AxisSingularity {
                plane: l + 1,
                radius: r,
                t: s.t,
            });
        }
        let mut phi = y2.atan2(y1);
        if phi < 0.0 {
            phi += TAU;
        }
        // atan2 of a tiny negative angle can round up to exactly 2π.
        if phi >= TAU {
            phi = 0.0;
        }
        m.x.push(r);
        m.phi.push(phi);
        m.p.push((y1 * p1 + y2 * p2) / r);
        m.ell.push(y1 * p2 - y2 * p1);
    }
    Ok(m)
}

pub fn from_multipolar(params: &SystemParams, m: &MultipolarCoords) -> FullState {
    let n = params.dim();
    let mut y = Vec::with_capacity(2 * n);
    let mut phat = Vec::with_capacity(2 * n);
    for l in 0..n {
        let (y_pair, p_pair) = plane_from_polar(m.x[l], m.p[l], m.phi[l], m.ell[l]);
        y.extend_from_slice(&y_pair);
        phat.extend_from_slice(&p_pair);
    }
    FullState { y, phat, t: m.t }
}

fn plane_from_polar(x: f64, p: f64, phi: f64, ell: f64) -> ([f64; 2], [f64; 2]) {
    let (s, c) = phi.sin_cos();
    let tangential = if ell != 0.0 { ell / x } else { 0.0 };
    (
        [x * c, x * s],
        [-tangential * s + p * c, tangential * c + p * s],
    )
}

/// Full state on the level set `ℓ_l = √k_l` whose radial data are `s` and
/// whose angles are `angles`.
///
/// A negative `x_l` is the point with radius `|x_l|` at angle `φ_l + π`.
pub fn lift(params: &SystemParams, s: &ReducedState, angles: &[f64]) -> Result<FullState> {
    params.require_nonnegative_k()?;
    s.check(params)?;
    if angles.len() != params.dim() {
        return Err(Error::LengthMismatch {
            what: "angles",
            expected: params.dim(),
            actual: angles.len(),
        });
    }
    let n = params.dim();
    let mut y = Vec::with_capacity(2 * n);
    let mut phat = Vec::with_capacity(2 * n);
    for l in 0..n {
        let ell = params.k()[l].sqrt();
        let (y_pair, p_pair) = plane_from_polar(s.x[l], s.p[l], angles[l], ell);
        y.extend_from_slice(&y_pair);
        phat.extend_from_slice(&p_pair);
    }
    Ok(FullState { y, phat, t: s.t })
}

/// Radial part of a full state (angles dropped).
pub fn project(params: &SystemParams, s: &FullState) -> Result<ReducedState> {
    let m = to_multipolar(params, s)?;
    Ok(ReducedState {
        x: m.x,
        p: m.p,
        t: m.t,
    })
}

/// Pointwise projection of a full-system trajectory.
pub fn reduce_trajectory(params: &SystemParams, traj: &Trajectory) -> Result<Trajectory> {
    if traj.kind != SystemKind::Full {
        return Err(Error::InvalidArgument(
            "reduce_trajectory needs a full-system trajectory".into(),
        ));
    }
    let states = traj
        .states
        .iter()
        .enumerate()
        .map(|(index, s)| {
            project(params, &s.to_full())
                .map(PhasePoint::from)
                .map_err(|e| match e {
                    Error::AxisSingularity { .. } => Error::TrajectoryAxisSingularity { index, t: s.t },
                    other => other,
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        kind: SystemKind::Reduced,
        method: traj.method,
        dt: traj.dt,
        states,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub max_dev: f64,
    pub t_of_max: f64,
    pub dt: f64,
    pub method: Method,
    /// Last time compared; earlier than `t_end` when a zero-`k` plane
    /// reached the axis.
    pub compared_until: f64,
}

/// Integrates the reduced system from `s0` and the full system from its
/// lift (zero angles), projects the latter, and reports the largest
/// componentwise deviation between the two reduced trajectories.
pub fn consistency_check(
    params: &SystemParams,
    s0: &ReducedState,
    t_end: f64,
    dt: f64,
    method: Method,
) -> Result<ConsistencyReport> {
    let lifted = lift(params, s0, &vec![0.0; params.dim()])?;
    let (reduced, full) = rayon::join(
        || integrate(params, SystemKind::Reduced, &s0.clone().into(), dt, t_end, method),
        || integrate(params, SystemKind::Full, &lifted.into(), dt, t_end, method),
    );
    let (reduced, full) = (reduced?, full?);

    let sign: Vec<f64> = s0.x.iter().map(|&x| if x < 0.0 { -1.0 } else { 1.0 }).collect();
    let zero_k: Vec<usize> = (0..params.dim()).filter(|&l| params.k()[l] == 0.0).collect();

    let mut max_dev = 0.0f64;
    let mut t_of_max = s0.t;
    let mut compared_until = s0.t;
    for (r, f) in reduced.states.iter().zip(&full.states) {
        let crossed = zero_k
            .iter()
            .any(|&l| r.q[l] * sign[l] <= params.exclusion_radius());
        if crossed {
            break;
        }
        let projected = match project(params, &f.to_full()) {
            Ok(p) => p,
            Err(Error::AxisSingularity { .. }) => break,
            Err(e) => return Err(e),
        };
        for l in 0..params.dim() {
            let dx = (r.q[l].abs() - projected.x[l]).abs();
            let dp = (sign[l] * r.p[l] - projected.p[l]).abs();
            let dev = dx.max(dp);
            if dev > max_dev {
                max_dev = dev;
                t_of_max = r.t;
            }
        }
        compared_until = r.t;
    }
    Ok(ConsistencyReport {
        max_dev,
        t_of_max,
        dt,
        method,
        compared_until,
    })
}
