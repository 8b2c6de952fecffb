//! Parameters and phase-space states for the 2N-dimensional oscillator and
//! its N-dimensional reduction.

use num_complex::{Complex, Complex64};
use serde::{Deserialize, Serialize};

use crate::dual::Scalar;
use crate::error::{Error, Result};

/// Default exclusion radius around the singular axis `x = 0`.
pub const DEFAULT_EXCLUSION_RADIUS: f64 = 1e-8;

/// Unvalidated parameter record as it appears in JSON.
///
/// `n` is read as floating point so non-integral multipliers are reported
/// instead of silently truncated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    #[serde(rename = "N")]
    pub dim: i64,
    pub n: Vec<f64>,
    pub k: Vec<f64>,
    pub omega: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion_radius: Option<f64>,
}

#[derive(Serialize)]
struct ParamsJson<'a> {
    #[serde(rename = "N")]
    dim: usize,
    n: &'a [u32],
    k: &'a [f64],
    omega: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exclusion_radius: Option<f64>,
}

/// Validated system parameters: dimension, integer frequency multipliers,
/// centrifugal strengths and base frequency.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct SystemParams {
    dim: usize,
    n: Vec<u32>,
    k: Vec<f64>,
    omega: f64,
    exclusion_radius: f64,
}

impl Serialize for SystemParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ParamsJson {
            dim: self.dim,
            n: &self.n,
            k: &self.k,
            omega: self.omega,
            exclusion_radius: (self.exclusion_radius != DEFAULT_EXCLUSION_RADIUS)
                .then_some(self.exclusion_radius),
        }
        .serialize(s)
    }
}

impl TryFrom<RawParams> for SystemParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        validate_params(&raw)
    }
}

impl From<&SystemParams> for RawParams {
    fn from(p: &SystemParams) -> Self {
        RawParams {
            dim: p.dim as i64,
            n: p.n.iter().map(|&v| v as f64).collect(),
            k: p.k.clone(),
            omega: p.omega,
            exclusion_radius: Some(p.exclusion_radius),
        }
    }
}

pub fn validate_params(raw: &RawParams) -> Result<SystemParams> {
    if raw.dim < 1 {
        return Err(Error::NonPositiveDimension(raw.dim));
    }
    let dim = raw.dim as usize;
    if raw.n.len() != dim {
        return Err(Error::LengthMismatch {
            what: "n",
            expected: dim,
            actual: raw.n.len(),
        });
    }
    if raw.k.len() != dim {
        return Err(Error::LengthMismatch {
            what: "k",
            expected: dim,
            actual: raw.k.len(),
        });
    }
    let mut n = Vec::with_capacity(dim);
    for (index, &value) in raw.n.iter().enumerate() {
        if !(value.is_finite() && value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64)
        {
            return Err(Error::NonIntegerMultiplier {
                index: index + 1,
                value,
            });
        }
        n.push(value as u32);
    }
    if raw.k.iter().any(|k| !k.is_finite()) {
        return Err(Error::NonFinite("k"));
    }
    if !(raw.omega.is_finite() && raw.omega > 0.0) {
        return Err(Error::NonPositiveOmega(raw.omega));
    }
    let exclusion_radius = raw.exclusion_radius.unwrap_or(DEFAULT_EXCLUSION_RADIUS);
    if !(exclusion_radius.is_finite() && exclusion_radius >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "exclusion_radius must be finite and non-negative, got {exclusion_radius}"
        )));
    }
    Ok(SystemParams {
        dim,
        n,
        k: raw.k.clone(),
        omega: raw.omega,
        exclusion_radius,
    })
}

impl SystemParams {
    pub fn new(n: &[u32], k: &[f64], omega: f64) -> Result<Self> {
        validate_params(&RawParams {
            dim: n.len() as i64,
            n: n.iter().map(|&v| v as f64).collect(),
            k: k.to_vec(),
            omega,
            exclusion_radius: None,
        })
    }

    pub fn with_exclusion_radius(mut self, radius: f64) -> Self {
        self.exclusion_radius = radius.abs();
        self
    }

    /// Configuration dimension N of the reduced system.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn full_dim(&self) -> usize {
        2 * self.dim
    }

    pub fn n(&self) -> &[u32] {
        &self.n
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn exclusion_radius(&self) -> f64 {
        self.exclusion_radius
    }

    /// Multiplier of full-system coordinate `j` (0-based); coordinates
    /// `2l` and `2l+1` share plane `l`.
    #[inline]
    pub fn coord_multiplier(&self, j: usize) -> u32 {
        self.n[j / 2]
    }

    /// Copy with every `k_i` shifted by `delta`.
    pub fn with_k_shift(&self, delta: f64) -> Self {
        let mut out = self.clone();
        for k in &mut out.k {
            *k += delta;
        }
        out
    }

    /// Fails with `NegativeK` unless all `k_i >= 0`.
    pub fn require_nonnegative_k(&self) -> Result<()> {
        match self.k.iter().position(|&k| k < 0.0) {
            Some(index) => Err(Error::NegativeK {
                index: index + 1,
                value: self.k[index],
            }),
            None => Ok(()),
        }
    }

    /// Rejects reduced configurations that sit inside the exclusion radius
    /// of a plane with a nonzero centrifugal term.
    pub fn check_reduced_positions(&self, x: &[f64], t: f64) -> Result<()> {
        for (index, (&xi, &ki)) in x.iter().zip(&self.k).enumerate() {
            if ki != 0.0 && !(xi.abs() >= self.exclusion_radius) {
                return Err(Error::SingularState {
                    index: index + 1,
                    value: xi,
                    t,
                });
            }
        }
        Ok(())
    }
}

/// Phase point of the 2N-dimensional oscillator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullState {
    pub y: Vec<f64>,
    pub phat: Vec<f64>,
    #[serde(default)]
    pub t: f64,
}

impl FullState {
    pub fn new(params: &SystemParams, y: Vec<f64>, phat: Vec<f64>, t: f64) -> Result<Self> {
        let s = Self { y, phat, t };
        s.check(params)?;
        Ok(s)
    }

    pub fn check(&self, params: &SystemParams) -> Result<()> {
        let d = params.full_dim();
        check_len("y", d, self.y.len())?;
        check_len("phat", d, self.phat.len())?;
        if self.y.iter().chain(&self.phat).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("full state"));
        }
        Ok(())
    }
}

/// Phase point of the reduced N-dimensional system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    #[serde(default)]
    pub t: f64,
}

impl ReducedState {
    pub fn new(params: &SystemParams, x: Vec<f64>, p: Vec<f64>, t: f64) -> Result<Self> {
        let s = Self { x, p, t };
        s.check(params)?;
        Ok(s)
    }

    /// Length and finiteness checks plus the exclusion-radius guard.
    pub fn check(&self, params: &SystemParams) -> Result<()> {
        let d = params.dim();
        check_len("x", d, self.x.len())?;
        check_len("p", d, self.p.len())?;
        if self.x.iter().chain(&self.p).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("reduced state"));
        }
        params.check_reduced_positions(&self.x, self.t)
    }
}

fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch {
            what,
            expected,
            actual,
        });
    }
    Ok(())
}

/// Auxiliary complex coordinates `z_j = p̂_j − i n_j ω y_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPhase {
    pub z: Vec<Complex64>,
}

/// Generic form of [`to_complex`] over any scalar (used with dual numbers).
pub fn complex_coords<T: Scalar>(params: &SystemParams, y: &[T], phat: &[T]) -> Vec<Complex<T>> {
    y.iter()
        .zip(phat)
        .enumerate()
        .map(|(j, (&yj, &pj))| {
            let scale = T::from_f64(params.coord_multiplier(j) as f64 * params.omega());
            Complex::new(pj, -(scale * yj))
        })
        .collect()
}

pub fn to_complex(params: &SystemParams, s: &FullState) -> ComplexPhase {
    ComplexPhase {
        z: complex_coords(params, &s.y, &s.phat),
    }
}

pub fn to_full(params: &SystemParams, z: &ComplexPhase, t: f64) -> FullState {
    let (y, phat) = z
        .z
        .iter()
        .enumerate()
        .map(|(j, zj)| {
            let scale = params.coord_multiplier(j) as f64 * params.omega();
            (-zj.im / scale, zj.re)
        })
        .unzip();
    FullState { y, phat, t }
}
