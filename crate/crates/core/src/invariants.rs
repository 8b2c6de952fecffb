//! Conserved quantities of the full oscillator and of the reduced system.
//!
//! Index arguments are 1-based throughout, matching the names used in
//! reports (`C(1,2)`, `R(1)`, ...). Full-system coordinates `2l−1, 2l`
//! form plane `l` and share the multiplier `n_l`.
//!
//! Every formula is generic over [`Scalar`] so the same code serves plain
//! evaluation and dual-number differentiation in [`crate::poisson`].

use std::fmt;
use std::str::FromStr;

use num_complex::{Complex, Complex64};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dual::{cpow, rpow, Scalar};
use crate::dynamics::{PhasePoint, SystemKind};
use crate::error::{Error, Result};
use crate::model::{complex_coords, ComplexPhase, FullState, ReducedState, SystemParams};

/// Name of one integral (or probe function) of either system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntegralId {
    /// `c_jk = z_j^{n(k)} z̄_k^{n(j)}`
    C(usize, usize),
    /// Angular momentum `y_i p̂_k − y_k p̂_i`.
    L(usize, usize),
    /// `p̂_i p̂_k + n_i n_k ω² y_i y_k`
    T(usize, usize),
    /// `ξ_l = z_{2l−1}² + z_{2l}²` for plane `l`.
    Xi(usize),
    XiBar(usize),
    /// `η_l = |z_{2l−1}|² + |z_{2l}|²`
    Eta(usize),
    /// Energy of plane `l` of the full system.
    EFull(usize),
    EReduced(usize),
    QFull(usize),
    QBarFull(usize),
    QReduced(usize),
    QBarReduced(usize),
    /// `R = Re Q_l` of the reduced system.
    R(usize),
    /// `|ξ_l|²` (full) or `|A_l|²` (reduced).
    IMod(usize),
    HFull,
    HReduced,
    /// Bare position coordinate; a non-conserved probe.
    Coord(usize),
}

impl fmt::Display for IntegralId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use IntegralId::*;
        match *self {
            C(j, k) => write!(f, "C({j},{k})"),
            L(i, k) => write!(f, "L({i},{k})"),
            T(i, k) => write!(f, "T({i},{k})"),
            Xi(l) => write!(f, "Xi({l})"),
            XiBar(l) => write!(f, "XiBar({l})"),
            Eta(l) => write!(f, "Eta({l})"),
            EFull(l) => write!(f, "EFull({l})"),
            EReduced(l) => write!(f, "EReduced({l})"),
            QFull(l) => write!(f, "QFull({l})"),
            QBarFull(l) => write!(f, "QBarFull({l})"),
            QReduced(l) => write!(f, "QReduced({l})"),
            QBarReduced(l) => write!(f, "QBarReduced({l})"),
            R(l) => write!(f, "R({l})"),
            IMod(l) => write!(f, "IMod({l})"),
            HFull => f.write_str("HFull"),
            HReduced => f.write_str("HReduced"),
            Coord(i) => write!(f, "Coord({i})"),
        }
    }
}

impl FromStr for IntegralId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        use IntegralId::*;
        let bad = || Error::ParseIntegral(s.to_string());
        let s = s.trim();
        match s {
            "HFull" => return Ok(HFull),
            "HReduced" => return Ok(HReduced),
            _ => {}
        }
        let open = s.find('(').ok_or_else(bad)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let args: Vec<usize> = inner
            .split(',')
            .map(|a| a.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let one = || match args.as_slice() {
            [a] => Ok(*a),
            _ => Err(bad()),
        };
        let two = || match args.as_slice() {
            [a, b] => Ok((*a, *b)),
            _ => Err(bad()),
        };
        Ok(match &s[..open] {
            "C" => two().map(|(a, b)| C(a, b))?,
            "L" => two().map(|(a, b)| L(a, b))?,
            "T" => two().map(|(a, b)| T(a, b))?,
            "Xi" => Xi(one()?),
            "XiBar" => XiBar(one()?),
            "Eta" => Eta(one()?),
            "EFull" => EFull(one()?),
            "EReduced" => EReduced(one()?),
            "QFull" => QFull(one()?),
            "QBarFull" => QBarFull(one()?),
            "QReduced" => QReduced(one()?),
            "QBarReduced" => QBarReduced(one()?),
            "R" => R(one()?),
            "IMod" => IMod(one()?),
            "Coord" => Coord(one()?),
            _ => return Err(bad()),
        })
    }
}

impl Serialize for IntegralId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IntegralId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl IntegralId {
    /// Checks indices against `params` and that the integral lives on `kind`.
    pub fn validate(&self, params: &SystemParams, kind: SystemKind) -> Result<()> {
        use IntegralId::*;
        let n = params.dim();
        let full = SystemKind::Full;
        let reduced = SystemKind::Reduced;
        let in_range = |i: usize, hi: usize| (1..=hi).contains(&i);
        let (home, ok) = match *self {
            C(j, k) | T(j, k) => (Some(full), in_range(j, 2 * n) && in_range(k, 2 * n)),
            L(i, k) => (Some(full), in_range(i, 2 * n) && in_range(k, 2 * n) && i != k),
            Xi(l) | XiBar(l) | Eta(l) | EFull(l) => (Some(full), in_range(l, n)),
            QFull(l) | QBarFull(l) => (Some(full), in_range(l, n - 1)),
            EReduced(l) => (Some(reduced), in_range(l, n)),
            QReduced(l) | QBarReduced(l) | R(l) => (Some(reduced), in_range(l, n - 1)),
            HFull => (Some(full), true),
            HReduced => (Some(reduced), true),
            IMod(l) => (None, in_range(l, n)),
            Coord(i) => (None, in_range(i, kind.config_dim(params))),
        };
        if let Some(home) = home {
            if home != kind {
                return Err(Error::WrongSystemKind {
                    id: self.to_string(),
                    kind: kind.as_str(),
                });
            }
        }
        if !ok {
            return Err(Error::UnknownIntegral(self.to_string()));
        }
        Ok(())
    }

    /// Whether the value is real by construction.
    pub fn is_real(&self) -> bool {
        use IntegralId::*;
        !matches!(
            self,
            C(..) | Xi(_) | XiBar(_) | QFull(_) | QBarFull(_) | QReduced(_) | QBarReduced(_)
        )
    }

    /// Whether the function is a first integral of the flow for `params`.
    pub fn is_conserved(&self, params: &SystemParams) -> bool {
        use IntegralId::*;
        match *self {
            // Same frequency is required for mixing two coordinates.
            L(i, k) | T(i, k) => params.coord_multiplier(i - 1) == params.coord_multiplier(k - 1),
            // ξ rotates with phase e^{−2 i n ω t}.
            Xi(_) | XiBar(_) | Coord(_) => false,
            _ => true,
        }
    }
}

/// Value of an integral: real or complex depending on the id.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntegralValue {
    Real(f64),
    Complex(Complex64),
}

impl IntegralValue {
    pub fn as_complex(&self) -> Complex64 {
        match *self {
            IntegralValue::Real(v) => Complex64::new(v, 0.0),
            IntegralValue::Complex(z) => z,
        }
    }

    pub fn re(&self) -> f64 {
        self.as_complex().re
    }
}

/// Evaluation switches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Divide Q-type (and c-type) integrals by their analytic bound so the
    /// modulus stays at most 1.
    pub normalized: bool,
}

impl EvalOptions {
    pub const RAW: EvalOptions = EvalOptions { normalized: false };
    pub const NORMALIZED: EvalOptions = EvalOptions { normalized: true };
}

// ---------------------------------------------------------------------------
// Generic building blocks
// ---------------------------------------------------------------------------

#[inline]
fn conj<T: Scalar>(z: Complex<T>) -> Complex<T> {
    Complex::new(z.re, -z.im)
}

#[inline]
fn norm_sqr<T: Scalar>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

#[inline]
fn real<T: Scalar>(v: T) -> Complex<T> {
    Complex::new(v, T::zero())
}

fn scale<T: Scalar>(z: Complex<T>, s: T) -> Complex<T> {
    Complex::new(z.re * s, z.im * s)
}

/// `ξ_l` from the full complex coordinates (`l` 1-based).
pub fn xi_of<T: Scalar>(z: &[Complex<T>], l: usize) -> Complex<T> {
    let (a, b) = (z[2 * l - 2], z[2 * l - 1]);
    a * a + b * b
}

/// `η_l` from the full complex coordinates (`l` 1-based).
pub fn eta_of<T: Scalar>(z: &[Complex<T>], l: usize) -> T {
    norm_sqr(z[2 * l - 2]) + norm_sqr(z[2 * l - 1])
}

/// Full-system integral expressed in the complex coordinates `z`.
///
/// `L`/`T` are rebuilt from `z` through `p̂ = Re z`, `y = −Im z/(nω)`.
pub fn evaluate_z<S: Scalar>(
    params: &SystemParams,
    z: &[Complex<S>],
    id: IntegralId,
    opts: EvalOptions,
) -> Result<Complex<S>> {
    use IntegralId::*;
    let n_of = |j: usize| params.coord_multiplier(j - 1);
    let omega = params.omega();
    let pos = |j: usize| -z[j - 1].im / S::from_f64(n_of(j) as f64 * omega);
    let mom = |j: usize| z[j - 1].re;
    Ok(match id {
        C(j, k) => {
            let (ej, ek) = (n_of(k), n_of(j));
            let c = cpow(z[j - 1], ej) * cpow(conj(z[k - 1]), ek);
            if opts.normalized {
                let two_h: S = z.iter().fold(S::zero(), |acc, &zi| acc + norm_sqr(zi));
                let bound = rpow(two_h.sqrt(), ej + ek);
                Complex::new(c.re / bound, c.im / bound)
            } else {
                c
            }
        }
        L(i, k) => real(pos(i) * mom(k) - pos(k) * mom(i)),
        T(i, k) => {
            let w = S::from_f64((n_of(i) * n_of(k)) as f64 * omega * omega);
            real(mom(i) * mom(k) + w * pos(i) * pos(k))
        }
        Xi(l) => xi_of(z, l),
        XiBar(l) => conj(xi_of(z, l)),
        Eta(l) => real(eta_of(z, l)),
        EFull(l) => real(S::from_f64(0.5) * eta_of(z, l)),
        QFull(l) | QBarFull(l) => {
            let q = q_full_from_z(params, z, l, opts.normalized);
            if matches!(id, QBarFull(_)) {
                conj(q)
            } else {
                q
            }
        }
        IMod(l) => real(norm_sqr(xi_of(z, l))),
        HFull => real(S::from_f64(0.5) * z.iter().fold(S::zero(), |acc, &zi| acc + norm_sqr(zi))),
        Coord(i) => real(pos(i)),
        EReduced(_) | QReduced(_) | QBarReduced(_) | R(_) | HReduced => {
            return Err(Error::WrongSystemKind {
                id: id.to_string(),
                kind: "full",
            })
        }
    })
}

fn q_full_from_z<T: Scalar>(
    params: &SystemParams,
    z: &[Complex<T>],
    l: usize,
    normalized: bool,
) -> Complex<T> {
    let big_n = params.dim();
    let (nl, nn) = (params.n()[l - 1], params.n()[big_n - 1]);
    let mut a = xi_of(z, l);
    let mut b = conj(xi_of(z, big_n));
    if normalized {
        let inv_a = T::one() / eta_of(z, l);
        let inv_b = T::one() / eta_of(z, big_n);
        a = scale(a, inv_a);
        b = scale(b, inv_b);
    }
    cpow(a, nn) * cpow(b, nl)
}

/// Reduced-system factor `A_l = p_l² + k_l/x_l² − n_l²ω²x_l² − 2 i n_l ω p_l x_l`.
pub fn reduced_factor<T: Scalar>(params: &SystemParams, x: &[T], p: &[T], l: usize) -> Complex<T> {
    let (xl, pl) = (x[l - 1], p[l - 1]);
    let nw = T::from_f64(params.n()[l - 1] as f64 * params.omega());
    let k = params.k()[l - 1];
    let centrifugal = if k != 0.0 {
        T::from_f64(k) / (xl * xl)
    } else {
        T::zero()
    };
    let two = T::from_f64(2.0);
    Complex::new(
        pl * pl + centrifugal - nw * nw * xl * xl,
        -(two * nw * pl * xl),
    )
}

/// Reduced plane energy `E_l` (generic).
pub fn reduced_energy<T: Scalar>(params: &SystemParams, x: &[T], p: &[T], l: usize) -> T {
    let (xl, pl) = (x[l - 1], p[l - 1]);
    let nw = T::from_f64(params.n()[l - 1] as f64 * params.omega());
    let k = params.k()[l - 1];
    let centrifugal = if k != 0.0 {
        T::from_f64(k) / (xl * xl)
    } else {
        T::zero()
    };
    T::from_f64(0.5) * (pl * pl + centrifugal + nw * nw * xl * xl)
}

fn q_reduced_generic<T: Scalar>(
    params: &SystemParams,
    x: &[T],
    p: &[T],
    l: usize,
    normalized: bool,
) -> Complex<T> {
    let big_n = params.dim();
    let (nl, nn) = (params.n()[l - 1], params.n()[big_n - 1]);
    let mut a = reduced_factor(params, x, p, l);
    let mut b = conj(reduced_factor(params, x, p, big_n));
    if normalized {
        let two = T::from_f64(2.0);
        a = scale(a, T::one() / (two * reduced_energy(params, x, p, l)));
        b = scale(b, T::one() / (two * reduced_energy(params, x, p, big_n)));
    }
    cpow(a, nn) * cpow(b, nl)
}

/// Reduced-system integral (generic); positions must already be checked.
pub fn evaluate_reduced_generic<S: Scalar>(
    params: &SystemParams,
    x: &[S],
    p: &[S],
    id: IntegralId,
    opts: EvalOptions,
) -> Result<Complex<S>> {
    use IntegralId::*;
    Ok(match id {
        EReduced(l) => real(reduced_energy(params, x, p, l)),
        QReduced(l) => q_reduced_generic(params, x, p, l, opts.normalized),
        QBarReduced(l) => conj(q_reduced_generic(params, x, p, l, opts.normalized)),
        R(l) => real(q_reduced_generic(params, x, p, l, opts.normalized).re),
        IMod(l) => real(norm_sqr(reduced_factor(params, x, p, l))),
        HReduced => real(
            (1..=params.dim()).fold(S::zero(), |acc, l| acc + reduced_energy(params, x, p, l)),
        ),
        Coord(i) => real(x[i - 1]),
        _ => {
            return Err(Error::WrongSystemKind {
                id: id.to_string(),
                kind: "reduced",
            })
        }
    })
}

/// Integral of either kind from generic phase coordinates `(q, p)`.
pub fn evaluate_generic<T: Scalar>(
    params: &SystemParams,
    kind: SystemKind,
    q: &[T],
    p: &[T],
    t: f64,
    id: IntegralId,
    opts: EvalOptions,
) -> Result<Complex<T>> {
    id.validate(params, kind)?;
    match kind {
        SystemKind::Full => {
            let z = complex_coords(params, q, p);
            evaluate_z(params, &z, id, opts)
        }
        SystemKind::Reduced => {
            let xv: Vec<f64> = q.iter().map(Scalar::value).collect();
            params.check_reduced_positions(&xv, t)?;
            evaluate_reduced_generic(params, q, p, id, opts)
        }
    }
}

// ---------------------------------------------------------------------------
// Overflow-safe powers
// ---------------------------------------------------------------------------

/// Magnitude exponent (base 2) beyond which powers switch to log/phase form.
pub const LOG_POLAR_THRESHOLD: f64 = 600.0;
const LOG2_F64_MAX: f64 = 1023.99;

/// `a^ea · b^eb`, switching to a log-magnitude/phase evaluation when the
/// result's binary exponent leaves ±600; fails with `Overflow` past the
/// f64 range.
pub fn power_product(a: Complex64, ea: u32, b: Complex64, eb: u32) -> Result<Complex64> {
    if (ea > 0 && a.norm() == 0.0) || (eb > 0 && b.norm() == 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let log2_mag = ea as f64 * a.norm().log2() + eb as f64 * b.norm().log2();
    if log2_mag > LOG2_F64_MAX {
        return Err(Error::Overflow {
            log2_magnitude: log2_mag,
        });
    }
    if log2_mag.abs() <= LOG_POLAR_THRESHOLD {
        return Ok(cpow(a, ea) * cpow(b, eb));
    }
    let phase = ea as f64 * a.arg() + eb as f64 * b.arg();
    Ok(Complex64::from_polar(log2_mag.exp2(), phase))
}

// ---------------------------------------------------------------------------
// Public f64 API
// ---------------------------------------------------------------------------

fn check_coord(params: &SystemParams, j: usize) -> Result<()> {
    if (1..=params.full_dim()).contains(&j) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "coordinate index {j} outside 1..={}",
            params.full_dim()
        )))
    }
}

fn check_plane(params: &SystemParams, l: usize, hi: usize) -> Result<()> {
    if (1..=hi).contains(&l) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "plane index {l} outside 1..={hi} (N = {})",
            params.dim()
        )))
    }
}

/// `c_jk = z_j^{n(k)} z̄_k^{n(j)}`, overflow-checked.
///
/// With `normalized`, the value is divided by `(2H)^{(n(j)+n(k))/2}`.
pub fn c_invariant(
    params: &SystemParams,
    s: &FullState,
    j: usize,
    k: usize,
    normalized: bool,
) -> Result<Complex64> {
    check_coord(params, j)?;
    check_coord(params, k)?;
    let z = complex_coords(params, &s.y, &s.phat);
    if normalized {
        return evaluate_z(params, &z, IntegralId::C(j, k), EvalOptions::NORMALIZED);
    }
    power_product(
        z[j - 1],
        params.coord_multiplier(k - 1),
        z[k - 1].conj(),
        params.coord_multiplier(j - 1),
    )
}

/// `L_ik = y_i p̂_k − y_k p̂_i` (1-based indices, `i ≠ k`).
pub fn angular_momentum(s: &FullState, i: usize, k: usize) -> f64 {
    s.y[i - 1] * s.phat[k - 1] - s.y[k - 1] * s.phat[i - 1]
}

/// `T_ik = p̂_i p̂_k + n_i n_k ω² y_i y_k`.
pub fn tensor_t(params: &SystemParams, s: &FullState, i: usize, k: usize) -> f64 {
    let w = (params.coord_multiplier(i - 1) * params.coord_multiplier(k - 1)) as f64
        * params.omega()
        * params.omega();
    s.phat[i - 1] * s.phat[k - 1] + w * s.y[i - 1] * s.y[k - 1]
}

/// The rotation-invariant triple of one plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct So2Invariants {
    pub xi: Complex64,
    pub xi_bar: Complex64,
    pub eta: f64,
}

pub fn so2_invariants(params: &SystemParams, z: &ComplexPhase) -> Vec<So2Invariants> {
    (1..=params.dim())
        .map(|l| {
            let xi = xi_of(&z.z, l);
            So2Invariants {
                xi,
                xi_bar: xi.conj(),
                eta: eta_of(&z.z, l),
            }
        })
        .collect()
}

/// Full-system `Q_{2l−1} = ξ_l^{n_N} ξ̄_N^{n_l}`.
pub fn q_full(params: &SystemParams, s: &FullState, l: usize, normalized: bool) -> Result<Complex64> {
    check_plane(params, l, params.dim() - 1)?;
    let z = complex_coords(params, &s.y, &s.phat);
    if normalized {
        return Ok(q_full_from_z(params, &z, l, true));
    }
    let big_n = params.dim();
    power_product(
        xi_of(&z, l),
        params.n()[big_n - 1],
        xi_of(&z, big_n).conj(),
        params.n()[l - 1],
    )
}

pub fn energy_reduced(params: &SystemParams, s: &ReducedState, l: usize) -> Result<f64> {
    check_plane(params, l, params.dim())?;
    params.check_reduced_positions(&s.x, s.t)?;
    Ok(reduced_energy(params, &s.x, &s.p, l))
}

/// Reduced `Q_l = A_l^{n_N} Ā_N^{n_l}`, or `Q_l / ((2E_l)^{n_N} (2E_N)^{n_l})`
/// when `normalized`.
pub fn q_reduced(
    params: &SystemParams,
    s: &ReducedState,
    l: usize,
    normalized: bool,
) -> Result<Complex64> {
    check_plane(params, l, params.dim() - 1)?;
    params.check_reduced_positions(&s.x, s.t)?;
    if normalized {
        return Ok(q_reduced_generic(params, &s.x, &s.p, l, true));
    }
    let big_n = params.dim();
    power_product(
        reduced_factor(params, &s.x, &s.p, l),
        params.n()[big_n - 1],
        reduced_factor(params, &s.x, &s.p, big_n).conj(),
        params.n()[l - 1],
    )
}

/// `R_{2l−1} = (Q_l + Q̄_l)/2`.
pub fn r_integral(params: &SystemParams, s: &ReducedState, l: usize) -> Result<f64> {
    q_reduced(params, s, l, false).map(|q| q.re)
}

/// `(I_l, 4(E_l² − k_l n_l² ω²))` with `I_l = |A_l|²`.
pub fn i_modulus_identity(params: &SystemParams, s: &ReducedState, l: usize) -> Result<(f64, f64)> {
    check_plane(params, l, params.dim())?;
    params.check_reduced_positions(&s.x, s.t)?;
    let lhs = reduced_factor(params, &s.x, &s.p, l).norm_sqr();
    let e = reduced_energy(params, &s.x, &s.p, l);
    let nw = params.n()[l - 1] as f64 * params.omega();
    let rhs = 4.0 * (e * e - params.k()[l - 1] * nw * nw);
    Ok((lhs, rhs))
}

/// Uniform dispatch over every integral id.
pub fn evaluate(
    params: &SystemParams,
    kind: SystemKind,
    state: &PhasePoint,
    id: IntegralId,
    opts: EvalOptions,
) -> Result<IntegralValue> {
    id.validate(params, kind)?;
    let value = match (kind, id, opts.normalized) {
        (SystemKind::Full, IntegralId::C(j, k), false) => {
            c_invariant(params, &state.to_full(), j, k, false)?
        }
        (SystemKind::Full, IntegralId::QFull(l) | IntegralId::QBarFull(l), false) => {
            let q = q_full(params, &state.to_full(), l, false)?;
            if matches!(id, IntegralId::QBarFull(_)) {
                q.conj()
            } else {
                q
            }
        }
        (
            SystemKind::Reduced,
            IntegralId::QReduced(l) | IntegralId::QBarReduced(l) | IntegralId::R(l),
            false,
        ) => {
            let q = q_reduced(params, &state.to_reduced(), l, false)?;
            match id {
                IntegralId::QBarReduced(_) => q.conj(),
                IntegralId::R(_) => Complex64::new(q.re, 0.0),
                _ => q,
            }
        }
        _ => evaluate_generic(params, kind, &state.q, &state.p, state.t, id, opts)?,
    };
    Ok(if id.is_real() {
        IntegralValue::Real(value.re)
    } else {
        IntegralValue::Complex(value)
    })
}

/// Guard used by the drift metric for integrals that vanish at the start.
pub const DRIFT_ABS_FLOOR: f64 = 1e-30;

/// `max_t |F(t) − F(0)| / max(|F(0)|, 10⁻³⁰)`.
pub fn relative_drift(values: &[Complex64]) -> f64 {
    let Some(&f0) = values.first() else {
        return 0.0;
    };
    let denom = f0.norm().max(DRIFT_ABS_FLOOR);
    values
        .iter()
        .map(|v| (v - f0).norm() / denom)
        .fold(0.0, f64::max)
}

/// Integral evaluated along every sample of a trajectory.
pub fn series(
    params: &SystemParams,
    kind: SystemKind,
    states: &[PhasePoint],
    id: IntegralId,
    opts: EvalOptions,
) -> Result<Vec<Complex64>> {
    states
        .iter()
        .map(|s| evaluate(params, kind, s, id, opts).map(|v| v.as_complex()))
        .collect()
}

/// Applies the torus action: rotates positions and momenta of plane `l` by
/// `angles[l]` simultaneously.
pub fn rotate_planes(s: &FullState, angles: &[f64]) -> FullState {
    let mut out = s.clone();
    for (l, &a) in angles.iter().enumerate() {
        let (sn, cs) = a.sin_cos();
        let (i, j) = (2 * l, 2 * l + 1);
        out.y[i] = cs * s.y[i] - sn * s.y[j];
        out.y[j] = sn * s.y[i] + cs * s.y[j];
        out.phat[i] = cs * s.phat[i] - sn * s.phat[j];
        out.phat[j] = sn * s.phat[i] + cs * s.phat[j];
    }
    out
}

/// Standard conserved set of the reduced system: `E_1..E_N, R_1..R_{N−1}`.
pub fn reduced_integral_set(params: &SystemParams) -> Vec<IntegralId> {
    let n = params.dim();
    (1..=n)
        .map(IntegralId::EReduced)
        .chain((1..n).map(IntegralId::R))
        .collect()
}

/// Rotation-invariant conserved set of the full system:
/// plane energies, plane angular momenta and the real parts of `Q_{2l−1}`.
pub fn full_integral_set(params: &SystemParams) -> Vec<IntegralId> {
    let n = params.dim();
    (1..=n)
        .map(IntegralId::EFull)
        .chain((1..=n).map(|l| IntegralId::L(2 * l - 1, 2 * l)))
        .chain((1..n).map(IntegralId::QFull))
        .collect()
}
