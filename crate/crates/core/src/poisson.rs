//! Poisson brackets with exact first derivatives from forward-mode dual
//! numbers.
//!
//! Two independent routes are provided: the canonical bracket over
//! `(q, p)` and the weighted bracket over the complex coordinates
//! `z_j, z̄_j` (Wirtinger derivatives).

use num_complex::{Complex, Complex64};
use serde::{Deserialize, Serialize};

use crate::dual::{split, Dual};
use crate::dynamics::{PhasePoint, SystemKind};
use crate::error::Result;
use crate::invariants::{evaluate_generic, evaluate_z, EvalOptions, IntegralId};
use crate::model::{ComplexPhase, SystemParams};
use crate::sampling::StateSampler;

/// A phase-space function that can be evaluated on dual-number coordinates.
pub trait PhaseFunction: Sync {
    fn eval(&self, q: &[Dual], p: &[Dual], t: f64) -> Result<Complex<Dual>>;
}

/// Adapter for closures.
pub struct FnPhase<F>(pub F);

impl<F> PhaseFunction for FnPhase<F>
where
    F: Fn(&[Dual], &[Dual]) -> Result<Complex<Dual>> + Sync,
{
    fn eval(&self, q: &[Dual], p: &[Dual], _t: f64) -> Result<Complex<Dual>> {
        (self.0)(q, p)
    }
}

/// One library integral bound to its parameters and system kind.
#[derive(Debug, Clone, Copy)]
pub struct Integral<'a> {
    pub params: &'a SystemParams,
    pub kind: SystemKind,
    pub id: IntegralId,
    pub opts: EvalOptions,
}

impl<'a> Integral<'a> {
    pub fn new(params: &'a SystemParams, kind: SystemKind, id: IntegralId) -> Self {
        Self {
            params,
            kind,
            id,
            opts: EvalOptions::RAW,
        }
    }
}

impl PhaseFunction for Integral<'_> {
    fn eval(&self, q: &[Dual], p: &[Dual], t: f64) -> Result<Complex<Dual>> {
        evaluate_generic(self.params, self.kind, q, p, t, self.id, self.opts)
    }
}

/// Value and gradient `(∂/∂q_1.., ∂/∂p_1..)` of `f` at `s`, one dual pass
/// per coordinate.
pub fn gradient(f: &dyn PhaseFunction, s: &PhasePoint) -> Result<(Complex64, Vec<Complex64>)> {
    let d = s.q.len();
    let mut q: Vec<Dual> = s.q.iter().map(|&v| Dual::constant(v)).collect();
    let mut p: Vec<Dual> = s.p.iter().map(|&v| Dual::constant(v)).collect();
    let mut grad = Vec::with_capacity(2 * d);
    let mut value = Complex64::new(0.0, 0.0);
    for i in 0..2 * d {
        let slot = if i < d { &mut q[i] } else { &mut p[i - d] };
        slot.eps = 1.0;
        let (v, dv) = split(f.eval(&q, &p, s.t)?);
        value = v;
        grad.push(dv);
        let slot = if i < d { &mut q[i] } else { &mut p[i - d] };
        slot.eps = 0.0;
    }
    if d == 0 {
        value = split(f.eval(&q, &p, s.t)?).0;
    }
    Ok((value, grad))
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn canonical_from_gradients(gf: &[Complex64], gg: &[Complex64]) -> Complex64 {
    let d = gf.len() / 2;
    (0..d)
        .map(|i| gf[i] * gg[d + i] - gf[d + i] * gg[i])
        .sum()
}

/// `{f, g} = Σ_i ∂f/∂q_i ∂g/∂p_i − ∂f/∂p_i ∂g/∂q_i`.
pub fn bracket_canonical(
    f: &dyn PhaseFunction,
    g: &dyn PhaseFunction,
    s: &PhasePoint,
) -> Result<Complex64> {
    let (_, gf) = gradient(f, s)?;
    let (_, gg) = gradient(g, s)?;
    Ok(canonical_from_gradients(&gf, &gg))
}

/// Guard added to the gradient-norm product in scaled residuals.
pub const SCALE_FLOOR: f64 = 1e-30;

/// Bracket together with `|{f,g}| / (‖∇f‖‖∇g‖ + 10⁻³⁰)`.
pub fn scaled_bracket(
    f: &dyn PhaseFunction,
    g: &dyn PhaseFunction,
    s: &PhasePoint,
) -> Result<(Complex64, f64)> {
    let (_, gf) = gradient(f, s)?;
    let (_, gg) = gradient(g, s)?;
    let b = canonical_from_gradients(&gf, &gg);
    Ok((b, b.norm() / (norm(&gf) * norm(&gg) + SCALE_FLOOR)))
}

/// A function of the complex coordinates `z` (and implicitly `z̄`).
pub trait ZFunction: Sync {
    fn eval_z(&self, z: &[Complex<Dual>]) -> Result<Complex<Dual>>;
}

impl<F> ZFunction for F
where
    F: Fn(&[Complex<Dual>]) -> Result<Complex<Dual>> + Sync,
{
    fn eval_z(&self, z: &[Complex<Dual>]) -> Result<Complex<Dual>> {
        self(z)
    }
}

/// Full-system library integral written over `z`.
#[derive(Debug, Clone, Copy)]
pub struct ZIntegral<'a> {
    pub params: &'a SystemParams,
    pub id: IntegralId,
    pub opts: EvalOptions,
}

impl ZFunction for ZIntegral<'_> {
    fn eval_z(&self, z: &[Complex<Dual>]) -> Result<Complex<Dual>> {
        self.id.validate(self.params, SystemKind::Full)?;
        evaluate_z(self.params, z, self.id, self.opts)
    }
}

/// Wirtinger derivatives `(∂f/∂z_j, ∂f/∂z̄_j)` for every `j`.
pub fn wirtinger(f: &dyn ZFunction, z: &ComplexPhase) -> Result<Vec<(Complex64, Complex64)>> {
    let mut zd: Vec<Complex<Dual>> = z
        .z
        .iter()
        .map(|c| Complex::new(Dual::constant(c.re), Dual::constant(c.im)))
        .collect();
    let i = Complex64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(zd.len());
    for j in 0..zd.len() {
        zd[j].re.eps = 1.0;
        let (_, du) = split(f.eval_z(&zd)?);
        zd[j].re.eps = 0.0;
        zd[j].im.eps = 1.0;
        let (_, dv) = split(f.eval_z(&zd)?);
        zd[j].im.eps = 0.0;
        out.push((0.5 * (du - i * dv), 0.5 * (du + i * dv)));
    }
    Ok(out)
}

/// `{f, g} = −2iω Σ_k n_k Σ_{j∈plane k} (∂f/∂z_j ∂g/∂z̄_j − ∂f/∂z̄_j ∂g/∂z_j)`.
pub fn bracket_z(
    params: &SystemParams,
    f: &dyn ZFunction,
    g: &dyn ZFunction,
    z: &ComplexPhase,
) -> Result<Complex64> {
    let wf = wirtinger(f, z)?;
    let wg = wirtinger(g, z)?;
    let sum: Complex64 = wf
        .iter()
        .zip(&wg)
        .enumerate()
        .map(|(j, ((fz, fzb), (gz, gzb)))| {
            params.coord_multiplier(j) as f64 * (fz * gzb - fzb * gz)
        })
        .sum();
    Ok(Complex64::new(0.0, -2.0 * params.omega()) * sum)
}

/// Infinitesimal rotation of plane `l` (1-based) applied to `f`:
/// `z_{2l} ∂_{z_{2l−1}} f − z_{2l−1} ∂_{z_{2l}} f + (conjugate terms)`.
///
/// Returns the raw value and its residual scaled by `|z|·‖∇f‖`.
pub fn rotation_generator(
    f: &dyn ZFunction,
    z: &ComplexPhase,
    l: usize,
) -> Result<(Complex64, f64)> {
    let w = wirtinger(f, z)?;
    let (a, b) = (2 * l - 2, 2 * l - 1);
    let (za, zb) = (z.z[a], z.z[b]);
    let v = zb * w[a].0 - za * w[b].0 + zb.conj() * w[a].1 - za.conj() * w[b].1;
    let grad_norm = w
        .iter()
        .map(|(d, db)| d.norm_sqr() + db.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let z_norm = z.z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    Ok((v, v.norm() / (z_norm * grad_norm + SCALE_FLOOR)))
}

/// Pass threshold on the scaled bracket residual.
pub const BRACKET_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketResult {
    pub pair: [IntegralId; 2],
    pub max_scaled_residual: f64,
    pub pass: bool,
    pub seed: u64,
    pub samples: usize,
}

/// Scaled bracket residual for each pair, maximised over seeded random
/// states. Pairs pass when the residual stays below [`BRACKET_TOLERANCE`].
pub fn commutation_report(
    params: &SystemParams,
    kind: SystemKind,
    pairs: &[(IntegralId, IntegralId)],
    samples: usize,
    seed: u64,
) -> Result<Vec<BracketResult>> {
    commutation_report_with(params, params, kind, pairs, samples, seed, &StateSampler::default())
}

/// As [`commutation_report`], but the Hamiltonians `HFull`/`HReduced` use
/// `system` while every other integral is evaluated with `integrals`.
pub fn commutation_report_with(
    system: &SystemParams,
    integrals: &SystemParams,
    kind: SystemKind,
    pairs: &[(IntegralId, IntegralId)],
    samples: usize,
    seed: u64,
    sampler: &StateSampler,
) -> Result<Vec<BracketResult>> {
    let samples = samples.max(1);
    let states = sampler.sample_many(system, kind, samples, seed);
    let bind = |id: IntegralId| {
        let params = if matches!(id, IntegralId::HFull | IntegralId::HReduced) {
            system
        } else {
            integrals
        };
        Integral::new(params, kind, id)
    };
    pairs
        .iter()
        .map(|&(a, b)| {
            let (fa, fb) = (bind(a), bind(b));
            let mut worst = 0.0f64;
            for s in &states {
                let (_, scaled) = scaled_bracket(&fa, &fb, s)?;
                worst = worst.max(scaled);
            }
            Ok(BracketResult {
                pair: [a, b],
                max_scaled_residual: worst,
                pass: worst < BRACKET_TOLERANCE,
                seed,
                samples,
            })
        })
        .collect()
}

/// Pairs checked by default: the Hamiltonian against every integral of the
/// standard set, and the plane energies pairwise.
pub fn default_pairs(params: &SystemParams, kind: SystemKind) -> Vec<(IntegralId, IntegralId)> {
    let n = params.dim();
    let (h, set, energy): (IntegralId, Vec<IntegralId>, fn(usize) -> IntegralId) = match kind {
        SystemKind::Reduced => (
            IntegralId::HReduced,
            crate::invariants::reduced_integral_set(params),
            IntegralId::EReduced,
        ),
        SystemKind::Full => (
            IntegralId::HFull,
            crate::invariants::full_integral_set(params),
            IntegralId::EFull,
        ),
    };
    let mut pairs: Vec<_> = set.into_iter().map(|f| (h, f)).collect();
    for i in 1..=n {
        for j in i + 1..=n {
            pairs.push((energy(i), energy(j)));
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{to_complex, FullState};

    fn sample(params: &SystemParams, kind: SystemKind, seed: u64) -> PhasePoint {
        StateSampler::default().sample_many(params, kind, 1, seed).remove(0)
    }

    #[test]
    fn canonical_pairs() {
        let params = SystemParams::new(&[1, 2], &[0.0, 0.0], 1.0).unwrap();
        let s = sample(&params, SystemKind::Reduced, 3);
        for i in 0..2 {
            for j in 0..2 {
                let x = FnPhase(move |q: &[Dual], _: &[Dual]| Ok(Complex::new(q[i], Dual::constant(0.0))));
                let pj = FnPhase(move |_: &[Dual], p: &[Dual]| Ok(Complex::new(p[j], Dual::constant(0.0))));
                let xj = FnPhase(move |q: &[Dual], _: &[Dual]| Ok(Complex::new(q[j], Dual::constant(0.0))));
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(bracket_canonical(&x, &pj, &s).unwrap(), Complex64::new(expected, 0.0));
                assert_eq!(bracket_canonical(&x, &xj, &s).unwrap(), Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn reduced_energies_commute() {
        let params = SystemParams::new(&[1, 3], &[0.4, 1.2], 1.0).unwrap();
        for seed in 0..20 {
            let s = sample(&params, SystemKind::Reduced, seed);
            let e1 = Integral::new(&params, SystemKind::Reduced, IntegralId::EReduced(1));
            let e2 = Integral::new(&params, SystemKind::Reduced, IntegralId::EReduced(2));
            let (_, scaled) = scaled_bracket(&e1, &e2, &s).unwrap();
            assert!(scaled < 1e-12);
        }
    }

    #[test]
    fn hamiltonian_rotates_xi() {
        // {H, ξ_l} = 2 i n_l ω ξ_l with the canonical sign convention.
        let params = SystemParams::new(&[2, 3], &[0.0, 0.0], 0.7).unwrap();
        for seed in 0..10 {
            let s = sample(&params, SystemKind::Full, seed);
            let z = to_complex(&params, &s.to_full());
            for l in 1..=2 {
                let h = ZIntegral { params: &params, id: IntegralId::HFull, opts: EvalOptions::RAW };
                let xi = ZIntegral { params: &params, id: IntegralId::Xi(l), opts: EvalOptions::RAW };
                let b = bracket_z(&params, &h, &xi, &z).unwrap();
                let xi_val = crate::invariants::xi_of(&z.z, l);
                let ratio = b / xi_val;
                let expected = Complex64::new(0.0, 2.0 * params.n()[l - 1] as f64 * params.omega());
                assert!((ratio - expected).norm() < 1e-12 * expected.norm());

                let hc = Integral::new(&params, SystemKind::Full, IntegralId::HFull);
                let xc = Integral::new(&params, SystemKind::Full, IntegralId::Xi(l));
                let bc = bracket_canonical(&hc, &xc, &s).unwrap();
                assert!((bc - b).norm() < 1e-12 * b.norm());
            }
        }
    }

    #[test]
    fn plane_rotation_annihilates_so2_invariants() {
        let params = SystemParams::new(&[1, 2], &[0.0, 0.0], 1.0).unwrap();
        let s = FullState { y: vec![0.3, -0.7, 1.1, 0.2], phat: vec![0.9, 0.4, -0.6, 1.3], t: 0.0 };
        let z = to_complex(&params, &s);
        for id in [IntegralId::Xi(1), IntegralId::XiBar(1), IntegralId::Eta(1), IntegralId::Xi(2), IntegralId::Eta(2)] {
            let f = ZIntegral { params: &params, id, opts: EvalOptions::RAW };
            for l in 1..=2 {
                let (_, scaled) = rotation_generator(&f, &z, l).unwrap();
                assert!(scaled < 1e-12, "{id} plane {l}: {scaled}");
            }
        }
        // A non-invariant is not annihilated.
        let y1 = ZIntegral { params: &params, id: IntegralId::Coord(1), opts: EvalOptions::RAW };
        assert!(rotation_generator(&y1, &z, 1).unwrap().1 > 1e-3);
    }

    #[test]
    fn angular_momentum_commutes_with_eta() {
        let params = SystemParams::new(&[1, 2], &[0.0, 0.0], 1.0).unwrap();
        let s = sample(&params, SystemKind::Full, 9);
        let z = to_complex(&params, &s.to_full());
        let l12 = ZIntegral { params: &params, id: IntegralId::L(1, 2), opts: EvalOptions::RAW };
        let eta = ZIntegral { params: &params, id: IntegralId::Eta(1), opts: EvalOptions::RAW };
        let b = bracket_z(&params, &l12, &eta, &z).unwrap();
        assert!(b.norm() < 1e-13);
    }

    #[test]
    fn cross_plane_angular_momentum_fails() {
        let params = SystemParams::new(&[1, 2], &[0.0, 0.0], 1.0).unwrap();
        let report = commutation_report(
            &params,
            SystemKind::Full,
            &[(IntegralId::L(1, 3), IntegralId::HFull), (IntegralId::L(1, 2), IntegralId::HFull)],
            20,
            5,
        )
        .unwrap();
        assert!(!report[0].pass);
        assert!(report[1].pass);
        assert_eq!(report[0].samples, 20);
        assert_eq!(report[0].seed, 5);
    }

    #[test]
    fn report_json_shape() {
        let r = BracketResult {
            pair: [IntegralId::HReduced, IntegralId::R(1)],
            max_scaled_residual: 1e-16,
            pass: true,
            seed: 1,
            samples: 2,
        };
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["pair"][1], "R(1)");
        assert_eq!(v["pass"], true);
    }
}
