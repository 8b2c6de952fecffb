use std::f64::consts::{PI, TAU};

use superint::analysis::{expected_full_period, period_estimate};
use superint::dynamics::{integrate_oracle, step};
use superint::sampling::StateSampler;
use superint::{integrate, Error, Method, PhasePoint, SystemKind, SystemParams};

fn harmonic() -> (SystemParams, PhasePoint) {
    (
        SystemParams::new(&[1], &[0.0], 1.0).unwrap(),
        PhasePoint { t: 0.0, q: vec![1.0], p: vec![0.0] },
    )
}

fn endpoint_error(method: Method, steps: usize) -> f64 {
    let (params, s0) = harmonic();
    let traj = integrate(&params, SystemKind::Reduced, &s0, TAU / steps as f64, TAU, method).unwrap();
    let s = traj.last();
    (s.q[0] - s.t.cos()).hypot(s.p[0] + s.t.sin())
}

#[test]
fn verlet_is_second_order() {
    let ratio = endpoint_error(Method::Verlet2, 100) / endpoint_error(Method::Verlet2, 200);
    assert!((3.0..=5.0).contains(&ratio), "{ratio}");
}

#[test]
fn yoshida_is_fourth_order() {
    let ratio = endpoint_error(Method::Yoshida4, 100) / endpoint_error(Method::Yoshida4, 200);
    assert!((12.0..=20.0).contains(&ratio), "{ratio}");
}

#[test]
fn one_period_returns_to_start() {
    let (params, s0) = harmonic();
    let traj = integrate(&params, SystemKind::Reduced, &s0, 1e-3, TAU, Method::Yoshida4).unwrap();
    let s = traj.last();
    assert!((s.t - TAU).abs() <= 1e-3);
    assert!((s.q[0] - s.t.cos()).abs() < 1e-5 && (s.p[0] + s.t.sin()).abs() < 1e-5);
}

#[test]
fn oracle_tracks_closed_form() {
    let (params, s0) = harmonic();
    let traj = integrate_oracle(&params, SystemKind::Reduced, &s0, 3.0 * TAU, 1e-12).unwrap();
    for s in &traj.states {
        assert!((s.q[0] - s.t.cos()).abs() < 1e-9);
    }
    assert!((traj.last().t - 3.0 * TAU).abs() < 1e-12);
}

#[test]
fn oracle_stops_at_the_exclusion_radius() {
    // Released from rest with a tiny barrier, the pericentre lies well
    // inside the exclusion radius.
    let params = SystemParams::new(&[1], &[1e-6], 1.0).unwrap().with_exclusion_radius(1e-2);
    let s0 = PhasePoint { t: 0.0, q: vec![1.0], p: vec![0.0] };
    let err = integrate_oracle(&params, SystemKind::Reduced, &s0, TAU, 1e-10).unwrap_err();
    assert!(err.is_singular(), "{err}");
}

#[test]
fn step_into_exclusion_is_rejected() {
    let params = SystemParams::new(&[1], &[1e-6], 1.0).unwrap().with_exclusion_radius(0.5);
    let s = PhasePoint { t: 0.0, q: vec![0.6], p: vec![-5.0] };
    match step(&params, SystemKind::Reduced, &s, 0.05, Method::Yoshida4) {
        Err(Error::SingularState { index, .. }) => assert_eq!(index, 1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn reduced_period_examples() {
    let cases: [(&[u32], &[f64], f64, f64); 2] = [
        (&[1], &[0.0], TAU, 1e-6),
        (&[2, 3], &[0.4, 0.9], PI, 1e-5),
    ];
    for (n, k, expected, tol) in cases {
        let params = SystemParams::new(n, k, 1.0).unwrap();
        let s0 = StateSampler::default().sample_many(&params, SystemKind::Reduced, 1, 8).remove(0);
        let traj = integrate(&params, SystemKind::Reduced, &s0, 1e-4, 2.0 * TAU + 0.1, Method::Yoshida4).unwrap();
        let est = period_estimate(&params, &traj, tol).unwrap();
        assert!((est.period - expected).abs() < 1e-4 * expected, "{n:?}: {est:?}");
        assert!(est.closure < tol);
    }
}

#[test]
fn isotropic_radius_has_half_period() {
    let params = SystemParams::new(&[1], &[0.8], 1.0).unwrap();
    let s0 = PhasePoint { t: 0.0, q: vec![1.3], p: vec![0.5] };
    let traj = integrate(&params, SystemKind::Reduced, &s0, 1e-4, 2.0 * TAU, Method::Yoshida4).unwrap();
    let est = period_estimate(&params, &traj, 1e-6).unwrap();
    assert!((est.period - PI).abs() < 1e-6, "{est:?}");
}

#[test]
fn full_period_divides_two_pi() {
    for n in [[1u32, 2], [2, 3], [2, 4]] {
        let params = SystemParams::new(&n, &[0.0, 0.0], 1.0).unwrap();
        let s0 = StateSampler::default().sample_many(&params, SystemKind::Full, 1, 3).remove(0);
        let traj = integrate(&params, SystemKind::Full, &s0, 1e-4 * TAU, 2.0 * TAU + 0.1, Method::Yoshida4).unwrap();
        let est = period_estimate(&params, &traj, 1e-4).unwrap();
        let expected = expected_full_period(&params);
        assert!((est.period - expected).abs() < 1e-4 * expected, "{n:?}: {est:?}");
        let ratio = TAU / est.period;
        assert!((ratio - ratio.round()).abs() < 1e-4);
    }
}
