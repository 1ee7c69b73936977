use fkpp_core::groundstate::{solve_interval, SolveOptions};
use fkpp_core::period::{grad_t, grad_t0, period_t, period_t0};
use fkpp_core::phaseplane::{energy_above_center, potential};
use fkpp_core::PhasePoint;

// Reference values computed with 50-digit quadrature.
const T_HALF: f64 = 2.078234042903683;
const T0_REF: f64 = 0.5160640044065572;

fn pt(p: f64, q: f64) -> PhasePoint<f64> {
    PhasePoint::new(p, q).unwrap()
}

/// Plain RK4 for `w'' = w - w^2`, written out here so the oracle shares no
/// code with the library.
fn rk4(w: f64, v: f64, h: f64) -> (f64, f64) {
    let f = |w: f64| w - w * w;
    let (k1w, k1v) = (v, f(w));
    let (k2w, k2v) = (v + 0.5 * h * k1v, f(w + 0.5 * h * k1w));
    let (k3w, k3v) = (v + 0.5 * h * k2v, f(w + 0.5 * h * k2w));
    let (k4w, k4v) = (v + h * k3v, f(w + h * k3w));
    (w + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w), v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v))
}

/// Arclength until `event(w, v)` changes sign, located by bisecting the
/// final step.
fn shoot(w0: f64, v0: f64, event: impl Fn(f64, f64) -> f64) -> f64 {
    let h = 1e-4;
    let (mut w, mut v, mut x) = (w0, v0, 0.0);
    let s0 = event(w, v).signum();
    loop {
        let (wn, vn) = rk4(w, v, h);
        if event(wn, vn).signum() != s0 {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let (wm, vm) = rk4(w, v, mid);
                if event(wm, vm).signum() == s0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return x + 0.5 * (lo + hi);
        }
        w = wn;
        v = vn;
        x += h;
        assert!(x < 100.0, "event never reached");
    }
}

/// Shoot from `w = 1` with slope `q~` until `w = p`, or until the slope
/// vanishes when `q = 0` (the orbit only touches `w = p` there).
fn shoot_t(p: f64, q: f64) -> f64 {
    let qt = -energy_above_center(p, q).sqrt();
    if q == 0.0 {
        shoot(1.0, qt, |_, v| v)
    } else {
        shoot(1.0, qt, |w, _| w - p)
    }
}

/// Shoot from `(p, q)` until the slope vanishes.
fn shoot_t0(p: f64, q: f64) -> f64 {
    shoot(p, q, |_, v| v)
}

#[test]
fn pendant_period_at_turning_point() {
    let t = period_t(pt(0.5, 0.0), 1e-13).unwrap().value;
    assert!((t - T_HALF).abs() < 1e-10, "T = {t}");
    assert!((shoot_t(0.5, 0.0) - T_HALF).abs() < 1e-8);
}

#[test]
fn interval_solution_inverts_the_period() {
    let s = solve_interval(T_HALF, SolveOptions::default()).unwrap();
    assert!((s.p - 0.5).abs() < 1e-9, "p = {}", s.p);
    let t6 = period_t(pt(0.6, 0.0), 1e-12).unwrap().value;
    let t4 = period_t(pt(0.4, 0.0), 1e-12).unwrap().value;
    assert!(t6 < T_HALF && T_HALF < t4);
}

#[test]
fn loop_period_reference_value() {
    let t0 = period_t0(pt(0.9, -0.05), 1e-13).unwrap().value;
    assert!((t0 - T0_REF).abs() < 1e-10, "T0 = {t0}");
    assert!((shoot_t0(0.9, -0.05) - T0_REF).abs() < 1e-8);
}

#[test]
fn periods_agree_with_shooting() {
    for &(p, q) in &[(0.3, -0.1), (0.05, -0.02), (0.7, -0.4), (0.95, -0.01), (0.2, -1.5)] {
        let t = period_t(pt(p, q), 1e-12).unwrap().value;
        assert!((t - shoot_t(p, q)).abs() < 1e-8, "T({p}, {q})");
    }
    for &(p, q) in &[(0.3, -0.1), (0.05, -0.02), (0.7, -0.1), (0.95, -0.01)] {
        let x = pt(p, q);
        assert!(x.energy() < 0.0);
        let t0 = period_t0(x, 1e-12).unwrap().value;
        assert!((t0 - shoot_t0(p, q)).abs() < 1e-8, "T0({p}, {q})");
    }
}

#[test]
fn analytic_gradients_match_finite_differences() {
    let (p, q, h) = (0.45, -0.03, 1e-6);
    let t = |p, q| period_t(pt(p, q), 1e-13).unwrap().value;
    let t0 = |p, q| period_t0(pt(p, q), 1e-13).unwrap().value;
    let g = grad_t(pt(p, q), 1e-12).unwrap();
    let g0 = grad_t0(pt(p, q), 1e-12).unwrap();
    let fd = |f: &dyn Fn(f64, f64) -> f64, dp: f64, dq: f64| (f(p + dp, q + dq) - f(p - dp, q - dq)) / (2.0 * h);
    assert!((g.dp - fd(&t, h, 0.0)).abs() < 1e-5 * g.dp.abs().max(1.0));
    assert!((g.dq - fd(&t, 0.0, h)).abs() < 1e-5 * g.dq.abs().max(1.0));
    assert!((g0.dp - fd(&t0, h, 0.0)).abs() < 1e-5 * g0.dp.abs().max(1.0));
    assert!((g0.dq - fd(&t0, 0.0, h)).abs() < 1e-5 * g0.dq.abs().max(1.0));
}

#[test]
fn pendant_gradient_near_saddle() {
    let p = 1e-3;
    let g = grad_t(pt(p, -p), 1e-12).unwrap();
    assert!((p * g.dp + 0.5).abs() < 1e-2, "p dT/dp = {}", p * g.dp);
}

#[test]
fn loop_orbit_energy_matches_turning_point() {
    let x = pt(0.9, -0.05);
    let p0 = fkpp_core::phaseplane::turning_point_p0(x).unwrap();
    assert!((-potential(p0) - x.energy()).abs() < 1e-15);
}
