//! Period functions of the phase plane.
//!
//! * `T(p, q)`: arclength from the section `w = 1` down to `(p, q)`; it
//!   parameterises the solution on a Dirichlet pendant.
//! * `T0(p, q)`: arclength from `(p, q)` to the left turning point `(p0, 0)`
//!   of the closed orbit; it parameterises half of a loop.
//!
//! Both are weakly singular integrals `∫ du / sqrt(E + A(u))`. The square-root
//! endpoint singularities are removed with `u = a + (b - a) s^2`, which turns
//! the integrands into analytic functions of `s` that adaptive Gauss–Kronrod
//! handles well. Partial derivatives use the renormalised forms
//!
//! ```text
//! [E + A(1)] dT/dp  = -p(1-p) I1 + q,   [E + A(1)] dT/dq  = q I1 + (1-p)(1+2p)/(3p),
//! [E + A(1)] dT0/dp = -p(1-p) I2 - q,   [E + A(1)] dT0/dq = q I2 - (1-p)(1+2p)/(3p),
//! ```
//!
//! with `I1`, `I2` the integrals of `(1 - u^2) / (3 u^2 v)` over the same arcs.

use crate::error::{Error, Result};
use crate::phaseplane::{energy_above_center, potential, potential_slope, turning_gap, PhasePoint};
use crate::quadrature::integrate;
use crate::scalar::{c, homoclinic_shift, Scalar};

/// Default absolute tolerance for period evaluations.
pub const DEFAULT_TOL: f64 = 1e-10;

/// `T0` is only evaluated on orbits with `E(p, q) < -HOMOCLINIC_GUARD * A(p)`.
pub const HOMOCLINIC_GUARD: f64 = 1e-12;

/// Whether `(p, q)` lies on a closed orbit safely inside the homoclinic loop.
/// The margin scales with `A(p)` because near the saddle every energy level
/// of interest is of order `p^2`.
pub fn inside_homoclinic<T: Scalar>(pt: PhasePoint<T>) -> bool {
    let margin = c::<T>(HOMOCLINIC_GUARD).max(c::<T>(4.0) * T::epsilon());
    let e = pt.energy();
    e > c(-1.0 / 3.0) && e < -margin * potential(pt.p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodValue<T> {
    pub value: T,
    pub estimated_quadrature_error: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodGradient<T> {
    pub dp: T,
    pub dq: T,
}

fn weight_unit<T: Scalar>(_u: T, _one_minus_u: T) -> T {
    T::one()
}

/// `(1 - u^2) / (3 u^2)`.
fn weight_renormalised<T: Scalar>(u: T, one_minus_u: T) -> T {
    one_minus_u * (T::one() + u) / (c::<T>(3.0) * u * u)
}

fn effective_tol<T: Scalar>(tol: T) -> T {
    tol.max(T::tol_floor())
}

fn check_stem_domain<T: Scalar>(pt: PhasePoint<T>) -> Result<()> {
    if !(pt.p > T::zero() && pt.p < T::one()) || !(pt.q <= T::zero()) || !pt.q.is_finite() {
        return Err(Error::InvalidDomain(format!("T(p, q) needs 0 < p < 1 and q <= 0, got ({}, {})", pt.p, pt.q)));
    }
    Ok(())
}

/// `∫_p^1 weight(u) / v(u) du` along the orbit through `(p, q)`.
fn stem_integral<T: Scalar>(pt: PhasePoint<T>, weight: fn(T, T) -> T, epsabs: T, epsrel: T) -> Result<PeriodValue<T>> {
    let (p, q) = (pt.p, pt.q);
    let span = T::one() - p;
    let q2 = q * q;
    let two = c::<T>(2.0);
    let f = |s: T| {
        let s2 = s * s;
        let u = p + span * s2;
        let one_minus_u = span * (T::one() - s2);
        let b = potential_slope(u, one_minus_u, p, span);
        let w = weight(u, one_minus_u);
        if q2 == T::zero() {
            two * span.sqrt() * w / b.sqrt()
        } else {
            two * span * s * w / (q2 + span * s2 * b).sqrt()
        }
    };
    let r = integrate(f, T::zero(), T::one(), epsabs, epsrel);
    finish(r.value, r.abs_error, r.converged, epsabs.max(epsrel * r.value.abs()))
}

/// `∫_{p0}^p weight(u) / v(u) du` along the closed orbit through `(p, q)`.
fn loop_integral<T: Scalar>(
    pt: PhasePoint<T>,
    gap: T,
    weight: fn(T, T) -> T,
    epsabs: T,
    epsrel: T,
) -> Result<PeriodValue<T>> {
    let p0 = pt.p - gap;
    let one_minus_p0 = (T::one() - pt.p) + gap;
    let two = c::<T>(2.0);
    let root_gap = gap.sqrt();
    let f = |s: T| {
        let s2 = s * s;
        let u = p0 + gap * s2;
        let one_minus_u = one_minus_p0 - gap * s2;
        let b = potential_slope(u, one_minus_u, p0, one_minus_p0);
        two * root_gap * weight(u, one_minus_u) / b.sqrt()
    };
    let r = integrate(f, T::zero(), T::one(), epsabs, epsrel);
    finish(r.value, r.abs_error, r.converged, epsabs.max(epsrel * r.value.abs()))
}

fn finish<T: Scalar>(value: T, err: T, converged: bool, target: T) -> Result<PeriodValue<T>> {
    if !value.is_finite() || (!converged && err > target) {
        return Err(Error::QuadratureFailed { tol: target.as_f64(), estimate: err.as_f64() });
    }
    Ok(PeriodValue { value, estimated_quadrature_error: err })
}

fn center_radius<T: Scalar>(pt: PhasePoint<T>) -> T {
    let a = T::one() - pt.p;
    (a * a + pt.q * pt.q).sqrt()
}

/// Pendant period `T(p, q) = ∫_p^1 du / sqrt(E(p, q) + A(u))`.
pub fn period_t<T: Scalar>(pt: PhasePoint<T>, tol: T) -> Result<PeriodValue<T>> {
    check_stem_domain(pt)?;
    let tol = effective_tol(tol);
    let r = center_radius(pt);
    if r < tol {
        // Within `tol` of the center the orbit is a circle to first order.
        return Ok(PeriodValue { value: ((T::one() - pt.p) / r).asin(), estimated_quadrature_error: r });
    }
    stem_integral(pt, weight_unit, tol, T::zero())
}

/// Loop period `T0(p, q) = ∫_{p0}^p du / sqrt(E(p, q) + A(u))`.
pub fn period_t0<T: Scalar>(pt: PhasePoint<T>, tol: T) -> Result<PeriodValue<T>> {
    check_loop_domain(pt)?;
    if pt.q == T::zero() {
        return Ok(PeriodValue { value: T::zero(), estimated_quadrature_error: T::zero() });
    }
    let tol = effective_tol(tol);
    let r = center_radius(pt);
    if r < tol {
        let half_pi = T::FRAC_PI_2();
        return Ok(PeriodValue { value: half_pi - ((T::one() - pt.p) / r).asin(), estimated_quadrature_error: r });
    }
    let gap = turning_gap(pt)?;
    loop_integral(pt, gap, weight_unit, tol, T::zero())
}

fn check_loop_domain<T: Scalar>(pt: PhasePoint<T>) -> Result<()> {
    if !(pt.p > T::zero() && pt.p < T::one()) || !(pt.q <= T::zero()) || !pt.q.is_finite() {
        return Err(Error::InvalidDomain(format!("T0(p, q) needs 0 < p < 1 and q <= 0, got ({}, {})", pt.p, pt.q)));
    }
    if pt.q != T::zero() && !inside_homoclinic(pt) {
        return Err(Error::OrbitNotClosed { energy: pt.energy().as_f64() });
    }
    Ok(())
}

/// `I1 = ∫_p^1 (1 - u^2) / (3 u^2 v) du`.
pub fn integral_i1<T: Scalar>(pt: PhasePoint<T>, tol: T) -> Result<PeriodValue<T>> {
    check_stem_domain(pt)?;
    stem_integral(pt, weight_renormalised, T::min_positive_value(), effective_tol(tol))
}

/// `I2 = ∫_{p0}^p (1 - u^2) / (3 u^2 v) du`.
pub fn integral_i2<T: Scalar>(pt: PhasePoint<T>, tol: T) -> Result<PeriodValue<T>> {
    check_loop_domain(pt)?;
    if pt.q == T::zero() {
        return Ok(PeriodValue { value: T::zero(), estimated_quadrature_error: T::zero() });
    }
    let gap = turning_gap(pt)?;
    loop_integral(pt, gap, weight_renormalised, T::min_positive_value(), effective_tol(tol))
}

fn require_negative_q<T: Scalar>(pt: PhasePoint<T>) -> Result<()> {
    if !(pt.q < T::zero()) {
        return Err(Error::InvalidDomain(format!("gradient needs q < 0, got q = {}", pt.q)));
    }
    Ok(())
}

/// Analytic gradient of `T`. `tol` is a relative tolerance on `I1`.
pub fn grad_t<T: Scalar>(pt: PhasePoint<T>, tol: T) -> Result<PeriodGradient<T>> {
    require_negative_q(pt)?;
    let i1 = integral_i1(pt, tol)?.value;
    Ok(grad_t_from_integral(pt, i1))
}

pub(crate) fn grad_t_from_integral<T: Scalar>(pt: PhasePoint<T>, i1: T) -> PeriodGradient<T> {
    let (p, q) = (pt.p, pt.q);
    let scale = energy_above_center(p, q);
    let pp = p * (T::one() - p);
    let k = (T::one() - p) * (T::one() + c::<T>(2.0) * p) / (c::<T>(3.0) * p);
    PeriodGradient { dp: (-pp * i1 + q) / scale, dq: (q * i1 + k) / scale }
}

/// Analytic gradient of `T0`. `tol` is a relative tolerance on `I2`.
pub fn grad_t0<T: Scalar>(pt: PhasePoint<T>, tol: T) -> Result<PeriodGradient<T>> {
    require_negative_q(pt)?;
    let i2 = integral_i2(pt, tol)?.value;
    Ok(grad_t0_from_integral(pt, i2))
}

pub(crate) fn grad_t0_from_integral<T: Scalar>(pt: PhasePoint<T>, i2: T) -> PeriodGradient<T> {
    let (p, q) = (pt.p, pt.q);
    let scale = energy_above_center(p, q);
    let pp = p * (T::one() - p);
    let k = (T::one() - p) * (T::one() + c::<T>(2.0) * p) / (c::<T>(3.0) * p);
    PeriodGradient { dp: (-pp * i2 - q) / scale, dq: (q * i2 - k) / scale }
}

/// Leading-order law near the saddle: `T ≈ -ln((p - q)/12) - x0`.
pub fn asymptotic_t<T: Scalar>(pt: PhasePoint<T>) -> T {
    -((pt.p - pt.q) / c(12.0)).ln() - homoclinic_shift::<T>()
}

/// Limits of `(T, T0)` along `q = slope (1 - p)` as `p -> 1^-`.
pub fn center_limits<T: Scalar>(slope: T) -> (T, T) {
    let t = (T::one() / (T::one() + slope * slope).sqrt()).asin();
    (t, T::FRAC_PI_2() - t)
}
