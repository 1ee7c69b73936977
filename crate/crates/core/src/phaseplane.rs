//! Phase plane of `w'' - w + w^2 = 0`, where `w = 1 - u` is the deviation of
//! a steady state from the constant state `u = 1`.
//!
//! The saddle sits at `(0, 0)`, the center at `(1, 0)`, and orbits are level
//! sets of `E(w, w') = w'^2 - w^2 + (2/3) w^3`.

use crate::error::{Error, Result};
use crate::roots::safeguarded_newton;
use crate::scalar::{c, Scalar};

/// A point `(p, q)` with `p` in `(0, 1]` and `q <= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint<T> {
    pub p: T,
    pub q: T,
}

impl<T: Scalar> PhasePoint<T> {
    pub fn new(p: T, q: T) -> Result<Self> {
        if !(p > T::zero() && p <= T::one()) || !(q <= T::zero()) || !q.is_finite() {
            return Err(Error::InvalidDomain(format!("(p, q) = ({p}, {q}) must satisfy 0 < p <= 1, q <= 0")));
        }
        Ok(Self { p, q })
    }

    /// Constructor for callers that already guarantee the domain.
    pub(crate) fn raw(p: T, q: T) -> Self {
        Self { p, q }
    }

    pub fn energy(&self) -> T {
        energy(self.p, self.q)
    }
}

/// `A(w) = w^2 - (2/3) w^3`.
#[inline]
pub fn potential<T: Scalar>(w: T) -> T {
    w * w * (T::one() - c::<T>(2.0 / 3.0) * w)
}

/// `E(w, v) = v^2 - w^2 + (2/3) w^3`.
#[inline]
pub fn energy<T: Scalar>(w: T, v: T) -> T {
    v * v - potential(w)
}

/// `E(p, q) + A(1) = q^2 + (1 - p)^2 (1 + 2p) / 3`, evaluated without
/// cancellation near the center.
#[inline]
pub fn energy_above_center<T: Scalar>(p: T, q: T) -> T {
    let a = T::one() - p;
    q * q + a * a * (T::one() + c::<T>(2.0) * p) / c(3.0)
}

/// Difference quotient `(A(u) - A(w)) / (u - w)`, given also `1 - u` and
/// `1 - w` so the value stays accurate when both points approach the center.
#[inline]
pub(crate) fn potential_slope<T: Scalar>(u: T, one_minus_u: T, w: T, one_minus_w: T) -> T {
    let two_thirds = c::<T>(2.0 / 3.0);
    if u + w <= T::one() {
        (u + w) - two_thirds * (u * u + u * w + w * w)
    } else {
        let (a, b) = (one_minus_u, one_minus_w);
        (a + b) - two_thirds * (a * a + a * b + b * b)
    }
}

/// Slope `w'` at the section `w = 1` on the level set through `(p, q)`; always `<= 0`.
pub fn q_tilde<T: Scalar>(pt: PhasePoint<T>) -> T {
    -energy_above_center(pt.p, pt.q).sqrt()
}

/// Gap `p - p0` between `p` and the left turning point `p0` of the closed
/// orbit through `(p, q)`, found from `A(p) - A(p - gap) = q^2`.
pub fn turning_gap<T: Scalar>(pt: PhasePoint<T>) -> Result<T> {
    let (p, q) = (pt.p, pt.q);
    let e = pt.energy();
    if !(e < T::zero()) {
        return Err(Error::OrbitNotClosed { energy: e.as_f64() });
    }
    let q2 = q * q;
    if q2 == T::zero() {
        return Ok(T::zero());
    }
    let one_minus_p = T::one() - p;
    // g(gap) = gap * B(p, p - gap) - q^2 is increasing on [0, p]:
    // g(0) = -q^2 < 0 and g(p) = -E > 0.
    let g = |gap: T| {
        let w = p - gap;
        let val = gap * potential_slope(p, one_minus_p, w, one_minus_p + gap) - q2;
        let dval = c::<T>(2.0) * w * (one_minus_p + gap);
        (val, dval)
    };
    let slope0 = c::<T>(2.0) * p * one_minus_p;
    let guess = if slope0 > T::zero() { (q2 / slope0).min(c::<T>(0.5) * p) } else { c::<T>(0.5) * p };
    let gap = safeguarded_newton(g, T::zero(), p, guess, T::epsilon() * p * c(0.5), 200)
        .ok_or(Error::OrbitNotClosed { energy: e.as_f64() })?;
    Ok(gap.max(T::zero()).min(p))
}

/// Left turning point `p0` in `(0, p]` of the closed orbit through `(p, q)`:
/// the root of `-p0^2 + (2/3) p0^3 = E(p, q)`.
pub fn turning_point_p0<T: Scalar>(pt: PhasePoint<T>) -> Result<T> {
    let e = pt.energy();
    if !(e > c::<T>(-1.0 / 3.0) && e < T::zero()) && !(pt.q == T::zero() && e <= T::zero()) {
        return Err(Error::OrbitNotClosed { energy: e.as_f64() });
    }
    Ok(pt.p - turning_gap(pt)?)
}

/// Point reached on the homoclinic orbit `w = (3/2) sech^2((x + x0)/2)` after
/// travelling `x` from `(1, -1/sqrt(3))`.
pub fn homoclinic_point<T: Scalar>(x: T) -> (T, T) {
    let x0 = crate::scalar::homoclinic_shift::<T>();
    let z = c::<T>(0.5) * (x + x0);
    let sech = T::one() / z.cosh();
    let w = c::<T>(1.5) * sech * sech;
    (w, -w * z.tanh())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_examples() {
        assert!((energy(1.0, 0.0) + 1.0 / 3.0_f64).abs() < 1e-15);
        assert_eq!(energy(0.0_f64, 0.0), 0.0);
        assert!(energy(1.0, -1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn q_tilde_examples() {
        let pt = PhasePoint::new(1.0_f64, -0.3).unwrap();
        assert!((q_tilde(pt) + 0.3).abs() < 1e-15);

        let pt = PhasePoint::new(0.5, -0.2).unwrap();
        let qt = q_tilde(pt);
        let expect = -(0.04 + 1.0 / 3.0 - 0.25 + 2.0 / 3.0 * 0.125_f64).sqrt();
        assert!((qt - expect).abs() < 1e-15);
        assert!((qt + 0.454_606_1).abs() < 1e-7);
        assert!((energy(1.0, qt) - pt.energy()).abs() < 1e-15);

        // On the homoclinic level the section value is -1/sqrt(3).
        let (p, q) = homoclinic_point(2.0_f64);
        assert!(energy(p, q).abs() < 1e-15);
        assert!((q_tilde(PhasePoint::new(p, q).unwrap()) + 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn turning_point_on_axis_is_identity() {
        let pt = PhasePoint::new(0.37, 0.0).unwrap();
        assert_eq!(turning_point_p0(pt).unwrap(), 0.37);
    }

    #[test]
    fn turning_point_from_center_section_matches_bisection() {
        for &q in &[-0.1, -0.3, -0.5, -0.57] {
            let pt = PhasePoint::new(1.0_f64, q).unwrap();
            let p0 = turning_point_p0(pt).unwrap();
            // Independent bisection on the cubic 2/3 x^3 - x^2 - (q^2 - 1/3) on (0, 1).
            let rhs = q * q - 1.0 / 3.0;
            let cubic = |x: f64| 2.0 / 3.0 * x * x * x - x * x - rhs;
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if cubic(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((p0 - lo).abs() < 1e-13, "q={q}: {p0} vs {lo}");
            assert!(cubic(p0).abs() <= 1e-12);
        }
    }

    #[test]
    fn open_orbit_is_rejected() {
        let pt = PhasePoint::new(0.4, -0.6).unwrap();
        assert!(pt.energy() > 0.0);
        assert!(matches!(turning_point_p0(pt), Err(Error::OrbitNotClosed { .. })));
    }

    #[test]
    fn invalid_points() {
        assert!(PhasePoint::new(0.0, -0.1).is_err());
        assert!(PhasePoint::new(1.1, -0.1).is_err());
        assert!(PhasePoint::new(0.5, 0.1).is_err());
    }

    #[test]
    fn tiny_velocity_keeps_relative_accuracy() {
        let pt = PhasePoint::new(0.3_f64, -1e-9).unwrap();
        let gap = turning_gap(pt).unwrap();
        let expect = 1e-18 / (2.0 * 0.3 * 0.7);
        assert!((gap / expect - 1.0).abs() < 1e-6);
    }

    #[test]
    fn x0_value() {
        let x0: f64 = crate::scalar::homoclinic_shift();
        assert!((x0 - 1.316_957_896_924_816_4).abs() < 1e-14);
    }
}
