//! Bracketing root finders used by the phase-plane, spectral and interval solvers.

use crate::scalar::{c, Scalar};

/// Bisection on a sign-changing bracket. Stops when the bracket is narrower
/// than `xtol` (absolute) or cannot shrink further in floating point.
///
/// Returns the midpoint of the final bracket, or `None` if `f(lo)` and
/// `f(hi)` have the same strict sign.
pub fn bisect<T: Scalar, F: FnMut(T) -> T>(mut f: F, mut lo: T, mut hi: T, xtol: T, max_iter: usize) -> Option<T> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Some(lo);
    }
    if fhi == T::zero() {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    let half = c::<T>(0.5);
    for _ in 0..max_iter {
        let mid = half * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) || (hi - lo).abs() <= xtol {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(half * (lo + hi))
}

/// Newton's method kept inside a shrinking bracket; falls back to bisection
/// whenever the Newton step would leave the bracket or fails to halve it.
///
/// `fdf` returns `(f(x), f'(x))`. The bracket must satisfy `f(lo) <= 0 <= f(hi)`
/// or the reverse.
pub fn safeguarded_newton<T: Scalar, F: FnMut(T) -> (T, T)>(
    mut fdf: F,
    lo: T,
    hi: T,
    start: T,
    xtol: T,
    max_iter: usize,
) -> Option<T> {
    let (flo, _) = fdf(lo);
    let (fhi, _) = fdf(hi);
    if flo == T::zero() {
        return Some(lo);
    }
    if fhi == T::zero() {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    // Orient so that f(neg) < 0 < f(pos).
    let (mut neg, mut pos) = if flo < T::zero() { (lo, hi) } else { (hi, lo) };
    let half = c::<T>(0.5);
    let mut x = if start > lo.min(hi) && start < lo.max(hi) { start } else { half * (lo + hi) };
    let mut dx_old = (hi - lo).abs();
    let mut dx = dx_old;
    let (mut fx, mut dfx) = fdf(x);
    for _ in 0..max_iter {
        if fx == T::zero() {
            return Some(x);
        }
        let newton_out = ((x - pos) * dfx - fx) * ((x - neg) * dfx - fx) > T::zero();
        let slow = (c::<T>(2.0) * fx).abs() > (dx_old * dfx).abs();
        if newton_out || slow || !dfx.is_finite() || dfx == T::zero() {
            dx_old = dx;
            dx = half * (pos - neg);
            x = neg + dx;
        } else {
            dx_old = dx;
            dx = fx / dfx;
            x = x - dx;
        }
        if dx.abs() <= xtol || dx.abs() <= T::epsilon() * x.abs() {
            return Some(x);
        }
        let r = fdf(x);
        fx = r.0;
        dfx = r.1;
        if fx < T::zero() {
            neg = x;
        } else {
            pos = x;
        }
        if (pos - neg).abs() <= xtol {
            return Some(x);
        }
    }
    Some(x)
}
