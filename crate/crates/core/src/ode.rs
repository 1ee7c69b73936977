//! Fixed-step RK4 for the stationary equation `w'' = w - w^2`.

use crate::scalar::{c, Scalar};

#[inline]
fn rhs<T: Scalar>(w: T, v: T) -> (T, T) {
    (v, w - w * w)
}

/// One classical Runge–Kutta step of size `h` from `(w, v)`.
pub fn rk4_step<T: Scalar>(w: T, v: T, h: T) -> (T, T) {
    let half = c::<T>(0.5);
    let (k1w, k1v) = rhs(w, v);
    let (k2w, k2v) = rhs(w + half * h * k1w, v + half * h * k1v);
    let (k3w, k3v) = rhs(w + half * h * k2w, v + half * h * k2v);
    let (k4w, k4v) = rhs(w + h * k3w, v + h * k3v);
    let sixth = h / c(6.0);
    (w + sixth * (k1w + c::<T>(2.0) * (k2w + k3w) + k4w), v + sixth * (k1v + c::<T>(2.0) * (k2v + k3v) + k4v))
}

/// Trajectory over `[0, length]` in `ceil(length / max_step)` equal steps.
/// Returns `(x, w, w')` at every step, both ends included.
pub fn trajectory<T: Scalar>(w0: T, v0: T, length: T, max_step: T) -> Vec<(T, T, T)> {
    let n = (length / max_step).ceil().to_usize().unwrap_or(1).max(1);
    let h = length / T::from_usize_lossy(n);
    let mut out = Vec::with_capacity(n + 1);
    let (mut w, mut v) = (w0, v0);
    out.push((T::zero(), w, v));
    for i in 1..=n {
        (w, v) = rk4_step(w, v, h);
        let x = if i == n { length } else { h * T::from_usize_lossy(i) };
        out.push((x, w, v));
    }
    out
}
