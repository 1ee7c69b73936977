//! Small dense and tridiagonal solvers.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major dense LU factorisation with partial pivoting.
#[derive(Debug, Clone)]
pub struct DenseLu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Scalar> DenseLu<T> {
    pub fn factor(n: usize, mut a: Vec<T>) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        for k in 0..n {
            let (piv, pmax) =
                (k..n)
                    .map(|i| (i, a[i * n + k].abs()))
                    .fold((k, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == T::zero() || !pmax.is_finite() {
                return Err(Error::LinearSolveFailure(format!("singular matrix at column {k}")));
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let d = a[k * n + k];
            for i in (k + 1)..n {
                let m = a[i * n + k] / d;
                a[i * n + k] = m;
                if m != T::zero() {
                    for j in (k + 1)..n {
                        a[i * n + j] = a[i * n + j] - m * a[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu: a, perm, sign })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s = s - self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    pub fn determinant(&self) -> T {
        (0..self.n).fold(self.sign, |acc, i| acc * self.lu[i * self.n + i])
    }
}

/// Thomas factorisation of a symmetric tridiagonal matrix with constant
/// off-diagonal `off` (no pivoting; intended for diagonally dominant or
/// positive definite blocks).
#[derive(Debug, Clone)]
pub struct Tridiagonal<T> {
    off: T,
    /// Modified diagonal of the forward sweep.
    pivots: Vec<T>,
}

impl<T: Scalar> Tridiagonal<T> {
    pub fn factor(diag: &[T], off: T) -> Result<Self> {
        let mut pivots = Vec::with_capacity(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            let p = if i == 0 { d } else { d - off * off / pivots[i - 1] };
            if p == T::zero() || !p.is_finite() {
                return Err(Error::LinearSolveFailure(format!("zero pivot in tridiagonal block at row {i}")));
            }
            pivots.push(p);
        }
        Ok(Self { off, pivots })
    }

    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        let n = self.pivots.len();
        for i in 1..n {
            x[i] = x[i] - self.off / self.pivots[i - 1] * x[i - 1];
        }
        if n == 0 {
            return;
        }
        x[n - 1] = x[n - 1] / self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.off * x[i + 1]) / self.pivots[i];
        }
    }
}
