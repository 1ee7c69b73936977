//! Positive ground states on intervals and flower graphs.
//!
//! With `w = 1 - u`, the stem carries the arc of the phase-plane orbit from
//! `(1, q~)` at the Dirichlet end to `(p, q)` at the central vertex, and each
//! loop carries a symmetric arc of a closed orbit through its turning point
//! `(p0, 0)` at the loop midpoint. The unknowns `(p, q_1, ..., q_N)` solve
//!
//! ```text
//! T(p, 2 Σ q_j) = L,    T0(p, q_j) = L_j,
//! ```
//!
//! where the factor 2 is the Kirchhoff balance of the two loop ends.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::FlowerSpec;
use crate::linalg::DenseLu;
use crate::mesh::EdgeProfile;
use crate::ode::trajectory;
use crate::period::{grad_t, grad_t0, inside_homoclinic, period_t, period_t0};
use crate::phaseplane::{energy, potential, q_tilde, turning_point_p0, PhasePoint};
use crate::roots::{bisect, safeguarded_newton};
use crate::scalar::{c, homoclinic_shift, Scalar};
use crate::spectral::{region_membership, Region};

/// Default step for profile reconstruction.
pub const DEFAULT_DX: f64 = 1e-3;

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Target for `max |F|` over the period equations.
    pub tol: f64,
    pub max_iterations: usize,
    /// Step used when reconstructing the profile after convergence.
    pub dx: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iterations: 60, dx: DEFAULT_DX }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `T - L` followed by `T0 - L_j` for every loop.
    pub period_residuals: Vec<f64>,
    /// Sum of outward derivatives of `u` at the central vertex.
    pub kirchhoff_flux: f64,
    /// Largest jump of `u` between edges meeting at the central vertex.
    pub continuity: f64,
    /// `|u|` at the Dirichlet vertex.
    pub dirichlet: f64,
    /// Largest `|w(end) - p|` over the reconstructed arcs.
    pub profile_mismatch: f64,
}

impl Residuals {
    pub fn max_period(&self) -> f64 {
        self.period_residuals.iter().fold(0.0, |a, r| a.max(r.abs()))
    }
}

/// Profile of `u` on every edge with its derivative, as produced by
/// [`reconstruct_profile`].
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T> {
    pub edges: Vec<EdgeProfile<T>>,
    /// `u'` at the same samples, in the edge's own coordinate.
    pub slopes: Vec<Vec<T>>,
}

#[derive(Debug, Clone)]
pub struct GroundStateSolution<T> {
    pub spec: FlowerSpec<T>,
    pub p: T,
    pub q_loops: Vec<T>,
    pub q_stem: T,
    pub profile: Profile<T>,
    pub newton_iterations: usize,
    pub residuals: Residuals,
    pub tol: T,
}

impl<T: Scalar> GroundStateSolution<T> {
    pub fn profiles(&self) -> &[EdgeProfile<T>] {
        &self.profile.edges
    }

    /// Energy level of the stem orbit; positive when it passes outside the
    /// homoclinic loop.
    pub fn stem_energy(&self) -> T {
        energy(self.p, self.q_stem)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobianReport<T> {
    pub dim: usize,
    /// Row-major `(N + 1) x (N + 1)` Jacobian of the period system.
    pub matrix: Vec<T>,
    pub determinant: T,
    pub expected_sign: i32,
}

impl<T: Scalar> JacobianReport<T> {
    pub fn entry(&self, row: usize, col: usize) -> T {
        self.matrix[row * self.dim + col]
    }

    pub fn sign_matches(&self) -> bool {
        let s = self.determinant.signum();
        self.determinant != T::zero() && (s > T::zero()) == (self.expected_sign > 0)
    }
}

fn quad_tol<T: Scalar>(tol: T) -> T {
    (tol * c(1e-2)).min(c(1e-10)).max(T::tol_floor())
}

/// Interval `[0, L]`, Dirichlet at 0 and Neumann at `L`: bisection on the
/// decreasing map `p -> T(p, 0)`.
pub fn solve_interval<T: Scalar>(length: T, opts: SolveOptions) -> Result<GroundStateSolution<T>> {
    if !(length > T::FRAC_PI_2()) {
        return Err(Error::BelowThreshold { length: length.as_f64() });
    }
    let tol = c::<T>(opts.tol);
    let qt = quad_tol(tol);
    let x0 = homoclinic_shift::<T>();
    let t_of = |y: T| -> T {
        let p = logistic(y);
        period_t(PhasePoint::raw(p, T::zero()), qt).map(|v| v.value - length).unwrap_or(T::nan())
    };
    // T(p, 0) ~ -ln(p/12) - x0 for small p, so this start overshoots L.
    let p_lo = (c::<T>(0.12) * (-length - x0).exp()).max(T::min_positive_value().sqrt());
    let lo = logit(p_lo.min(c(0.5)));
    let hi = logit(T::one() - T::epsilon() * c(16.0));
    let y = bisect(t_of, lo, hi, T::zero(), 400).ok_or(Error::BelowThreshold { length: length.as_f64() })?;
    let p = logistic(y);
    let residual = period_t(PhasePoint::raw(p, T::zero()), qt)?.value - length;
    let spec = FlowerSpec::interval(length)?;
    finish(spec, p, vec![], 0, vec![residual.as_f64()], tol, c(opts.dx))
}

fn logistic<T: Scalar>(y: T) -> T {
    T::one() / (T::one() + (-y).exp())
}

fn logit<T: Scalar>(p: T) -> T {
    (p / (T::one() - p)).ln()
}

/// `F(p, q_1..q_N)` of the period system.
fn residual_vector<T: Scalar>(spec: &FlowerSpec<T>, p: T, qs: &[T], qt: T) -> Result<Vec<T>> {
    let q_stem = c::<T>(2.0) * qs.iter().copied().sum::<T>();
    let mut f = Vec::with_capacity(qs.len() + 1);
    f.push(period_t(PhasePoint::raw(p, q_stem), qt)?.value - spec.stem_length);
    for (&q, &lj) in qs.iter().zip(&spec.loop_half_lengths) {
        f.push(period_t0(PhasePoint::raw(p, q), qt)?.value - lj);
    }
    Ok(f)
}

fn admissible<T: Scalar>(p: T, qs: &[T]) -> bool {
    p > T::zero() && p < T::one() && qs.iter().all(|&q| q < T::zero() && inside_homoclinic(PhasePoint::raw(p, q)))
}

fn sup<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &x| a.max(x.abs()))
}

/// Analytic Jacobian of the period system at an admissible point.
pub fn jacobian_report<T: Scalar>(p: T, q_loops: &[T], tol: T) -> Result<JacobianReport<T>> {
    let n = q_loops.len();
    let dim = n + 1;
    let q_stem = c::<T>(2.0) * q_loops.iter().copied().sum::<T>();
    let gt = grad_t(PhasePoint::new(p, q_stem)?, tol)?;
    let mut matrix = vec![T::zero(); dim * dim];
    matrix[0] = gt.dp;
    let mut t0p = Vec::with_capacity(n);
    let mut t0q = Vec::with_capacity(n);
    for (j, &q) in q_loops.iter().enumerate() {
        let pt = PhasePoint::new(p, q)?;
        turning_point_p0(pt)?;
        let g = grad_t0(pt, tol)?;
        matrix[j + 1] = c::<T>(2.0) * gt.dq;
        matrix[(j + 1) * dim] = g.dp;
        matrix[(j + 1) * dim + j + 1] = g.dq;
        t0p.push(g.dp);
        t0q.push(g.dq);
    }
    // Arrow-matrix expansion: T_p Π d_k - 2 T_q Σ_j c_j Π_{k≠j} d_k.
    let prod_all = t0q.iter().fold(T::one(), |a, &d| a * d);
    let mut cross = T::zero();
    for j in 0..n {
        let others = t0q.iter().enumerate().filter(|&(k, _)| k != j).fold(T::one(), |a, (_, &d)| a * d);
        cross = cross + t0p[j] * others;
    }
    let determinant = gt.dp * prod_all - c::<T>(2.0) * gt.dq * cross;
    let expected_sign = if n % 2 == 1 { 1 } else { -1 };
    Ok(JacobianReport { dim, matrix, determinant, expected_sign })
}

/// Loop slope `q` in `(q_hom, 0)` with `T0(p, q) = half_length`.
fn loop_slope_for<T: Scalar>(p: T, half_length: T, qt: T) -> Option<T> {
    let q_hom = -potential(p).sqrt();
    let fdf = |q: T| -> (T, T) {
        if q >= T::zero() {
            return (-half_length, T::nan());
        }
        let pt = PhasePoint::raw(p, q);
        match period_t0(pt, qt) {
            Ok(v) => (v.value - half_length, grad_t0(pt, qt).map(|g| g.dq).unwrap_or(T::nan())),
            Err(_) => (T::one(), T::nan()),
        }
    };
    safeguarded_newton(fdf, q_hom, T::zero(), c::<T>(0.5) * q_hom, T::epsilon() * q_hom.abs(), 200)
}

/// Solve the period system for a flower. `N = 0` falls through to
/// [`solve_interval`].
pub fn solve_flower<T: Scalar>(spec: &FlowerSpec<T>, opts: SolveOptions) -> Result<GroundStateSolution<T>> {
    if spec.loop_count() == 0 {
        return solve_interval(spec.stem_length, opts);
    }
    let m = region_membership(spec);
    if m.region == Region::Trivial {
        return Err(Error::OutsideRegion { lambda0: m.lambda0 });
    }
    let qt = quad_tol(c::<T>(opts.tol));
    let n = spec.loop_count();
    let l_min = spec.loop_half_lengths.iter().fold(spec.stem_length, |a, &l| a.min(l));
    let p_guess = (c::<T>(12.0) / T::from_usize_lossy(1 + 2 * n) * (-l_min - homoclinic_shift::<T>()).exp())
        .max(c(1e-8))
        .min(c(0.9));
    let first = spec
        .loop_half_lengths
        .iter()
        .map(|&l| loop_slope_for(p_guess, l, qt))
        .collect::<Option<Vec<T>>>()
        .map(|qs| newton(spec, p_guess, qs, opts));
    let stalled = match first {
        Some(Ok(sol)) => return Ok(sol),
        Some(Err(e)) => {
            log::debug!("newton from asymptotic start failed: {e}");
            Some(e)
        }
        None => None,
    };
    log::debug!("falling back to bisection on the reduced map");
    let (p, qs) = reduced_bisection(spec, qt)?;
    newton(spec, p, qs, opts).map_err(|e| match (e, stalled) {
        (Error::NewtonStalled { .. }, Some(first)) => first,
        (e, _) => e,
    })
}

/// Newton from a user-supplied start `(p, q_1..q_N)`.
pub fn solve_flower_from<T: Scalar>(
    spec: &FlowerSpec<T>,
    p: T,
    q_loops: &[T],
    opts: SolveOptions,
) -> Result<GroundStateSolution<T>> {
    if q_loops.len() != spec.loop_count() {
        return Err(Error::InvalidDomain(format!("expected {} loop slopes, got {}", spec.loop_count(), q_loops.len())));
    }
    if !admissible(p, q_loops) {
        return Err(Error::InvalidDomain("initial point is not admissible".into()));
    }
    newton(spec, p, q_loops.to_vec(), opts)
}

/// `G(p) = T(p, 2 Σ q_j(p)) - L` with `q_j(p)` solved from the loop
/// equations. The Jacobian sign makes `G` strictly decreasing, so a bracket
/// in `logit(p)` always isolates the solution.
fn reduced_bisection<T: Scalar>(spec: &FlowerSpec<T>, qt: T) -> Result<(T, Vec<T>)> {
    let slopes =
        |p: T| -> Option<Vec<T>> { spec.loop_half_lengths.iter().map(|&l| loop_slope_for(p, l, qt)).collect() };
    let g = |y: T| -> T {
        let p = logistic(y);
        let Some(qs) = slopes(p) else { return T::nan() };
        let q_stem = c::<T>(2.0) * qs.iter().copied().sum::<T>();
        period_t(PhasePoint::raw(p, q_stem), qt).map(|v| v.value - spec.stem_length).unwrap_or(T::nan())
    };
    let stalled = || Error::NewtonStalled { iterations: 0, residual: f64::INFINITY, best: vec![] };
    let y = bisect(g, c(-36.0), logit(T::one() - c(1e-9)), c(1e-9), 200).ok_or_else(stalled)?;
    let p = logistic(y);
    Ok((p, slopes(p).ok_or_else(stalled)?))
}

fn newton<T: Scalar>(
    spec: &FlowerSpec<T>,
    mut p: T,
    mut qs: Vec<T>,
    opts: SolveOptions,
) -> Result<GroundStateSolution<T>> {
    let tol = c::<T>(opts.tol);
    let qt = quad_tol(tol);
    let n = qs.len();
    if !admissible(p, &qs) {
        return Err(Error::InvalidDomain("Newton start is not admissible".into()));
    }
    let mut f = residual_vector(spec, p, &qs, qt)?;
    let mut norm = sup(&f);
    let mut iterations = 0;
    let stall = |it: usize, norm: T, p: T, qs: &[T]| Error::NewtonStalled {
        iterations: it,
        residual: norm.as_f64(),
        best: std::iter::once(p).chain(qs.iter().copied()).map(|v| v.as_f64()).collect(),
    };
    while norm > tol {
        if iterations >= opts.max_iterations {
            return Err(stall(iterations, norm, p, &qs));
        }
        iterations += 1;
        let jac = jacobian_report(p, &qs, qt)?;
        let lu = DenseLu::factor(n + 1, jac.matrix).map_err(|_| stall(iterations, norm, p, &qs))?;
        let step = lu.solve(&f);
        let mut lambda = T::one();
        let mut accepted = false;
        for _ in 0..50 {
            let p_new = p - lambda * step[0];
            let q_new: Vec<T> = qs.iter().zip(&step[1..]).map(|(&q, &d)| q - lambda * d).collect();
            if admissible(p_new, &q_new) {
                if let Ok(f_new) = residual_vector(spec, p_new, &q_new, qt) {
                    let norm_new = sup(&f_new);
                    if norm_new < norm || norm_new <= tol {
                        p = p_new;
                        qs = q_new;
                        f = f_new;
                        norm = norm_new;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda = lambda * c(0.5);
        }
        if !accepted {
            return Err(stall(iterations, norm, p, &qs));
        }
        log::trace!("newton iteration {iterations}: |F| = {norm}, p = {p}");
    }
    let residuals = f.iter().map(|v| v.as_f64()).collect();
    finish(spec.clone(), p, qs, iterations, residuals, tol, c(opts.dx))
}

fn finish<T: Scalar>(
    spec: FlowerSpec<T>,
    p: T,
    q_loops: Vec<T>,
    newton_iterations: usize,
    period_residuals: Vec<f64>,
    tol: T,
    dx: T,
) -> Result<GroundStateSolution<T>> {
    let q_stem = c::<T>(2.0) * q_loops.iter().copied().sum::<T>();
    let mut sol = GroundStateSolution {
        spec,
        p,
        q_loops,
        q_stem,
        profile: Profile { edges: vec![], slopes: vec![] },
        newton_iterations,
        residuals: Residuals { period_residuals, ..Default::default() },
        tol,
    };
    let (profile, diag) = reconstruct(&sol, dx)?;
    sol.profile = profile;
    sol.residuals.kirchhoff_flux = diag.kirchhoff_flux;
    sol.residuals.continuity = diag.continuity;
    sol.residuals.dirichlet = diag.dirichlet;
    sol.residuals.profile_mismatch = diag.profile_mismatch;
    Ok(sol)
}

struct ProfileDiagnostics {
    kirchhoff_flux: f64,
    continuity: f64,
    dirichlet: f64,
    profile_mismatch: f64,
}

/// Integrate the stationary equation along every edge with RK4 at step at
/// most `dx`. Edge coordinates follow the graph from
/// [`FlowerSpec::to_graph`]: the stem runs from the Dirichlet vertex, loops
/// run over `[0, 2 L_j]` from the central vertex back to itself.
pub fn reconstruct_profile<T: Scalar>(solution: &GroundStateSolution<T>, dx: T) -> Result<Profile<T>> {
    reconstruct(solution, dx).map(|r| r.0)
}

fn reconstruct<T: Scalar>(sol: &GroundStateSolution<T>, dx: T) -> Result<(Profile<T>, ProfileDiagnostics)> {
    if !(dx > T::zero()) {
        return Err(Error::InvalidDomain(format!("profile step must be positive, got {dx}")));
    }
    let spec = &sol.spec;
    let p = sol.p;
    let stem = trajectory(T::one(), q_tilde(PhasePoint::raw(p, sol.q_stem)), spec.stem_length, dx);
    let (_, w_end, v_end) = *stem.last().expect("trajectory has samples");
    let mut mismatch = (w_end - p).abs();
    let mut edges = vec![EdgeProfile {
        edge: "stem".to_string(),
        x: stem.iter().map(|s| s.0).collect(),
        u: stem.iter().map(|s| T::one() - s.1).collect(),
    }];
    let mut slopes = vec![stem.iter().map(|s| -s.2).collect::<Vec<T>>()];
    // Outward derivatives of u at the central vertex.
    let mut flux = -v_end;
    let mut continuity = T::zero();
    for (j, (&q, &lj)) in sol.q_loops.iter().zip(&spec.loop_half_lengths).enumerate() {
        let p0 = turning_point_p0(PhasePoint::raw(p, q))?;
        let half = trajectory(p0, T::zero(), lj, dx);
        let (_, wl, vl) = *half.last().expect("trajectory has samples");
        mismatch = mismatch.max((wl - p).abs());
        continuity = continuity.max((wl - w_end).abs());
        // Both loop ends leave the vertex with outward u-derivative -w'(L_j).
        flux = flux - c::<T>(2.0) * vl;
        let mut x = Vec::with_capacity(2 * half.len() - 1);
        let mut u = Vec::with_capacity(2 * half.len() - 1);
        let mut du = Vec::with_capacity(2 * half.len() - 1);
        for s in half.iter().rev() {
            x.push(lj - s.0);
            u.push(T::one() - s.1);
            du.push(s.2);
        }
        for s in half.iter().skip(1) {
            x.push(lj + s.0);
            u.push(T::one() - s.1);
            du.push(-s.2);
        }
        edges.push(EdgeProfile { edge: format!("loop{}", j + 1), x, u });
        slopes.push(du);
    }
    let limit = c::<T>(10.0) * sol.tol.max(T::tol_floor());
    if mismatch > limit {
        return Err(Error::StepTooLarge { mismatch: mismatch.as_f64(), allowed: limit.as_f64() });
    }
    let diag = ProfileDiagnostics {
        kirchhoff_flux: flux.abs().as_f64(),
        continuity: continuity.as_f64(),
        dirichlet: edges[0].u[0].abs().as_f64(),
        profile_mismatch: mismatch.as_f64(),
    };
    Ok((Profile { edges, slopes }, diag))
}

/// `max |u - 1|` over the loops (the graph without its pendant).
pub fn proximity_check<T: Scalar>(solution: &GroundStateSolution<T>) -> T {
    solution.profile.edges[1..].iter().flat_map(|e| e.u.iter()).fold(T::zero(), |a, &u| a.max((u - T::one()).abs()))
}

/// Free energy `H(u) = 1/2 ∫ (u'^2 - u^2) + 1/3 ∫ u^3` by the composite
/// trapezoid rule on the reconstructed samples.
pub fn energy_of<T: Scalar>(solution: &GroundStateSolution<T>) -> T {
    profile_energy(&solution.profile)
}

pub fn profile_energy<T: Scalar>(profile: &Profile<T>) -> T {
    let half = c::<T>(0.5);
    let third = c::<T>(1.0 / 3.0);
    let density = |u: T, du: T| half * (du * du - u * u) + third * u * u * u;
    let mut total = T::zero();
    for (e, du) in profile.edges.iter().zip(&profile.slopes) {
        for k in 1..e.x.len() {
            let h = e.x[k] - e.x[k - 1];
            total = total + half * h * (density(e.u[k - 1], du[k - 1]) + density(e.u[k], du[k]));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::period::asymptotic_t;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn interval_threshold() {
        assert!(matches!(solve_interval(1.0_f64, SolveOptions::default()), Err(Error::BelowThreshold { .. })));
        let s = solve_interval(FRAC_PI_2 + 1e-6, SolveOptions::default()).unwrap();
        assert!(s.p > 0.99);
    }

    #[test]
    fn long_interval_matches_asymptotics() {
        let s = solve_interval(10.0_f64, SolveOptions::default()).unwrap();
        assert!(s.p < 1e-3);
        let pt = PhasePoint::new(s.p, 0.0).unwrap();
        assert!((asymptotic_t(pt) - 10.0).abs() < 10.0 * s.p);
    }

    #[test]
    fn interval_profile_boundary_conditions() {
        let s = solve_interval(2.0_f64, SolveOptions::default()).unwrap();
        let stem = &s.profile.edges[0];
        assert_eq!(stem.u[0], 0.0);
        assert!(s.profile.slopes[0].last().unwrap().abs() < 1e-8);
        assert!(stem.u.iter().all(|&u| (0.0..1.0).contains(&u)));
        assert!(s.residuals.max_period() <= 1e-10);
    }

    #[test]
    fn tadpole_profile() {
        let spec = FlowerSpec::new(0.8_f64, vec![0.75]).unwrap();
        let s = solve_flower(&spec, SolveOptions::default()).unwrap();
        assert!(s.residuals.max_period() <= 1e-10);
        assert!(s.residuals.kirchhoff_flux < 1e-8, "{:?}", s.residuals);
        assert!(s.residuals.continuity < 1e-8);
        let lp = &s.profile.edges[1];
        let n = lp.u.len();
        for k in 0..n / 2 {
            assert!((lp.u[k] - lp.u[n - 1 - k]).abs() <= 1e-10);
        }
        // Stem increases from the Dirichlet end; loop peaks at its midpoint.
        assert!(s.profile.edges[0].u.windows(2).all(|w| w[1] > w[0]));
        let peak = lp.u.iter().cloned().fold(0.0, f64::max);
        assert_eq!(peak, lp.u[n / 2]);
        assert!(energy_of(&s) < 0.0);
    }

    #[test]
    fn jacobian_matches_lu_determinant() {
        let qs = [-0.05_f64, -0.1, -0.02];
        let r = jacobian_report(0.3, &qs, 1e-12).unwrap();
        let lu = DenseLu::factor(4, r.matrix.clone()).unwrap();
        assert!((lu.determinant() / r.determinant - 1.0).abs() < 1e-10);
        assert!(r.sign_matches());
    }

    #[test]
    fn outside_region_is_reported() {
        let spec = FlowerSpec::new(0.3_f64, vec![0.2]).unwrap();
        assert!(matches!(solve_flower(&spec, SolveOptions::default()), Err(Error::OutsideRegion { .. })));
    }
}
