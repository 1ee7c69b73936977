//! Gradient flow `u_t = Δu + u(1 - u)` on a discretised graph.
//!
//! Each step solves `(M + dt K) u_new = M (u + dt u (1 - u))`: backward Euler
//! for diffusion, forward Euler for the reaction. The discrete steady states
//! are exactly the solutions of `K u = M u (1 - u)` for every `dt`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Factorization, Field, GraphMesh};
use crate::scalar::{c, Scalar};

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub dt: f64,
    pub max_t: f64,
    /// Stop once `max |u_new - u| / dt` drops to this value.
    pub tol: f64,
    /// Give up halving the step below this size.
    pub min_dt: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { dt: 0.1, max_t: 1e3, tol: 1e-9, min_dt: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    ConvergedTrivial,
    ConvergedNontrivial,
    MaxStepsReached,
}

#[derive(Debug, Clone)]
pub struct EvolutionTrace<T> {
    pub times: Vec<T>,
    pub energy: Vec<T>,
    pub sup_norm: Vec<T>,
    pub min_value: Vec<T>,
    /// `max u0`, which fixes the comparison bound.
    pub initial_max: T,
    pub terminal: Terminal,
    pub final_field: Field<T>,
    /// Step size in use when the run ended.
    pub dt: T,
}

impl<T: Scalar> EvolutionTrace<T> {
    /// Largest per-step increase of the energy (zero or negative when the
    /// energy is non-increasing).
    pub fn max_energy_increase(&self) -> T {
        self.energy.windows(2).fold(T::neg_infinity(), |a, w| a.max(w[1] - w[0]))
    }
}

/// Logistic supersolution `C / (C + (1 - C) e^{-t})` for `C = max u0 > 1`,
/// and the constant 1 otherwise.
pub fn supersolution<T: Scalar>(initial_max: T, t: T) -> T {
    if initial_max <= T::one() {
        return T::one();
    }
    initial_max / (initial_max + (T::one() - initial_max) * (-t).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub checked_steps: usize,
    /// Largest `u - bound(t)` seen; non-positive when the bound holds.
    pub max_excess: f64,
    /// Smallest sample seen.
    pub min_value: f64,
}

fn slack<T: Scalar>() -> T {
    c::<T>(1e3) * T::epsilon()
}

fn check_bounds<T: Scalar>(initial_max: T, t: T, sup: T, min: T) -> Result<()> {
    let bound = supersolution(initial_max, t).max(T::one());
    if sup > bound * (T::one() + slack::<T>()) {
        return Err(Error::ComparisonViolated { time: t.as_f64(), value: sup.as_f64(), bound: bound.as_f64() });
    }
    if min < -slack::<T>() {
        return Err(Error::ComparisonViolated { time: t.as_f64(), value: min.as_f64(), bound: 0.0 });
    }
    Ok(())
}

/// Re-check `0 <= u <= max(1, bound(t))` over a recorded trace.
pub fn comparison_monitor<T: Scalar>(trace: &EvolutionTrace<T>) -> Result<ComparisonReport> {
    let mut max_excess = f64::NEG_INFINITY;
    for ((&t, &sup), &min) in trace.times.iter().zip(&trace.sup_norm).zip(&trace.min_value) {
        check_bounds(trace.initial_max, t, sup, min)?;
        let bound = supersolution(trace.initial_max, t).max(T::one());
        max_excess = max_excess.max((sup - bound).as_f64());
    }
    let min_value = trace.min_value.iter().fold(f64::INFINITY, |a, &v| a.min(v.as_f64()));
    Ok(ComparisonReport { checked_steps: trace.times.len(), max_excess, min_value })
}

/// Discrete free energy `1/2 u^T K u - 1/2 u^T M u + 1/3 Σ m_i u_i^3`.
pub fn energy_trace<T: Scalar>(field: &Field<T>) -> T {
    let mesh = field.mesh();
    let u = field.values();
    let cubic: T = mesh.mass().iter().zip(u).map(|(&m, &v)| m * v * v * v).sum();
    let half = c::<T>(0.5);
    half * mesh.dirichlet_form(u) - half * mesh.mass_inner(u, u) + cubic / c(3.0)
}

/// `max |Δ_h u + u (1 - u)|` over the free nodes.
pub fn time_derivative_norm<T: Scalar>(field: &Field<T>) -> T {
    let mesh = field.mesh();
    let u = field.values();
    let ku = mesh.apply_stiffness(u);
    (0..u.len())
        .filter(|&i| !mesh.is_fixed(i))
        .map(|i| (-ku[i] / mesh.mass()[i] + u[i] * (T::one() - u[i])).abs())
        .fold(T::zero(), T::max)
}

/// IMEX stepper with the factorisation of `M + dt K` cached.
#[derive(Debug, Clone)]
pub struct Stepper<T> {
    mesh: Arc<GraphMesh<T>>,
    dt: T,
    factor: Factorization<T>,
}

impl<T: Scalar> Stepper<T> {
    pub fn new(mesh: Arc<GraphMesh<T>>, dt: T) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::InvalidDomain(format!("time step must be positive, got {dt}")));
        }
        let factor = mesh.factor(T::one(), dt)?;
        Ok(Self { mesh, dt, factor })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn advance(&self, field: &Field<T>) -> Result<Field<T>> {
        let m = self.mesh.mass();
        let rhs: Vec<T> =
            field.values().iter().zip(m).map(|(&u, &mi)| mi * (u + self.dt * u * (T::one() - u))).collect();
        let next = self.factor.solve(&rhs);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolveFailure("non-finite value after time step".into()));
        }
        Field::from_values(self.mesh.clone(), next)
    }
}

/// One IMEX step of size `dt`.
pub fn step<T: Scalar>(field: &Field<T>, dt: T) -> Result<Field<T>> {
    Stepper::new(field.mesh().clone(), dt)?.advance(field)
}

fn extremes<T: Scalar>(field: &Field<T>) -> (T, T) {
    field.values().iter().fold((T::zero(), T::infinity()), |(hi, lo), &v| (hi.max(v.abs()), lo.min(v)))
}

/// Integrate until `max |Δu| / dt <= tol` or `t > max_t`.
pub fn run_to_attractor<T: Scalar>(field0: &Field<T>, opts: EvolveOptions) -> Result<EvolutionTrace<T>> {
    let mesh = field0.mesh().clone();
    for (node, &v) in field0.values().iter().enumerate() {
        if v < T::zero() || !v.is_finite() {
            return Err(Error::NegativeInitialData { node, value: v.as_f64() });
        }
    }
    let mut u = field0.clone();
    for (i, v) in u.values_mut().iter_mut().enumerate() {
        if mesh.is_fixed(i) {
            *v = T::zero();
        }
    }
    let tol = c::<T>(opts.tol);
    let max_t = c::<T>(opts.max_t);
    let min_dt = c::<T>(opts.min_dt);
    let mut stepper = Stepper::new(mesh.clone(), c(opts.dt))?;
    let (sup0, min0) = extremes(&u);
    let initial_max = sup0;
    let mut t = T::zero();
    let mut trace = EvolutionTrace {
        times: vec![t],
        energy: vec![energy_trace(&u)],
        sup_norm: vec![sup0],
        min_value: vec![min0],
        initial_max,
        terminal: Terminal::MaxStepsReached,
        final_field: u.clone(),
        dt: stepper.dt(),
    };
    while t <= max_t {
        let next = stepper.advance(&u)?;
        let t_next = t + stepper.dt();
        let (sup, min) = extremes(&next);
        if let Err(e) = check_bounds(initial_max, t_next, sup, min) {
            let half = stepper.dt() * c(0.5);
            if half < min_dt {
                return Err(e);
            }
            log::warn!("{e}; halving dt to {half}");
            stepper = Stepper::new(mesh.clone(), half)?;
            continue;
        }
        let rate = next.distance(&u) / stepper.dt();
        u = next;
        t = t_next;
        trace.times.push(t);
        trace.energy.push(energy_trace(&u));
        trace.sup_norm.push(sup);
        trace.min_value.push(min);
        if rate <= tol {
            trace.terminal =
                if sup <= c::<T>(10.0) * tol { Terminal::ConvergedTrivial } else { Terminal::ConvergedNontrivial };
            break;
        }
    }
    log::debug!("evolution ended at t = {t} with {:?}", trace.terminal);
    trace.dt = stepper.dt();
    trace.final_field = u;
    Ok(trace)
}
