//! Property suites over the whole toolkit. Each suite is a list of
//! independent tasks so callers can run them on a worker pool.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::evolve::{run_to_attractor, EvolveOptions, Terminal};
use crate::graph::FlowerSpec;
use crate::groundstate::{jacobian_report, solve_flower, SolveOptions};
use crate::mesh::{Field, GraphMesh};
use crate::period::{asymptotic_t, center_limits, grad_t, grad_t0, inside_homoclinic, period_t, period_t0};
use crate::phaseplane::{homoclinic_point, potential, PhasePoint};
use crate::scalar::homoclinic_shift;
use crate::spectral::{lower_boundary, region_membership, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Asymptotics,
    Monotonicity,
    Jacobian,
    Dichotomy,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Asymptotics, Suite::Monotonicity, Suite::Jacobian, Suite::Dichotomy];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn new(suite: Suite, seed: u64, checks: Vec<Check>) -> Self {
        Self { suite, seed, passed: checks.iter().all(|c| c.passed), checks }
    }
}

type TaskFn = Box<dyn Fn() -> Check + Send + Sync>;

pub struct Task {
    pub name: String,
    run: TaskFn,
}

impl Task {
    fn new(name: impl Into<String>, run: impl Fn() -> Check + Send + Sync + 'static) -> Self {
        Self { name: name.into(), run: Box::new(run) }
    }

    pub fn run(&self) -> Check {
        (self.run)()
    }
}

/// Independent tasks making up `suite`; `seed` drives every random sample.
pub fn tasks(suite: Suite, seed: u64) -> Vec<Task> {
    match suite {
        Suite::Asymptotics => asymptotics_tasks(),
        Suite::Monotonicity => monotonicity_tasks(),
        Suite::Jacobian => jacobian_tasks(seed),
        Suite::Dichotomy => dichotomy_tasks(),
    }
}

/// Run a suite sequentially.
pub fn run_suite(suite: Suite, seed: u64) -> SuiteReport {
    let checks = tasks(suite, seed).iter().map(Task::run).collect();
    SuiteReport::new(suite, seed, checks)
}

fn pt(p: f64, q: f64) -> PhasePoint<f64> {
    PhasePoint::new(p, q).expect("sample inside the phase-plane quadrant")
}

/// `max |T - asymptotic| / p` over `q = -p`, `p in {1e-2, 1e-3, 1e-4}`,
/// together with the individual ratios.
pub fn asymptotic_constants() -> Vec<(f64, f64)> {
    [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&p| {
            let x = pt(p, -p);
            let t = period_t(x, 1e-13).map(|v| v.value).unwrap_or(f64::NAN);
            (p, (t - asymptotic_t(x)).abs() / p)
        })
        .collect()
}

fn asymptotics_tasks() -> Vec<Task> {
    let mut out = vec![Task::new("log-law remainder is O(p)", || {
        let ks = asymptotic_constants();
        let (lo, hi) = ks.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &(_, k)| (lo.min(k), hi.max(k)));
        Check::new("log-law remainder is O(p)", hi.is_finite() && hi <= 3.0 * lo, format!("K = {ks:?}"))
    })];
    for &slope in &[-0.5, -1.0, -2.0] {
        let name = format!("center limits, Q = {slope}");
        out.push(Task::new(name.clone(), move || {
            let p = 1.0 - 1e-3;
            let x = pt(p, slope * (1.0 - p));
            let (lt, lt0) = center_limits(slope);
            let t = period_t(x, 1e-12).map(|v| v.value).unwrap_or(f64::NAN);
            let t0 = period_t0(x, 1e-12).map(|v| v.value).unwrap_or(f64::NAN);
            let ok = (t - lt).abs() <= 5e-3
                && (t0 - lt0).abs() <= 5e-3
                && (t + t0 - std::f64::consts::FRAC_PI_2).abs() <= 5e-3;
            Check::new(name.clone(), ok, format!("T = {t}, T0 = {t0}, limits ({lt}, {lt0})"))
        }));
    }
    for &len in &[6.0_f64, 8.0, 10.0] {
        let name = format!("homoclinic trace, L = {len}");
        out.push(Task::new(name.clone(), move || {
            let (p, q) = homoclinic_point(len);
            let scale = 6.0 * (-len - homoclinic_shift::<f64>()).exp();
            let t = period_t(pt(p, q), 1e-13).map(|v| v.value).unwrap_or(f64::NAN);
            let bound = 10.0 * (-len).exp();
            let ok = (t - len).abs() <= bound && (p / scale - 1.0).abs() <= bound && (-q / scale - 1.0).abs() <= bound;
            Check::new(
                name.clone(),
                ok,
                format!("|T - L| = {:.3e}, p/p_L - 1 = {:.3e}", (t - len).abs(), p / scale - 1.0),
            )
        }));
    }
    for &n in &[1usize, 2] {
        let name = format!("symmetric trace p, N = {n}, L = 8");
        out.push(Task::new(name.clone(), move || {
            let len = 8.0;
            let spec = FlowerSpec::symmetric(len, len, n).expect("valid symmetric flower");
            let p_asym = 12.0 / (1.0 + 2.0 * n as f64) * (-len - homoclinic_shift::<f64>()).exp();
            match solve_flower(&spec, SolveOptions { tol: 1e-8, ..Default::default() }) {
                Ok(s) => {
                    let rel = (s.p / p_asym - 1.0).abs();
                    Check::new(
                        name.clone(),
                        rel <= 10.0 * (-len).exp(),
                        format!("p = {:.6e}, relative gap {rel:.3e}", s.p),
                    )
                }
                Err(e) => Check::new(name.clone(), false, e.to_string()),
            }
        }));
    }
    out
}

/// Log-spaced values between `a` and `b` inclusive.
fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Grid used by the monotonicity suite: 20 values of `p` in `[0.02, 0.98]`
/// and 20 of `q` in `[-3, -0.005]`, both log-spaced.
pub fn monotonicity_grid() -> (Vec<f64>, Vec<f64>) {
    (logspace(0.02, 0.98, 20), logspace(0.005, 3.0, 20).into_iter().map(|v| -v).collect())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityCounts {
    pub t_points: usize,
    pub t_violations: usize,
    pub t0_points: usize,
    pub t0_violations: usize,
    /// Worst relative gap between analytic and finite-difference gradients.
    pub worst_gradient_gap: f64,
}

/// Sign and gradient checks on one grid row of fixed `p`.
pub fn monotonicity_row(p: f64, qs: &[f64]) -> MonotonicityCounts {
    const H: f64 = 1e-4;
    const TOL: f64 = 1e-13;
    let t = |p: f64, q: f64| period_t(PhasePoint::raw(p, q), TOL).map(|v| v.value).unwrap_or(f64::NAN);
    let t0 = |p: f64, q: f64| period_t0(PhasePoint::raw(p, q), TOL).map(|v| v.value).unwrap_or(f64::NAN);
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
    let mut c = MonotonicityCounts::default();
    for &q in qs {
        c.t_points += 1;
        let base = t(p, q);
        let g = grad_t(pt(p, q), TOL);
        let mut bad = !(t(p + H, q) < base) || !(t(p, q + H) > base);
        match g {
            Ok(g) => {
                bad |= !(g.dp < 0.0 && g.dq > 0.0);
                let e = 1e-5 * p.min(q.abs()).min(1.0 - p);
                let fd_p = (t(p + e, q) - t(p - e, q)) / (2.0 * e);
                let fd_q = (t(p, q + e) - t(p, q - e)) / (2.0 * e);
                c.worst_gradient_gap = c.worst_gradient_gap.max(rel(g.dp, fd_p)).max(rel(g.dq, fd_q));
            }
            Err(_) => bad = true,
        }
        c.t_violations += bad as usize;

        // T0 needs a closed orbit, also at the shifted points.
        let inside = |p: f64, q: f64| q < 0.0 && p < 1.0 && inside_homoclinic(PhasePoint::raw(p, q));
        let e = 1e-6 * p.min(q.abs()).min(1.0 - p);
        if !(inside(p, q) && inside(p + H, q) && inside(p + e, q) && inside(p - e, q) && inside(p, q - e)) {
            continue;
        }
        c.t0_points += 1;
        let base = t0(p, q);
        let mut bad = !(t0(p, q + H.min(q.abs() / 2.0)) < base);
        match grad_t0(pt(p, q), TOL) {
            Ok(g) => {
                bad |= !(g.dq < 0.0);
                if p <= 0.5 {
                    bad |= !(g.dp < 0.0) || !(t0(p + H, q) < base);
                }
                let fd_p = (t0(p + e, q) - t0(p - e, q)) / (2.0 * e);
                let fd_q = (t0(p, q + e) - t0(p, q - e)) / (2.0 * e);
                c.worst_gradient_gap = c.worst_gradient_gap.max(rel(g.dp, fd_p)).max(rel(g.dq, fd_q));
            }
            Err(_) => bad = true,
        }
        c.t0_violations += bad as usize;
    }
    c
}

fn monotonicity_tasks() -> Vec<Task> {
    let (ps, qs) = monotonicity_grid();
    let qs = Arc::new(qs);
    ps.into_iter()
        .map(|p| {
            let qs = qs.clone();
            let name = format!("period monotonicity, p = {p:.4}");
            Task::new(name.clone(), move || {
                let c = monotonicity_row(p, &qs);
                let ok = c.t_violations == 0 && c.t0_violations == 0 && c.worst_gradient_gap <= 1e-4;
                Check::new(name.clone(), ok, format!("{c:?}"))
            })
        })
        .collect()
}

/// Random admissible point `(p, q_1..q_n)` with every loop orbit closed.
pub fn random_admissible(rng: &mut impl Rng, n: usize) -> (f64, Vec<f64>) {
    let p: f64 = rng.gen_range(0.02..0.98);
    let q_hom = potential(p).sqrt();
    (p, (0..n).map(|_| -q_hom * rng.gen_range(0.02..0.98)).collect())
}

fn jacobian_tasks(seed: u64) -> Vec<Task> {
    (1..=5usize)
        .map(|n| {
            let name = format!("Jacobian sign (-1)^(N+1), N = {n}");
            Task::new(name.clone(), move || {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(n as u64));
                let mut violations = 0;
                let mut failures = 0;
                for _ in 0..100 {
                    let (p, qs) = random_admissible(&mut rng, n);
                    match jacobian_report(p, &qs, 1e-12) {
                        Ok(r) if r.sign_matches() => {}
                        Ok(_) => violations += 1,
                        Err(_) => failures += 1,
                    }
                }
                Check::new(
                    name.clone(),
                    violations == 0 && failures == 0,
                    format!("100 samples, {violations} sign violations, {failures} evaluation failures"),
                )
            })
        })
        .collect()
}

/// Flowers straddling the lower boundary: stems at fixed multiples of the
/// critical length for three loop configurations.
pub fn dichotomy_specs() -> Vec<FlowerSpec<f64>> {
    let configs: [&[f64]; 3] = [&[0.75], &[0.4, 0.2], &[0.3, 0.3, 0.3]];
    let mut out = Vec::new();
    for loops in configs {
        let critical = lower_boundary(loops).expect("loops shorter than pi/2");
        for factor in [0.7, 0.85, 1.15, 1.3] {
            out.push(FlowerSpec::new(critical * factor, loops.to_vec()).expect("positive lengths"));
        }
    }
    out
}

/// Evolve `u0 = 1/2` on a coarse mesh and compare with the spectral threshold.
pub fn dichotomy_case(spec: &FlowerSpec<f64>, mesh_h: f64) -> Check {
    let name = format!("dichotomy L = {:.4}, loops {:?}", spec.stem_length, spec.loop_half_lengths);
    let expected = region_membership(spec);
    let run = GraphMesh::new(&spec.to_graph(), mesh_h).and_then(|mesh| {
        let u0 = Field::from_fn(Arc::new(mesh), |_, _| 0.5);
        run_to_attractor(&u0, EvolveOptions { max_t: 5e3, ..Default::default() })
    });
    match run {
        Ok(tr) => {
            let got = match tr.terminal {
                Terminal::ConvergedTrivial => Some(Region::Trivial),
                Terminal::ConvergedNontrivial => Some(Region::Nontrivial),
                Terminal::MaxStepsReached => None,
            };
            let ok = got == Some(expected.region) && tr.max_energy_increase() <= 1e-10;
            Check::new(
                name,
                ok,
                format!("lambda0 = {:.4}, expected {:?}, evolved {:?}", expected.lambda0, expected.region, tr.terminal),
            )
        }
        Err(e) => Check::new(name, false, e.to_string()),
    }
}

fn dichotomy_tasks() -> Vec<Task> {
    dichotomy_specs()
        .into_iter()
        .map(|spec| {
            let name = format!("dichotomy L = {:.4}", spec.stem_length);
            Task::new(name, move || dichotomy_case(&spec, 1e-2))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let (ps, qs) = monotonicity_grid();
        assert_eq!(ps.len() * qs.len(), 400);
        assert!((ps[0] - 0.02).abs() < 1e-15 && (ps[19] - 0.98).abs() < 1e-12);
        assert!(qs.iter().all(|&q| q < 0.0));
    }

    #[test]
    fn dichotomy_specs_straddle_the_boundary() {
        let specs = dichotomy_specs();
        assert_eq!(specs.len(), 12);
        let nontrivial = specs.iter().filter(|s| region_membership(s).region == Region::Nontrivial).count();
        assert_eq!(nontrivial, 6);
    }

    #[test]
    fn seeded_samples_are_reproducible() {
        let a = random_admissible(&mut ChaCha8Rng::seed_from_u64(7), 3);
        let b = random_admissible(&mut ChaCha8Rng::seed_from_u64(7), 3);
        assert_eq!(a, b);
    }
}
