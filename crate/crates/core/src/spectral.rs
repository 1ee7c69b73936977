//! Lowest eigenvalue `lambda0` of `-Δ` on a metric graph with Dirichlet
//! pendants and Kirchhoff interior vertices.
//!
//! Flowers reduce to the secular equation `2 Σ tan(s L_j) = cot(s L)` with
//! `s = sqrt(lambda0)`; general graphs use inverse iteration on the
//! discretised pencil `K psi = lambda M psi`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FlowerSpec, MetricGraph};
use crate::mesh::{Field, GraphMesh};
use crate::roots::bisect;
use crate::scalar::{c, Scalar};

/// Cells per edge used to sample closed-form eigenfunctions.
pub const SAMPLE_CELLS: usize = 256;

/// `|lambda0 - 1|` below which a spec is flagged as sitting on the boundary.
pub const BOUNDARY_BAND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralMethod {
    Transcendental,
    Discretized,
}

#[derive(Debug, Clone)]
pub struct SpectralResult<T> {
    pub lambda0: T,
    /// Normalised to unit `L^2` norm and positive away from Dirichlet vertices.
    pub eigenfunction: Field<T>,
    pub method: SpectralMethod,
    pub residual: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Trivial,
    Nontrivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub region: Region,
    pub lambda0: f64,
    pub on_boundary: bool,
}

/// Multiplied-out secular function: `cos(sL) Π cos(sL_k)` times
/// `2 Σ tan(sL_j) - cot(sL)`, which is finite on the whole bracket.
fn secular<T: Scalar>(spec: &FlowerSpec<T>, s: T) -> T {
    let (sl, cl) = (s * spec.stem_length).sin_cos();
    let cosines: Vec<T> = spec.loop_half_lengths.iter().map(|&l| (s * l).cos()).collect();
    let mut sum = T::zero();
    for (j, &lj) in spec.loop_half_lengths.iter().enumerate() {
        let others: T = cosines.iter().enumerate().filter(|&(k, _)| k != j).fold(T::one(), |a, (_, &x)| a * x);
        sum = sum + (s * lj).sin() * others;
    }
    let all = cosines.iter().fold(T::one(), |a, &x| a * x);
    c::<T>(2.0) * sl * sum - cl * all
}

/// Upper end `min(pi / 2L, pi / 2L_j)` of the bracket holding `sqrt(lambda0)`.
fn bracket_end<T: Scalar>(spec: &FlowerSpec<T>) -> T {
    spec.loop_half_lengths
        .iter()
        .chain(std::iter::once(&spec.stem_length))
        .fold(T::infinity(), |a, &l| a.min(T::FRAC_PI_2() / l))
}

/// `sqrt(lambda0)` of a flower, by bisection on the secular function.
pub fn flower_root<T: Scalar>(spec: &FlowerSpec<T>) -> T {
    if spec.loop_count() == 0 {
        return T::FRAC_PI_2() / spec.stem_length;
    }
    let hi = bracket_end(spec);
    let f = |s: T| if s >= hi { T::one() } else { secular(spec, s) };
    bisect(f, T::zero(), hi, T::zero(), 400).expect("secular function changes sign on its bracket")
}

/// Closed-form eigenfunction at `s = sqrt(lambda0)`, before normalisation:
/// `sin(s x)` on the stem and `sin(sL) cos(s (x - L_j)) / cos(s L_j)` on loop `j`.
fn flower_mode<T: Scalar>(spec: &FlowerSpec<T>, s: T, edge: usize, x: T) -> T {
    if edge == 0 {
        return (s * x).sin();
    }
    let lj = spec.loop_half_lengths[edge - 1];
    (s * spec.stem_length).sin() * (s * (x - lj)).cos() / (s * lj).cos()
}

/// Transcendental solve for `lambda0` of a flower.
pub fn lambda0_flower<T: Scalar>(spec: &FlowerSpec<T>, tol: T) -> Result<SpectralResult<T>> {
    let s = flower_root(spec);
    let residual = if spec.loop_count() == 0 { (s * spec.stem_length).cos().abs() } else { secular(spec, s).abs() };
    if residual > tol.max(T::tol_floor()) {
        log::warn!("secular residual {residual} exceeds requested {tol}");
    }
    let graph = spec.to_graph();
    let mesh = Arc::new(GraphMesh::with_cells(&graph, vec![SAMPLE_CELLS; graph.edges().len()])?);
    let mut field = Field::from_fn(mesh, |k, x| flower_mode(spec, s, k, x));
    let norm2 = flower_mode_norm2(spec, s);
    let scale = T::one() / norm2.sqrt();
    field.values_mut().iter_mut().for_each(|v| *v = *v * scale);
    Ok(SpectralResult { lambda0: s * s, eigenfunction: field, method: SpectralMethod::Transcendental, residual })
}

/// Exact `L^2` norm squared of the unnormalised closed-form mode.
fn flower_mode_norm2<T: Scalar>(spec: &FlowerSpec<T>, s: T) -> T {
    let half = c::<T>(0.5);
    let l = spec.stem_length;
    // ∫_0^L sin^2 = L/2 - sin(2sL)/(4s)
    let mut total = half * l - (c::<T>(2.0) * s * l).sin() / (c::<T>(4.0) * s);
    let sl = (s * l).sin();
    for &lj in &spec.loop_half_lengths {
        let a = sl / (s * lj).cos();
        // ∫_{-Lj}^{Lj} cos^2 = Lj + sin(2sLj)/(2s)
        total = total + a * a * (lj + (c::<T>(2.0) * s * lj).sin() / (c::<T>(2.0) * s));
    }
    total
}

/// Options for the discretised eigen-solver.
#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub max_iterations: usize,
    /// Relative Rayleigh-quotient change for the shifted phase; its square
    /// root ends the unshifted phase.
    pub rq_tol: f64,
    /// Target for the scaled residual `||K psi - lambda M psi||_{M^-1} / lambda`.
    pub residual_tol: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { max_iterations: 500, rq_tol: 1e-12, residual_tol: 1e-10 }
    }
}

fn rayleigh<T: Scalar>(mesh: &GraphMesh<T>, x: &[T]) -> T {
    mesh.dirichlet_form(x) / mesh.mass_inner(x, x)
}

fn normalise<T: Scalar>(mesh: &GraphMesh<T>, x: &mut [T]) {
    let n = mesh.mass_inner(x, x).sqrt();
    let sign = if x.iter().copied().sum::<T>() < T::zero() { -T::one() } else { T::one() };
    x.iter_mut().for_each(|v| *v = *v * sign / n);
}

fn scaled_residual<T: Scalar>(mesh: &GraphMesh<T>, x: &[T], lambda: T) -> T {
    let kx = mesh.apply_stiffness(x);
    let m = mesh.mass();
    let mut s = T::zero();
    for i in 0..x.len() {
        if mesh.is_fixed(i) {
            continue;
        }
        let r = kx[i] - lambda * m[i] * x[i];
        s = s + r * r / m[i];
    }
    s.sqrt() / lambda.max(T::min_positive_value())
}

/// Smallest eigenpair of the discretised Laplacian on a prepared mesh.
pub fn lambda0_on_mesh<T: Scalar>(mesh: Arc<GraphMesh<T>>, opts: EigenOptions) -> Result<SpectralResult<T>> {
    let n = mesh.node_count();
    let mut x: Vec<T> = (0..n).map(|i| if mesh.is_fixed(i) { T::zero() } else { T::one() }).collect();
    normalise(&mesh, &mut x);
    let k = mesh.factor(T::zero(), T::one())?;
    let mut rq = rayleigh(&mesh, &x);
    let rq_tol = c::<T>(opts.rq_tol);
    let mut iterations = 0;
    loop {
        if iterations >= opts.max_iterations {
            return Err(Error::EigenNotConverged { iterations, residual: scaled_residual(&mesh, &x, rq).as_f64() });
        }
        let mx: Vec<T> = x.iter().zip(mesh.mass()).map(|(&a, &m)| a * m).collect();
        x = k.solve(&mx);
        normalise(&mesh, &mut x);
        iterations += 1;
        let next = rayleigh(&mesh, &x);
        let done = (next - rq).abs() <= rq_tol.sqrt() * next;
        rq = next;
        if done {
            break;
        }
    }
    // Shifted phase: converges in a handful of steps once the shift is close.
    let target = c::<T>(opts.residual_tol);
    let mut residual = scaled_residual(&mesh, &x, rq);
    let mut best = (residual, rq, x.clone());
    let mut stalls = 0;
    while residual > target && iterations < opts.max_iterations && stalls < 3 {
        let sigma = rq * (T::one() - c::<T>(1e-6));
        let shifted = mesh.factor(-sigma, T::one())?;
        let mx: Vec<T> = x.iter().zip(mesh.mass()).map(|(&a, &m)| a * m).collect();
        x = shifted.solve(&mx);
        normalise(&mesh, &mut x);
        iterations += 1;
        let next = rayleigh(&mesh, &x);
        let rq_change = (next - rq).abs();
        rq = next;
        residual = scaled_residual(&mesh, &x, rq);
        if residual < best.0 {
            best = (residual, rq, x.clone());
            stalls = 0;
        } else {
            stalls += 1;
        }
        if rq_change <= rq_tol * rq && stalls > 0 {
            break;
        }
    }
    let (residual, rq, x) = best;
    // A stagnating residual sits at the roundoff floor of the stiffness
    // matrix; anything far above that is a genuine failure.
    let floor = T::epsilon() * c::<T>(1e4) / mesh.max_h();
    if residual > target.max(floor) {
        return Err(Error::EigenNotConverged { iterations, residual: residual.as_f64() });
    }
    log::debug!("discretized lambda0 = {rq} after {iterations} iterations, residual {residual}");
    let eigenfunction = Field::from_values(mesh, x)?;
    Ok(SpectralResult { lambda0: rq, eigenfunction, method: SpectralMethod::Discretized, residual })
}

/// Discretised `lambda0` on a uniform mesh of width `mesh_h`.
pub fn lambda0_discretized<T: Scalar>(graph: &MetricGraph<T>, mesh_h: T) -> Result<SpectralResult<T>> {
    lambda0_on_mesh(Arc::new(GraphMesh::new(graph, mesh_h)?), EigenOptions::default())
}

/// `(lhs, rhs)` of the length-derivative identity for one edge:
/// `lhs` is a central difference of the discretised `lambda0` in the edge
/// length (step `1e-4` of the length, cell counts frozen) and
/// `rhs = -(psi'^2 + lambda0 psi^2)`, which is constant along the edge and is
/// averaged over its cells.
pub fn eigenvalue_length_slope<T: Scalar>(graph: &MetricGraph<T>, edge_id: &str, mesh_h: T) -> Result<(T, T)> {
    let edge = graph.edge_index(edge_id).ok_or_else(|| Error::UnknownVertex(format!("edge {edge_id}")))?;
    let base = Arc::new(GraphMesh::new(graph, mesh_h)?);
    let cells: Vec<usize> = base.edge_meshes().iter().map(|m| m.cells).collect();
    let len = graph.edges()[edge].length;
    let step = c::<T>(1e-4) * len;
    let opts = EigenOptions::default();
    let at = |l: T| -> Result<T> {
        let g = graph.with_edge_length(edge, l);
        Ok(lambda0_on_mesh(Arc::new(GraphMesh::with_cells(&g, cells.clone())?), opts)?.lambda0)
    };
    let lhs = (at(len + step)? - at(len - step)?) / (c::<T>(2.0) * step);

    let res = lambda0_on_mesh(base.clone(), opts)?;
    let samples = res.eigenfunction.edge_samples(edge);
    let h = base.edge_mesh(edge).h;
    let half = c::<T>(0.5);
    let mut acc = T::zero();
    for w in samples.windows(2) {
        let d = (w[1].1 - w[0].1) / h;
        let mid = half * (w[0].1 + w[1].1);
        acc = acc + d * d + res.lambda0 * mid * mid;
    }
    let rhs = -acc / T::from_usize_lossy(samples.len() - 1);
    Ok((lhs, rhs))
}

/// Trivial/nontrivial classification by the threshold `lambda0 = 1`.
pub fn region_membership<T: Scalar>(spec: &FlowerSpec<T>) -> Membership {
    let s = flower_root(spec);
    let lambda0 = (s * s).as_f64();
    Membership {
        region: if lambda0 < 1.0 { Region::Nontrivial } else { Region::Trivial },
        lambda0,
        on_boundary: (lambda0 - 1.0).abs() <= BOUNDARY_BAND,
    }
}

/// Critical stem length `arccot(2 Σ tan L_j)` at which `lambda0 = 1`.
pub fn lower_boundary<T: Scalar>(loops: &[T]) -> Result<T> {
    let mut sum = T::zero();
    for (index, &l) in loops.iter().enumerate() {
        if !(l >= T::zero()) || l >= T::FRAC_PI_2() {
            return Err(Error::LoopTooLong { index, half_length: l.as_f64() });
        }
        sum = sum + l.tan();
    }
    Ok(T::FRAC_PI_2() - (c::<T>(2.0) * sum).atan())
}

/// Critical half-loop length `arctan(cot(L) / 2N)` of a symmetric flower;
/// zero once the stem alone exceeds `pi/2`.
pub fn lower_boundary_symmetric<T: Scalar>(stem_length: T, loops: usize) -> Result<T> {
    if loops == 0 || !(stem_length > T::zero()) {
        return Err(Error::InvalidDomain(format!("need N >= 1 and L > 0, got N = {loops}, L = {stem_length}")));
    }
    if stem_length >= T::FRAC_PI_2() {
        return Ok(T::zero());
    }
    let cot = T::one() / stem_length.tan();
    Ok((cot / (c::<T>(2.0) * T::from_usize_lossy(loops))).atan())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn flower(l: f64, loops: &[f64]) -> FlowerSpec<f64> {
        FlowerSpec::new(l, loops.to_vec()).unwrap()
    }

    #[test]
    fn interval_closed_form() {
        let r = lambda0_flower(&flower(2.0, &[]), 1e-12).unwrap();
        assert!((r.lambda0 - PI * PI / 16.0).abs() < 1e-15);
        assert!((r.eigenfunction.l2_norm() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn symmetric_tadpole_unit_lengths() {
        let r = lambda0_flower(&flower(1.0, &[1.0]), 1e-12).unwrap();
        let s = (1.0 / 2f64.sqrt()).atan();
        assert!((r.lambda0 - s * s).abs() < 1e-14);
        assert!((r.lambda0 - 0.378_815_271_784_984_9).abs() < 1e-14);
    }

    #[test]
    fn oracle_values() {
        // Independent high-precision roots of 2 Σ tan(s L_j) = cot(s L).
        assert!(
            (lambda0_flower(&flower(0.8, &[0.75]), 1e-12).unwrap().lambda0 - 0.630_987_542_490_672_5).abs() < 1e-13
        );
        assert!(
            (lambda0_flower(&flower(0.51, &[0.8, 0.5]), 1e-12).unwrap().lambda0 - 0.635_095_513_921_655_3).abs()
                < 1e-13
        );
    }

    #[test]
    fn closed_form_eigenfunction_is_an_eigenfunction() {
        let r = lambda0_flower(&flower(0.8, &[0.75, 0.3]), 1e-12).unwrap();
        let f = &r.eigenfunction;
        let ku = f.mesh().apply_stiffness(f.values());
        let m = f.mesh().mass();
        for i in 0..ku.len() {
            if f.mesh().is_fixed(i) {
                continue;
            }
            // Discrete operator applied to exact samples: O(h^2) consistency.
            let r = ku[i] / m[i] - r.lambda0 * f.values()[i];
            assert!(r.abs() < 1e-3, "node {i}: {r}");
        }
        assert!(f.values().iter().enumerate().all(|(i, &v)| f.mesh().is_fixed(i) || v > 0.0));
        assert!((f.l2_norm() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn discretized_interval() {
        let r = lambda0_discretized(&flower(2.0, &[]).to_graph(), 1e-3).unwrap();
        assert_eq!(r.method, SpectralMethod::Discretized);
        assert!((r.lambda0 - PI * PI / 16.0).abs() < 1e-4);
    }

    #[test]
    fn discretized_matches_transcendental_on_two_loop_flower() {
        let spec = flower(0.51, &[0.8, 0.5]);
        let exact = lambda0_flower(&spec, 1e-12).unwrap().lambda0;
        let h = 2e-3;
        let r = lambda0_discretized(&spec.to_graph(), h).unwrap();
        assert!((r.lambda0 - exact).abs() < 5.0 * h * h);
        assert!(r
            .eigenfunction
            .values()
            .iter()
            .enumerate()
            .all(|(i, &v)| r.eigenfunction.mesh().is_fixed(i) || v > 0.0));
    }

    #[test]
    fn slope_identity_on_interval() {
        let g = flower(2.0, &[]).to_graph();
        let (lhs, rhs) = eigenvalue_length_slope(&g, "stem", 2e-3).unwrap();
        let exact = -PI * PI / 16.0;
        assert!((lhs / exact - 1.0).abs() < 1e-5, "{lhs}");
        assert!((rhs / exact - 1.0).abs() < 1e-5, "{rhs}");
    }

    #[test]
    fn boundaries() {
        assert!((lower_boundary::<f64>(&[]).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((lower_boundary(&[0.0_f64]).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let l0 = lower_boundary_symmetric(0.8_f64, 1).unwrap();
        assert!((l0 - 0.452_067_295_170_980_4).abs() < 1e-15);
        assert!((lower_boundary(&[l0]).unwrap() - 0.8).abs() < 1e-14);
        let r = lambda0_flower(&flower(0.8, &[l0]), 1e-14).unwrap();
        assert!((r.lambda0 - 1.0).abs() < 1e-12);
        assert!(matches!(lower_boundary(&[0.3, 1.6]), Err(Error::LoopTooLong { index: 1, .. })));
        assert_eq!(lower_boundary_symmetric(2.0_f64, 3).unwrap(), 0.0);
    }

    #[test]
    fn membership_examples() {
        assert_eq!(region_membership(&flower(1.0, &[])).region, Region::Trivial);
        assert_eq!(region_membership(&flower(2.0, &[])).region, Region::Nontrivial);
        assert_eq!(region_membership(&flower(0.8, &[0.75])).region, Region::Nontrivial);
        let l = lower_boundary(&[0.4_f64, 0.2]).unwrap();
        assert!(region_membership(&flower(l, &[0.4, 0.2])).on_boundary);
    }
}
