use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;
use std::sync::Arc;

use fkpp_core::evolve::{comparison_monitor, run_to_attractor, time_derivative_norm};
use fkpp_core::groundstate::{energy_of, jacobian_report, solve_flower};
use fkpp_core::spectral::{
    lambda0_discretized, lambda0_flower, lambda0_on_mesh, lower_boundary, region_membership, EigenOptions,
};
use fkpp_core::suites::{tasks, Check, Suite, SuiteReport};
use fkpp_core::{EvolveOptions, Field, GraphMesh, SolveOptions};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::io::{emit_json, load_graph, read_profiles, write_csv, write_profiles, CliResult, Failure, TraceRow};
use crate::{Format, GraphArgs, SuiteArg};

const SCHEMA: u32 = 1;

fn positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Failure::new(2, format!("--{name} must be positive, got {v}")))
    }
}

fn write_rows<R: Serialize>(output: Option<&PathBuf>, rows: Vec<R>) -> CliResult<()> {
    match output {
        Some(p) => write_csv(p, rows),
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SpectrumRow {
    method: &'static str,
    lambda0: f64,
    residual: f64,
}

pub fn spectrum(
    graph: &GraphArgs,
    mesh: f64,
    tol: f64,
    format: Format,
    output: Option<PathBuf>,
    eigenfunction: Option<PathBuf>,
) -> CliResult<i32> {
    positive("mesh", mesh)?;
    positive("tol", tol)?;
    let g = load_graph(graph.graph.as_deref(), &graph.flower)?;
    let disc = lambda0_discretized(&g, mesh)?;
    let mut rows = Vec::new();
    let report = match g.as_flower() {
        Some(spec) => {
            let exact = lambda0_flower(&spec, tol)?;
            let membership = region_membership(&spec);
            rows.push(SpectrumRow { method: "transcendental", lambda0: exact.lambda0, residual: exact.residual });
            rows.push(SpectrumRow { method: "discretized", lambda0: disc.lambda0, residual: disc.residual });
            if let Some(p) = &eigenfunction {
                write_profiles(p, &exact.eigenfunction.to_profiles())?;
            }
            json!({
                "schema": SCHEMA,
                "lambda0": exact.lambda0,
                "method": exact.method,
                "residual": exact.residual,
                "discretized": { "lambda0": disc.lambda0, "residual": disc.residual, "mesh": mesh },
                "gap": (exact.lambda0 - disc.lambda0).abs(),
                "region": membership,
            })
        }
        None => {
            rows.push(SpectrumRow { method: "discretized", lambda0: disc.lambda0, residual: disc.residual });
            if let Some(p) = &eigenfunction {
                write_profiles(p, &disc.eigenfunction.to_profiles())?;
            }
            json!({
                "schema": SCHEMA,
                "lambda0": disc.lambda0,
                "method": disc.method,
                "residual": disc.residual,
                "mesh": mesh,
                "nontrivial_expected": disc.lambda0 < 1.0,
            })
        }
    };
    match format {
        Format::Json => emit_json(output.as_ref(), &report)?,
        Format::Csv => write_rows(output.as_ref(), rows)?,
    }
    Ok(0)
}

pub fn groundstate(
    graph: &GraphArgs,
    tol: f64,
    dx: f64,
    output: Option<PathBuf>,
    profile: Option<PathBuf>,
) -> CliResult<i32> {
    positive("tol", tol)?;
    positive("dx", dx)?;
    let g = load_graph(graph.graph.as_deref(), &graph.flower)?;
    let spec = g.as_flower().ok_or_else(|| {
        Failure::new(4, "graph is not a flower (one Dirichlet stem plus loops); use `fkpp evolve` for general graphs")
    })?;
    let s = solve_flower(&spec, SolveOptions { tol, dx, ..Default::default() })?;
    let lambda0 = lambda0_flower(&spec, 1e-13)?.lambda0;
    let jacobian = if s.q_loops.is_empty() {
        serde_json::Value::Null
    } else {
        let j = jacobian_report(s.p, &s.q_loops, 1e-12)?;
        json!({ "determinant": j.determinant, "expected_sign": j.expected_sign, "sign_matches": j.sign_matches() })
    };
    if let Some(p) = &profile {
        write_profiles(p, s.profiles())?;
    }
    let summary = json!({
        "schema": SCHEMA,
        "stem": spec.stem_length,
        "loop_half_lengths": spec.loop_half_lengths,
        "p": s.p,
        "q": s.q_loops,
        "q_stem": s.q_stem,
        "stem_energy": s.stem_energy(),
        "H": energy_of(&s),
        "lambda0": lambda0,
        "residuals": s.residuals,
        "newton_iterations": s.newton_iterations,
        "jacobian": jacobian,
    });
    emit_json(output.as_ref(), &summary)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
pub fn evolve(
    graph: &GraphArgs,
    mesh_h: f64,
    opts: EvolveOptions,
    init_csv: Option<PathBuf>,
    init_value: f64,
    trace_path: Option<PathBuf>,
    field_path: Option<PathBuf>,
    output: Option<PathBuf>,
) -> CliResult<i32> {
    positive("mesh", mesh_h)?;
    positive("dt", opts.dt)?;
    positive("tol", opts.tol)?;
    let g = load_graph(graph.graph.as_deref(), &graph.flower)?;
    let mesh = Arc::new(GraphMesh::new(&g, mesh_h)?);
    let u0 = match &init_csv {
        Some(p) => Field::from_profiles(mesh.clone(), &read_profiles(p)?)?,
        None => Field::from_fn(mesh.clone(), |_, _| init_value),
    };
    let initial_rate = time_derivative_norm(&u0);
    let trace = run_to_attractor(&u0, opts)?;
    let comparison = comparison_monitor(&trace)?;
    let lambda0 = lambda0_on_mesh(mesh, EigenOptions::default())?.lambda0;
    if let Some(p) = &trace_path {
        let rows = trace.times.iter().zip(&trace.energy).zip(&trace.sup_norm).map(|((&t, &h), &sup_norm)| TraceRow {
            t,
            h,
            sup_norm,
        });
        write_csv(p, rows)?;
    }
    if let Some(p) = &field_path {
        write_profiles(p, &trace.final_field.to_profiles())?;
    }
    let summary = json!({
        "schema": SCHEMA,
        "terminal": trace.terminal,
        "t_end": trace.times.last(),
        "steps": trace.times.len() - 1,
        "dt": trace.dt,
        "H_end": trace.energy.last(),
        "sup_norm": trace.sup_norm.last(),
        "initial_rate": initial_rate,
        "max_energy_increase": trace.max_energy_increase(),
        "comparison": comparison,
        "lambda0_discretized": lambda0,
    });
    emit_json(output.as_ref(), &summary)?;
    Ok(0)
}

#[derive(Serialize)]
struct CurveRow {
    n: usize,
    l0: f64,
    l: f64,
}

#[derive(Serialize)]
struct SurfaceRow {
    l1: f64,
    l2: f64,
    l: f64,
}

pub fn region(
    loops: &[usize],
    surface: bool,
    samples: usize,
    format: Format,
    output: Option<PathBuf>,
) -> CliResult<i32> {
    if samples < 2 {
        return Err(Failure::new(2, "--samples must be at least 2"));
    }
    let axis: Vec<f64> = (0..samples).map(|i| FRAC_PI_2 * i as f64 / samples as f64).collect();
    if surface {
        let pairs: Vec<(f64, f64)> = axis.iter().flat_map(|&a| axis.iter().map(move |&b| (a, b))).collect();
        let rows = pairs
            .par_iter()
            .map(|&(l1, l2)| Ok(SurfaceRow { l1, l2, l: lower_boundary(&[l1, l2])? }))
            .collect::<CliResult<Vec<_>>>()?;
        match format {
            Format::Csv => write_rows(output.as_ref(), rows)?,
            Format::Json => emit_json(output.as_ref(), &json!({ "schema": SCHEMA, "kind": "surface", "rows": rows }))?,
        }
    } else {
        if loops.contains(&0) {
            return Err(Failure::new(2, "--loops entries must be at least 1"));
        }
        let pairs: Vec<(usize, f64)> = loops.iter().flat_map(|&n| axis.iter().map(move |&l0| (n, l0))).collect();
        let rows = pairs
            .par_iter()
            .map(|&(n, l0)| Ok(CurveRow { n, l0, l: lower_boundary(&vec![l0; n])? }))
            .collect::<CliResult<Vec<_>>>()?;
        match format {
            Format::Csv => write_rows(output.as_ref(), rows)?,
            Format::Json => emit_json(output.as_ref(), &json!({ "schema": SCHEMA, "kind": "curves", "rows": rows }))?,
        }
    }
    Ok(0)
}

pub fn validate(suite: SuiteArg, seed: u64, output: Option<PathBuf>) -> CliResult<i32> {
    let suites: Vec<Suite> = match suite {
        SuiteArg::Asymptotics => vec![Suite::Asymptotics],
        SuiteArg::Monotonicity => vec![Suite::Monotonicity],
        SuiteArg::Jacobian => vec![Suite::Jacobian],
        SuiteArg::Dichotomy => vec![Suite::Dichotomy],
        SuiteArg::All => Suite::ALL.to_vec(),
    };
    let reports: Vec<SuiteReport> = suites
        .into_iter()
        .map(|s| {
            let checks: Vec<Check> = tasks(s, seed).par_iter().map(|t| t.run()).collect();
            for c in checks.iter().filter(|c| !c.passed) {
                log::error!("{:?}: {} failed: {}", s, c.name, c.detail);
            }
            SuiteReport::new(s, seed, checks)
        })
        .collect();
    let passed = reports.iter().all(|r| r.passed);
    emit_json(output.as_ref(), &json!({ "schema": SCHEMA, "seed": seed, "passed": passed, "suites": reports }))?;
    Ok(if passed { 0 } else { 1 })
}
