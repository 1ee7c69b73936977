use std::sync::Arc;

use fkpp_core::evolve::{energy_trace, run_to_attractor, time_derivative_norm, EvolveOptions, Terminal};
use fkpp_core::groundstate::{
    profile_energy, reconstruct_profile, solve_flower, solve_flower_from, solve_interval, SolveOptions,
};
use fkpp_core::mesh::{Field, GraphMesh};
use fkpp_core::{Error, FlowerSpec};

fn tadpole() -> FlowerSpec<f64> {
    FlowerSpec::new(0.8, vec![0.75]).unwrap()
}

#[test]
fn profile_solves_the_stationary_equation() {
    let s = solve_flower(&tadpole(), SolveOptions::default()).unwrap();
    for e in s.profiles() {
        let h = e.x[1] - e.x[0];
        let worst =
            e.u.windows(3)
                .map(|w| ((w[0] - 2.0 * w[1] + w[2]) / (h * h) + w[1] * (1.0 - w[1])).abs())
                .fold(0.0, f64::max);
        assert!(worst < 1e-6, "edge {}: residual {worst}", e.edge);
        assert!(e.u.iter().all(|&u| (0.0..1.0).contains(&u)));
    }
}

#[test]
fn energy_converges_at_least_at_second_order() {
    // The density has zero slope at both ends, so the trapezoid rule gains
    // two orders here.
    let s = solve_interval(3.0, SolveOptions::default()).unwrap();
    let h: Vec<f64> =
        [4e-3, 2e-3, 1e-3].iter().map(|&dx| profile_energy(&reconstruct_profile(&s, dx).unwrap())).collect();
    let order = ((h[0] - h[1]) / (h[1] - h[2])).log2();
    assert!(order > 1.8, "observed order {order}");
    assert!(h[2] < 0.0);
}

#[test]
fn flower_solution_is_independent_of_the_start() {
    let spec = FlowerSpec::new(0.51_f64, vec![0.8, 0.5]).unwrap();
    let reference = solve_flower(&spec, SolveOptions::default()).unwrap();
    for (p, q) in [(0.3, vec![-0.05, -0.05]), (0.6, vec![-0.1, -0.02])] {
        match solve_flower_from(&spec, p, &q, SolveOptions::default()) {
            Ok(s) => assert!((s.p - reference.p).abs() < 1e-8),
            Err(Error::NewtonStalled { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn longer_intervals_give_larger_states() {
    let ps: Vec<f64> =
        [1.7, 2.0, 3.0, 5.0].iter().map(|&l| solve_interval(l, SolveOptions::default()).unwrap().p).collect();
    assert!(ps.windows(2).all(|w| w[1] < w[0]), "{ps:?}");
}

#[test]
fn below_threshold_is_reported() {
    assert!(matches!(solve_interval(1.5, SolveOptions::default()), Err(Error::BelowThreshold { .. })));
    let small = FlowerSpec::new(0.2, vec![0.2]).unwrap();
    assert!(matches!(solve_flower(&small, SolveOptions::default()), Err(Error::OutsideRegion { .. })));
}

#[test]
fn evolution_reaches_the_flower_ground_state() {
    let spec = tadpole();
    let h = 2e-3;
    let mesh = Arc::new(GraphMesh::new(&spec.to_graph(), h).unwrap());
    let exact = solve_flower(&spec, SolveOptions { dx: h, ..Default::default() }).unwrap();
    let reference = Field::from_profiles(mesh.clone(), exact.profiles()).unwrap();
    let starts = [
        Field::from_fn(mesh.clone(), |_, _| 0.05),
        Field::from_fn(mesh.clone(), |e, x: f64| if e == 0 { 1.5 * x / 0.8 } else { 1.5 }),
    ];
    let mut finals = Vec::new();
    for u0 in &starts {
        let tr = run_to_attractor(u0, EvolveOptions { tol: 1e-10, ..Default::default() }).unwrap();
        assert_eq!(tr.terminal, Terminal::ConvergedNontrivial);
        assert!(tr.max_energy_increase() <= 1e-12);
        assert!(time_derivative_norm(&tr.final_field) < 1e-8);
        assert!(tr.final_field.distance(&reference) < 1e-4);
        finals.push(tr.final_field);
    }
    assert!(finals[0].distance(&finals[1]) < 1e-8);
    assert!(energy_trace(&finals[0]) < 0.0);
}

#[test]
fn evolution_decays_outside_the_region() {
    let spec = FlowerSpec::new(0.3, vec![0.3]).unwrap();
    let mesh = Arc::new(GraphMesh::new(&spec.to_graph(), 1e-2).unwrap());
    let tr = run_to_attractor(&Field::from_fn(mesh, |_, _| 0.9), EvolveOptions::default()).unwrap();
    assert_eq!(tr.terminal, Terminal::ConvergedTrivial);
}
