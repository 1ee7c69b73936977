use std::sync::Arc;

use fkpp_core::evolve::{energy_trace, step};
use fkpp_core::graph::parse_graph_json;
use fkpp_core::mesh::{Field, GraphMesh};
use fkpp_core::period::{grad_t, grad_t0, inside_homoclinic};
use fkpp_core::phaseplane::{energy, q_tilde, turning_point_p0};
use fkpp_core::spectral::{lambda0_flower, lower_boundary};
use fkpp_core::{FlowerSpec, PhasePoint};
use proptest::prelude::*;

fn lambda(spec: &FlowerSpec<f64>) -> f64 {
    lambda0_flower(spec, 1e-14).unwrap().lambda0
}

fn flower() -> impl Strategy<Value = FlowerSpec<f64>> {
    (0.05..4.0_f64, prop::collection::vec(0.05..2.0_f64, 0..4)).prop_map(|(l, ls)| FlowerSpec::new(l, ls).unwrap())
}

fn closed_orbit_point() -> impl Strategy<Value = PhasePoint<f64>> {
    (0.02..0.98_f64, 0.05..0.95_f64).prop_map(|(p, frac)| {
        // Scale q inside the homoclinic loop: q^2 < A(p).
        let a = p * p - 2.0 / 3.0 * p * p * p;
        PhasePoint::new(p, -frac * a.sqrt()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flower_graph_round_trip(spec in flower()) {
        let g = spec.to_graph();
        prop_assert!(g.validate().is_ok());
        let back = g.as_flower().unwrap();
        prop_assert_eq!(back.loop_count(), spec.loop_count());
        prop_assert!((back.stem_length - spec.stem_length).abs() < 1e-15);
        for (a, b) in back.loop_half_lengths.iter().zip(&spec.loop_half_lengths) {
            prop_assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn flower_json_shorthand_uses_total_loop_lengths(spec in flower()) {
        let loops: Vec<String> = spec.loop_half_lengths.iter().map(|l| format!("{:?}", 2.0 * l)).collect();
        let text = format!(r#"{{"flower":{{"stem":{:?},"loops":[{}]}}}}"#, spec.stem_length, loops.join(","));
        let g = parse_graph_json::<f64>(&text).unwrap();
        prop_assert_eq!(g, spec.to_graph());
    }

    #[test]
    fn energy_is_constant_on_orbits(pt in closed_orbit_point()) {
        let p0 = turning_point_p0(pt).unwrap();
        prop_assert!(p0 > 0.0 && p0 <= pt.p);
        prop_assert!((energy(p0, 0.0) - pt.energy()).abs() < 1e-14);
        prop_assert!((energy(1.0, q_tilde(pt)) - pt.energy()).abs() < 1e-14);
        prop_assert!(inside_homoclinic(pt));
    }

    #[test]
    fn stem_slope_grows_with_q(p in 0.02..0.98_f64, q1 in 0.0..2.0_f64, dq in 1e-3..1.0_f64) {
        let a = q_tilde(PhasePoint::new(p, -q1).unwrap());
        let b = q_tilde(PhasePoint::new(p, -q1 - dq).unwrap());
        prop_assert!(b < a);
    }

    #[test]
    fn period_gradient_sum_rules(pt in closed_orbit_point()) {
        let (p, q) = (pt.p, pt.q);
        let g = grad_t(pt, 1e-12).unwrap();
        let g0 = grad_t0(pt, 1e-12).unwrap();
        let w = p * (1.0 - p);
        prop_assert!((q * g.dp + w * g.dq - 1.0).abs() < 1e-8);
        prop_assert!((q * g0.dp + w * g0.dq + 1.0).abs() < 1e-8);
        prop_assert!(g.dp < 0.0 && g.dq > 0.0);
        prop_assert!(g0.dq < 0.0);
    }

    #[test]
    fn eigenvalue_scales_inversely_with_length_squared(spec in flower(), c in 0.2..5.0_f64) {
        let scaled = FlowerSpec::new(c * spec.stem_length, spec.loop_half_lengths.iter().map(|l| c * l).collect()).unwrap();
        let (a, b) = (lambda(&spec), lambda(&scaled) * c * c);
        prop_assert!((a - b).abs() < 1e-10 * a, "{} vs {}", a, b);
    }

    #[test]
    fn eigenvalue_decreases_with_edge_length(spec in flower(), grow in 1e-3..0.5_f64, which in 0usize..4) {
        let mut longer = spec.clone();
        if which == 0 || spec.loop_count() == 0 {
            longer.stem_length += grow;
        } else {
            longer.loop_half_lengths[(which - 1) % spec.loop_count()] += grow;
        }
        prop_assert!(lambda(&longer) < lambda(&spec));
    }

    #[test]
    fn lower_boundary_is_the_unit_level_set(loops in prop::collection::vec(0.01..1.5_f64, 1..4)) {
        let l = lower_boundary(&loops).unwrap();
        let lam = lambda(&FlowerSpec::new(l, loops).unwrap());
        prop_assert!((lam - 1.0).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn imex_step_keeps_range_and_lowers_energy(
        spec in flower(),
        amps in prop::collection::vec(0.0..1.0_f64, 3),
        dt in 0.01..2.0_f64,
    ) {
        let mesh = Arc::new(GraphMesh::new(&spec.to_graph(), 0.01).unwrap());
        let u0 = Field::from_fn(mesh, |e, x: f64| {
            let a = amps[e % 3];
            a * (0.5 + 0.5 * (3.0 * x + e as f64).sin())
        });
        let mut u = u0.clone();
        for (i, v) in u.values_mut().iter_mut().enumerate() {
            if u0.mesh().is_fixed(i) {
                *v = 0.0;
            }
        }
        let next = step(&u, dt).unwrap();
        prop_assert!(next.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        prop_assert!(energy_trace(&next) <= energy_trace(&u) + 1e-12);
    }
}
