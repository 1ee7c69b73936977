use std::f64::consts::FRAC_PI_2;

use fkpp_core::spectral::{
    eigenvalue_length_slope, flower_root, lambda0_discretized, lambda0_flower, lower_boundary_symmetric,
    region_membership,
};
use fkpp_core::{FlowerSpec, MetricGraph, Region, VertexCondition};
use std::collections::BTreeMap;

fn tadpole() -> FlowerSpec<f64> {
    FlowerSpec::new(0.8, vec![0.75]).unwrap()
}

fn exact(spec: &FlowerSpec<f64>) -> f64 {
    lambda0_flower(spec, 1e-14).unwrap().lambda0
}

#[test]
fn interval_eigenvalue_is_closed_form() {
    for l in [0.3, 1.0, 2.5] {
        let lam = exact(&FlowerSpec::interval(l).unwrap());
        assert!((lam - (FRAC_PI_2 / l).powi(2)).abs() < 1e-13 * lam);
    }
}

#[test]
fn discretised_tadpole_extrapolates_to_secular_root() {
    let g = tadpole().to_graph();
    let hs = [4e-3, 2e-3, 1e-3];
    let lam: Vec<f64> = hs.iter().map(|&h| lambda0_discretized(&g, h).unwrap().lambda0).collect();
    let order = ((lam[0] - lam[1]) / (lam[1] - lam[2])).log2();
    assert!((order - 2.0).abs() < 0.1, "observed order {order}");
    let richardson = (4.0 * lam[2] - lam[1]) / 3.0;
    assert!((richardson - exact(&tadpole())).abs() < 1e-8, "extrapolated {richardson}");
}

#[test]
fn explicit_graph_matches_flower_shorthand() {
    // Same tadpole with the loop split by a degree-two vertex.
    let conditions = BTreeMap::from([("a".to_string(), VertexCondition::Dirichlet)]);
    let g = MetricGraph::from_parts(
        vec!["a", "b", "c"],
        vec![("s", "a", "b", 0.8), ("l1", "b", "c", 0.6), ("l2", "c", "b", 0.9)],
        &conditions,
    )
    .unwrap();
    let split = lambda0_discretized(&g, 1e-3).unwrap().lambda0;
    let whole = lambda0_discretized(&tadpole().to_graph(), 1e-3).unwrap().lambda0;
    assert!((split - whole).abs() < 1e-5, "{split} vs {whole}");
}

/// `dλ/dL` along the stem is `-ψ'(0)^2 / ‖ψ‖^2` at the Dirichlet end.
#[test]
fn stem_slope_matches_dirichlet_flux() {
    let spec = tadpole();
    let s = flower_root(&spec);
    let (l, lj) = (spec.stem_length, spec.loop_half_lengths[0]);
    // ψ = sin(sx) on the stem, sin(sL) cos(s(x - L_j)) / cos(sL_j) on the loop.
    let amp = (s * l).sin() / (s * lj).cos();
    let stem_sq = l / 2.0 - (2.0 * s * l).sin() / (4.0 * s);
    let loop_sq = amp * amp * (lj + (2.0 * s * lj).sin() / (2.0 * s));
    let flux = -s * s / (stem_sq + loop_sq);

    let d = 1e-5;
    let up = exact(&FlowerSpec::new(l + d, vec![lj]).unwrap());
    let down = exact(&FlowerSpec::new(l - d, vec![lj]).unwrap());
    let fd = (up - down) / (2.0 * d);
    assert!((fd / flux - 1.0).abs() < 1e-7, "fd {fd}, flux {flux}");

    let (lhs, rhs) = eigenvalue_length_slope(&spec.to_graph(), "stem", 1e-3).unwrap();
    assert!((lhs / flux - 1.0).abs() < 1e-3);
    assert!((rhs / flux - 1.0).abs() < 1e-3);
}

#[test]
fn loop_slope_identity() {
    let (lhs, rhs) = eigenvalue_length_slope(&tadpole().to_graph(), "loop1", 1e-3).unwrap();
    assert!(lhs < 0.0);
    assert!((lhs / rhs - 1.0).abs() < 1e-3, "{lhs} vs {rhs}");
}

#[test]
fn region_membership_respects_lower_boundary() {
    let l_star = lower_boundary_symmetric(0.5, 2).unwrap();
    let above = region_membership(&FlowerSpec::symmetric(l_star * 1.01, 0.5, 2).unwrap());
    let below = region_membership(&FlowerSpec::symmetric(l_star * 0.99, 0.5, 2).unwrap());
    assert_eq!(above.region, Region::Nontrivial);
    assert_eq!(below.region, Region::Trivial);
    assert!(lower_boundary_symmetric(0.5, 0).is_err());
}

#[test]
fn single_precision_tracks_double() {
    let lam32 = lambda0_flower(&tadpole().cast::<f32>(), 1e-6).unwrap().lambda0;
    assert!((lam32 as f64 - exact(&tadpole())).abs() < 1e-5);
}
