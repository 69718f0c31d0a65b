mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use common::*;
use geocurve::curve::*;
use geocurve::geometry::{ConformalMetric, HarmonicTerm};
use geocurve::DiscreteCurve;
use nalgebra::Vector3;
use proptest::prelude::*;

fn y20(coeff: f64, t: f64) -> ConformalMetric {
    ConformalMetric::new(vec![HarmonicTerm::new(2, 0, coeff)], t).unwrap()
}

fn max_curvature_error(r: f64, n: usize) -> f64 {
    let k = geodesic_curvature(&latitude(r, n), &ConformalMetric::round()).unwrap();
    k.iter().map(|v| (v - 1.0 / r.tan()).abs()).fold(0.0, f64::max)
}

#[test]
fn clustered_great_circle_is_spread_uniformly() {
    let n = 256;
    // Nodes crowd into the half with 0 < ψ < π.
    let pts = (0..n)
        .map(|k| {
            let u = k as f64 / n as f64;
            let psi = TAU * u - 0.6 * (TAU * u).sin();
            Vector3::new(psi.cos(), psi.sin(), 0.0)
        })
        .collect();
    let c = DiscreteCurve::new(pts).unwrap();
    let r = resample_constant_speed(&c, &ConformalMetric::round()).unwrap();
    for k in 0..n {
        let a = r.nodes()[k];
        let b = r.nodes()[(k + 1) % n];
        let ang = a.cross(&b).norm().atan2(a.dot(&b));
        assert!((ang - TAU / n as f64).abs() < 1e-10);
    }
    assert_eq!(r.nodes()[0], c.nodes()[0]);
}

#[test]
fn resampling_reaches_the_speed_invariant_on_a_deformed_metric() {
    let metric = y20(0.1, 1.0);
    let c = perturbed(&DiscreteCurve::circle(&Vector3::new(1.0, 0.2, 0.4), 1.0, 200, 0.0).unwrap(), 0.05, 3);
    let r = resample_constant_speed(&c, &metric).unwrap();
    assert!(speed_variation(&r, &metric) < 1e-8);
    let (l0, l1) = (length(&c, &metric), length(&r, &metric));
    assert!(((l1 - l0) / l0).abs() < 1e-6);
}

#[test]
fn curvature_converges_at_fourth_order() {
    for r in [PI / 4.0, PI / 3.0, 1.2] {
        let ratio = max_curvature_error(r, 32) / max_curvature_error(r, 64);
        assert!((14.0..=18.0).contains(&ratio), "r = {r}: ratio {ratio}");
    }
}

#[test]
fn curvature_on_a_deformed_metric_matches_the_axisymmetric_closed_form() {
    // Latitude circles of an axisymmetric metric: κ_g = e^{-tφ/2}(cot r − (t/2) ∂_n φ),
    // where the left normal of a counter-clockwise circle about e_z points to
    // the pole, so ∂_n φ = −∂_r φ with ∂_r along increasing colatitude.
    let metric = y20(0.1, 1.0);
    let c = (5.0 / (4.0 * PI)).sqrt() * 0.1;
    for r in [0.6, 1.1f64] {
        let phi = c * 0.5 * (3.0 * r.cos().powi(2) - 1.0);
        let dphi_dr = c * 0.5 * (-6.0 * r.cos() * r.sin());
        let expect = (-phi / 2.0).exp() * (1.0 / r.tan() + 0.5 * dphi_dr);
        for k in geodesic_curvature(&latitude(r, 256), &metric).unwrap() {
            assert!((k - expect).abs() < 1e-7, "{k} vs {expect}");
        }
    }
}

#[test]
fn zero_velocity_is_degenerate() {
    // Fold the curve back on itself around node 1 so its central difference vanishes.
    let mut pts = latitude(1.0, 32).into_nodes();
    pts[2] = pts[0];
    pts[3] = pts[31];
    let c = DiscreteCurve::new(pts).unwrap();
    assert!(matches!(geodesic_curvature(&c, &ConformalMetric::round()), Err(geocurve::Error::Degenerate(_))));
}

#[test]
fn figure_eight_is_not_embedded() {
    let c = figure_eight(128, 0.5);
    let rep = self_intersects(&c, DEFAULT_CLEARANCE);
    assert!(!rep.embedded);
    // The contact is at the shared point: segments next to node 0 and node 64.
    let near = |i: usize| [127, 0, 63, 64].contains(&i);
    assert!(rep.pairs.iter().any(|&(i, j, d)| near(i) && near(j) && d < 1e-12));
    assert!(matches!(enclosed_gauss_integral(&c, &ConformalMetric::round(), 64), Err(geocurve::Error::NotEmbedded)));
}

#[test]
fn near_touching_band_is_caught_by_clearance() {
    let c = stadium(64, 5e-5);
    let rep = self_intersects(&c, 1e-4);
    assert!(!rep.embedded);
    assert!(rep.pairs.iter().all(|&(_, _, d)| d > 0.0));
    assert!((rep.min_distance - 5e-5).abs() < 1e-9);
    assert!(self_intersects(&c, 4e-5).embedded);
}

#[test]
fn gauss_bonnet_identity_for_a_cap() {
    let round = ConformalMetric::round();
    let c = latitude(PI / 4.0, 256);
    let area = enclosed_gauss_integral(&c, &round, 128).unwrap();
    let kl = 1.0 * length(&c, &round);
    assert!((area + kl - TAU).abs() < 2e-4);
    // Enclosed integral of the equator is a hemisphere.
    assert!((enclosed_gauss_integral(&equator(256), &round, 128).unwrap() - TAU).abs() < 1e-12);
}

#[test]
fn enclosed_integral_on_a_deformed_metric_matches_axisymmetric_quadrature() {
    // ∫∫_{cap} (1 − (t/2)Δφ) dA for an axisymmetric φ reduces to a 1-D integral.
    let metric = y20(0.1, 1.0);
    let r: f64 = 1.0;
    let c = (5.0 / (4.0 * PI)).sqrt() * 0.1;
    let m = 20_000;
    let mut oracle = 0.0;
    for i in 0..m {
        let th = r * (i as f64 + 0.5) / m as f64;
        let lap = -6.0 * c * 0.5 * (3.0 * th.cos().powi(2) - 1.0);
        oracle += (1.0 - 0.5 * lap) * th.sin();
    }
    oracle *= TAU * r / m as f64;
    // Replace the polygon area error by the exact-circle value for comparison.
    let n = 512;
    let curve = latitude(r, n);
    let got = enclosed_gauss_integral(&curve, &metric, 128).unwrap();
    let poly_area = enclosed_gauss_integral(&curve, &ConformalMetric::round(), 128).unwrap();
    let cap_area = TAU * (1.0 - r.cos());
    assert!((got - poly_area - (oracle - cap_area)).abs() < 1e-5, "{got} vs {oracle}");
}

#[test]
fn aligned_distance_between_equator_and_cap_circle() {
    let d = aligned_distance(&equator(64), &latitude(PI / 4.0, 64)).unwrap();
    assert!((d - 2.0 * (PI / 8.0).sin()).abs() < 1e-12);
    assert!((d - 0.7654).abs() < 1e-4);
}

fn smooth_curve() -> impl Strategy<Value = DiscreteCurve> {
    curve_with_nodes(vec![32, 48, 64])
}

fn curve_with_nodes(sizes: Vec<usize>) -> impl Strategy<Value = DiscreteCurve> {
    (-1.0f64..1.0, -1.0f64..1.0, 0.5f64..1.0, 0.4f64..1.4, 0u64..1000, prop::sample::select(sizes)).prop_map(
        |(x, y, z, r, seed, n)| {
            // Displacement scales with the radius so small circles stay resolved.
            let c = DiscreteCurve::circle(&Vector3::new(x, y, z), r, n, 0.3).unwrap();
            perturbed(&c, 0.05 * r, seed)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn resampling_is_idempotent(c in smooth_curve(), coeff in -0.1f64..0.1) {
        let metric = y20(coeff, 1.0);
        let once = resample_constant_speed(&c, &metric).unwrap();
        let twice = resample_constant_speed(&once, &metric).unwrap();
        for (a, b) in once.nodes().iter().zip(twice.nodes()) {
            prop_assert!((a - b).norm() < 1e-10);
        }
        prop_assert!(speed_variation(&once, &metric) < 1e-8);
    }

    #[test]
    fn length_is_invariant(c in curve_with_nodes(vec![128, 256]), m in 0isize..256, coeff in -0.1f64..0.1) {
        let metric = y20(coeff, 0.7);
        let l = length(&c, &metric);
        prop_assert!((length(&c.shifted(m), &metric) - l).abs() < 1e-12 * l);
        let lp = polygon_length(&c, &metric);
        prop_assert!((polygon_length(&c.shifted(m), &metric) - lp).abs() < 1e-12 * lp);
        let r = resample_constant_speed(&c, &metric).unwrap();
        prop_assert!(((length(&r, &metric) - l) / l).abs() < 1e-6);
    }

    #[test]
    fn curvature_error_ratio_is_fourth_order(r in 0.3f64..1.3) {
        let ratio = max_curvature_error(r, 32) / max_curvature_error(r, 64);
        prop_assert!((14.0..=18.0).contains(&ratio), "ratio {}", ratio);
    }

    #[test]
    fn self_intersection_verdict_ignores_labels(
        c in smooth_curve(),
        m in 0isize..64,
        rho in 0.2f64..0.9,
        use_eight in any::<bool>(),
    ) {
        let c = if use_eight { figure_eight(c.len() - c.len() % 2, rho) } else { c };
        let base = self_intersects(&c, DEFAULT_CLEARANCE);
        prop_assert_eq!(self_intersects(&c.reversed(), DEFAULT_CLEARANCE).embedded, base.embedded);
        prop_assert_eq!(self_intersects(&c.shifted(m), DEFAULT_CLEARANCE).embedded, base.embedded);
        prop_assert_eq!(base.embedded, !use_eight);
    }

    #[test]
    fn aligned_distance_is_a_pseudometric(
        a in smooth_curve(), seed_b in 0u64..1000, seed_c in 0u64..1000, m in 0isize..64,
    ) {
        let b = perturbed(&a, 0.1, seed_b);
        let c = perturbed(&a, 0.1, seed_c);
        let ab = aligned_distance(&a, &b).unwrap();
        let ba = aligned_distance(&b, &a).unwrap();
        let bc = aligned_distance(&b, &c).unwrap();
        let ac = aligned_distance(&a, &c).unwrap();
        prop_assert!((ab - ba).abs() < 1e-15);
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert_eq!(aligned_distance(&a, &a.shifted(m).reversed()).unwrap(), 0.0);
    }
}

#[test]
fn great_circle_length_and_curvature() {
    let round = ConformalMetric::round();
    let c = equator(256);
    assert!((length(&c, &round) - TAU).abs() < 1e-6);
    let k = geodesic_curvature(&c, &round).unwrap();
    assert!(k.iter().all(|v| v.abs() < 1e-12));
    let tilted = DiscreteCurve::circle(&Vector3::new(0.3, -0.2, 0.9), FRAC_PI_2, 256, 1.0).unwrap();
    assert!((length(&tilted, &round) - TAU).abs() < 1e-6);
}
