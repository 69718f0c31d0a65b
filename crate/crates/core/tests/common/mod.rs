#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use geocurve::curve::orthonormal_basis;
use geocurve::DiscreteCurve;
use nalgebra::{Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn latitude(r: f64, n: usize) -> DiscreteCurve {
    DiscreteCurve::circle(&Vector3::z(), r, n, 0.0).unwrap()
}

pub fn equator(n: usize) -> DiscreteCurve {
    latitude(FRAC_PI_2, n)
}

/// Smooth normal displacement of peak size about `amp`, built from Fourier
/// modes 2..=5 with seeded random coefficients.
pub fn perturbed(c: &DiscreteCurve, amp: f64, seed: u64) -> DiscreteCurve {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = c.len();
    let modes: Vec<(f64, f64, f64)> =
        (2..=5).map(|k| (k as f64, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm: f64 = modes.iter().map(|(_, a, b)| (a * a + b * b).sqrt()).sum();
    let pts = (0..n)
        .map(|j| {
            let p = c.node(j as isize);
            let (prev, next) = (c.node(j as isize - 1), c.node(j as isize + 1));
            let tangent = (next - prev).normalize();
            let normal = p.cross(&tangent).normalize();
            let th = TAU * j as f64 / n as f64;
            let d: f64 = modes.iter().map(|(k, a, b)| a * (k * th).cos() + b * (k * th).sin()).sum();
            p + normal * (amp * d / norm)
        })
        .collect();
    DiscreteCurve::from_points(pts).unwrap()
}

/// Exact circle of radius `r` about the normal of the plane through nodes
/// 0, N/3 and 2N/3 of `c` (turned towards the centroid), with node 0 at the
/// azimuth of `c`'s node 0.
pub fn fitted_circle(c: &DiscreteCurve, r: f64) -> DiscreteCurve {
    let n = c.len();
    let (a, b, d) = (c.nodes()[0], c.nodes()[n / 3], c.nodes()[2 * n / 3]);
    let mut axis = (b - a).cross(&(d - a)).normalize();
    let centroid: Vector3<f64> = c.nodes().iter().sum();
    if axis.dot(&centroid) < 0.0 {
        axis = -axis;
    }
    let (e1, e2) = orthonormal_basis(&axis);
    let p0 = c.nodes()[0];
    DiscreteCurve::circle(&axis, r, c.len(), p0.dot(&e2).atan2(p0.dot(&e1))).unwrap()
}

/// Two circles of geodesic radius `rho` tangent at `e_x`, the first traversed
/// counter-clockwise and the second clockwise, joined into one closed curve
/// whose nodes 0 and n/2 coincide.
pub fn figure_eight(n: usize, rho: f64) -> DiscreteCurve {
    let half = n / 2;
    let p = Vector3::x();
    let a1 = Unit::new_normalize(Vector3::new(rho.cos(), 0.0, rho.sin()));
    let a2 = Unit::new_normalize(Vector3::new(rho.cos(), 0.0, -rho.sin()));
    let mut pts = Vec::with_capacity(2 * half);
    for k in 0..half {
        pts.push(Rotation3::from_axis_angle(&a1, TAU * k as f64 / half as f64) * p);
    }
    for k in 0..half {
        pts.push(Rotation3::from_axis_angle(&a2, -TAU * k as f64 / half as f64) * p);
    }
    DiscreteCurve::from_points(pts).unwrap()
}

/// A thin closed band: two latitude arcs at colatitudes `π/2 ∓ gap/2`
/// running over half the sphere, joined by two short meridian steps.
pub fn stadium(m: usize, gap: f64) -> DiscreteCurve {
    let point = |theta: f64, psi: f64| Vector3::new(theta.sin() * psi.cos(), theta.sin() * psi.sin(), theta.cos());
    let mut pts = Vec::with_capacity(2 * m);
    for k in 0..m {
        pts.push(point(FRAC_PI_2 - gap / 2.0, PI * k as f64 / (m - 1) as f64));
    }
    for k in 0..m {
        pts.push(point(FRAC_PI_2 + gap / 2.0, PI * (m - 1 - k) as f64 / (m - 1) as f64));
    }
    DiscreteCurve::from_points(pts).unwrap()
}

pub fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n < 1.0 {
            return v / n;
        }
    }
}
