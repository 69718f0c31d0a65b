//! Real orthonormal spherical harmonics evaluated through their polynomial
//! extension to R³.
//!
//! With `Q_l^m(z) = d^m P_l / dz^m` and `w = x + iy`, the harmonic of degree
//! `l` and order `m` is `N_lm · Q_l^|m|(z) · Re(w^m)` for `m ≥ 0` and
//! `N_lm · Q_l^|m|(z) · Im(w^|m|)` for `m < 0`. On the unit sphere this agrees
//! with the usual `P_l^m(cos θ)·cos(mψ)` form because
//! `(1 - z²)^{m/2} cos(mψ) = Re(w^m)` there. The polynomial form gives the
//! ambient gradient in closed form and stays regular at the poles. No
//! Condon–Shortley phase is applied.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::real::Real;

/// Largest supported degree; keeps the factorial ratios well inside f64 range.
pub const MAX_DEGREE: u32 = 40;

/// `d^m P_l / dz^m` by the three-term recurrence in `l`.
pub fn legendre_derivative<S: Real>(l: u32, m: u32, z: S) -> S {
    if m > l {
        return S::zero();
    }
    // d^m P_m / dz^m = (2m - 1)!!
    let mut qmm = 1.0;
    for k in 1..=m {
        qmm *= (2 * k - 1) as f64;
    }
    let qmm = S::cst(qmm);
    if l == m {
        return qmm;
    }
    let mut q_prev = qmm;
    let mut q = z * S::cst((2 * m + 1) as f64) * qmm;
    for ll in (m + 2)..=l {
        let next =
            (S::cst((2 * ll - 1) as f64) * z * q - S::cst((ll + m - 1) as f64) * q_prev) / S::cst((ll - m) as f64);
        q_prev = q;
        q = next;
    }
    q
}

/// Orthonormalisation constant `N_lm` (`∫ Y² dA = 1` on the unit sphere).
pub fn normalization(l: u32, m: i32) -> f64 {
    let am = m.unsigned_abs();
    let base = (2 * l + 1) as f64 / (4.0 * PI);
    if am == 0 {
        return base.sqrt();
    }
    // (l - m)! / (l + m)!
    let mut ratio = 1.0;
    for k in (l - am + 1)..=(l + am) {
        ratio /= k as f64;
    }
    (2.0 * base * ratio).sqrt()
}

/// `(Re, Im)` of `(x + iy)^m`.
fn complex_power<S: Real>(m: u32, x: S, y: S) -> (S, S) {
    let (mut re, mut im) = (S::one(), S::zero());
    for _ in 0..m {
        let r = re * x - im * y;
        im = re * y + im * x;
        re = r;
    }
    (re, im)
}

/// Value of the polynomial extension at `p`.
pub fn eval<S: Real>(l: u32, m: i32, p: &Vector3<S>) -> S {
    let am = m.unsigned_abs();
    let q = legendre_derivative(l, am, p.z);
    let (re, im) = complex_power(am, p.x, p.y);
    let c = if m >= 0 { re } else { im };
    S::cst(normalization(l, m)) * q * c
}

/// Value and ambient gradient of the polynomial extension at `p`.
///
/// The surface gradient is the tangential projection of the returned vector.
pub fn eval_with_gradient<S: Real>(l: u32, m: i32, p: &Vector3<S>) -> (S, Vector3<S>) {
    let am = m.unsigned_abs();
    let nrm = S::cst(normalization(l, m));
    let q = legendre_derivative(l, am, p.z);
    let dq = legendre_derivative(l, am + 1, p.z);
    let (re, im) = complex_power(am, p.x, p.y);
    let c = if m >= 0 { re } else { im };
    let (dcx, dcy) = if am == 0 {
        (S::zero(), S::zero())
    } else {
        let (a, b) = complex_power(am - 1, p.x, p.y);
        let k = S::cst(am as f64);
        if m >= 0 {
            (k * a, -(k * b))
        } else {
            (k * b, k * a)
        }
    };
    let value = nrm * q * c;
    let grad = Vector3::new(nrm * q * dcx, nrm * q * dcy, nrm * dq * c);
    (value, grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sph(theta: f64, psi: f64) -> Vector3<f64> {
        Vector3::new(theta.sin() * psi.cos(), theta.sin() * psi.sin(), theta.cos())
    }

    // Closed forms for low degrees, written out independently of the recurrence.
    fn y_closed(l: u32, m: i32, p: &Vector3<f64>) -> f64 {
        let (x, y, z) = (p.x, p.y, p.z);
        match (l, m) {
            (0, 0) => 0.5 * (1.0 / PI).sqrt(),
            (1, 0) => (3.0 / (4.0 * PI)).sqrt() * z,
            (1, 1) => (3.0 / (4.0 * PI)).sqrt() * x,
            (1, -1) => (3.0 / (4.0 * PI)).sqrt() * y,
            (2, 0) => 0.25 * (5.0 / PI).sqrt() * (3.0 * z * z - 1.0),
            (2, 1) => 0.5 * (15.0 / PI).sqrt() * x * z,
            (2, -1) => 0.5 * (15.0 / PI).sqrt() * y * z,
            (2, 2) => 0.25 * (15.0 / PI).sqrt() * (x * x - y * y),
            (2, -2) => 0.5 * (15.0 / PI).sqrt() * x * y,
            (3, 0) => 0.25 * (7.0 / PI).sqrt() * z * (5.0 * z * z - 3.0),
            (3, 3) => 0.25 * (35.0 / (2.0 * PI)).sqrt() * x * (x * x - 3.0 * y * y),
            _ => unreachable!(),
        }
    }

    #[test]
    fn matches_closed_forms() {
        let cases = [(0, 0), (1, 0), (1, 1), (1, -1), (2, 0), (2, 1), (2, -1), (2, 2), (2, -2), (3, 0), (3, 3)];
        for &(l, m) in &cases {
            for &(th, ps) in &[(0.3, 1.1), (1.2, -2.0), (2.9, 0.4), (0.0, 0.0)] {
                let p = sph(th, ps);
                let got = eval(l, m, &p);
                assert!((got - y_closed(l, m, &p)).abs() < 1e-14, "l={l} m={m}");
            }
        }
    }

    #[test]
    fn orthonormal_under_quadrature() {
        // Gauss-free check: midpoint rule in (z, psi) is accurate enough for low degree.
        let nz = 400;
        let np = 64;
        let terms = [(1, 0), (2, 1), (2, -2), (3, 0), (4, 3)];
        for (a, &(la, ma)) in terms.iter().enumerate() {
            for &(lb, mb) in &terms[a..] {
                let mut acc = 0.0;
                for i in 0..nz {
                    let z = -1.0 + (2.0 * i as f64 + 1.0) / nz as f64;
                    let r = (1.0 - z * z).sqrt();
                    for j in 0..np {
                        let ps = 2.0 * PI * (j as f64 + 0.5) / np as f64;
                        let p = Vector3::new(r * ps.cos(), r * ps.sin(), z);
                        acc += eval(la, ma, &p) * eval(lb, mb, &p);
                    }
                }
                acc *= (2.0 / nz as f64) * (2.0 * PI / np as f64);
                let expect = if (la, ma) == (lb, mb) { 1.0 } else { 0.0 };
                assert!((acc - expect).abs() < 1e-4, "({la},{ma})x({lb},{mb}) = {acc}");
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = Vector3::new(0.3, -0.5, 0.7).normalize();
        for &(l, m) in &[(3, -2), (4, 1), (5, 5), (2, 0)] {
            let (_, g) = eval_with_gradient(l, m, &p);
            for axis in 0..3 {
                let mut e = Vector3::zeros();
                e[axis] = 1e-6;
                let fd = (eval(l, m, &(p + e)) - eval(l, m, &(p - e))) / 2e-6;
                assert!((fd - g[axis]).abs() < 1e-7, "l={l} m={m} axis={axis}");
            }
        }
    }
}
