//! The conformal metric family `g_t = e^{tφ} g_can` on the unit sphere.
//!
//! Points are unit vectors in R³ and tangent vectors are ambient vectors
//! orthogonal to their base point, so no chart is ever needed. The conformal
//! exponent `φ` is a finite real spherical-harmonic sum, which makes its round
//! Laplacian exact through `Δ Y_l^m = -l(l+1) Y_l^m`.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics;
use crate::real::Real;

/// Unit-norm tolerance for points handed to the public evaluation routines.
pub const UNIT_TOL: f64 = 1e-12;
/// Relative tolerance for `v · p = 0`.
pub const TANGENT_TOL: f64 = 1e-10;
/// Default sphere-grid resolution for the convexity gate (64 × 128 cells).
pub const DEFAULT_GRID: usize = 64;
/// Number of intervals of the homotopy-parameter grid used by the gate.
pub const T_GRID_INTERVALS: usize = 20;

/// One term `coeff · Y_l^m` of a harmonic expansion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTerm {
    pub l: u32,
    pub m: i32,
    pub coeff: f64,
}

impl HarmonicTerm {
    pub fn new(l: u32, m: i32, coeff: f64) -> Self {
        Self { l, m, coeff }
    }
}

/// A finite real spherical-harmonic sum.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HarmonicSum {
    pub terms: Vec<HarmonicTerm>,
}

impl HarmonicSum {
    pub fn new(terms: Vec<HarmonicTerm>) -> Result<Self> {
        for t in &terms {
            if t.l > harmonics::MAX_DEGREE {
                return Err(Error::Domain(format!(
                    "harmonic degree {} exceeds the supported maximum {}",
                    t.l,
                    harmonics::MAX_DEGREE
                )));
            }
            if t.m.unsigned_abs() > t.l {
                return Err(Error::Domain(format!("harmonic order |{}| > degree {}", t.m, t.l)));
            }
            if !t.coeff.is_finite() {
                return Err(Error::Domain("non-finite harmonic coefficient".into()));
            }
        }
        Ok(Self { terms })
    }

    pub fn is_empty(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == 0.0)
    }

    pub fn value<S: Real>(&self, p: &Vector3<S>) -> S {
        let mut acc = S::zero();
        for t in &self.terms {
            acc += S::cst(t.coeff) * harmonics::eval(t.l, t.m, p);
        }
        acc
    }

    /// Value and ambient gradient of the polynomial extension.
    pub fn value_and_gradient<S: Real>(&self, p: &Vector3<S>) -> (S, Vector3<S>) {
        let mut acc = S::zero();
        let mut grad = Vector3::zeros();
        for t in &self.terms {
            let (v, g) = harmonics::eval_with_gradient(t.l, t.m, p);
            let c = S::cst(t.coeff);
            acc += c * v;
            grad += g * c;
        }
        (acc, grad)
    }

    /// Round-sphere Laplacian via the eigenvalue identity.
    pub fn laplacian(&self, p: &Vector3<f64>) -> f64 {
        self.terms.iter().map(|t| -((t.l * (t.l + 1)) as f64) * t.coeff * harmonics::eval(t.l, t.m, p)).sum()
    }
}

/// The metric `g_t = e^{tφ} g_can` for a fixed exponent `φ` and homotopy time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalMetric {
    phi: HarmonicSum,
    t: f64,
}

impl ConformalMetric {
    /// Validates the exponent and rejects families whose Gauss curvature is not
    /// positive on the default validation grid for some `t ∈ [0, 1]`.
    pub fn new(terms: Vec<HarmonicTerm>, t: f64) -> Result<Self> {
        let metric = Self::new_unchecked(terms, t)?;
        let min_k = min_curvature(&metric, DEFAULT_GRID);
        if min_k <= 0.0 {
            return Err(Error::Convexity { min_k });
        }
        Ok(metric)
    }

    /// Like [`ConformalMetric::new`] without the convexity gate.
    pub fn new_unchecked(terms: Vec<HarmonicTerm>, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("homotopy parameter t = {t} outside [0, 1]")));
        }
        Ok(Self { phi: HarmonicSum::new(terms)?, t })
    }

    /// The round metric `g_can`.
    pub fn round() -> Self {
        Self { phi: HarmonicSum::default(), t: 0.0 }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn phi(&self) -> &HarmonicSum {
        &self.phi
    }

    pub fn terms(&self) -> &[HarmonicTerm] {
        &self.phi.terms
    }

    /// Same exponent at another homotopy time.
    pub fn at(&self, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("homotopy parameter t = {t} outside [0, 1]")));
        }
        Ok(Self { phi: self.phi.clone(), t })
    }

    /// True when `g_t` is the round metric, either because `t = 0` or `φ ≡ 0`.
    pub fn is_round(&self) -> bool {
        self.t == 0.0 || self.phi.is_empty()
    }

    pub fn eval_phi(&self, p: &Vector3<f64>) -> Result<f64> {
        check_unit(p)?;
        Ok(self.phi.value(p))
    }

    pub fn laplace_phi(&self, p: &Vector3<f64>) -> Result<f64> {
        check_unit(p)?;
        Ok(self.phi.laplacian(p))
    }

    /// `K_{g_t} = e^{-tφ} (1 - (t/2) Δ_can φ)`.
    pub fn gauss_curvature(&self, p: &Vector3<f64>) -> Result<f64> {
        check_unit(p)?;
        Ok(self.gauss_curvature_raw(p))
    }

    pub(crate) fn gauss_curvature_raw(&self, p: &Vector3<f64>) -> f64 {
        if self.t == 0.0 {
            return 1.0;
        }
        let phi = self.phi.value(p);
        let lap = self.phi.laplacian(p);
        (-self.t * phi).exp() * (1.0 - 0.5 * self.t * lap)
    }

    /// `K_{g_t} e^{tφ} = 1 - (t/2) Δ_can φ`, the curvature density against round area.
    pub(crate) fn curvature_density(&self, p: &Vector3<f64>) -> f64 {
        if self.t == 0.0 {
            return 1.0;
        }
        1.0 - 0.5 * self.t * self.phi.laplacian(p)
    }

    /// Length scale factor `e^{tφ/2}`.
    pub fn scale<S: Real>(&self, p: &Vector3<S>) -> S {
        if self.t == 0.0 {
            return S::one();
        }
        (S::cst(0.5 * self.t) * self.phi.value(p)).exp()
    }

    /// `|v|_{g_t} = e^{tφ(p)/2} |v|`.
    pub fn metric_speed(&self, p: &Vector3<f64>, v: &Vector3<f64>) -> Result<f64> {
        check_unit(p)?;
        check_tangent(p, v)?;
        Ok(self.scale(p) * v.norm())
    }
}

/// Positively oriented quarter turn `J v = p × v`.
///
/// Quarter turns are conformally invariant, so the same operator serves every
/// metric of the family.
pub fn rotate90(p: &Vector3<f64>, v: &Vector3<f64>) -> Result<Vector3<f64>> {
    check_unit(p)?;
    check_tangent(p, v)?;
    Ok(p.cross(v))
}

/// Minimum of `K_{g_t}` over the equal-area sphere grid and the uniform
/// `t`-grid `{0, 1/20, …, 1}`. The metric's own `t` is ignored.
pub fn min_curvature(metric: &ConformalMetric, grid_resolution: usize) -> f64 {
    let samples = phi_samples(metric, grid_resolution);
    let mut min_k = f64::INFINITY;
    for i in 0..=T_GRID_INTERVALS {
        let t = i as f64 / T_GRID_INTERVALS as f64;
        for &(phi, lap) in &samples {
            min_k = min_k.min((-t * phi).exp() * (1.0 - 0.5 * t * lap));
        }
    }
    min_k
}

/// Minimum of `K_{g_t}` over the equal-area sphere grid at the metric's own `t`.
pub fn min_curvature_at(metric: &ConformalMetric, grid_resolution: usize) -> f64 {
    let t = metric.t();
    phi_samples(metric, grid_resolution)
        .into_iter()
        .map(|(phi, lap)| (-t * phi).exp() * (1.0 - 0.5 * t * lap))
        .fold(f64::INFINITY, f64::min)
}

/// Maximum of `K_{g_t}` over the equal-area grid at the metric's own `t`.
pub fn max_curvature_at(metric: &ConformalMetric, grid_resolution: usize) -> f64 {
    let t = metric.t();
    phi_samples(metric, grid_resolution)
        .into_iter()
        .map(|(phi, lap)| (-t * phi).exp() * (1.0 - 0.5 * t * lap))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn phi_samples(metric: &ConformalMetric, grid_resolution: usize) -> Vec<(f64, f64)> {
    equal_area_grid(grid_resolution).map(|p| (metric.phi.value(&p), metric.phi.laplacian(&p))).collect()
}

/// Cell centres of the equal-area grid with `rows` bands uniform in `z` and
/// `2·rows` uniform longitude sectors.
pub fn equal_area_grid(rows: usize) -> impl Iterator<Item = Vector3<f64>> {
    let rows = rows.max(1);
    let cols = 2 * rows;
    (0..rows).flat_map(move |i| {
        let z = 1.0 - (2 * i + 1) as f64 / rows as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        (0..cols).map(move |j| {
            let psi = std::f64::consts::TAU * (j as f64 + 0.5) / cols as f64;
            Vector3::new(r * psi.cos(), r * psi.sin(), z)
        })
    })
}

pub(crate) fn check_unit(p: &Vector3<f64>) -> Result<()> {
    let n = p.norm();
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::Domain(format!("point is not on the unit sphere (|p| = {n})")));
    }
    Ok(())
}

pub(crate) fn check_tangent(p: &Vector3<f64>, v: &Vector3<f64>) -> Result<()> {
    let d = v.dot(p);
    if !d.is_finite() || d.abs() > TANGENT_TOL * v.norm().max(1.0) {
        return Err(Error::Domain(format!("vector is not tangent at the base point (v·p = {d:e})")));
    }
    Ok(())
}
