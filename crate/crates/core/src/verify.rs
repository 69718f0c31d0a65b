//! Certification of solution curves: the isoperimetric-type length bound and
//! its eigenvalue restatement `inf K ≤ 2λ₁`, Gauss–Bonnet closure, curvature
//! matching, embeddedness and constant speed.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::curve::{self, DiscreteCurve};
use crate::error::{Error, Result};
use crate::geometry::{min_curvature_at, ConformalMetric, DEFAULT_GRID};
use crate::solver::{self, CurvatureSpec};

/// Additive slack on the length bound and on the eigenvalue inequality.
pub const BOUND_SLACK: f64 = 1e-8;
/// Geodesic curvature below `-NEGATIVE_CURVATURE_TOL` voids the bound's hypothesis.
pub const NEGATIVE_CURVATURE_TOL: f64 = 1e-6;
pub const DEFAULT_GB_GRID: usize = 128;
pub const GAUSS_BONNET_TOL: f64 = 5e-3;
pub const CURVATURE_TOL: f64 = 1e-6;
pub const SPEED_TOL: f64 = 1e-8;

/// `L ≤ 2π√2 (inf K)^{-1/2}`.
pub fn length_bound(min_k: f64) -> f64 {
    TAU * 2f64.sqrt() / min_k.sqrt()
}

/// `λ₁ = 4π²/L²`, the first eigenvalue of the round circle of length `L`.
pub fn first_eigenvalue(length: f64) -> Result<f64> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::Domain(format!("length {length} must be positive")));
    }
    Ok(4.0 * PI * PI / (length * length))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthBoundCheck {
    pub length: f64,
    pub bound: f64,
    pub ok: bool,
    /// Set when the curve does not meet the hypotheses of the bound.
    pub precondition: Option<String>,
}

impl LengthBoundCheck {
    pub fn from_parts(length: f64, min_k: f64) -> Self {
        let bound = length_bound(min_k);
        Self { length, bound, ok: min_k > 0.0 && length <= bound + BOUND_SLACK, precondition: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReillyCheck {
    pub two_lambda1: f64,
    pub min_k: f64,
    pub ok: bool,
    pub precondition: Option<String>,
}

impl ReillyCheck {
    pub fn from_parts(length: f64, min_k: f64) -> Result<Self> {
        let two_lambda1 = 2.0 * first_eigenvalue(length)?;
        Ok(Self { two_lambda1, min_k, ok: min_k <= two_lambda1 + BOUND_SLACK, precondition: None })
    }
}

fn hypotheses(curve: &DiscreteCurve, metric: &ConformalMetric) -> Option<String> {
    if !curve::self_intersects(curve, curve::DEFAULT_CLEARANCE).embedded {
        return Some("curve is not embedded".into());
    }
    match curve::geodesic_curvature(curve, metric) {
        Ok(k) => {
            let min = k.iter().copied().fold(f64::INFINITY, f64::min);
            (min < -NEGATIVE_CURVATURE_TOL).then(|| format!("geodesic curvature reaches {min:e} < 0"))
        }
        Err(e) => Some(e.to_string()),
    }
}

pub fn check_length_bound(curve: &DiscreteCurve, metric: &ConformalMetric) -> LengthBoundCheck {
    let min_k = min_curvature_at(metric, DEFAULT_GRID);
    let mut check = LengthBoundCheck::from_parts(curve::length(curve, metric), min_k);
    check.precondition = hypotheses(curve, metric);
    check
}

pub fn check_reilly_corollary(curve: &DiscreteCurve, metric: &ConformalMetric) -> Result<ReillyCheck> {
    let min_k = min_curvature_at(metric, DEFAULT_GRID);
    let mut check = ReillyCheck::from_parts(curve::length(curve, metric), min_k)?;
    check.precondition = hypotheses(curve, metric);
    Ok(check)
}

/// `|∫ κ_g ds + ∫∫_Ω K dA − 2π|` with the region `Ω` to the left of the curve.
/// The boundary term uses trapezoid weights `(ℓ_{k-1} + ℓ_k)/2`.
pub fn check_gauss_bonnet(curve: &DiscreteCurve, metric: &ConformalMetric, grid_resolution: usize) -> Result<f64> {
    let interior = curve::enclosed_gauss_integral(curve, metric, grid_resolution)?;
    let kappa = curve::geodesic_curvature(curve, metric)?;
    let seg = curve::segment_lengths(curve, metric);
    let n = curve.len();
    let boundary: f64 = (0..n).map(|k| kappa[k] * 0.5 * (seg[(k + n - 1) % n] + seg[k])).sum();
    Ok((boundary + interior - TAU).abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub gauss_bonnet_grid: usize,
    pub curvature_grid: usize,
    pub clearance: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { gauss_bonnet_grid: DEFAULT_GB_GRID, curvature_grid: DEFAULT_GRID, clearance: curve::DEFAULT_CLEARANCE }
    }
}

/// Everything [`certify`] measures. Region-dependent entries are `None` when
/// the curve is not embedded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub length: f64,
    pub lambda1: f64,
    pub min_gauss_curvature: f64,
    pub length_bound: f64,
    pub gauss_bonnet_residual: Option<f64>,
    pub max_curvature_error: Option<f64>,
    pub embedded: bool,
    pub speed_variation: f64,
    pub length_bound_ok: Option<bool>,
    pub reilly_ok: Option<bool>,
    /// Messages from checks that could not run.
    pub notes: Vec<String>,
}

impl Diagnostics {
    pub fn gauss_bonnet_ok(&self) -> Option<bool> {
        self.gauss_bonnet_residual.map(|r| r < GAUSS_BONNET_TOL)
    }

    pub fn curvature_ok(&self) -> bool {
        self.max_curvature_error.is_some_and(|e| e < CURVATURE_TOL)
    }

    pub fn speed_ok(&self) -> bool {
        self.speed_variation < SPEED_TOL
    }

    pub fn all_ok(&self) -> bool {
        self.embedded
            && self.speed_ok()
            && self.curvature_ok()
            && self.length_bound_ok == Some(true)
            && self.reilly_ok == Some(true)
            && self.gauss_bonnet_ok() == Some(true)
    }
}

pub fn certify(curve: &DiscreteCurve, metric: &ConformalMetric, spec: &CurvatureSpec) -> Diagnostics {
    certify_with(curve, metric, spec, &CertifyOptions::default())
}

/// Runs every check; failures are recorded in the result, never propagated.
pub fn certify_with(
    curve: &DiscreteCurve,
    metric: &ConformalMetric,
    spec: &CurvatureSpec,
    opts: &CertifyOptions,
) -> Diagnostics {
    let mut notes = Vec::new();
    let length = curve::length(curve, metric);
    let lambda1 = first_eigenvalue(length).unwrap_or(f64::NAN);
    let min_k = min_curvature_at(metric, opts.curvature_grid);
    let embedded = curve::self_intersects(curve, opts.clearance).embedded;
    let speed_variation = curve::speed_variation(curve, metric);
    let max_curvature_error = match solver::curvature_error(curve, metric, spec) {
        Ok(e) => Some(e),
        Err(e) => {
            notes.push(format!("curvature error: {e}"));
            None
        }
    };
    let (gauss_bonnet_residual, length_bound_ok, reilly_ok) = if embedded {
        let gb = match check_gauss_bonnet(curve, metric, opts.gauss_bonnet_grid) {
            Ok(r) => Some(r),
            Err(e) => {
                notes.push(format!("gauss-bonnet: {e}"));
                None
            }
        };
        let lb = LengthBoundCheck::from_parts(length, min_k);
        let reilly = ReillyCheck::from_parts(length, min_k).map(|r| r.ok).ok();
        if let Some(p) = hypotheses(curve, metric) {
            notes.push(format!("length bound hypotheses: {p}"));
        }
        (gb, Some(lb.ok), reilly)
    } else {
        notes.push("not embedded: region-dependent checks not applicable".into());
        (None, None, None)
    };
    Diagnostics {
        length,
        lambda1,
        min_gauss_curvature: min_k,
        length_bound: length_bound(min_k),
        gauss_bonnet_residual,
        max_curvature_error,
        embedded,
        speed_variation,
        length_bound_ok,
        reilly_ok,
        notes,
    }
}
