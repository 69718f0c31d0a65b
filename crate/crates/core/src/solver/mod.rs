//! The prescribed-curvature equation `D_{θ,g} γ̇ = |γ̇|_g · s·c(γ) · J γ̇` and its
//! corrector.
//!
//! The residual of a discrete curve has a normal part, the curvature mismatch
//! `|γ̇|² e^{tφ/2} (κ_g − s·c)`, and a tangential part that vanishes exactly when
//! the `g_t`-segment lengths are equal. The corrector alternates Newton steps on
//! normal node displacements with constant-speed resampling; a Sobolev-smoothed
//! residual step is the fallback when Newton makes no progress.

pub mod jacobian;
pub mod sobolev;

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::curve::{
    self, node_curvature, node_frame, resample_constant_speed, segment_length, self_intersects, DiscreteCurve,
    NodeFrame,
};
use crate::error::{Error, Result};
use crate::geometry::{equal_area_grid, max_curvature_at, ConformalMetric, HarmonicSum, DEFAULT_GRID};
use crate::real::{Dual, Real};

pub use jacobian::{analytic_jacobian, jacobian_fd, jvp};
pub use sobolev::{sobolev_field, sobolev_matrix};

/// Base function `c` of the prescribed curvature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureFunction {
    Constant(f64),
    Harmonic { terms: HarmonicSum, offset: f64 },
}

/// Prescribed curvature `s·c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSpec {
    base: CurvatureFunction,
    scale: f64,
}

impl CurvatureSpec {
    pub fn constant(c: f64, s: f64) -> Result<Self> {
        Self::new(CurvatureFunction::Constant(c), s)
    }

    pub fn harmonic(terms: HarmonicSum, offset: f64, s: f64) -> Result<Self> {
        Self::new(CurvatureFunction::Harmonic { terms, offset }, s)
    }

    /// Rejects a non-finite or negative scale and any base function that is
    /// negative somewhere on the validation grid.
    pub fn new(base: CurvatureFunction, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::Domain(format!("curvature scale s = {scale} must be finite and ≥ 0")));
        }
        match &base {
            CurvatureFunction::Constant(c) => {
                if !(c.is_finite() && *c >= 0.0) {
                    return Err(Error::Domain(format!("curvature constant {c} must be finite and ≥ 0")));
                }
            }
            CurvatureFunction::Harmonic { terms, offset } => {
                HarmonicSum::new(terms.terms.clone())?;
                if !offset.is_finite() {
                    return Err(Error::Domain("non-finite curvature offset".into()));
                }
            }
        }
        let spec = Self { base, scale };
        let min_c = spec.base_extremes(DEFAULT_GRID).0;
        if min_c < 0.0 {
            return Err(Error::Domain(format!("curvature function takes the negative value {min_c:e}")));
        }
        Ok(spec)
    }

    pub fn base(&self) -> &CurvatureFunction {
        &self.base
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn with_scale(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::Domain(format!("curvature scale s = {s} must be finite and ≥ 0")));
        }
        Ok(Self { base: self.base.clone(), scale: s })
    }

    pub fn base_value<S: Real>(&self, p: &Vector3<S>) -> S {
        match &self.base {
            CurvatureFunction::Constant(c) => S::cst(*c),
            CurvatureFunction::Harmonic { terms, offset } => S::cst(*offset) + terms.value(p),
        }
    }

    /// Effective curvature `s·c(p)`.
    pub fn value<S: Real>(&self, p: &Vector3<S>) -> S {
        if self.scale == 0.0 {
            return S::zero();
        }
        S::cst(self.scale) * self.base_value(p)
    }

    /// `(min c, max c)` over the equal-area grid.
    pub fn base_extremes(&self, grid_resolution: usize) -> (f64, f64) {
        match &self.base {
            CurvatureFunction::Constant(c) => (*c, *c),
            CurvatureFunction::Harmonic { .. } => equal_area_grid(grid_resolution)
                .map(|p| self.base_value(&p))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v))),
        }
    }

    /// `s · max c` over the default grid.
    pub fn max_value(&self) -> f64 {
        self.scale * self.base_extremes(DEFAULT_GRID).1
    }

    /// Enforces the small-curvature threshold used in place of the non-constructive `ε₀`.
    pub fn check_threshold(&self, threshold: f64) -> Result<()> {
        let m = self.max_value();
        if m > threshold {
            return Err(Error::Domain(format!(
                "effective curvature max {m:e} exceeds the small-curvature threshold {threshold:e}"
            )));
        }
        Ok(())
    }
}

/// One tangent vector per curve node.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentField {
    vectors: Vec<Vector3<f64>>,
}

impl TangentField {
    /// Checks `|v_k · p_k| < 1e-10 |v_k|` at every node.
    pub fn new(curve: &DiscreteCurve, vectors: Vec<Vector3<f64>>) -> Result<Self> {
        if vectors.len() != curve.len() {
            return Err(Error::Domain(format!("{} vectors for {} nodes", vectors.len(), curve.len())));
        }
        for (k, (v, p)) in vectors.iter().zip(curve.nodes()).enumerate() {
            let d = v.dot(p).abs();
            if !(d <= 1e-10 * v.norm()) && d != 0.0 {
                return Err(Error::Domain(format!("vector {k} is not tangent (v·p = {d:e})")));
            }
        }
        Ok(Self { vectors })
    }

    pub(crate) fn from_vectors_unchecked(vectors: Vec<Vector3<f64>>) -> Self {
        Self { vectors }
    }

    pub fn zeros(n: usize) -> Self {
        Self { vectors: vec![Vector3::zeros(); n] }
    }

    pub fn vectors(&self) -> &[Vector3<f64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn max_norm(&self) -> f64 {
        self.vectors.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Discrete `L²(S¹)` norm `(h Σ |v_k|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let h = 1.0 / self.vectors.len() as f64;
        (h * self.vectors.iter().map(|v| v.norm_squared()).sum::<f64>()).sqrt()
    }

    pub fn shifted(&self, m: isize) -> Self {
        let n = self.vectors.len() as isize;
        let vectors = (0..n).map(|k| self.vectors[(k + m).rem_euclid(n) as usize]).collect();
        Self { vectors }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { vectors: self.vectors.iter().map(|v| v * a).collect() }
    }
}

/// Residual at the centre of a five-node window: normal part, tangential part
/// and the round frame used to assemble them.
pub(crate) fn node_residual<S: Real>(
    w: &[Vector3<S>; 5],
    h: f64,
    metric: &ConformalMetric,
    spec: &CurvatureSpec,
) -> Option<(S, S, NodeFrame<S>)> {
    let f = node_frame(w, h)?;
    let v2 = f.speed * f.speed;
    let mut rn = f.accel.dot(&f.normal);
    let mut weight = S::one();
    if !metric.is_round() {
        let t = metric.t();
        let (phi, grad) = metric.phi().value_and_gradient(&f.p);
        rn -= S::cst(0.5 * t) * v2 * grad.dot(&f.normal);
        weight = (S::cst(0.5 * t) * phi).exp();
    }
    rn -= weight * v2 * spec.value(&f.p);
    let prev = segment_length(&w[1], &w[2], metric);
    let next = segment_length(&w[2], &w[3], metric);
    let rt = (next - prev) / (weight * S::cst(h * h));
    Some((rn, rt, f))
}

fn degenerate(k: usize) -> Error {
    Error::Degenerate(format!("zero velocity at node {k}"))
}

/// Residual of the curvature equation at every node.
pub fn residual(curve: &DiscreteCurve, metric: &ConformalMetric, spec: &CurvatureSpec) -> Result<TangentField> {
    let h = curve.step();
    let vectors = (0..curve.len())
        .map(|k| {
            let (rn, rt, f) = node_residual(&curve.window(k), h, metric, spec).ok_or_else(|| degenerate(k))?;
            Ok(f.normal * rn + f.tangent * rt)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TangentField { vectors })
}

/// Normal residual components `R_k · n_k`.
pub fn normal_residual(curve: &DiscreteCurve, metric: &ConformalMetric, spec: &CurvatureSpec) -> Result<Vec<f64>> {
    let h = curve.step();
    (0..curve.len())
        .map(|k| node_residual(&curve.window(k), h, metric, spec).map(|r| r.0).ok_or_else(|| degenerate(k)))
        .collect()
}

/// The zero-finding field `X_{c,g}`: the Sobolev-smoothed negative residual.
/// The corrector's descent step is `γ − αX`.
pub fn vector_field(curve: &DiscreteCurve, metric: &ConformalMetric, spec: &CurvatureSpec) -> Result<TangentField> {
    let r = residual(curve, metric, spec)?;
    sobolev_field(curve, &r.scaled(-1.0))
}

/// `max_k |κ_g(k) − s·c(p_k)|`.
pub fn curvature_error(curve: &DiscreteCurve, metric: &ConformalMetric, spec: &CurvatureSpec) -> Result<f64> {
    let h = curve.step();
    let mut worst = 0.0f64;
    for k in 0..curve.len() {
        let f = node_frame(&curve.window(k), h).ok_or_else(|| degenerate(k))?;
        let err = (node_curvature(&f, metric) - spec.value(&f.p)).abs();
        worst = worst.max(err);
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Stopping tolerance on `‖R‖_∞`, relative to the curvature scale `max(1, L²)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial step length of the backtracking search.
    pub damping: f64,
    /// Step reduction factor of the backtracking search.
    pub backtrack: f64,
    pub max_backtracks: usize,
    pub newton_on: bool,
    /// Newton steps are used once `‖R‖_∞` falls below this; `None` means always.
    pub newton_threshold: Option<f64>,
    /// Relative singular-value cutoff of the Newton pseudo-inverse.
    pub svd_cutoff: f64,
    pub embeddedness_monitor: bool,
    pub clearance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
            damping: 1.0,
            backtrack: 0.5,
            max_backtracks: 30,
            newton_on: true,
            newton_threshold: None,
            svd_cutoff: 1e-8,
            embeddedness_monitor: true,
            clearance: curve::DEFAULT_CLEARANCE,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !pos(self.tol) || !pos(self.damping) || !pos(self.clearance) || !pos(self.svd_cutoff) {
            return Err(Error::Config("solver tol, damping, clearance and svd_cutoff must be positive".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::Config(format!("backtrack factor {} outside (0, 1)", self.backtrack)));
        }
        if let Some(t) = self.newton_threshold {
            if !(t > 0.0) {
                return Err(Error::Config("newton_threshold must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub curve: DiscreteCurve,
    pub iterations: usize,
    pub newton_steps: usize,
    pub residual: f64,
    pub curvature_error: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64, last: Box<DiscreteCurve> },
    #[error("curve degenerated: {0}")]
    Degeneration(String),
    #[error("embeddedness lost at iteration {iteration}")]
    EmbeddingLoss { iteration: usize, last: Box<DiscreteCurve> },
    #[error(transparent)]
    Invalid(#[from] Error),
}

impl SolveError {
    /// Last iterate carried by the error, when there is one.
    pub fn last_iterate(&self) -> Option<&DiscreteCurve> {
        match self {
            SolveError::NonConvergence { last, .. } | SolveError::EmbeddingLoss { last, .. } => Some(last),
            _ => None,
        }
    }
}

/// Advisory lower length bound `2π / (max s·c + (max K)^{1/2})`, the length
/// of a circle that bends as hard as the data allow.
pub fn length_lower_estimate(metric: &ConformalMetric, spec: &CurvatureSpec) -> f64 {
    let k_max = max_curvature_at(metric, 32).max(0.0);
    TAU / (spec.max_value() + k_max.sqrt())
}

fn stopping_threshold(curve: &DiscreteCurve, tol: f64) -> f64 {
    let l = curve::length(curve, &ConformalMetric::round());
    tol * (l * l).max(1.0)
}

/// Normal-displacement Newton direction `δ` with `J δ = −R_n`, by truncated SVD.
fn newton_direction(
    curve: &DiscreteCurve,
    metric: &ConformalMetric,
    spec: &CurvatureSpec,
    rn: &[f64],
    normals: &[Vector3<f64>],
    cutoff: f64,
) -> Result<Vec<f64>> {
    let n = curve.len();
    let h = curve.step();
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        for d in -2isize..=2 {
            let k = (j as isize + d).rem_euclid(n as isize) as usize;
            let base = curve.window(k);
            let mut w = base.map(|p| p.map(Dual::cst));
            let idx = (2 - d) as usize;
            let (p, nj) = (base[idx], normals[j]);
            w[idx] = Vector3::new(Dual::new(p.x, nj.x), Dual::new(p.y, nj.y), Dual::new(p.z, nj.z));
            let (r, _, _) = node_residual(&w, h, metric, spec).ok_or_else(|| degenerate(k))?;
            jac[(k, j)] += r.eps;
        }
    }
    let svd = jac.svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax.is_finite() && smax > 0.0) {
        return Err(Error::LinearSolve("Jacobian has no usable singular values".into()));
    }
    let rhs = DVector::from_iterator(n, rn.iter().map(|r| -r));
    let delta = svd.solve(&rhs, cutoff * smax).map_err(|e| Error::LinearSolve(e.to_string()))?;
    Ok(delta.iter().copied().collect())
}

fn retract(
    points: impl Iterator<Item = Vector3<f64>>,
    metric: &ConformalMetric,
) -> std::result::Result<DiscreteCurve, SolveError> {
    let raw = DiscreteCurve::from_points(points.collect()).map_err(|e| SolveError::Degeneration(e.to_string()))?;
    resample_constant_speed(&raw, metric).map_err(|e| SolveError::Degeneration(e.to_string()))
}

/// Drives the residual to zero from `initial`.
///
/// Each iteration takes a Newton step on normal node displacements (or a
/// Sobolev descent step `γ − αX`), retracts to the sphere, resamples to
/// constant `g_t`-speed and backtracks on `‖R‖_∞` until it decreases.
pub fn solve_zero(
    initial: &DiscreteCurve,
    metric: &ConformalMetric,
    spec: &CurvatureSpec,
    opts: &SolverOptions,
) -> std::result::Result<SolveReport, SolveError> {
    opts.validate()?;
    if opts.embeddedness_monitor && !self_intersects(initial, opts.clearance).embedded {
        return Err(SolveError::EmbeddingLoss { iteration: 0, last: Box::new(initial.clone()) });
    }
    let min_length = 0.1 * length_lower_estimate(metric, spec);
    let mut cur = resample_constant_speed(initial, metric).map_err(|e| SolveError::Degeneration(e.to_string()))?;
    let mut res = residual(&cur, metric, spec)?.max_norm();
    let mut newton_steps = 0;
    for iteration in 0..=opts.max_iter {
        let len = curve::length(&cur, metric);
        if len < min_length {
            return Err(SolveError::Degeneration(format!(
                "length {len:e} fell below 0.1 x the lower estimate {:e}",
                min_length * 10.0
            )));
        }
        if res < stopping_threshold(&cur, opts.tol) {
            let curvature_error = curvature_error(&cur, metric, spec)?;
            return Ok(SolveReport { curve: cur, iterations: iteration, newton_steps, residual: res, curvature_error });
        }
        if iteration == opts.max_iter {
            break;
        }
        let mut accepted: Option<(DiscreteCurve, f64)> = None;
        let use_newton = opts.newton_on && opts.newton_threshold.is_none_or(|thr| res < thr);
        if use_newton {
            let fr = sobolev::frames(&cur)?;
            let rn = normal_residual(&cur, metric, spec)?;
            if let Ok(delta) = newton_direction(&cur, metric, spec, &rn, &fr.normal, opts.svd_cutoff) {
                accepted = line_search(metric, spec, opts, res, |alpha| {
                    retract(
                        cur.nodes().iter().zip(&fr.normal).zip(&delta).map(|((p, n), d)| p + n * (alpha * d)),
                        metric,
                    )
                })?;
                if accepted.is_some() {
                    newton_steps += 1;
                }
            }
        }
        if accepted.is_none() {
            let x = vector_field(&cur, metric, spec)?;
            accepted = line_search(metric, spec, opts, res, |alpha| {
                retract(cur.nodes().iter().zip(x.vectors()).map(|(p, v)| p - v * alpha), metric)
            })?;
        }
        match accepted {
            Some((next, r)) => {
                if opts.embeddedness_monitor && !self_intersects(&next, opts.clearance).embedded {
                    return Err(SolveError::EmbeddingLoss { iteration: iteration + 1, last: Box::new(next) });
                }
                cur = next;
                res = r;
            }
            None => {
                return Err(SolveError::NonConvergence { iterations: iteration, residual: res, last: Box::new(cur) })
            }
        }
    }
    Err(SolveError::NonConvergence { iterations: opts.max_iter, residual: res, last: Box::new(cur) })
}

/// Backtracking on `‖R‖_∞`: the first trial step that strictly decreases it.
fn line_search<F>(
    metric: &ConformalMetric,
    spec: &CurvatureSpec,
    opts: &SolverOptions,
    res: f64,
    step: F,
) -> std::result::Result<Option<(DiscreteCurve, f64)>, SolveError>
where
    F: Fn(f64) -> std::result::Result<DiscreteCurve, SolveError>,
{
    let mut alpha = opts.damping;
    for _ in 0..=opts.max_backtracks {
        if let Ok(cand) = step(alpha) {
            if let Ok(r) = residual(&cand, metric, spec) {
                let r = r.max_norm();
                if r < res {
                    return Ok(Some((cand, r)));
                }
            }
        }
        alpha *= opts.backtrack;
    }
    Ok(None)
}
