//! Predictor–corrector continuation along the homotopy `(t, s)`.
//!
//! Branches start from explicit circles on the round sphere, raise the
//! curvature scale `s` at `t = 0` and then deform the metric from `t = 0` to
//! `t = 1`. Every accepted state is monitored for embeddedness, the length
//! bound, constant speed and convexity of the metric.

use std::f64::consts::FRAC_PI_2;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::curve::{self, aligned_distance, DiscreteCurve, MIN_NODES};
use crate::error::{Error, Result};
use crate::geometry::{min_curvature_at, ConformalMetric, DEFAULT_GRID};
use crate::solver::{solve_zero, CurvatureSpec, SolverOptions};
use crate::verify::{certify_with, length_bound, CertifyOptions, Diagnostics, BOUND_SLACK, SPEED_TOL};

/// Uniformly sampled circle of geodesic radius `arccot κ` about `axis`,
/// counter-clockwise as seen from the axis. On the round sphere it solves the
/// curvature equation with constant `c = κ`.
pub fn seed_circle(kappa: f64, axis: &Vector3<f64>, n: usize) -> Result<DiscreteCurve> {
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(Error::Domain(format!("seed curvature {kappa} must be finite and ≥ 0")));
    }
    if n < MIN_NODES {
        return Err(Error::Domain(format!("{n} nodes requested, at least {MIN_NODES} required")));
    }
    let r = if kappa == 0.0 { FRAC_PI_2 } else { (1.0 / kappa).atan() };
    DiscreteCurve::circle(axis, r, n, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Monitors {
    pub length_bound: bool,
    pub embeddedness: bool,
    pub convexity: bool,
    pub speed: bool,
}

impl Default for Monitors {
    fn default() -> Self {
        Self { length_bound: true, embeddedness: true, convexity: true, speed: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuationSchedule {
    /// Waypoints `[t, s]`, starting at `t = 0`.
    pub path: Vec<[f64; 2]>,
    /// Largest step, Euclidean in `(t, s)`.
    pub max_step: f64,
    pub min_step: f64,
    pub monitors: Monitors,
    /// Largest aligned distance between consecutive accepted curves.
    pub continuity_threshold: f64,
    /// Upper limit on `s·max c`, standing in for the small-curvature constant.
    pub small_curvature_threshold: Option<f64>,
    pub clearance: f64,
    pub grid_resolution: usize,
    pub gauss_bonnet_grid: usize,
}

impl Default for ContinuationSchedule {
    fn default() -> Self {
        Self::l_shaped(1.0, 21, 41)
    }
}

impl ContinuationSchedule {
    /// `s_points` uniform waypoints `s: 0 → s_target` at `t = 0`, then
    /// `t_points` uniform waypoints `t: 0 → 1` at `s = s_target`.
    pub fn l_shaped(s_target: f64, s_points: usize, t_points: usize) -> Self {
        let mut path = Vec::new();
        let sp = s_points.max(1);
        for i in 0..sp {
            let s = if sp == 1 { s_target } else { s_target * i as f64 / (sp - 1) as f64 };
            path.push([0.0, s]);
        }
        for i in 1..t_points.max(2) {
            path.push([i as f64 / (t_points.max(2) - 1) as f64, s_target]);
        }
        Self {
            path,
            max_step: 0.05,
            min_step: 1e-4,
            monitors: Monitors::default(),
            continuity_threshold: 0.2,
            small_curvature_threshold: None,
            clearance: curve::DEFAULT_CLEARANCE,
            grid_resolution: DEFAULT_GRID,
            gauss_bonnet_grid: crate::verify::DEFAULT_GB_GRID,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let first = self.path.first().ok_or_else(|| Error::Config("schedule path is empty".into()))?;
        if first[0] != 0.0 {
            return Err(Error::Config(format!("schedule must start at t = 0, not t = {}", first[0])));
        }
        for (i, [t, s]) in self.path.iter().enumerate() {
            if !(t.is_finite() && (0.0..=1.0).contains(t)) || !(s.is_finite() && *s >= 0.0) {
                return Err(Error::Config(format!("waypoint {i} = ({t}, {s}) outside [0,1] x [0,∞)")));
            }
        }
        if !(self.min_step > 0.0 && self.max_step.is_finite() && self.min_step <= self.max_step) {
            return Err(Error::Config(format!(
                "need 0 < min_step ≤ max_step, got {} and {}",
                self.min_step, self.max_step
            )));
        }
        if !(self.continuity_threshold > 0.0 && self.clearance > 0.0) {
            return Err(Error::Config("continuity_threshold and clearance must be positive".into()));
        }
        if self.grid_resolution < 16 || self.gauss_bonnet_grid < 1 {
            return Err(Error::Config("grid_resolution must be at least 16".into()));
        }
        Ok(())
    }

    fn certify_options(&self) -> CertifyOptions {
        CertifyOptions {
            gauss_bonnet_grid: self.gauss_bonnet_grid,
            curvature_grid: self.grid_resolution,
            clearance: self.clearance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub s: f64,
    pub curve: DiscreteCurve,
    pub residual: f64,
    pub iterations: usize,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchStatus {
    Complete,
    StepCollapse,
    MonitorViolation,
    /// The seed did not converge at the opening waypoint (set by callers that
    /// record the failure instead of propagating it).
    SeedFailure,
}

/// Where and why a branch stopped early.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forensics {
    pub t: f64,
    pub s: f64,
    pub reason: String,
    /// Offending curve (monitor violation) or last corrector iterate, if any.
    pub curve: Option<DiscreteCurve>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub seed_id: String,
    pub status: BranchStatus,
    pub states: Vec<State>,
    pub forensics: Option<Forensics>,
}

impl Branch {
    pub fn terminal(&self) -> Option<&State> {
        self.states.last()
    }
}

fn monitor_failure(
    sched: &ContinuationSchedule,
    metric: &ConformalMetric,
    curve: &DiscreteCurve,
    diag: &Diagnostics,
) -> Option<String> {
    let m = &sched.monitors;
    if m.embeddedness && !curve::self_intersects(curve, sched.clearance).embedded {
        return Some("self-contact within clearance".into());
    }
    if m.convexity {
        let k = min_curvature_at(metric, sched.grid_resolution);
        if !(k > 0.0) {
            return Some(format!("metric not convex at t = {}: min K = {k:e}", metric.t()));
        }
    }
    if m.length_bound {
        let bound = length_bound(diag.min_gauss_curvature);
        if !(diag.length <= bound + BOUND_SLACK) {
            return Some(format!("length {} exceeds the bound {bound}", diag.length));
        }
    }
    if m.speed && !(diag.speed_variation < SPEED_TOL) {
        return Some(format!("speed variation {:e}", diag.speed_variation));
    }
    None
}

/// Node-wise secant extrapolation `γ₁ + r (γ₁ − γ₀)`, projected to the sphere.
fn secant(prev: &DiscreteCurve, last: &DiscreteCurve, ratio: f64) -> Option<DiscreteCurve> {
    if prev.len() != last.len() {
        return None;
    }
    let pts = prev.nodes().iter().zip(last.nodes()).map(|(a, b)| b + (b - a) * ratio).collect();
    DiscreteCurve::from_points(pts).ok()
}

/// Traces one branch from `seed` along `schedule.path`.
///
/// The seed is first corrected at the opening waypoint; failure there is a
/// precondition error. Later corrector failures (including a jump larger than
/// the continuity threshold) halve the step; a step below `min_step` ends
/// the branch with [`BranchStatus::StepCollapse`].
pub fn continue_path(
    seed_id: &str,
    seed: &DiscreteCurve,
    metric_family: &ConformalMetric,
    spec_family: &CurvatureSpec,
    schedule: &ContinuationSchedule,
    solver_opts: &SolverOptions,
) -> Result<Branch> {
    schedule.validate()?;
    let copts = schedule.certify_options();
    let at = |t: f64, s: f64| -> Result<(ConformalMetric, CurvatureSpec)> {
        let spec = spec_family.with_scale(s)?;
        if let Some(thr) = schedule.small_curvature_threshold {
            spec.check_threshold(thr)?;
        }
        Ok((metric_family.at(t)?, spec))
    };

    let [t0, s0] = schedule.path[0];
    let (metric, spec) = at(t0, s0)?;
    let first = solve_zero(seed, &metric, &spec, solver_opts)
        .map_err(|e| Error::Domain(format!("seed {seed_id} does not converge at (t, s) = ({t0}, {s0}): {e}")))?;
    let diagnostics = certify_with(&first.curve, &metric, &spec, &copts);
    let mut branch =
        Branch { seed_id: seed_id.to_string(), status: BranchStatus::Complete, states: Vec::new(), forensics: None };
    if let Some(reason) = monitor_failure(schedule, &metric, &first.curve, &diagnostics) {
        branch.status = BranchStatus::MonitorViolation;
        branch.forensics = Some(Forensics { t: t0, s: s0, reason, curve: Some(first.curve) });
        return Ok(branch);
    }
    branch.states.push(State {
        t: t0,
        s: s0,
        curve: first.curve,
        residual: first.residual,
        iterations: first.iterations,
        diagnostics,
    });

    for w in schedule.path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let span = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        if span == 0.0 {
            continue;
        }
        let mut u = 0.0; // distance travelled along this segment
        let mut step = schedule.max_step.min(span);
        // Previous accepted state on this segment and its parameter, for the secant.
        let mut prev_on_segment: Option<(DiscreteCurve, f64)> = None;
        while u < span {
            // Snap to the waypoint when rounding leaves only a sliver.
            let target = if u + step >= span * (1.0 - 1e-9) { span } else { u + step };
            let frac = target / span;
            let (t, s) =
                if target == span { (b[0], b[1]) } else { (a[0] + frac * (b[0] - a[0]), a[1] + frac * (b[1] - a[1])) };
            let last = branch.states.last().expect("branch has a state");
            let predicted = prev_on_segment
                .as_ref()
                .and_then(|(pc, pu)| secant(pc, &last.curve, (target - u) / (u - pu)))
                .unwrap_or_else(|| last.curve.clone());
            let (metric, spec) = at(t, s)?;
            let attempt = solve_zero(&predicted, &metric, &spec, solver_opts)
                .map_err(|e| (e.to_string(), e.last_iterate().cloned()))
                .and_then(|rep| {
                    let d = aligned_distance(&rep.curve, &last.curve).map_err(|e| (e.to_string(), None))?;
                    if d > schedule.continuity_threshold {
                        Err((format!("branch jump: aligned distance {d} to the previous state"), Some(rep.curve)))
                    } else {
                        Ok(rep)
                    }
                });
            match attempt {
                Ok(rep) => {
                    let diagnostics = certify_with(&rep.curve, &metric, &spec, &copts);
                    if let Some(reason) = monitor_failure(schedule, &metric, &rep.curve, &diagnostics) {
                        branch.status = BranchStatus::MonitorViolation;
                        branch.forensics = Some(Forensics { t, s, reason, curve: Some(rep.curve) });
                        return Ok(branch);
                    }
                    prev_on_segment = Some((last.curve.clone(), u));
                    branch.states.push(State {
                        t,
                        s,
                        curve: rep.curve,
                        residual: rep.residual,
                        iterations: rep.iterations,
                        diagnostics,
                    });
                    u = target;
                    step = (2.0 * step).min(schedule.max_step);
                }
                Err((reason, curve)) => {
                    step *= 0.5;
                    if step < schedule.min_step {
                        branch.status = BranchStatus::StepCollapse;
                        branch.forensics = Some(Forensics { t, s, reason, curve });
                        return Ok(branch);
                    }
                }
            }
        }
    }
    Ok(branch)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoBranchResult {
    pub branch_a: Branch,
    pub branch_b: Branch,
    /// Aligned distance of the terminal curves; `None` unless both branches completed.
    pub distinctness: Option<f64>,
    pub success: bool,
    pub warning: Option<String>,
}

/// Runs [`continue_path`] from two seed circles concurrently.
///
/// Seeds are circles of curvature `s₀·max c` about the given axes, where
/// `s₀` is the scale at the opening waypoint.
#[allow(clippy::too_many_arguments)]
pub fn two_branch_run(
    metric: &ConformalMetric,
    spec: &CurvatureSpec,
    axes: [Vector3<f64>; 2],
    n: usize,
    schedule: &ContinuationSchedule,
    solver_opts: &SolverOptions,
    separation_threshold: f64,
) -> Result<TwoBranchResult> {
    schedule.validate()?;
    let s0 = schedule.path[0][1];
    let kappa = spec.with_scale(s0)?.max_value();
    let seed_a = seed_circle(kappa, &axes[0], n)?;
    let seed_b = seed_circle(kappa, &axes[1], n)?;
    let (ra, rb) = std::thread::scope(|scope| {
        let ha = scope.spawn(|| continue_path("a", &seed_a, metric, spec, schedule, solver_opts));
        let hb = scope.spawn(|| continue_path("b", &seed_b, metric, spec, schedule, solver_opts));
        (ha.join().expect("branch a panicked"), hb.join().expect("branch b panicked"))
    });
    let (branch_a, branch_b) = (ra?, rb?);
    let both = branch_a.status == BranchStatus::Complete && branch_b.status == BranchStatus::Complete;
    let distinctness = match (both, branch_a.terminal(), branch_b.terminal()) {
        (true, Some(a), Some(b)) => Some(aligned_distance(&a.curve, &b.curve)?),
        _ => None,
    };
    let mut warning = None;
    if !both {
        warning = Some("at least one branch did not complete".to_string());
    } else if distinctness.is_some_and(|d| d <= separation_threshold) {
        warning = Some(format!(
            "terminal curves merged: distinctness {} ≤ {separation_threshold}",
            distinctness.unwrap_or(0.0)
        ));
    }
    let success = both && distinctness.is_some_and(|d| d > separation_threshold);
    Ok(TwoBranchResult { branch_a, branch_b, distinctness, success, warning })
}
