//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::continuation::{ContinuationSchedule, Monitors};
use crate::error::{Error, Result};
use crate::geometry::{ConformalMetric, HarmonicSum, HarmonicTerm, DEFAULT_GRID};
use crate::solver::{CurvatureFunction, CurvatureSpec, SolverOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Nodes per curve.
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Terminal curves closer than this (aligned distance) are reported as merged.
    #[serde(default = "default_separation")]
    pub separation_threshold: f64,
    #[serde(default)]
    pub metric: MetricConfig,
    pub curvature: CurvatureConfig,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    pub seeds: Vec<SeedConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_nodes() -> usize {
    crate::curve::DEFAULT_NODES
}

fn default_separation() -> f64 {
    0.1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    /// Terms of the conformal exponent `φ`.
    #[serde(default)]
    pub terms: Vec<HarmonicTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CurvatureConfig {
    Constant(f64),
    Harmonic { terms: Vec<HarmonicTerm>, offset: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub s_target: f64,
    pub s_points: usize,
    pub t_points: usize,
    /// Explicit waypoints `[t, s]`; replaces the L-shaped path when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<[f64; 2]>>,
    pub max_step: f64,
    pub min_step: f64,
    pub monitors: Monitors,
    pub continuity_threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub small_curvature_threshold: Option<f64>,
    pub clearance: f64,
    pub grid_resolution: usize,
    pub gauss_bonnet_grid: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        let d = ContinuationSchedule::default();
        Self {
            s_target: 1.0,
            s_points: 21,
            t_points: 41,
            path: None,
            max_step: d.max_step,
            min_step: d.min_step,
            monitors: d.monitors,
            continuity_threshold: d.continuity_threshold,
            small_curvature_threshold: None,
            clearance: d.clearance,
            grid_resolution: DEFAULT_GRID,
            gauss_bonnet_grid: d.gauss_bonnet_grid,
        }
    }
}

impl ScheduleConfig {
    pub fn to_schedule(&self) -> ContinuationSchedule {
        let mut s = ContinuationSchedule::l_shaped(self.s_target, self.s_points, self.t_points);
        if let Some(p) = &self.path {
            s.path = p.clone();
        }
        s.max_step = self.max_step;
        s.min_step = self.min_step;
        s.monitors = self.monitors;
        s.continuity_threshold = self.continuity_threshold;
        s.small_curvature_threshold = self.small_curvature_threshold;
        s.clearance = self.clearance;
        s.grid_resolution = self.grid_resolution;
        s.gauss_bonnet_grid = self.gauss_bonnet_grid;
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedConfig {
    pub id: String,
    pub axis: [f64; 3],
    /// Seed curvature; defaults to the effective curvature at the first waypoint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportFormat {
    CurveTable,
    DiagnosticsTable,
    PlotBundle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<ExportFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("runs"),
            formats: vec![ExportFormat::CurveTable, ExportFormat::DiagnosticsTable],
        }
    }
}

/// Everything a run needs, validated.
pub struct Prepared {
    pub metric: ConformalMetric,
    pub spec: CurvatureSpec,
    pub schedule: ContinuationSchedule,
    pub seeds: Vec<(String, Vector3<f64>, f64)>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks every field and builds the run objects. The metric passes the
    /// convexity gate for all `t` in `[0, 1]`.
    pub fn prepare(&self) -> Result<Prepared> {
        if self.nodes < crate::curve::MIN_NODES {
            return Err(Error::Config(format!("nodes = {} is below {}", self.nodes, crate::curve::MIN_NODES)));
        }
        if !(self.separation_threshold.is_finite() && self.separation_threshold >= 0.0) {
            return Err(Error::Config("separation_threshold must be finite and ≥ 0".into()));
        }
        self.solver.validate()?;
        let metric = ConformalMetric::new(self.metric.terms.clone(), 1.0)?;
        let base = match &self.curvature {
            CurvatureConfig::Constant(c) => CurvatureFunction::Constant(*c),
            CurvatureConfig::Harmonic { terms, offset } => {
                CurvatureFunction::Harmonic { terms: HarmonicSum::new(terms.clone())?, offset: *offset }
            }
        };
        let spec = CurvatureSpec::new(base, 1.0)?;
        let schedule = self.schedule.to_schedule();
        schedule.validate()?;
        if let Some(thr) = schedule.small_curvature_threshold {
            for [_, s] in &schedule.path {
                spec.with_scale(*s)?.check_threshold(thr)?;
            }
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        let s0 = schedule.path[0][1];
        let default_kappa = spec.with_scale(s0)?.max_value();
        let mut seeds = Vec::new();
        for (i, seed) in self.seeds.iter().enumerate() {
            let axis = Vector3::from(seed.axis);
            if !(axis.iter().all(|x| x.is_finite()) && axis.norm() > 0.0) {
                return Err(Error::Config(format!("seeds[{i}].axis must be finite and non-zero")));
            }
            if seeds.iter().any(|(id, _, _)| id == &seed.id) {
                return Err(Error::Config(format!("duplicate seed id {:?}", seed.id)));
            }
            let kappa = seed.kappa.unwrap_or(default_kappa);
            if !(kappa.is_finite() && kappa >= 0.0) {
                return Err(Error::Config(format!("seeds[{i}].kappa must be finite and ≥ 0")));
            }
            seeds.push((seed.id.clone(), axis.normalize(), kappa));
        }
        Ok(Prepared { metric, spec, schedule, seeds })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
nodes = 128

[metric]
terms = [{ l = 2, m = 0, coeff = 0.1 }]

[curvature]
constant = 0.05

[solver]
tol = 1e-10

[schedule]
s_points = 5
t_points = 5

[[seeds]]
id = "z"
axis = [0.0, 0.0, 1.0]

[[seeds]]
id = "x"
axis = [1.0, 0.0, 0.0]
kappa = 0.0
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(cfg.nodes, 128);
        assert_eq!(cfg.curvature, CurvatureConfig::Constant(0.05));
        assert_eq!(cfg.seeds[1].kappa, Some(0.0));
        let again = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(again, cfg);
        let p = cfg.prepare().unwrap();
        assert_eq!(p.schedule.path.len(), 9);
    }

    #[test]
    fn unknown_fields_are_reported_with_location() {
        let bad = EXAMPLE.replace("tol = 1e-10", "tolerance = 1e-10");
        let err = RunConfig::from_toml(&bad).unwrap_err().to_string();
        assert!(err.contains("tolerance") && err.contains("line"), "{err}");
    }

    #[test]
    fn convexity_gate_is_applied() {
        let bad = EXAMPLE.replace("coeff = 0.1", "coeff = 2.0");
        let err = RunConfig::from_toml(&bad).unwrap().prepare().err().unwrap();
        assert!(matches!(err, Error::Convexity { .. }));
    }
}
