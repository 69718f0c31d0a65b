//! `solve`: seeds, continuation, certification and persistence.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::continuation::{continue_path, seed_circle, Branch, BranchStatus, Forensics};
use crate::curve::aligned_distance;
use crate::error::{Error, Result};

use super::config::{Prepared, RunConfig};
use super::export::export;

/// Environment variable overriding the output directory of the config file.
pub const OUT_ENV: &str = "GEOCURVE_OUT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub axis: [f64; 3],
    pub kappa: f64,
    pub branch: Branch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    pub a: String,
    pub b: String,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run_id: String,
    pub exit_code: i32,
    pub branches: Vec<BranchRecord>,
    /// Aligned distances between terminal curves of completed branches.
    pub distinctness: Vec<PairDistance>,
    pub warnings: Vec<String>,
}

impl RunResult {
    pub fn load(run_dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(run_dir.join("result.json"))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("result.json: {e}")))
    }
}

fn run_branches(cfg: &RunConfig, prep: &Prepared, threads: usize) -> Vec<BranchRecord> {
    let work = |(id, axis, kappa): &(String, nalgebra::Vector3<f64>, f64)| -> BranchRecord {
        let branch = seed_circle(*kappa, axis, cfg.nodes)
            .and_then(|seed| continue_path(id, &seed, &prep.metric, &prep.spec, &prep.schedule, &cfg.solver))
            .unwrap_or_else(|e| Branch {
                seed_id: id.clone(),
                status: BranchStatus::SeedFailure,
                states: Vec::new(),
                forensics: Some(Forensics {
                    t: prep.schedule.path[0][0],
                    s: prep.schedule.path[0][1],
                    reason: e.to_string(),
                    curve: None,
                }),
            });
        BranchRecord { axis: [axis.x, axis.y, axis.z], kappa: *kappa, branch }
    };
    let mut out = Vec::with_capacity(prep.seeds.len());
    for chunk in prep.seeds.chunks(threads.max(1)) {
        let done: Vec<BranchRecord> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk.iter().map(|s| scope.spawn(move || work(s))).collect();
            handles.into_iter().map(|h| h.join().expect("branch worker panicked")).collect()
        });
        out.extend(done);
    }
    out
}

fn fresh_run_dir(root: &Path) -> Result<(String, PathBuf)> {
    fs::create_dir_all(root)?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.6fZ").to_string();
    for i in 0.. {
        let id = if i == 0 { format!("run-{stamp}") } else { format!("run-{stamp}-{i}") };
        let dir = root.join(&id);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok((id, dir)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!()
}

/// Executes a run and returns its exit code: 0 when every branch completed
/// and every state certified, 2 for partial runs, 1 for configuration,
/// domain or I/O errors.
pub fn run(config_path: &Path, out: Option<&Path>, threads: Option<usize>) -> i32 {
    match run_inner(config_path, out, threads) {
        Ok((code, dir)) => {
            println!("{}", dir.display());
            code
        }
        Err(e) => {
            eprintln!("geocurve: {e}");
            1
        }
    }
}

fn run_inner(config_path: &Path, out: Option<&Path>, threads: Option<usize>) -> Result<(i32, PathBuf)> {
    let cfg = RunConfig::load(config_path)?;
    let prep = cfg.prepare()?;
    let root = match (out, std::env::var_os(OUT_ENV)) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(env)) => PathBuf::from(env),
        (None, None) => cfg.output.directory.clone(),
    };
    let (run_id, dir) = fresh_run_dir(&root)?;
    fs::write(dir.join("config.toml"), cfg.to_toml()?)?;

    let threads = threads.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)).max(1);
    let branches = run_branches(&cfg, &prep, threads);

    let mut warnings = Vec::new();
    let mut distinctness = Vec::new();
    for (i, a) in branches.iter().enumerate() {
        for b in &branches[i + 1..] {
            if let (BranchStatus::Complete, BranchStatus::Complete, Some(x), Some(y)) =
                (a.branch.status, b.branch.status, a.branch.terminal(), b.branch.terminal())
            {
                let d = aligned_distance(&x.curve, &y.curve)?;
                if d <= cfg.separation_threshold {
                    warnings.push(format!(
                        "branches {} and {} merged (distinctness {d})",
                        a.branch.seed_id, b.branch.seed_id
                    ));
                }
                distinctness.push(PairDistance {
                    a: a.branch.seed_id.clone(),
                    b: b.branch.seed_id.clone(),
                    distance: d,
                });
            }
        }
    }
    let complete = branches
        .iter()
        .all(|b| b.branch.status == BranchStatus::Complete && b.branch.states.iter().all(|s| s.diagnostics.all_ok()));
    for b in &branches {
        if let Some(f) = &b.branch.forensics {
            warnings.push(format!(
                "branch {} stopped ({:?}) at (t, s) = ({}, {}): {}",
                b.branch.seed_id, b.branch.status, f.t, f.s, f.reason
            ));
        }
    }
    let exit_code = if complete { 0 } else { 2 };
    let result = RunResult { run_id, exit_code, branches, distinctness, warnings };
    let json = serde_json::to_string_pretty(&result).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(dir.join("result.json"), json)?;
    for w in &result.warnings {
        eprintln!("geocurve: warning: {w}");
    }
    for f in &cfg.output.formats {
        export(&dir, *f, &dir.join("export"))?;
    }
    Ok((exit_code, dir))
}
