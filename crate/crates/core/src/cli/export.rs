//! Plain-text exports of a run directory. Output depends only on
//! `result.json`, so repeated exports are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;

use super::config::ExportFormat;
use super::run::RunResult;

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn opt_bool(x: Option<bool>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn safe(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Writes `format` for the run in `run_dir` into `target`, returning the files written.
pub fn export(run_dir: &Path, format: ExportFormat, target: &Path) -> Result<Vec<PathBuf>> {
    let result = RunResult::load(run_dir)?;
    fs::create_dir_all(target)?;
    let mut written = Vec::new();
    match format {
        ExportFormat::CurveTable => {
            for rec in &result.branches {
                let b = &rec.branch;
                let mut text = String::new();
                for (i, st) in b.states.iter().enumerate() {
                    let _ = writeln!(text, "# state {i} t {} s {} N {}", st.t, st.s, st.curve.len());
                    for (k, p) in st.curve.nodes().iter().enumerate() {
                        let _ = writeln!(text, "{k} {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z);
                    }
                }
                let path = target.join(format!("curves-{}.txt", safe(&b.seed_id)));
                fs::write(&path, text)?;
                written.push(path);
            }
        }
        ExportFormat::DiagnosticsTable => {
            let mut text = String::from(
                "branch\tstate\tt\ts\tlength\tlambda1\tmin_gauss_curvature\tlength_bound\tgauss_bonnet_residual\t\
                 max_curvature_error\tembedded\tspeed_variation\tlength_bound_ok\treilly_ok\n",
            );
            for rec in &result.branches {
                for (i, st) in rec.branch.states.iter().enumerate() {
                    let d = &st.diagnostics;
                    let _ = writeln!(
                        text,
                        "{}\t{i}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                        rec.branch.seed_id,
                        st.t,
                        st.s,
                        d.length,
                        d.lambda1,
                        d.min_gauss_curvature,
                        d.length_bound,
                        opt(d.gauss_bonnet_residual),
                        opt(d.max_curvature_error),
                        d.embedded,
                        d.speed_variation,
                        opt_bool(d.length_bound_ok),
                        opt_bool(d.reilly_ok),
                    );
                }
            }
            let path = target.join("diagnostics.tsv");
            fs::write(&path, text)?;
            written.push(path);
        }
        ExportFormat::PlotBundle => {
            let dir = target.join("plot");
            fs::create_dir_all(&dir)?;
            for rec in &result.branches {
                let b = &rec.branch;
                // Closed polylines, one block per state, blank line between blocks.
                let mut text = String::from("state,t,s,x,y,z\n");
                for (i, st) in b.states.iter().enumerate() {
                    let nodes = st.curve.nodes();
                    for p in nodes.iter().chain(nodes.first()) {
                        let _ = writeln!(text, "{i},{},{},{},{},{}", st.t, st.s, p.x, p.y, p.z);
                    }
                }
                let path = dir.join(format!("branch-{}.csv", safe(&b.seed_id)));
                fs::write(&path, text)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
