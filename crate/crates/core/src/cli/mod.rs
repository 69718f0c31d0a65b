//! Command-line front end: `solve <config>` and `export <run-dir>`.

pub mod config;
pub mod export;
pub mod run;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use config::{ExportFormat, RunConfig};
pub use export::export;
pub use run::{run, RunResult, OUT_ENV};

#[derive(Debug, Parser)]
#[command(name = "geocurve", version, about = "Prescribed geodesic curvature curves on conformal spheres")]
pub struct Cli {
    /// Worker threads for independent branches (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory; overrides the config file and the GEOCURVE_OUT variable.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Seed, continue, certify and write a run directory.
    Solve { config: PathBuf },
    /// Write tables or plot files from a finished run directory.
    Export {
        run_dir: PathBuf,
        #[arg(long, value_enum)]
        format: FormatArg,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    CurveTable,
    DiagnosticsTable,
    PlotBundle,
}

impl From<FormatArg> for ExportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::CurveTable => ExportFormat::CurveTable,
            FormatArg::DiagnosticsTable => ExportFormat::DiagnosticsTable,
            FormatArg::PlotBundle => ExportFormat::PlotBundle,
        }
    }
}

/// Dispatches a parsed command line and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    match cli.command {
        Command::Solve { config } => run(&config, cli.out.as_deref(), cli.threads),
        Command::Export { run_dir, format } => {
            let target = cli.out.unwrap_or_else(|| run_dir.join("export"));
            match export(&run_dir, format.into(), &target) {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    0
                }
                Err(e) => {
                    eprintln!("geocurve: export failed: {e}");
                    1
                }
            }
        }
    }
}
