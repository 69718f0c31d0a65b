use clap::Parser;
use geocurve::cli::{main_with, Cli};

fn main() {
    std::process::exit(main_with(Cli::parse()));
}
