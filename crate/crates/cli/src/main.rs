use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nehari_cli::config::{Format, RunConfig};
use nehari_cli::run::run;

/// Nehari-manifold and mountain-pass solver for the indefinite-weight p-Laplacian.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// TOML run configuration.
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Comma-separated λ values, replacing the configured grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambda_grid: Option<Vec<f64>>,
    #[arg(long)]
    skip_mountain_pass: bool,
    /// Rerun the string method with a second boundary endpoint and report the spread of c_λ.
    #[arg(long)]
    second_endpoint: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut cfg = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    if let Some(s) = args.seed {
        cfg.solver.seed = s;
    }
    if let Some(o) = args.out {
        cfg.output.dir = o;
    }
    if let Some(f) = args.format {
        cfg.output.format = f;
    }
    if let Some(g) = args.lambda_grid {
        cfg.lambda.grid = Some(g);
    }
    cfg.solver.skip_mountain_pass |= args.skip_mountain_pass;
    cfg.solver.second_endpoint |= args.second_endpoint;
    match run(&cfg) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
