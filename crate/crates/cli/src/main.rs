use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gsrep_cli::{run, Command, RunConfig};

/// Verification runs for the tangential-field estimates.
#[derive(Parser)]
#[command(name = "gsrep", version, about)]
struct Cli {
    command: Command,
    /// TOML run configuration; built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default `gsrep-out`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<bool> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.rng_seed = seed;
    }
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }
    if cli.out.is_some() {
        config.output_dir = cli.out;
    }
    config.validate()?;
    if let Some(n) = config.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let dir = config.output_dir.clone().unwrap_or_else(|| PathBuf::from("gsrep-out"));
    let outcome = run(cli.command, &config, &dir)?;
    for r in &outcome.reports {
        println!("{} {} fitted_constant={}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.fitted_constant);
        for d in r.diagnostics.iter().filter(|d| d.starts_with("failed:")) {
            println!("    {d}");
        }
    }
    for s in &outcome.skipped {
        println!("SKIP {s}");
    }
    println!("config hash {}, artifacts in {}", config.hash(), dir.display());
    Ok(outcome.pass())
}
