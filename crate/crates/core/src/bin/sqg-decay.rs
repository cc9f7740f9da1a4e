use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sqg_decay::cli_io::{parse_config, run, Experiment};

/// Thread count for the rayon pool.
const THREADS_VAR: &str = "SQG_THREADS";

#[derive(Parser)]
#[command(
    name = "sqg-decay",
    version,
    about = "Dissipative quasi-geostrophic decay experiments"
)]
struct Cli {
    experiment: Experiment,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(1);
        }
    };
    let mut cfg = match parse_config(&text, cli.experiment) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let (Some(seed), Some(p)) = (cli.seed, cfg.profile.as_mut()) {
        p.seed = seed;
    }
    let dir = cli
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(format!("sqg-out/{}", cli.experiment)));
    match run(&cfg, cli.experiment, &dir) {
        Ok(summary) => {
            for line in &summary.lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
