//! `ggpa <experiment> [--config PATH] [--seed N] [--out DIR] [--scale ci|paper] [--threads N]`
//!
//! Every flag can also be set through `GGPA_<FLAG>` (e.g. `GGPA_SEED=7`).
//! Exit codes: 0 success, 2 invalid configuration, 3 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ggpa::config::{load_config, Experiment, Scale};
use ggpa::runner::run_experiment;

#[derive(Debug, Parser)]
#[command(name = "ggpa", version, about = "Generative Gibbs sampling experiments")]
struct Cli {
    #[arg(value_enum)]
    experiment: Experiment,
    #[arg(long, env = "GGPA_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, env = "GGPA_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "GGPA_OUT")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, env = "GGPA_SCALE")]
    scale: Option<Scale>,
    #[arg(long, env = "GGPA_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match load_config(cli.config.as_deref(), cli.experiment, cli.scale) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("ggpa: {e}");
            return ExitCode::from(if e.is_config_error() { 2 } else { 3 });
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.out {
        cfg.out_dir = o;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("ggpa: {e}");
        return ExitCode::from(2);
    }
    let run = || run_experiment(&cfg);
    let result = match cfg.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                eprintln!("ggpa: thread pool: {e}");
                return ExitCode::from(3);
            }
        },
        None => run(),
    };
    match result {
        Ok(m) => {
            for f in &m.files {
                println!("{}  {}", f.sha1, cfg.out_dir.join(&f.path).display());
            }
            eprintln!("{} finished in {:.1}s", m.experiment, m.wall_clock_seconds);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ggpa: {} failed: {e}", cfg.experiment.as_str());
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
