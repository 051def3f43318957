//! `sim`: run a figure preset, a custom sweep, or the oracle suite.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use leo_sg::experiment::{run, ExperimentConfig, ExperimentKind};
use leo_sg::Error;

#[derive(Parser, Debug)]
#[command(name = "sim", version, about = "Stochastic-geometry LEO network simulator")]
struct Args {
    /// fig3, fig4, fig5, custom or validate.
    experiment: String,
    /// TOML config; the built-in preset is used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    workers: Option<usize>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 3,
        Error::Calibration(_) => 1,
        Error::Config(_) | Error::Domain(_) | Error::Unsupported(_) => 2,
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("sim: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn execute(args: &Args) -> leo_sg::Result<ExitCode> {
    let kind = ExperimentKind::parse(&args.experiment).ok_or_else(|| {
        Error::Config(format!(
            "unknown experiment '{}' (expected fig3, fig4, fig5, custom or validate)",
            args.experiment
        ))
    })?;
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path).map_err(|e| match e {
            Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?,
        None => ExperimentConfig::preset(kind),
    };
    if let Some(s) = args.seed {
        config.master_seed = s;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(&config.output_dir));

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let result = pool.install(|| run(&config, kind))?;
    result.write(&out)?;

    if kind == ExperimentKind::Validate {
        for line in result.summary.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")) {
            println!("{line}");
        }
    }
    println!("wrote {} ({} rows)", result.csv_path(&out).display(), result.rows);
    if let Some(c) = result.calibration {
        println!("calibrated noise {:.4} dBW (peak at N = {})", c.noise_dbw, c.peak_n);
    }
    Ok(if result.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
