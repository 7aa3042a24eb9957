use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lesskit::data::format_significant;
use lesskit::harness::{
    run_diagnostics, run_lasso_sweep, run_leverage, run_ols_sweep, run_svd_sweep, write_diagnostics_outputs,
    write_meta, write_sweep_outputs, ExperimentConfig, Mode,
};
use lesskit::{Error, SweepResult};

#[derive(Parser)]
#[command(name = "lesskit", version, about = "Monte Carlo sweeps and diagnostics for sketched least squares")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sketch-and-solve least squares error against sketch size.
    SweepOls(Common),
    /// l1-constrained least squares error against sketch size.
    SweepLasso(Common),
    /// Randomized low-rank approximation error against sketch size.
    SweepSvd(Common),
    /// Tail, uniformity, distortion and hat-matrix diagnostics.
    Diagnose(Common),
    /// Leverage scores and LESS sampling probabilities of the dataset.
    Leverage(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config file (flat key = value format).
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(common: &Common, mode: Mode) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::from_file(&common.config)?;
    cfg.mode = mode;
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_sweep(results: &[SweepResult], dir: &Path) {
    println!(
        "{:<16} {:>6} {:>8} {:>14} {:>14} {:>14} {:>6}",
        "operator", "n", "trials", "mean", "stderr", "formula", "degen"
    );
    for r in results {
        println!(
            "{:<16} {:>6} {:>8} {:>14} {:>14} {:>14} {:>6}",
            r.operator,
            r.n,
            r.trials,
            format_significant(r.mean_norm_err, 6),
            format_significant(r.stderr, 3),
            format_significant(r.gaussian_formula, 6),
            r.degenerate_count
        );
    }
    println!("wrote {}", dir.display());
}

fn run(command: Command) -> Result<(), Error> {
    let (common, mode) = match &command {
        Command::SweepOls(c) => (c, Mode::OlsSweep),
        Command::SweepLasso(c) => (c, Mode::LassoSweep),
        Command::SweepSvd(c) => (c, Mode::SvdSweep),
        Command::Diagnose(c) => (c, Mode::Diagnostics),
        Command::Leverage(c) => (c, Mode::OlsSweep),
    };
    let cfg = load(common, mode)?;
    let dir = cfg.output_dir.clone();
    match command {
        Command::SweepOls(_) | Command::SweepLasso(_) | Command::SweepSvd(_) => {
            let results = match mode {
                Mode::OlsSweep => run_ols_sweep(&cfg)?,
                Mode::LassoSweep => run_lasso_sweep(&cfg)?,
                _ => run_svd_sweep(&cfg)?,
            };
            write_sweep_outputs(&cfg, &results, &dir)?;
            print_sweep(&results, &dir);
        }
        Command::Diagnose(_) => {
            let reports = run_diagnostics(&cfg)?;
            write_diagnostics_outputs(&cfg, &reports, &dir)?;
            for r in &reports {
                print!("{}", r.render());
            }
            println!("wrote {}", dir.display());
        }
        Command::Leverage(_) => {
            let profile = run_leverage(&cfg)?;
            std::fs::create_dir_all(&dir)?;
            let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("leverage.csv"))?);
            writeln!(f, "row,score,probability")?;
            for (i, (l, p)) in profile.scores.iter().zip(&profile.probs).enumerate() {
                writeln!(f, "{i},{},{}", format_significant(*l, 10), format_significant(*p, 10))?;
            }
            f.flush()?;
            write_meta(&cfg, &dir)?;
            println!("rows = {}", profile.len());
            println!("dim = {}", profile.dim);
            println!("exact = {}", profile.exact);
            println!("coherence = {}", format_significant(profile.coherence, 10));
            println!("wrote {}", dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) => {
            eprintln!("lesskit: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("lesskit: {e}");
            ExitCode::from(2)
        }
    }
}
