use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ltf_cli::commands::{self, override_lambda_grid, Command};
use ltf_cli::config::{parse_lambda_grid, RunConfig};
use ltf_cli::report::{merge, summaries_in, write_acceptance};

#[derive(Parser, Debug)]
#[command(name = "ltf", version, about = "Verification suites and experiments for local trace-formula asymptotics")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration file; defaults reproduce the reference runs.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Multiplies every error tolerance.
    #[arg(long, global = true)]
    tol_scale: Option<f64>,
    /// `a:b:n` evenly spaced lambda values, replacing the command's grid.
    #[arg(long, global = true)]
    lambda_grid: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Profile-form identities, unitary reduction and negativity on the image.
    Identities,
    /// Stationary point, Hessian, determinant and inverse of the phase.
    Stationary,
    /// Model oscillatory integral against the leading term over a lambda grid.
    Oscillatory,
    /// Projective-line experiments.
    Cp1 {
        #[command(subcommand)]
        which: Cp1Cmd,
    },
    /// Merges summaries into `<out>/acceptance.json`.
    Report {
        /// Summary files; defaults to every `*.summary.json` in the output directory.
        paths: Vec<PathBuf>,
    },
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cp1Cmd {
    /// Kernel profile near the fixed point, width fit, symbol scaling and parity.
    Profile,
    /// Decay away from the periodic locus.
    Decay,
    /// Negative spectral parameter.
    Negative,
}

fn load_config(common: &Common, cmd: Command) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(scale) = common.tol_scale {
        anyhow::ensure!(scale > 0.0 && scale.is_finite(), "--tol-scale must be positive");
        cfg.scale_tolerances(scale);
    }
    if let Some(grid) = &common.lambda_grid {
        override_lambda_grid(&mut cfg, cmd, parse_lambda_grid(grid)?);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    let cmd = match cli.command {
        Cmd::Identities => Command::Identities,
        Cmd::Stationary => Command::Stationary,
        Cmd::Oscillatory => Command::Oscillatory,
        Cmd::Cp1 { which: Cp1Cmd::Profile } => Command::Cp1Profile,
        Cmd::Cp1 { which: Cp1Cmd::Decay } => Command::Cp1Decay,
        Cmd::Cp1 { which: Cp1Cmd::Negative } => Command::Cp1Negative,
        Cmd::Report { paths } => {
            let paths = if paths.is_empty() { summaries_in(&cli.common.out)? } else { paths };
            let acc = merge(&paths)?;
            let path = write_acceptance(&cli.common.out, &acc)?;
            for (name, s) in &acc.commands {
                println!("{name}: {} ({} passed, {} failed)", if s.pass { "PASS" } else { "FAIL" }, s.passed, s.failed);
            }
            println!("{}: {}", path.display(), if acc.pass { "PASS" } else { "FAIL" });
            return Ok(acc.pass);
        }
    };
    let cfg = load_config(&cli.common, cmd)?;
    let report = commands::run(cmd, &cfg)?;
    let (csv, json) = report.write(&cli.common.out)?;
    let summary = report.summary();
    let acc = merge(&summaries_in(&cli.common.out)?)?;
    write_acceptance(&cli.common.out, &acc)?;
    println!(
        "{}: {} ({} passed, {} failed, {} informational) -> {}, {}",
        summary.command,
        if summary.pass { "PASS" } else { "FAIL" },
        summary.passed,
        summary.failed,
        summary.informational,
        csv.display(),
        json.display()
    );
    for id in summary.failures.iter().take(10) {
        println!("  failed: {id}");
    }
    Ok(summary.pass)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
