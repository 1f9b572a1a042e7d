use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use cylscale::io::{cmd_portrait, cmd_resolvent, cmd_resonances, cmd_validate, CommandOptions, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "cylscale", version, about = "Complex scaling spectra of waveguides with cylindrical ends")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the assembled K and M as Matrix Market files.
    #[arg(long)]
    dump_matrices: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spectrum, ray classification and SVG portrait for the first λ.
    Portrait(Common),
    /// Resonance detection across λ and profile variants.
    Resonances(Common),
    /// Resolvent matrix elements along a μ path, one trace per λ.
    Resolvent(Common),
    /// Invariant checks; exits with status 1 if any fails.
    Validate(Common),
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (Command::Portrait(c) | Command::Resonances(c) | Command::Resolvent(c) | Command::Validate(c)) = &cli.command;
    let cfg = RunConfig::load(&c.config).with_context(|| format!("loading {}", c.config.display()))?;
    let opts = CommandOptions {
        seed: c.seed,
        dump_matrices: c.dump_matrices,
    };
    match &cli.command {
        Command::Portrait(_) => {
            let f = cmd_portrait(&cfg, &c.out, &opts)?;
            println!(
                "{} eigenvalues ({} ray, {} discrete), ray angle {:.6}",
                f.report.entries.len(),
                f.report.count(cylscale::spectral::Tag::Ray),
                f.report.count(cylscale::spectral::Tag::Discrete),
                f.rays.angle
            );
            if !f.eigen.converged {
                log::warn!("only {} of {} requested eigenpairs converged", f.eigen.len(), f.eigen.requested);
            }
        }
        Command::Resonances(_) => {
            let r = cmd_resonances(&cfg, &c.out, &opts)?;
            println!(
                "{} resonances, {} stable discrete, {} unresolved",
                r.count(cylscale::spectral::Tag::Resonance),
                r.entries
                    .iter()
                    .filter(|e| e.tag == cylscale::spectral::Tag::Discrete && e.stability.is_some())
                    .count(),
                r.count(cylscale::spectral::Tag::Unresolved)
            );
        }
        Command::Resolvent(_) => {
            let s = cmd_resolvent(&cfg, &c.out, &opts)?;
            println!("{} traces, agreement {:.3e}", s.traces.len(), s.agreement);
        }
        Command::Validate(_) => {
            let r = cmd_validate(&cfg, &c.out, &opts)?;
            for chk in &r.checks {
                println!(
                    "{} {:<28} measured {:.3e} (threshold {:.3e})",
                    if chk.passed { "PASS" } else { "FAIL" },
                    chk.name,
                    chk.measured,
                    chk.threshold
                );
            }
            return Ok(r.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
