use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use phasekit_cli::verify::{run_suites, SUITES};
use phasekit_cli::{Pipeline, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Phase reduction of coupled oscillators and dead-zone detection.
#[derive(Debug, Parser)]
#[command(name = "phasekit", version, about)]
struct Cli {
    /// TOML run configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Phase grid size (overrides `numerics.grid`).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Suppress progress messages.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Locate the attracting cycle: cycle.csv, cycle.json.
    LimitCycle,
    /// Adjoint phase response curve: prc.csv, prc.json.
    Prc,
    /// Averaged interaction function: h.csv, reduce.json (and gpr.csv).
    Reduce,
    /// Dead zones of every column of a sampled function: dz.json.
    Deadzone {
        /// Sampled function CSV (defaults to h.csv in the output directory).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Absolute threshold η.
        #[arg(long, conflicts_with = "eta_rel", allow_hyphen_values = true)]
        eta: Option<f64>,
        /// Threshold relative to max |f|.
        #[arg(long)]
        eta_rel: Option<f64>,
    },
    /// Full pair simulations: ensemble.csv, ensemble_report.json.
    Ensemble {
        /// Coupling strength (overrides `coupling.eps`).
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<f64>,
        /// Ensemble size (overrides `numerics.ensemble_size`).
        #[arg(long)]
        n: Option<usize>,
        /// Final time (overrides `numerics.t_final`).
        #[arg(long = "T")]
        t_final: Option<f64>,
    },
    /// Dead-zone checks and reference reproductions: verify.json.
    Verify {
        /// Suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Fourier truncation and its dead zones: h_fourier.csv, fourier.json.
    Fourier {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Number of harmonics kept (overrides `numerics.fourier_order`).
        #[arg(long)]
        order: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::LimitCycle => "limit-cycle",
            Command::Prc => "prc",
            Command::Reduce => "reduce",
            Command::Deadzone { .. } => "deadzone",
            Command::Ensemble { .. } => "ensemble",
            Command::Verify { .. } => "verify",
            Command::Fourier { .. } => "fourier",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failed) => {
            eprintln!("error: {failed} check(s) failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Runs one command; returns the number of failed checks.
fn run(cli: Cli) -> Result<usize> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &cli.out_dir {
        cfg.output.dir = d.clone();
    }
    if let Some(g) = cli.grid {
        cfg.numerics.grid = g;
    }
    if let Command::Ensemble { eps, n, t_final } = &cli.command {
        cfg.coupling.eps = eps.unwrap_or(cfg.coupling.eps);
        cfg.numerics.ensemble_size = n.unwrap_or(cfg.numerics.ensemble_size);
        cfg.numerics.t_final = t_final.unwrap_or(cfg.numerics.t_final);
    }
    let name = cli.command.name();
    let mut p = Pipeline::new(cfg, cli.seed, cli.quiet)?;
    let mut failed = 0;
    match &cli.command {
        Command::LimitCycle => {
            let c = p.limit_cycle()?;
            println!("period {}", c.period);
        }
        Command::Prc => {
            let a = p.prc()?;
            println!("normalization residual {:e}", a.diagnostics.residual);
        }
        Command::Reduce => {
            let f = p.reduce()?;
            println!("max |h| {:e}", f.h.max_abs());
        }
        Command::Deadzone { input, eta, eta_rel } => {
            for r in p.deadzone(input.as_deref(), *eta, *eta_rel)? {
                let arcs: Vec<String> = r.arcs.iter().map(|a| a.to_string()).collect();
                println!("{}: {} arc(s) {}", r.source, arcs.len(), arcs.join(" "));
            }
        }
        Command::Ensemble { .. } => {
            let r = p.ensemble()?;
            println!(
                "median drift error {:.4}, {} frozen member(s)",
                r.comparison.median_rel_error,
                r.comparison.frozen_members.len()
            );
        }
        Command::Fourier { input, order } => {
            p.fourier(input.as_deref(), *order)?;
        }
        Command::Verify { suite } => {
            let names: Vec<&str> = if suite == "all" {
                SUITES.to_vec()
            } else {
                suite.split(',').map(str::trim).collect()
            };
            let checks = run_suites(&names, cli.seed).map_err(anyhow::Error::msg).context("verify")?;
            for c in &checks {
                println!("{} [{}] {}", if c.passed { "PASS" } else { "FAIL" }, c.suite, c.name);
            }
            failed = checks.iter().filter(|c| !c.passed).count();
            p.write_json("verify.json", &checks)?;
        }
    }
    p.finish(name)?;
    Ok(failed)
}
