//! `rellich` — compute boundary traces of harmonic extensions below
//! periodic graphs, verify the exact trace identities and inequalities they
//! satisfy, and search for extremal configurations.
//!
//! Exit codes: 0 all checks pass, 1 a mathematical check was violated,
//! 2 invocation or input error.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Outcome;
use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "rellich",
    version,
    about = "Boundary-trace identities and inequalities for harmonic extensions on periodic graph domains"
)]
struct Cli {
    /// JSON run configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// CSV output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the backend: "conformal" or "fd".
    #[arg(long, global = true)]
    backend: Option<String>,

    /// Override the grid: "M" (d = 1) or "M1,M2" (d = 2).
    #[arg(long, global = true)]
    grid: Option<String>,

    /// Override the random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Exponent for the L^p checks (sweep/optimize), in (1, 2].
    #[arg(long, global = true)]
    p: Option<f64>,

    /// Objective-evaluation budget for optimize.
    #[arg(long, global = true)]
    budget: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce exact harmonic-mode traces with both backends and report
    /// per-case relative errors.
    OracleTest,
    /// Evaluate every identity and inequality for the configured
    /// (surface, data) instance.
    Verify,
    /// Ratio table over single-mode surfaces h = a cos(kx).
    Sweep {
        /// Comma-separated amplitudes, e.g. "0,0.1,0.2".
        #[arg(long, value_delimiter = ',', required = true)]
        amplitudes: Vec<f64>,
        /// Comma-separated wavenumbers, e.g. "1,2,3".
        #[arg(long, value_delimiter = ',', required = true)]
        wavenumbers: Vec<i64>,
        /// Inequality name (see `verify` output for the list).
        #[arg(long)]
        ineq: String,
    },
    /// Derivative-free search for extremal inequality ratios.
    Optimize {
        #[arg(long)]
        ineq: String,
        /// Surface modes searched (wavenumbers 1..=N).
        #[arg(long, default_value_t = 2)]
        modes_h: usize,
        /// Data modes searched (wavenumbers 1..=N).
        #[arg(long, default_value_t = 2)]
        modes_zeta: usize,
        /// Slope cap; defaults to 0.75 (conformal) or 3.0 (fd).
        #[arg(long)]
        slope_cap: Option<f64>,
    },
    /// L1 growth table of the conjugate function of positive summability
    /// kernels.
    DemoL1 {
        /// Comma-separated kernel orders.
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16, 32, 64])]
        n_list: Vec<usize>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    #[cfg(feature = "parallel")]
    if let Ok(threads) = std::env::var("RELLICH_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: RELLICH_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }

    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    apply_overrides(&mut config, &cli)?;

    let out = cli.out.as_deref();
    match &cli.command {
        Command::OracleTest => commands::cmd_oracle_test(&config, out),
        Command::Verify => commands::cmd_verify(&config, out),
        Command::Sweep {
            amplitudes,
            wavenumbers,
            ineq,
        } => commands::cmd_sweep(
            &config,
            amplitudes,
            wavenumbers,
            ineq,
            cli.p.unwrap_or(2.0),
            out,
        ),
        Command::Optimize {
            ineq,
            modes_h,
            modes_zeta,
            slope_cap,
        } => commands::cmd_optimize(
            &config,
            ineq,
            cli.p.unwrap_or(2.0),
            *modes_h,
            *modes_zeta,
            cli.budget.unwrap_or(500),
            *slope_cap,
            out,
        ),
        Command::DemoL1 { n_list } => {
            let grid_m = cli.grid.as_deref().map(parse_grid).transpose()?.map(|g| g.0);
            commands::cmd_demo_l1(n_list, grid_m, out)
        }
    }
}

fn apply_overrides(config: &mut RunConfig, cli: &Cli) -> anyhow::Result<()> {
    if let Some(backend) = &cli.backend {
        config.backend = match backend.as_str() {
            "conformal" => config::BackendKind::Conformal,
            "fd" => config::BackendKind::Fd,
            other => anyhow::bail!("unknown backend `{other}` (use \"conformal\" or \"fd\")"),
        };
    }
    if let Some(grid) = &cli.grid {
        let (m, m2) = parse_grid(grid)?;
        config.grid.m = m;
        config.grid.m2 = m2;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(())
}

fn parse_grid(text: &str) -> anyhow::Result<(usize, Option<usize>)> {
    let parts: Vec<&str> = text.split(',').collect();
    match parts.as_slice() {
        [m] => Ok((m.trim().parse()?, None)),
        [m, m2] => Ok((m.trim().parse()?, Some(m2.trim().parse()?))),
        _ => anyhow::bail!("grid must be \"M\" or \"M1,M2\""),
    }
}
