//! Command-line driver for the `ltlab-core` experiments.

pub mod accept;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod sweep;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::accept::AcceptOptions;
use crate::commands::{curve, GridArg, RangeArg, ResponseKind, WeightKind};
use crate::config::ExperimentConfig;
use crate::error::{exit, CliError, CliResult};
use crate::report::{plot_data, Sink, Table};
use crate::sweep::SweepKind;

#[derive(Debug, Parser)]
#[command(name = "ltlab", version, about = "Lieb-Thirring numerics for Fermi gases at positive density")]
pub struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; without it the primary artifact goes to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Seed for every random stream (default: config seed, else 1).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Treat a degenerate Fermi level as an error (exit code 4).
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Semiclassical constants and the duality residual.
    Constants {
        #[arg(long, default_value = "1..3")]
        d: RangeArg,
        #[arg(long, default_value = "1..2")]
        q: RangeArg,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
    },
    /// Tabulates a response function.
    Response {
        kind: ResponseKind,
        #[arg(long)]
        d: Option<usize>,
        /// Comma-separated wavenumbers.
        #[arg(long, value_delimiter = ',', conflicts_with = "grid")]
        k: Vec<f64>,
        /// `start:stop:count`.
        #[arg(long)]
        grid: Option<GridArg>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, value_enum, default_value_t = WeightKind::Density)]
        weight: WeightKind,
    },
    /// Rumin integral profile and the ratio to the kinetic lower bound.
    Rumin {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, default_value_t = 1e-6)]
        rho_min: f64,
        #[arg(long, default_value_t = 1e8)]
        rho_max: f64,
    },
    /// Exact diagonalisation in a periodic box (requires --config).
    BoxRun,
    /// Parameter sweeps.
    Sweep { kind: SweepKind },
    /// Randomized checks of the finite-dimensional trace inequalities.
    MatrixOracle {
        #[arg(long, default_value_t = 200)]
        pairs: usize,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 2)]
        dim_min: usize,
        #[arg(long, default_value_t = 8)]
        dim_max: usize,
    },
    /// Runs the acceptance suite.
    Accept {
        /// Comma-separated criterion ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

fn load_config(cli: &Cli) -> CliResult<Option<ExperimentConfig>> {
    cli.config.as_deref().map(ExperimentConfig::load).transpose()
}

fn write_table(sink: &Sink, name: &str, t: &Table) -> CliResult<()> {
    sink.primary(&format!("{name}.csv"), &t.to_csv()?)
}

/// Runs the parsed command on a pool of `--jobs` threads and returns the exit code.
pub fn run(cli: Cli) -> CliResult<i32> {
    if cli.jobs == 0 {
        return Err(CliError::Config("--jobs must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::Resource(e.to_string()))?;
    pool.install(|| dispatch(&cli))
}

fn dispatch(cli: &Cli) -> CliResult<i32> {
    let cfg = load_config(cli)?;
    let seed = cli.seed.or(cfg.as_ref().and_then(|c| c.seed)).unwrap_or(1);
    let sink = Sink::new(cli.out.as_deref())?;
    match &cli.command {
        Command::Constants { d, q, mu } => {
            write_table(&sink, "constants", &commands::constants(*d, *q, *mu)?)?;
        }
        Command::Response { kind, d, k, grid, mu, weight } => {
            let ks = match grid {
                Some(g) => g.points(),
                None => k.clone(),
            };
            if ks.is_empty() {
                return Err(CliError::Config("give --k or --grid".into()));
            }
            let (label, t) = commands::response(*kind, *d, &ks, *mu, *weight)?;
            write_table(&sink, &label, &t)?;
            sink.secondary(&format!("{label}.dat"), &plot_data("k", "value", &curve(&t, 0, 1)))?;
        }
        Command::Rumin { d, points, rho_min, rho_max } => {
            let (t, rep) = commands::rumin(*d, *points, *rho_min, *rho_max, seed)?;
            write_table(&sink, "rumin", &t)?;
            sink.secondary("rumin.json", &rep.to_bytes())?;
            sink.secondary("rumin_ratio.dat", &plot_data("rho", "ratio", &curve(&t, 0, 3)))?;
            if !rep.passed {
                return Ok(exit::ACCEPTANCE);
            }
        }
        Command::BoxRun => {
            let cfg = cfg.ok_or_else(|| CliError::Config("box-run needs --config".into()))?;
            let o = commands::box_run(&cfg, cli.strict, seed)?;
            commands::write_box_run(&o, &cfg, &sink)?;
            return Ok(o.exit_code);
        }
        Command::Sweep { kind } => {
            let cfg = cfg.unwrap_or_default();
            let o = sweep::sweep(*kind, &cfg, seed)?;
            sink.primary("report.json", &o.report.to_bytes())?;
            sink.secondary("levels.csv", &o.levels.to_csv()?)?;
            sink.secondary("summary.csv", &o.summary.to_csv()?)?;
            if let Some((name, pts)) = &o.plot {
                if cfg.output.plots {
                    let (x, y) = name.trim_end_matches(".dat").split_once('_').unwrap_or(("x", "y"));
                    sink.secondary(name, &plot_data(x, y, pts))?;
                }
            }
            return Ok(o.exit_code);
        }
        Command::MatrixOracle { pairs, samples, dim_min, dim_max } => {
            let s = commands::matrix_oracle(seed, *pairs, *samples, (*dim_min, *dim_max))?;
            let mut rep = report::RunReport::new(
                "matrix-oracle",
                seed,
                json!({ "pairs": pairs, "samples": samples, "dim_min": dim_min, "dim_max": dim_max }),
            );
            rep.results = json!({ "excluded_degenerate": s.excluded_degenerate });
            rep.assertions = s.assertions;
            let rep = rep.finish();
            sink.primary("report.json", &rep.to_bytes())?;
            sink.secondary("trials.csv", &s.table.to_csv()?)?;
            if !rep.passed {
                return Ok(exit::ACCEPTANCE);
            }
        }
        Command::Accept { only, inject_fault } => {
            let opts = AcceptOptions { seed: cli.seed.unwrap_or(accept::DEFAULT_SEED), only: only.clone(), inject_fault: *inject_fault };
            let o = accept::run_suite(&opts);
            for c in &o.criteria {
                println!("{}", c.line());
            }
            sink.secondary("accept.json", &o.report.to_bytes())?;
            eprintln!("accept: {:.1} s", o.elapsed.as_secs_f64());
            return Ok(if o.passed() { exit::SUCCESS } else { exit::ACCEPTANCE });
        }
    }
    Ok(exit::SUCCESS)
}
