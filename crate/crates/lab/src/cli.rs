//! `qipm` command line. Exit status: 0 on success or convergence, 2 when a
//! solve does not converge, 1 on any error.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qipm_core::ipm::{self, IpmConfig, NoiseMode};
use qipm_core::socp::linear_residuals;
use qipm_core::svm::{self, MarginRule};
use qipm_core::Error as CoreError;
use serde::Serialize;

use crate::fit::fit_power_law;
use crate::format::{read_document, write_document, DatasetFile, Document};
use crate::report::{column_points, render};
use crate::sweep::{default_p_grid, doubling_range, read_csv, sweep, write_csv, SweepConfig};

#[derive(Debug, Parser)]
#[command(name = "qipm", version, about = "Inexact interior-point SOCP solver and SVM experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Tomography,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Margin {
    Offset,
    Rescale,
}

impl From<Margin> for MarginRule {
    fn from(m: Margin) -> Self {
        match m {
            Margin::Offset => MarginRule::Offset,
            Margin::Rescale => MarginRule::Rescale,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random SVM training set.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        seed: u64,
        /// How points reach minimum planted margin 1.
        #[arg(long, value_enum, default_value = "offset")]
        margin: Margin,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a cone program or an SVM dataset file.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Penalty for SVM datasets.
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
        /// Per-iteration JSON trace.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run the scaling experiment over `n = n_min, 2 n_min, …, n_max`.
    Sweep {
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        per_cell: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        seed: u64,
        /// Comma-separated flip probabilities; defaults to 0, 0.1, …, 1.
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value = "offset")]
        margin: Margin,
        /// Write 0 for wall time so the CSV is reproducible byte for byte.
        #[arg(long)]
        no_timing: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit `y = a xᵇ` to a sweep CSV.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "n")]
        x: String,
        #[arg(long, default_value = "cost_metric")]
        y: String,
    },
    /// Summarize a sweep CSV.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

pub fn execute(command: Command) -> Result<ExitCode> {
    match command {
        Command::Gen {
            n,
            m,
            p,
            seed,
            margin,
            out,
        } => {
            let g = svm::generate_planted_with(n, m, p, seed, margin.into())?;
            write_document(&out, &Document::Svm(DatasetFile::from_dataset(&g.train)))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            instance,
            mode,
            epsilon,
            seed,
            c,
            trace,
        } => solve(instance, mode, epsilon, seed, c, trace),
        Command::Sweep {
            n_min,
            n_max,
            per_cell,
            epsilon,
            c,
            seed,
            p,
            margin,
            no_timing,
            out,
        } => {
            if n_min > n_max {
                bail!("--n-min {n_min} exceeds --n-max {n_max}");
            }
            let cfg = SweepConfig {
                n_values: doubling_range(n_min, n_max),
                per_cell,
                p_grid: p.unwrap_or_else(default_p_grid),
                epsilon,
                c,
                seed,
                margin: margin.into(),
                workers: None,
                timing: !no_timing,
                progress: true,
            };
            let records = sweep(&cfg)?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_csv(&records, BufWriter::new(file))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Fit { input, x, y } => {
            if x != "n" {
                bail!("only --x n is supported, got {x}");
            }
            let file = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let records = read_csv(file)?;
            let points = column_points(&records, &y)
                .with_context(|| format!("unknown column {y}"))?;
            println!("{}", fit_power_law(&points)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { input, out } => {
            let file = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let records = read_csv(file)?;
            fs::write(&out, render(&records)).with_context(|| format!("writing {}", out.display()))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

#[derive(Serialize)]
struct TraceLine {
    index: usize,
    mu_before: f64,
    mu_after: f64,
    d_after: f64,
    delta: f64,
    injected_error: f64,
    kappa: Option<f64>,
    zeta: Option<f64>,
    step_length: f64,
    primal_residual: f64,
    dual_residual: f64,
    violations: Vec<String>,
}

fn solve(
    path: PathBuf,
    mode: Mode,
    epsilon: f64,
    seed: u64,
    c: f64,
    trace_path: Option<PathBuf>,
) -> Result<ExitCode> {
    let (inst, hint) = match read_document(&path)? {
        Document::Socp(f) => f.to_instance()?,
        Document::Svm(f) => (svm::to_socp(&f.to_dataset()?, c)?, None),
    };
    let cfg = IpmConfig {
        epsilon,
        seed,
        noise_mode: match mode {
            Mode::Exact => NoiseMode::Exact,
            Mode::Tomography => NoiseMode::Tomography,
        },
        ..IpmConfig::default()
    };
    let start = ipm::initial_point(&inst, hint.as_ref())?;
    let trace = match ipm::run_from(&inst, start, &cfg) {
        Ok(t) => t,
        Err(e @ CoreError::Stalled { .. }) => {
            eprintln!("not converged: {e}");
            return Ok(ExitCode::from(2));
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(p) = trace_path {
        let lines: Vec<TraceLine> = trace
            .records
            .iter()
            .map(|r| TraceLine {
                index: r.index,
                mu_before: r.mu_before,
                mu_after: r.mu_after,
                d_after: r.d_after,
                delta: r.delta_i,
                injected_error: r.injected_error,
                kappa: r.kappa_i,
                zeta: r.zeta_i,
                step_length: r.step_length,
                primal_residual: r.primal_residual,
                dual_residual: r.dual_residual,
                violations: r.violations.clone(),
            })
            .collect();
        let text = serde_json::to_string_pretty(&lines)?;
        fs::write(&p, text + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    let (primal, dual) = linear_residuals(&inst, &trace.final_iterate);
    println!("converged: {}", trace.converged);
    println!("iterations: {}", trace.iterations());
    println!("mu: {:e}", trace.final_iterate.mu());
    println!("primal_residual: {primal:e}");
    println!("dual_residual: {dual:e}");
    if let Some(cost) = trace.cost_metric {
        println!("cost_metric: {cost:e}");
    }
    Ok(if trace.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}
