use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sparselap_cli::commands::{
    cmd_estimate, cmd_eval, cmd_generate, cmd_stocks, cmd_sweep, error_exit_code, status_exit_code,
    EstimateArgs, EstimateInput, EvalArgs, GenerateArgs, SolverFlags, StocksArgs, SweepArgs,
};
use sparselap_core::metrics::DEFAULT_THRESHOLD;
use sparselap_core::Result;

/// Sparse graph Laplacian estimation from Gaussian data.
#[derive(Parser)]
#[command(name = "sparselap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a weighted Erdos-Renyi graph and samples from its model.
    Generate {
        #[arg(long)]
        p: usize,
        /// Defaults to min(2 ln p / p, 1).
        #[arg(long)]
        edge_prob: Option<f64>,
        #[command(flatten)]
        weights: WeightRange,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate an s-edge graph from a covariance or a sample file.
    Estimate {
        #[arg(long, conflicts_with = "samples", required_unless_present = "samples")]
        covariance: Option<PathBuf>,
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long)]
        s: usize,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// F-score against a truth, or modularity against sector labels.
    Eval {
        #[arg(long)]
        estimate: PathBuf,
        #[arg(long, required_unless_present = "sectors")]
        truth: Option<PathBuf>,
        /// ticker,sector rows; row v labels vertex v.
        #[arg(long)]
        sectors: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean F-score against sample size over random ground truths.
    Sweep {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        edge_prob: f64,
        #[command(flatten)]
        weights: WeightRange,
        /// Comma-separated, e.g. 30,300,3000.
        #[arg(long, value_delimiter = ',', required = true)]
        sample_sizes: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Defaults to the available parallelism.
        #[arg(long)]
        workers: Option<usize>,
        /// CSV destination; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stock graph from daily prices, scored against sectors.
    Stocks {
        #[arg(long)]
        prices: PathBuf,
        #[arg(long)]
        sectors: PathBuf,
        #[arg(long)]
        s: usize,
        /// Center returns before forming the covariance (default).
        #[arg(long, overrides_with = "no_demean")]
        demean: bool,
        #[arg(long, overrides_with = "demean")]
        no_demean: bool,
        /// Skip rows with missing or non-positive prices instead of failing.
        #[arg(long)]
        drop_bad_rows: bool,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct WeightRange {
    #[arg(long, default_value_t = 2.0)]
    weight_low: f64,
    #[arg(long, default_value_t = 5.0)]
    weight_high: f64,
}

#[derive(Args)]
struct SolverArgs {
    /// Initial step, on data scaled to unit mean variance.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

impl From<SolverArgs> for SolverFlags {
    fn from(a: SolverArgs) -> Self {
        SolverFlags {
            sigma: a.sigma,
            beta: a.beta,
            alpha: a.alpha,
            tol: a.tol,
            max_iter: a.max_iter,
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Generate {
            p,
            edge_prob,
            weights,
            n,
            seed,
            out,
        } => {
            let g = cmd_generate(&GenerateArgs {
                p,
                edge_prob,
                weight_low: weights.weight_low,
                weight_high: weights.weight_high,
                n,
                seed,
                out: out.clone(),
            })?;
            println!(
                "generated p={p} edges={} n={n} into {}",
                g.graph.edge_count(),
                out.display()
            );
            Ok(0)
        }
        Command::Estimate {
            covariance,
            samples,
            s,
            solver,
            threshold,
            out,
        } => {
            let input = match (covariance, samples) {
                (Some(c), _) => EstimateInput::Covariance(c),
                (None, Some(s)) => EstimateInput::Samples(s),
                (None, None) => unreachable!("clap requires one input"),
            };
            let e = cmd_estimate(&EstimateArgs {
                input,
                s,
                solver: solver.into(),
                threshold,
                out,
            })?;
            println!(
                "{} after {} iterations, objective {:.10}, {} edges",
                e.result.status.as_str(),
                e.result.iterations,
                e.result.objective(),
                e.edges.edges.len()
            );
            Ok(status_exit_code(e.result.status))
        }
        Command::Eval {
            estimate,
            truth,
            sectors,
            threshold,
            out,
        } => {
            let r = cmd_eval(&EvalArgs {
                estimate,
                truth,
                sectors,
                threshold,
                out,
            })?;
            if let Some(f) = r.fscore {
                println!("fscore\t{f}");
            }
            if let Some(q) = r.modularity {
                println!("modularity\t{q}");
            }
            Ok(0)
        }
        Command::Sweep {
            p,
            edge_prob,
            weights,
            sample_sizes,
            trials,
            seed,
            solver,
            threshold,
            workers,
            out,
        } => {
            let report = cmd_sweep(&SweepArgs {
                p,
                edge_prob,
                weight_low: weights.weight_low,
                weight_high: weights.weight_high,
                sample_sizes,
                trials,
                seed,
                solver: solver.into(),
                threshold,
                workers,
                out: out.clone(),
            })?;
            if out.is_none() {
                print!("{}", report.to_csv());
            }
            Ok(0)
        }
        Command::Stocks {
            prices,
            sectors,
            s,
            demean: _,
            no_demean,
            drop_bad_rows,
            solver,
            threshold,
            out,
        } => {
            let r = cmd_stocks(&StocksArgs {
                prices,
                sectors,
                s,
                demean: !no_demean,
                drop_bad_rows,
                solver: solver.into(),
                threshold,
                out,
            })?;
            println!(
                "{} after {} iterations, {} edges, modularity {:.4}",
                r.result.status.as_str(),
                r.result.iterations,
                r.edges.edges.len(),
                r.modularity
            );
            Ok(status_exit_code(r.result.status))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(error_exit_code(&err) as u8)
        }
    }
}
