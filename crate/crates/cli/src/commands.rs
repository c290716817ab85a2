//! The subcommands, as library functions. `main` only parses flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sparselap_core::{
    covariance_from_returns, default_edge_prob, edge_set_from_weights, erdos_renyi_weighted,
    f_score, load_prices, load_sectors, log_returns, mean_variance, modularity, sample_covariance,
    sample_lggm, solve_normalized, Error, GroundTruthGraph, Iterate, LoadOptions, Result,
    SampleCovariance, SampleSet, SectorLabeling, SolveStatus, SolverConfig, SolverResult,
    WeightVector,
};

use crate::formats::{read_labels_in_order, write_file, EdgeList, MatrixFile};
use crate::record::{ResultSummary, RunRecord, SolverEcho, RUN_RECORD_VERSION};

pub const TRUTH_EDGES: &str = "truth_edges.tsv";
pub const SAMPLES: &str = "samples.txt";
pub const COVARIANCE: &str = "covariance.txt";
pub const ESTIMATE_EDGES: &str = "estimate_edges.tsv";
pub const ANNOTATED_EDGES: &str = "estimate_edges_annotated.tsv";
pub const RUN_RECORD: &str = "run_record.json";

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

/// Solver overrides; unset fields take the library defaults. Solves run on
/// the covariance scaled to unit mean variance, so `sigma` and `tol` are
/// independent of the data's units.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverFlags {
    pub sigma: Option<f64>,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl SolverFlags {
    pub fn config(&self, s: usize) -> SolverConfig {
        let mut cfg = SolverConfig::new(s);
        if let Some(v) = self.sigma {
            cfg.sigma = v;
        }
        if let Some(v) = self.beta {
            cfg.beta = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        cfg
    }
}

/// Process exit code for a finished solve.
pub fn status_exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Converged => 0,
        SolveStatus::MaxIterations => 3,
        SolveStatus::LineSearchStalled => 5,
    }
}

/// Process exit code for a failed command.
pub fn error_exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => 4,
        _ => 2,
    }
}

fn estimate_with(
    cov: &SampleCovariance,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<SolverResult> {
    // Reject a bad budget before any work is done.
    cfg.validate(cov.p())?;
    solve_normalized(cov, cfg, None, observer)
}

// ---------------------------------------------------------------- generate

#[derive(Debug, Clone)]
pub struct GenerateArgs {
    pub p: usize,
    /// Defaults to `min(2 ln p / p, 1)`.
    pub edge_prob: Option<f64>,
    pub weight_low: f64,
    pub weight_high: f64,
    pub n: usize,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug)]
pub struct GenerateOutput {
    pub graph: GroundTruthGraph,
    pub samples: SampleSet,
    pub covariance: SampleCovariance,
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<GenerateOutput> {
    let edge_prob = args.edge_prob.unwrap_or_else(|| default_edge_prob(args.p));
    let graph = erdos_renyi_weighted(
        args.p,
        edge_prob,
        args.weight_low,
        args.weight_high,
        graph_seed(args.seed, 0),
    )?;
    let samples = sample_lggm(&graph, args.n, sample_seed(args.seed, 0, args.n))?;
    let covariance = sample_covariance(&samples)?;

    EdgeList::from_weights(graph.weights(), graph.edge_count(), 0.0)
        .write(&args.out.join(TRUTH_EDGES))?;
    MatrixFile {
        p: args.p,
        n: args.n,
        rows: samples.samples.clone(),
    }
    .write(&args.out.join(SAMPLES))?;
    MatrixFile {
        p: args.p,
        n: args.n,
        rows: covariance.matrix().clone(),
    }
    .write(&args.out.join(COVARIANCE))?;
    Ok(GenerateOutput {
        graph,
        samples,
        covariance,
    })
}

// ---------------------------------------------------------------- estimate

#[derive(Debug, Clone)]
pub enum EstimateInput {
    Covariance(PathBuf),
    /// Zero-mean samples; the covariance is `(1/n) XᵀX`.
    Samples(PathBuf),
}

#[derive(Debug, Clone)]
pub struct EstimateArgs {
    pub input: EstimateInput,
    pub s: usize,
    pub solver: SolverFlags,
    pub threshold: f64,
    pub out: PathBuf,
}

#[derive(Debug)]
pub struct EstimateOutput {
    pub result: SolverResult,
    pub edges: EdgeList,
    pub record: RunRecord,
}

pub fn read_covariance_input(input: &EstimateInput) -> Result<SampleCovariance> {
    match input {
        EstimateInput::Covariance(path) => {
            let m = MatrixFile::read_covariance(path)?;
            SampleCovariance::new(m.rows, m.n)
        }
        EstimateInput::Samples(path) => {
            let m = MatrixFile::read_samples(path)?;
            sample_covariance(&SampleSet {
                samples: m.rows,
                seed: 0,
            })
        }
    }
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<EstimateOutput> {
    let started = Instant::now();
    let cov = read_covariance_input(&args.input)?;
    let cfg = args.solver.config(args.s);
    let result = estimate_with(&cov, &cfg, &mut |_| {})?;

    let edges = EdgeList::from_weights(&result.x, args.s, args.threshold);
    edges.write(&args.out.join(ESTIMATE_EDGES))?;

    let mut inputs = BTreeMap::new();
    let (kind, path) = match &args.input {
        EstimateInput::Covariance(p) => ("covariance", p),
        EstimateInput::Samples(p) => ("samples", p),
    };
    inputs.insert(kind.to_string(), path_str(path));
    inputs.insert("p".into(), cov.p().to_string());
    inputs.insert("n".into(), cov.n().to_string());
    inputs.insert("mean_variance".into(), mean_variance(&cov).to_string());
    let mut metrics = BTreeMap::new();
    metrics.insert("edges".into(), edges.edges.len() as f64);
    let record = RunRecord {
        format_version: RUN_RECORD_VERSION,
        command: "estimate".into(),
        inputs,
        seed: None,
        threshold: args.threshold,
        solver: SolverEcho::from(&cfg),
        result: ResultSummary::from(&result),
        metrics,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    record.write(&args.out.join(RUN_RECORD))?;
    Ok(EstimateOutput {
        result,
        edges,
        record,
    })
}

// -------------------------------------------------------------------- eval

#[derive(Debug, Clone)]
pub struct EvalArgs {
    pub estimate: PathBuf,
    pub truth: Option<PathBuf>,
    /// `ticker,sector` rows; row `v` labels vertex `v`.
    pub sectors: Option<PathBuf>,
    pub threshold: f64,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub estimate: String,
    pub truth: Option<String>,
    pub sectors: Option<String>,
    pub p: usize,
    pub threshold: f64,
    pub fscore: Option<f64>,
    pub modularity: Option<f64>,
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalReport> {
    if args.truth.is_none() && args.sectors.is_none() {
        return Err(invalid("eval needs a truth edge list or a sectors file"));
    }
    let estimate = EdgeList::read(&args.estimate)?;
    let x = estimate.weights()?;
    let mut report = EvalReport {
        estimate: path_str(&args.estimate),
        truth: args.truth.as_deref().map(path_str),
        sectors: args.sectors.as_deref().map(path_str),
        p: estimate.p,
        threshold: args.threshold,
        fscore: None,
        modularity: None,
    };
    if let Some(path) = &args.truth {
        let truth = EdgeList::read(path)?;
        if truth.p != estimate.p {
            return Err(invalid(format!(
                "vertex counts differ: truth has p = {}, estimate has p = {}",
                truth.p, estimate.p
            )));
        }
        let truth_set = edge_set_from_weights(&truth.weights()?, args.threshold);
        let est_set = edge_set_from_weights(&x, args.threshold);
        report.fscore = Some(f_score(&truth_set, &est_set)?);
    }
    if let Some(path) = &args.sectors {
        let rows = read_labels_in_order(path)?;
        if rows.len() != estimate.p {
            return Err(invalid(format!(
                "vertex counts differ: sectors file labels {} vertices, estimate has p = {}",
                rows.len(),
                estimate.p
            )));
        }
        let labeling = SectorLabeling::new(rows.into_iter().map(|(_, s)| s).collect());
        report.modularity = Some(modularity(&x, &labeling)?);
    }
    if let Some(out) = &args.out {
        let mut text = serde_json::to_string_pretty(&report)
            .map_err(|e| invalid(format!("serializing report: {e}")))?;
        text.push('\n');
        write_file(out, &text)?;
    }
    Ok(report)
}

// ------------------------------------------------------------------- sweep

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the ground truth for `trial`.
pub fn graph_seed(seed: u64, trial: usize) -> u64 {
    splitmix64(seed ^ splitmix64(trial as u64))
}

/// Seed of the `n` samples drawn for `trial`.
pub fn sample_seed(seed: u64, trial: usize, n: usize) -> u64 {
    splitmix64(graph_seed(seed, trial) ^ splitmix64(!(n as u64)))
}

#[derive(Debug, Clone)]
pub struct SweepArgs {
    pub p: usize,
    pub edge_prob: f64,
    pub weight_low: f64,
    pub weight_high: f64,
    pub sample_sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub solver: SolverFlags,
    pub threshold: f64,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrialKey {
    pub trial: usize,
    pub n: usize,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub key: TrialKey,
    pub true_edges: usize,
    pub fscore: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub estimate: WeightVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub trials: usize,
    pub mean_fscore: f64,
    pub std_fscore: f64,
    pub min_fscore: f64,
    pub max_fscore: f64,
    pub converged: usize,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Ordered by trial, then by position in `sample_sizes`.
    pub outcomes: Vec<TrialOutcome>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("n,trials,mean_fscore,std_fscore,min_fscore,max_fscore,converged\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.n, r.trials, r.mean_fscore, r.std_fscore, r.min_fscore, r.max_fscore, r.converged
            );
        }
        out
    }
}

/// Called on every accepted iterate of every trial. May run on any worker.
pub type SweepObserver<'a> = &'a (dyn Fn(TrialKey, &Iterate<'_>) + Sync);

pub fn run_sweep(args: &SweepArgs, observer: Option<SweepObserver<'_>>) -> Result<SweepReport> {
    if args.trials < 1 {
        return Err(invalid("trials must be at least 1"));
    }
    if args.sample_sizes.is_empty() {
        return Err(invalid("sample_sizes must not be empty"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers.unwrap_or(0))
        .build()
        .map_err(|e| invalid(format!("worker pool: {e}")))?;

    pool.install(|| {
        let graphs: Vec<GroundTruthGraph> = (0..args.trials)
            .into_par_iter()
            .map(|t| {
                erdos_renyi_weighted(
                    args.p,
                    args.edge_prob,
                    args.weight_low,
                    args.weight_high,
                    graph_seed(args.seed, t),
                )
            })
            .collect::<Result<_>>()?;

        let keys: Vec<TrialKey> = (0..args.trials)
            .flat_map(|trial| {
                args.sample_sizes
                    .iter()
                    .map(move |&n| TrialKey { trial, n })
            })
            .collect();
        let outcomes: Vec<TrialOutcome> = keys
            .into_par_iter()
            .map(|key| run_trial(args, &graphs[key.trial], key, observer))
            .collect::<Result<_>>()?;

        let rows = args
            .sample_sizes
            .iter()
            .map(|&n| summarize(n, outcomes.iter().filter(|o| o.key.n == n)))
            .collect();
        Ok(SweepReport { rows, outcomes })
    })
}

fn run_trial(
    args: &SweepArgs,
    graph: &GroundTruthGraph,
    key: TrialKey,
    observer: Option<SweepObserver<'_>>,
) -> Result<TrialOutcome> {
    let samples = sample_lggm(graph, key.n, sample_seed(args.seed, key.trial, key.n))?;
    let cov = sample_covariance(&samples)?;
    let s = graph.edge_count();
    let cfg = args.solver.config(s);
    let result = match observer {
        Some(obs) => estimate_with(&cov, &cfg, &mut |it| obs(key, it))?,
        None => estimate_with(&cov, &cfg, &mut |_| {})?,
    };
    let truth = edge_set_from_weights(graph.weights(), 0.0);
    let est = edge_set_from_weights(&result.x, args.threshold);
    Ok(TrialOutcome {
        key,
        true_edges: s,
        fscore: f_score(&truth, &est)?,
        status: result.status,
        iterations: result.iterations,
        estimate: result.x,
    })
}

fn summarize<'a>(n: usize, outcomes: impl Iterator<Item = &'a TrialOutcome>) -> SweepRow {
    let outcomes: Vec<&TrialOutcome> = outcomes.collect();
    let k = outcomes.len() as f64;
    let fs: Vec<f64> = outcomes.iter().map(|o| o.fscore).collect();
    let mean = fs.iter().sum::<f64>() / k;
    let std = if fs.len() > 1 {
        (fs.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    SweepRow {
        n,
        trials: fs.len(),
        mean_fscore: mean,
        std_fscore: std,
        min_fscore: fs.iter().copied().fold(f64::INFINITY, f64::min),
        max_fscore: fs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        converged: outcomes
            .iter()
            .filter(|o| o.status == SolveStatus::Converged)
            .count(),
    }
}

/// [`run_sweep`], then write the CSV to `args.out` if set.
pub fn cmd_sweep(args: &SweepArgs) -> Result<SweepReport> {
    let report = run_sweep(args, None)?;
    if let Some(out) = &args.out {
        write_file(out, &report.to_csv())?;
    }
    Ok(report)
}

// ------------------------------------------------------------------ stocks

#[derive(Debug, Clone)]
pub struct StocksArgs {
    pub prices: PathBuf,
    pub sectors: PathBuf,
    pub s: usize,
    pub demean: bool,
    pub drop_bad_rows: bool,
    pub solver: SolverFlags,
    pub threshold: f64,
    pub out: PathBuf,
}

#[derive(Debug)]
pub struct StocksOutput {
    pub tickers: Vec<String>,
    pub labeling: SectorLabeling,
    pub result: SolverResult,
    pub modularity: f64,
    pub edges: EdgeList,
    pub record: RunRecord,
}

pub fn cmd_stocks(args: &StocksArgs) -> Result<StocksOutput> {
    let started = Instant::now();
    let prices = load_prices(
        &args.prices,
        LoadOptions {
            drop_bad_rows: args.drop_bad_rows,
        },
    )?;
    let labeling = load_sectors(&args.sectors, &prices.tickers)?;
    let returns = log_returns(&prices)?;
    let cov = covariance_from_returns(&returns, args.demean)?;
    let cfg = args.solver.config(args.s);
    let result = estimate_with(&cov, &cfg, &mut |_| {})?;
    let q = modularity(&result.x, &labeling)?;

    let edges = EdgeList::from_weights(&result.x, args.s, args.threshold);
    edges.write(&args.out.join(ESTIMATE_EDGES))?;
    write_file(
        &args.out.join(ANNOTATED_EDGES),
        &annotate(&edges, &prices.tickers, &labeling),
    )?;

    let intra = edges
        .edges
        .iter()
        .filter(|&&(i, j, _)| labeling.label(i) == labeling.label(j))
        .count();
    let mut inputs = BTreeMap::new();
    inputs.insert("prices".into(), path_str(&args.prices));
    inputs.insert("sectors".into(), path_str(&args.sectors));
    inputs.insert("demean".into(), args.demean.to_string());
    inputs.insert("drop_bad_rows".into(), args.drop_bad_rows.to_string());
    inputs.insert("p".into(), prices.p().to_string());
    inputs.insert("returns".into(), returns.values.nrows().to_string());
    inputs.insert("mean_variance".into(), mean_variance(&cov).to_string());
    let mut metrics = BTreeMap::new();
    metrics.insert("modularity".into(), q);
    metrics.insert("edges".into(), edges.edges.len() as f64);
    metrics.insert("intra_sector_edges".into(), intra as f64);
    let record = RunRecord {
        format_version: RUN_RECORD_VERSION,
        command: "stocks".into(),
        inputs,
        seed: None,
        threshold: args.threshold,
        solver: SolverEcho::from(&cfg),
        result: ResultSummary::from(&result),
        metrics,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    record.write(&args.out.join(RUN_RECORD))?;
    Ok(StocksOutput {
        tickers: prices.tickers,
        labeling,
        result,
        modularity: q,
        edges,
        record,
    })
}

/// One row per edge with tickers, sectors and an `intra`/`inter` flag.
pub fn annotate(edges: &EdgeList, tickers: &[String], labeling: &SectorLabeling) -> String {
    let mut out = String::from("i\tj\tticker_i\tticker_j\tsector_i\tsector_j\tweight\tkind\n");
    for &(i, j, w) in &edges.edges {
        let (si, sj) = (labeling.label(i), labeling.label(j));
        let kind = if si == sj { "intra" } else { "inter" };
        let _ = writeln!(
            out,
            "{i}\t{j}\t{}\t{}\t{si}\t{sj}\t{}\t{kind}",
            tickers[i - 1],
            tickers[j - 1],
            crate::formats::fmt_f64(w)
        );
    }
    out
}
