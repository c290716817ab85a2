//! Command-line pipeline around `sparselap-core`: synthetic data generation,
//! estimation, evaluation, sample-size sweeps and stock-market graphs, plus
//! the plain-text file formats they exchange.

pub mod commands;
pub mod formats;
pub mod record;

pub use commands::{
    cmd_estimate, cmd_eval, cmd_generate, cmd_stocks, cmd_sweep, error_exit_code, run_sweep,
    status_exit_code, EstimateArgs, EstimateInput, EvalArgs, EvalReport, GenerateArgs, SolverFlags,
    StocksArgs, SweepArgs, SweepReport, TrialKey,
};
pub use formats::{EdgeList, MatrixFile};
pub use record::RunRecord;
