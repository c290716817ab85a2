//! JSON run records.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sparselap_core::{Error, Result, SolverConfig, SolverResult};

use crate::formats::write_file;

pub const RUN_RECORD_VERSION: u32 = 1;

/// Every solver parameter actually used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverEcho {
    pub s: usize,
    pub sigma: f64,
    pub beta: f64,
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub m_max: usize,
}

impl From<&SolverConfig> for SolverEcho {
    fn from(c: &SolverConfig) -> Self {
        SolverEcho {
            s: c.s,
            sigma: c.sigma,
            beta: c.beta,
            alpha: c.alpha,
            tol: c.tol,
            max_iter: c.max_iter,
            m_max: c.m_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSummary {
    pub status: String,
    pub start: String,
    pub iterations: usize,
    pub objective: f64,
    pub initial_objective: f64,
    pub gradient_mapping_norm: f64,
    pub nonzeros: usize,
}

impl From<&SolverResult> for ResultSummary {
    fn from(r: &SolverResult) -> Self {
        ResultSummary {
            status: r.status.as_str().to_string(),
            start: format!("{:?}", r.start).to_lowercase(),
            iterations: r.iterations,
            objective: r.objective(),
            initial_objective: r.objective_trace[0],
            gradient_mapping_norm: r.final_gradient_mapping_norm,
            nonzeros: r.x.nnz(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub format_version: u32,
    pub command: String,
    /// Input files and data parameters, as given.
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub threshold: f64,
    pub solver: SolverEcho,
    pub result: ResultSummary,
    pub metrics: BTreeMap<String, f64>,
    pub wall_clock_seconds: f64,
}

impl RunRecord {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidArgument(format!("serializing run record: {e}")))?;
        text.push('\n');
        write_file(path, &text)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}
