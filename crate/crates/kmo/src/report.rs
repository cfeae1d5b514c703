//! Run reports and their JSON-lines and CSV emission.
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Outcome of one (k, seed) run.
///
/// `cost_phi_inliers` is the k-means cost of every point not listed as an
/// outlier; re-scoring `centers` against the data reproduces it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    pub n: usize,
    pub dim: usize,
    pub k: usize,
    pub z: u64,
    pub eps: f64,
    pub seed: u64,
    /// Selected penalty; absent for algorithms without one or when it is infinite.
    pub theta: Option<f64>,
    pub cost_phi_inliers: f64,
    pub cost_tau: f64,
    pub num_outliers: u64,
    pub runtime_ms: u64,
    pub distance_evals: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queries_used: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relaxed_constants: Option<bool>,
    /// Whether the selected candidate met the `(1+ε)z` outlier filter.
    pub theta_feasible: bool,
    pub qualified: bool,
    /// Failure message when the run could not complete; costs are then zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    algorithm: &'a str,
    n: usize,
    dim: usize,
    k: usize,
    z: u64,
    eps: f64,
    seed: u64,
    theta: Option<f64>,
    cost_phi_inliers: f64,
    cost_tau: f64,
    num_outliers: u64,
    runtime_ms: u64,
    distance_evals: u64,
    queries_used: Option<u64>,
    budget: Option<u64>,
    relaxed_constants: Option<bool>,
    theta_feasible: bool,
    qualified: bool,
    error: Option<&'a str>,
}

impl<'a> From<&'a RunReport> for CsvRow<'a> {
    fn from(r: &'a RunReport) -> Self {
        CsvRow {
            algorithm: &r.algorithm,
            n: r.n,
            dim: r.dim,
            k: r.k,
            z: r.z,
            eps: r.eps,
            seed: r.seed,
            theta: r.theta,
            cost_phi_inliers: r.cost_phi_inliers,
            cost_tau: r.cost_tau,
            num_outliers: r.num_outliers,
            runtime_ms: r.runtime_ms,
            distance_evals: r.distance_evals,
            queries_used: r.queries_used,
            budget: r.budget,
            relaxed_constants: r.relaxed_constants,
            theta_feasible: r.theta_feasible,
            qualified: r.qualified,
            error: r.error.as_deref(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Writes reports as one JSON object per line, or as CSV with a header (centers omitted).
pub fn emit_results<W: Write>(reports: &[RunReport], format: Format, mut out: W) -> Result<(), CliError> {
    if reports.is_empty() {
        return Err(CliError::Config("no reports to emit".into()));
    }
    match format {
        Format::Json => {
            for r in reports {
                serde_json::to_writer(&mut out, r)?;
                out.write_all(b"\n")?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            for r in reports {
                w.serialize(CsvRow::from(r))?;
            }
            w.flush()?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Parses JSON-lines output back into reports.
pub fn read_json_lines(text: &str) -> Result<Vec<RunReport>, CliError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(CliError::from))
        .collect()
}
