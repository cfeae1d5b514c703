//! Budgeted runs on hard instances in the distance-query model.
use kmo_core::hardness::{
    gen_hard_instance, run_budgeted_eval, ExhaustiveStrategy, FastStrategy, OracleStrategy, UniformStrategy,
};
use kmo_core::metropolis::FastParams;
use kmo_core::RngStream;

use crate::report::RunReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Strategy {
    /// `k` uniform indices, no queries.
    Uniform,
    /// One representative per cluster found by scanning.
    Exhaustive,
    /// The fast pipeline run through the oracle.
    Fast,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Uniform => "oracle-uniform",
            Strategy::Exhaustive => "oracle-exhaustive",
            Strategy::Fast => "oracle-fast",
        }
    }
}

/// Parameters of one budgeted run.
#[derive(Clone, Copy, Debug)]
pub struct OracleRun {
    pub n: usize,
    pub k: usize,
    pub z: usize,
    pub budget: u64,
    /// Scoring may discard `⌊outlier_multiplier·z⌋` points.
    pub outlier_multiplier: f64,
    pub strategy: Strategy,
    pub seed: u64,
}

/// Draws a hard instance from `seed`, runs the strategy and reports its cost,
/// the number of uncovered points beyond the outlier allowance.
pub fn run_oracle(p: &OracleRun) -> kmo_core::Result<RunReport> {
    let stream = RngStream::new(p.seed);
    let instance = gen_hard_instance(p.n, p.k, p.z, &mut stream.derive(0).rng())?;
    let mut strategy: Box<dyn OracleStrategy> = match p.strategy {
        Strategy::Uniform => Box::new(UniformStrategy {
            rng: stream.derive(1).rng(),
        }),
        Strategy::Exhaustive => Box::new(ExhaustiveStrategy),
        Strategy::Fast => Box::new(FastStrategy {
            z: p.z as u64,
            params: FastParams::default(),
            stream: stream.derive(2),
        }),
    };
    let out = run_budgeted_eval(&instance, strategy.as_mut(), p.budget, p.outlier_multiplier)?;
    Ok(RunReport {
        algorithm: p.strategy.name().to_owned(),
        n: p.n,
        dim: 0,
        k: p.k,
        z: p.z as u64,
        eps: 0.0,
        seed: p.seed,
        theta: None,
        cost_phi_inliers: out.solution.phi_cost,
        cost_tau: out.solution.tau_cost,
        num_outliers: out.solution.outliers.len() as u64,
        runtime_ms: 0,
        distance_evals: out.queries_used,
        queries_used: Some(out.queries_used),
        budget: Some(out.budget),
        relaxed_constants: Some(out.relaxed_constants),
        theta_feasible: true,
        qualified: !out.budget_exhausted,
        error: None,
        centers: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_makes_no_queries() {
        let r = run_oracle(&OracleRun {
            n: 2000,
            k: 6,
            z: 100,
            budget: 0,
            outlier_multiplier: 2.0,
            strategy: Strategy::Uniform,
            seed: 3,
        })
        .unwrap();
        assert_eq!(r.queries_used, Some(0));
        assert_eq!(r.relaxed_constants, Some(true));
    }

    #[test]
    fn exhaustive_covers_every_cluster() {
        let r = run_oracle(&OracleRun {
            n: 2000,
            k: 6,
            z: 100,
            budget: u64::MAX,
            outlier_multiplier: 2.0,
            strategy: Strategy::Exhaustive,
            seed: 3,
        })
        .unwrap();
        assert_eq!(r.cost_phi_inliers, 0.0);
        assert!(r.queries_used.unwrap() > 0);
    }
}
