use alloc::vec::Vec;

use crate::cost::{indexed_costs, phi_minus_z_from_costs, IndexedSolution};
use crate::data::{CenterSet, Dataset};
use crate::error::{Error, Result};
use crate::local_search::{local_search_with_outlier_cap, SearchParams};
use crate::math::floor;
use crate::rng::RngStream;
use crate::space::{CostSpace, Counted};

use super::almost_metric::build_almost_metric;
use super::summary::WeightedSummary;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoordinatorParams {
    pub k: usize,
    pub z: u64,
    pub eps: f64,
    pub alpha: f64,
    pub search: SearchParams,
}

impl CoordinatorParams {
    /// Outliers the machines may drop on top of `z`: `⌊2αεz⌋`.
    pub fn slack(&self) -> u64 {
        floor(2.0 * self.alpha * self.eps * self.z as f64) as u64
    }

    /// Upper bound on the total declared outliers, `(1+5αε)z`.
    pub fn outlier_bound(&self) -> f64 {
        (1.0 + 5.0 * self.alpha * self.eps) * self.z as f64
    }

    /// `z^A = z + ⌊2αεz⌋ − dropped`, or `None` when negative.
    pub fn z_a(&self, dropped: u64) -> Option<u64> {
        (self.z + self.slack()).checked_sub(dropped)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordinatorOutcome {
    pub centers: CenterSet,
    pub z_a: u64,
    /// Weight dropped by the machines.
    pub dropped: u64,
    /// Weight the coordinator's solver declared as outliers.
    pub solver_outliers: u64,
    /// `dropped + solver_outliers`.
    pub declared_outliers: u64,
    /// Weighted cost of the summary points with `solver_outliers` units of the farthest weight removed.
    pub cost: f64,
    pub qualified: bool,
    /// Distance evaluations made by the coordinator.
    pub distance_evals: u64,
}

fn merge(summaries: &[WeightedSummary]) -> Result<(Dataset, u64)> {
    let first = summaries.first().ok_or(Error::EmptyInput("no summaries"))?;
    let dim = first.centers.dim();
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    let mut dropped = 0;
    for s in summaries {
        if s.centers.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.centers.dim(),
            });
        }
        for (y, c) in s.centers.iter().enumerate() {
            coords.extend_from_slice(c);
            weights.push(s.weights[y]);
        }
        dropped += s.outliers_dropped;
    }
    if weights.is_empty() {
        return Err(Error::EmptyInput("summaries carry no centers"));
    }
    Ok((Dataset::from_flat(dim, coords, weights)?, dropped))
}

/// Runs the capped outlier solver on `space`, or takes every weighted item when there are at most `k`.
fn solve<S: CostSpace + ?Sized>(
    space: &S,
    z_a: u64,
    dropped: u64,
    p: &CoordinatorParams,
    stream: RngStream,
) -> Result<IndexedSolution> {
    let positive: Vec<usize> = (0..space.len()).filter(|&i| space.weight(i) > 0).collect();
    if positive.len() <= p.k {
        return Ok(IndexedSolution {
            centers: positive,
            outliers: Vec::new(),
            phi_cost: 0.0,
            tau_cost: 0.0,
            theta: crate::data::PenaltyThreshold::infinite(),
            qualified: true,
        });
    }
    let z_a = z_a.min(space.total_weight());
    let cap = ((1.0 + p.eps) * z_a as f64).min(p.outlier_bound() - dropped as f64);
    local_search_with_outlier_cap(space, p.k, z_a, p.eps, cap, &p.search, stream)
}

fn outcome(
    merged: &Dataset,
    centers: Vec<usize>,
    z_a: u64,
    dropped: u64,
    solver_outliers: u64,
    qualified: bool,
    evals: u64,
) -> CoordinatorOutcome {
    let costs = indexed_costs(merged, &centers);
    let distance_evals = evals + (merged.len() * centers.len()) as u64;
    CoordinatorOutcome {
        cost: phi_minus_z_from_costs(&costs, merged.weights(), solver_outliers),
        centers: CenterSet::from_indices(merged, &centers),
        z_a,
        dropped,
        solver_outliers,
        declared_outliers: dropped + solver_outliers,
        qualified,
        distance_evals,
    }
}

/// Clusters the union of weighted summaries with `z^A` outliers.
///
/// The solver's outlier weight is capped at `min((1+ε)z^A, (1+5αε)z − dropped)`,
/// so the declared total never exceeds `(1+5αε)z`.
pub fn coordinator_solve_simple(
    summaries: &[WeightedSummary],
    params: &CoordinatorParams,
    stream: RngStream,
) -> Result<CoordinatorOutcome> {
    let (merged, dropped) = merge(summaries)?;
    let z_a = params.z_a(dropped).ok_or(Error::InfeasibleRung)?;
    let space = Counted::new(&merged);
    let sol = solve(&space, z_a, dropped, params, stream)?;
    let out_w = sol.outlier_weight(&merged);
    Ok(outcome(&merged, sol.centers, z_a, dropped, out_w, sol.qualified, space.evals()))
}

/// Clusters the almost-metric built from refined summaries and maps each chosen clone back to its center.
pub fn coordinator_solve_refined(
    summaries: &[WeightedSummary],
    params: &CoordinatorParams,
    stream: RngStream,
) -> Result<CoordinatorOutcome> {
    let (merged, dropped) = merge(summaries)?;
    let z_a = params.z_a(dropped).ok_or(Error::InfeasibleRung)?;
    let metric = build_almost_metric(summaries)?;
    let space = Counted::new(&metric);
    let sol = solve(&space, z_a, dropped, params, stream)?;
    let out_w = sol.outlier_weight(&metric);
    let mut centers = Vec::with_capacity(sol.centers.len());
    for &c in &sol.centers {
        let y = metric.map_to_base(c);
        if !centers.contains(&y) {
            centers.push(y);
        }
    }
    Ok(outcome(&merged, centers, z_a, dropped, out_w, sol.qualified, space.evals()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn params(z: u64, eps: f64, alpha: f64) -> CoordinatorParams {
        CoordinatorParams {
            k: 2,
            z,
            eps,
            alpha,
            search: SearchParams::default(),
        }
    }

    #[test]
    fn z_a_example() {
        assert_eq!(params(100, 0.1, 1.0).z_a(40), Some(80));
        assert_eq!(params(100, 0.1, 1.0).z_a(121), None);
    }

    fn summary(rows: &[f64], weights: Vec<u64>, dropped: u64, hist: Option<Vec<Vec<u64>>>) -> WeightedSummary {
        let r: Vec<Vec<f64>> = rows.iter().map(|&x| vec![x]).collect();
        WeightedSummary {
            machine_id: 0,
            centers: CenterSet::from_rows(1, &r).unwrap(),
            weights,
            outliers_dropped: dropped,
            histograms: hist,
        }
    }

    #[test]
    fn infeasible_rung_is_reported() {
        let s = summary(&[0.0, 1.0, 2.0], vec![1, 1, 1], 50, None);
        assert_eq!(
            coordinator_solve_simple(&[s], &params(10, 0.1, 1.0), RngStream::new(1)),
            Err(Error::InfeasibleRung)
        );
    }

    #[test]
    fn noiseless_summaries_respect_bound() {
        let s = summary(&[0.0, 0.5, 10.0, 10.5, 500.0], vec![20, 20, 20, 20, 3], 0, None);
        let p = params(3, 0.2, 1.0);
        let o = coordinator_solve_simple(&[s], &p, RngStream::new(2)).unwrap();
        assert_eq!(o.z_a, 3 + 1);
        assert!(o.declared_outliers as f64 <= p.outlier_bound());
        assert_eq!(o.centers.len(), 2);
    }

    #[test]
    fn degenerate_histograms_agree_with_simple() {
        let h = Some(vec![vec![5], vec![5], vec![5]]);
        let s = summary(&[1.0, 1.0, 1.0], vec![5, 5, 5], 0, h);
        let p = params(2, 0.2, 1.0);
        let a = coordinator_solve_simple(core::slice::from_ref(&s), &p, RngStream::new(3)).unwrap();
        let b = coordinator_solve_refined(&[s], &p, RngStream::new(3)).unwrap();
        assert!(crate::math::approx_eq(a.cost, b.cost, 1e-9));
    }
}
