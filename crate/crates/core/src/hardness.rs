//! Query-oracle model: points are only reachable through a counted distance oracle.
//! Includes the two-scale hard distribution and a budgeted evaluation harness.
use alloc::vec::Vec;
use core::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cost::IndexedSolution;
use crate::data::PenaltyThreshold;
use crate::error::{Error, Result};
use crate::metropolis::{fast_algorithm, FastParams};
use crate::rng::RngStream;
use crate::space::CostSpace;

/// Distance 0 within a hidden cluster and 1 across clusters. Every query is counted.
#[derive(Debug)]
pub struct QueryOracle {
    labels: Vec<u32>,
    queries: AtomicU64,
}

impl QueryOracle {
    pub fn new(labels: Vec<u32>) -> Self {
        QueryOracle {
            labels,
            queries: AtomicU64::new(0),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn query(&self, i: usize, j: usize) -> f64 {
        self.queries.fetch_add(1, Ordering::Relaxed);
        if self.labels[i] == self.labels[j] {
            0.0
        } else {
            1.0
        }
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

impl CostSpace for QueryOracle {
    fn len(&self) -> usize {
        self.labels.len()
    }
    fn weight(&self, _: usize) -> u64 {
        1
    }
    fn cost(&self, i: usize, j: usize) -> f64 {
        self.query(i, j)
    }
    fn diameter_sq_bound(&self) -> f64 {
        1.0
    }
}

/// Default mass factor of the small clusters.
pub const SMALL_MASS_FACTOR: f64 = 100.0;

/// Half of the `k` clusters are small with total mass `f·z`; the rest share the remaining points.
#[derive(Debug)]
pub struct HardInstance {
    pub n: usize,
    pub k: usize,
    pub z: usize,
    pub small_mass_factor: f64,
    /// True when the generator departed from the default constants.
    pub relaxed_constants: bool,
    labels: Vec<u32>,
    oracle: QueryOracle,
}

impl HardInstance {
    pub fn oracle(&self) -> &QueryOracle {
        &self.oracle
    }

    /// Ground-truth labels, for scoring only.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn is_small(&self, label: u32) -> bool {
        (label as usize) < self.k / 2
    }
}

/// Per-cluster label probabilities: small clusters first, then big ones.
pub fn label_probabilities(n: usize, k: usize, z: usize, factor: f64) -> Vec<f64> {
    let half = (n as f64) * (k as f64) / 2.0;
    let small = factor * z as f64 / half;
    let big = (n as f64 - factor * z as f64) / half;
    let mut p = alloc::vec![small; k / 2];
    p.extend(core::iter::repeat_n(big, k / 2));
    p
}

/// Draws a hard instance with an explicit small-cluster mass factor.
pub fn gen_hard_instance_with_factor<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    z: usize,
    factor: f64,
    rng: &mut R,
) -> Result<HardInstance> {
    if k < 2 || k % 2 != 0 {
        return Err(Error::InvalidParameter("k must be even and at least 2"));
    }
    if z == 0 || z > n {
        return Err(Error::InvalidParameter("need 1 <= z <= n"));
    }
    if factor.is_nan() || factor <= 0.0 || factor * z as f64 > n as f64 {
        return Err(Error::InvalidParameter("small clusters would exceed n points"));
    }
    let probs = label_probabilities(n, k, z, factor);
    let mut cum = Vec::with_capacity(k);
    let mut acc = 0.0;
    for p in &probs {
        acc += p;
        cum.push(acc);
    }
    let labels: Vec<u32> = (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            cum.partition_point(|&c| c <= u).min(k - 1) as u32
        })
        .collect();
    let kf = k as f64;
    let paper_regime = 10_000.0 * kf * libm::log(kf) <= z as f64 && (z as f64) <= n as f64 / 10_000.0;
    Ok(HardInstance {
        n,
        k,
        z,
        small_mass_factor: factor,
        relaxed_constants: factor != SMALL_MASS_FACTOR || !paper_regime,
        oracle: QueryOracle::new(labels.clone()),
        labels,
    })
}

/// Draws a hard instance, shrinking the mass factor to `min(100, n/(4z))` so big clusters keep most points.
pub fn gen_hard_instance<R: Rng + ?Sized>(n: usize, k: usize, z: usize, rng: &mut R) -> Result<HardInstance> {
    if z == 0 {
        return Err(Error::InvalidParameter("need 1 <= z <= n"));
    }
    let factor = SMALL_MASS_FACTOR.min(n as f64 / (4.0 * z as f64));
    gen_hard_instance_with_factor(n, k, z, factor, rng)
}

/// Oracle access with a query budget. Queries past the budget are refused and
/// answered with the maximum distance 1, and the oracle is marked exhausted.
pub struct BudgetedOracle<'a> {
    oracle: &'a QueryOracle,
    start: u64,
    budget: u64,
    exhausted: AtomicBool,
}

impl<'a> BudgetedOracle<'a> {
    pub fn new(oracle: &'a QueryOracle, budget: u64) -> Self {
        BudgetedOracle {
            oracle,
            start: oracle.queries(),
            budget,
            exhausted: AtomicBool::new(false),
        }
    }

    pub fn used(&self) -> u64 {
        self.oracle.queries() - self.start
    }

    pub fn exhausted(&self) -> bool {
        self.exhausted.load(Ordering::Relaxed)
    }

    /// Distance query; `None` once the budget is spent.
    pub fn try_query(&self, i: usize, j: usize) -> Option<f64> {
        if self.used() >= self.budget {
            self.exhausted.store(true, Ordering::Relaxed);
            return None;
        }
        Some(self.oracle.query(i, j))
    }
}

impl CostSpace for BudgetedOracle<'_> {
    fn len(&self) -> usize {
        self.oracle.len()
    }
    fn weight(&self, _: usize) -> u64 {
        1
    }
    fn cost(&self, i: usize, j: usize) -> f64 {
        self.try_query(i, j).unwrap_or(1.0)
    }
    fn diameter_sq_bound(&self) -> f64 {
        1.0
    }
}

/// A clustering strategy that sees only point indices and the oracle.
pub trait OracleStrategy {
    /// Returns center indices, or `None` if it has nothing to emit.
    fn run(&mut self, oracle: &BudgetedOracle<'_>, k: usize) -> Option<Vec<usize>>;
}

/// `k` distinct indices uniformly at random; makes no queries.
pub struct UniformStrategy {
    pub rng: ChaCha8Rng,
}

impl OracleStrategy for UniformStrategy {
    fn run(&mut self, oracle: &BudgetedOracle<'_>, k: usize) -> Option<Vec<usize>> {
        Some(rand::seq::index::sample(&mut self.rng, oracle.len(), k.min(oracle.len())).into_vec())
    }
}

/// Scans points in order and keeps one representative of every new cluster it meets.
pub struct ExhaustiveStrategy;

impl OracleStrategy for ExhaustiveStrategy {
    fn run(&mut self, oracle: &BudgetedOracle<'_>, k: usize) -> Option<Vec<usize>> {
        let mut reps: Vec<usize> = Vec::with_capacity(k);
        'points: for i in 0..oracle.len() {
            for &r in &reps {
                match oracle.try_query(i, r) {
                    Some(0.0) => continue 'points,
                    Some(_) => {}
                    None => break 'points,
                }
            }
            if reps.len() == k {
                break;
            }
            reps.push(i);
        }
        let mut i = 0;
        while reps.len() < k && i < oracle.len() {
            if !reps.contains(&i) {
                reps.push(i);
            }
            i += 1;
        }
        Some(reps)
    }
}

/// The fast algorithm run over the oracle.
pub struct FastStrategy {
    pub z: u64,
    pub params: FastParams,
    pub stream: RngStream,
}

impl OracleStrategy for FastStrategy {
    fn run(&mut self, oracle: &BudgetedOracle<'_>, k: usize) -> Option<Vec<usize>> {
        fast_algorithm(oracle, k, self.z, &self.params, self.stream)
            .ok()
            .map(|o| o.solution.centers)
    }
}

/// Result of one budgeted run.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleSolution {
    pub solution: IndexedSolution,
    pub queries_used: u64,
    pub budget: u64,
    pub budget_exhausted: bool,
    pub relaxed_constants: bool,
}

/// Runs a strategy under a query budget and scores its centers with at most
/// `⌊outlier_multiplier·z⌋` outliers. Scoring reads the hidden labels and makes no queries.
pub fn run_budgeted_eval<S: OracleStrategy + ?Sized>(
    instance: &HardInstance,
    strategy: &mut S,
    budget: u64,
    outlier_multiplier: f64,
) -> Result<OracleSolution> {
    let oracle = BudgetedOracle::new(&instance.oracle, budget);
    let centers = strategy
        .run(&oracle, instance.k)
        .ok_or(Error::BudgetExhausted { budget })?;
    let queries_used = oracle.used();
    let mut covered = alloc::vec![false; instance.k];
    for &c in &centers {
        covered[instance.labels[c] as usize] = true;
    }
    let uncovered: Vec<usize> = (0..instance.n).filter(|&i| !covered[instance.labels[i] as usize]).collect();
    let cap = libm::floor(outlier_multiplier * instance.z as f64) as usize;
    let outliers: Vec<usize> = uncovered.iter().copied().take(cap).collect();
    let cost = (uncovered.len() - outliers.len()) as f64;
    Ok(OracleSolution {
        solution: IndexedSolution {
            centers,
            outliers,
            phi_cost: cost,
            tau_cost: cost,
            theta: PenaltyThreshold::infinite(),
            qualified: true,
        },
        queries_used,
        budget,
        budget_exhausted: oracle.exhausted(),
        relaxed_constants: instance.relaxed_constants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn oracle_counts_and_is_symmetric() {
        let o = QueryOracle::new(vec![0, 0, 1]);
        assert_eq!(o.query(0, 1), 0.0);
        assert_eq!(o.query(2, 0), o.query(0, 2));
        assert_eq!(o.query(1, 1), 0.0);
        assert_eq!(o.queries(), 4);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let p = label_probabilities(20_000, 20, 2000, 2.5);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // Expected small cluster size is 2·f·z/k.
        assert!((p[0] * 20_000.0 - 2.0 * 2.5 * 2000.0 / 20.0).abs() < 1e-9);
    }

    #[test]
    fn factor_boundary_leaves_no_big_points() {
        let mut rng = RngStream::new(1).rng();
        let inst = gen_hard_instance_with_factor(1000, 4, 10, 100.0, &mut rng).unwrap();
        assert!(inst.labels().iter().all(|&l| inst.is_small(l)));
        assert_eq!(label_probabilities(1000, 4, 10, 100.0)[2], 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        let o = QueryOracle::new(vec![0, 1, 0, 1]);
        let b = BudgetedOracle::new(&o, 2);
        assert!(b.try_query(0, 1).is_some());
        assert!(b.try_query(0, 2).is_some());
        assert!(b.try_query(1, 3).is_none());
        assert!(b.exhausted());
        assert_eq!(o.queries(), 2);
    }

    #[test]
    fn exhaustive_finds_every_cluster() {
        let mut rng = RngStream::new(3).rng();
        let inst = gen_hard_instance(2000, 6, 50, &mut rng).unwrap();
        let r = run_budgeted_eval(&inst, &mut ExhaustiveStrategy, u64::MAX, 2.0).unwrap();
        assert_eq!(r.solution.phi_cost, 0.0);
        assert!(r.queries_used <= 2000 * 6);
        assert_eq!(r.queries_used, inst.oracle().queries());
    }

    #[test]
    fn invalid_parameters() {
        let mut rng = RngStream::new(1).rng();
        assert!(gen_hard_instance(100, 3, 5, &mut rng).is_err());
        assert!(gen_hard_instance(100, 4, 0, &mut rng).is_err());
        assert!(gen_hard_instance_with_factor(100, 4, 5, 100.0, &mut rng).is_err());
    }
}
