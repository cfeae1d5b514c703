//! Metropolis-Hastings acceleration of penalized D² sampling, the robust-cost
//! estimator, the weighted coreset solve, and the end-to-end fast algorithm.
use alloc::vec::Vec;
use rand::Rng;

use crate::cost::IndexedSolution;
use crate::data::{CenterSet, Dataset, PenaltyThreshold};
use crate::error::{Error, Result};
use crate::local_search::{
    collapse_ladder, local_search_fixed, local_search_with_outliers, pad_centers, theta_ladder_with_beta,
    SearchParams,
};
use crate::math::{ceil, ln, pairwise_sum};
use crate::rng::RngStream;
use crate::seeding::{overseed_penalized, Seeding};
use crate::space::{CostSpace, WeightSampler, WeightedSubset};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Proposal {
    /// `q(x) ∝ w(x)`.
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MhConfig {
    pub chain_steps: usize,
    pub proposal: Proposal,
}

impl MhConfig {
    pub fn new(chain_steps: usize) -> Result<Self> {
        if chain_steps == 0 {
            return Err(Error::InvalidParameter("chain_steps must be at least 1"));
        }
        Ok(MhConfig {
            chain_steps,
            proposal: Proposal::Uniform,
        })
    }

    /// `T = ⌈c_MH·n / max(z, 1)⌉`.
    pub fn for_instance(n: u64, z: u64, c_mh: f64) -> Self {
        let t = ceil(c_mh * n as f64 / z.max(1) as f64).max(1.0) as usize;
        MhConfig {
            chain_steps: t,
            proposal: Proposal::Uniform,
        }
    }
}

/// Lazily computed `τ_Θ(x, C)` values for one sampling round.
///
/// Only visited items are evaluated; [`reset`](Self::reset) clears exactly those.
#[derive(Clone, Debug)]
pub struct RoundMemo {
    values: Vec<f64>,
    touched: Vec<usize>,
}

impl RoundMemo {
    pub fn new(n: usize) -> Self {
        RoundMemo {
            values: alloc::vec![f64::NAN; n],
            touched: Vec::new(),
        }
    }

    pub fn reset(&mut self) {
        for &i in &self.touched {
            self.values[i] = f64::NAN;
        }
        self.touched.clear();
    }

    fn tau<S: CostSpace + ?Sized>(&mut self, space: &S, centers: &[usize], theta: PenaltyThreshold, i: usize) -> f64 {
        let v = self.values[i];
        if !v.is_nan() {
            return v;
        }
        let mut best = f64::INFINITY;
        for &c in centers {
            let d = space.cost(i, c);
            if d < best {
                best = d;
            }
        }
        let t = theta.clamp(best);
        self.values[i] = t;
        self.touched.push(i);
        t
    }
}

/// Runs one chain of `cfg.chain_steps` accept/reject rounds from a proposal draw.
///
/// The target is `π(x) ∝ w(x)·τ_Θ(x, C)`; with `q ∝ w` the acceptance ratio is
/// `min(1, τ(y)/τ(x))`. Moves into zero-cost states are always rejected.
/// Fails with [`Error::TotalCostZero`] if the chain ends on a zero-cost state.
pub fn mh_sample<S, R>(
    space: &S,
    centers: &[usize],
    memo: &mut RoundMemo,
    sampler: &WeightSampler,
    theta: PenaltyThreshold,
    cfg: &MhConfig,
    rng: &mut R,
) -> Result<usize>
where
    S: CostSpace + ?Sized,
    R: Rng + ?Sized,
{
    memo.reset();
    let mut x = sampler.sample(rng);
    let mut tx = memo.tau(space, centers, theta, x);
    for _ in 0..cfg.chain_steps {
        let y = sampler.sample(rng);
        let ty = memo.tau(space, centers, theta, y);
        let u: f64 = rng.random();
        if ty > 0.0 && (tx == 0.0 || u * tx < ty) {
            x = y;
            tx = ty;
        }
    }
    if tx == 0.0 {
        return Err(Error::TotalCostZero {
            centers: centers.len(),
        });
    }
    Ok(x)
}

/// Penalized overseeding with every draw after the first replaced by a Metropolis-Hastings chain.
pub fn metropolized_overseed<S, R>(
    space: &S,
    ell: usize,
    theta: PenaltyThreshold,
    cfg: &MhConfig,
    rng: &mut R,
) -> Result<Seeding>
where
    S: CostSpace + ?Sized,
    R: Rng + ?Sized,
{
    if ell == 0 {
        return Err(Error::InvalidParameter("ell must be positive"));
    }
    if ell > space.len() {
        return Err(Error::TooFewPoints {
            requested: ell,
            available: space.len(),
        });
    }
    let sampler = WeightSampler::new(space)?;
    let mut memo = RoundMemo::new(space.len());
    let mut centers = Vec::with_capacity(ell);
    centers.push(sampler.sample(rng));
    while centers.len() < ell {
        match mh_sample(space, &centers, &mut memo, &sampler, theta, cfg, rng) {
            Ok(c) => centers.push(c),
            Err(Error::TotalCostZero { .. }) => {
                return Ok(Seeding {
                    centers,
                    exhausted: true,
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Seeding {
        centers,
        exhausted: false,
    })
}

/// One-step transition matrix of the chain for per-item penalized costs `tau` and weights.
///
/// Row `x` is the law of the next state from `x`. Used as an exact oracle.
pub fn transition_matrix(tau: &[f64], weights: &[u64]) -> Vec<Vec<f64>> {
    let n = tau.len();
    let wsum: f64 = weights.iter().map(|&w| w as f64).sum();
    let q: Vec<f64> = weights.iter().map(|&w| w as f64 / wsum).collect();
    let mut p = alloc::vec![alloc::vec![0.0; n]; n];
    for x in 0..n {
        let mut stay = 1.0;
        for y in 0..n {
            if y == x {
                continue;
            }
            let acc = if tau[y] <= 0.0 {
                0.0
            } else if tau[x] <= 0.0 {
                1.0
            } else {
                (tau[y] / tau[x]).min(1.0)
            };
            p[x][y] = q[y] * acc;
            stay -= p[x][y];
        }
        p[x][x] = stay;
    }
    p
}

/// Exact law of the chain state after `steps` transitions from the proposal distribution.
pub fn chain_distribution(tau: &[f64], weights: &[u64], steps: usize) -> Vec<f64> {
    let p = transition_matrix(tau, weights);
    let wsum: f64 = weights.iter().map(|&w| w as f64).sum();
    let mut dist: Vec<f64> = weights.iter().map(|&w| w as f64 / wsum).collect();
    for _ in 0..steps {
        let mut next = alloc::vec![0.0; dist.len()];
        for (x, px) in dist.iter().enumerate() {
            if *px == 0.0 {
                continue;
            }
            for (y, nx) in next.iter_mut().enumerate() {
                *nx += px * p[x][y];
            }
        }
        dist = next;
    }
    dist
}

/// The subsampled trimmed estimate `ζ` of `φ^{-Az}(X, C)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostEstimate {
    pub zeta: f64,
    pub sample_size: usize,
    /// Number of sampled costs discarded.
    pub trimmed: usize,
    pub trim_fraction_used: f64,
}

/// Constants of the fast pipeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FastParams {
    /// The trimming constant `A`.
    pub a: f64,
    pub c_mh: f64,
    pub c_est: f64,
    /// Coreset sample size `⌈c_coreset·(n·k/z)·ln n⌉`.
    pub c_coreset: f64,
    /// Centers drawn per rung, `⌈c_oversample·k⌉`.
    pub c_oversample: f64,
    /// Delegate to plain local search when `z ≤ c_delegate·max(k ln k, ln² n)`.
    pub c_delegate: f64,
    pub search: SearchParams,
}

impl Default for FastParams {
    fn default() -> Self {
        FastParams {
            a: 2.0,
            c_mh: 4.0,
            c_est: 4.0,
            c_coreset: 1.0,
            c_oversample: 4.0,
            c_delegate: 1.0,
            search: SearchParams::default(),
        }
    }
}

fn estimate_from<R, F>(n: u64, z: u64, a: f64, c_est: f64, sampler: &WeightSampler, cost_of: F, rng: &mut R) -> Result<CostEstimate>
where
    R: Rng + ?Sized,
    F: Fn(usize) -> f64,
{
    if z == 0 || z > n {
        return Err(Error::InvalidParameter("estimator needs 1 <= z <= n"));
    }
    if a < 1.0 {
        return Err(Error::InvalidParameter("A must be at least 1"));
    }
    let nf = n as f64;
    let lnn = ln(nf.max(2.0));
    let big_n = (ceil(c_est * nf / z as f64 * lnn * lnn) as usize).max(1);
    let trim = (ceil(4.0 * a * z as f64 * big_n as f64 / nf) as usize).min(big_n);
    let mut costs: Vec<f64> = (0..big_n).map(|_| cost_of(sampler.sample(rng))).collect();
    costs.sort_by(|a, b| a.total_cmp(b));
    let kept = pairwise_sum(&costs[..big_n - trim]);
    Ok(CostEstimate {
        zeta: nf / big_n as f64 * kept,
        sample_size: big_n,
        trimmed: trim,
        trim_fraction_used: trim as f64 / big_n as f64,
    })
}

/// `ζ = (n/N)·φ^{-⌈4AzN/n⌉}(X', C)` for `N` uniform draws with replacement.
pub fn estimate_robust_cost<R: Rng + ?Sized>(
    data: &Dataset,
    centers: &CenterSet,
    z: u64,
    a: f64,
    c_est: f64,
    rng: &mut R,
) -> Result<CostEstimate> {
    if centers.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: centers.dim(),
        });
    }
    let sampler = WeightSampler::new(data)?;
    estimate_from(data.total_weight(), z, a, c_est, &sampler, |i| centers.nearest(data.point(i)).1, rng)
}

/// [`estimate_robust_cost`] with centers given as items of a cost space.
pub fn estimate_robust_cost_indexed<S, R>(
    space: &S,
    centers: &[usize],
    z: u64,
    a: f64,
    c_est: f64,
    rng: &mut R,
) -> Result<CostEstimate>
where
    S: CostSpace + ?Sized,
    R: Rng + ?Sized,
{
    let sampler = WeightSampler::new(space)?;
    let cost_of = |i: usize| centers.iter().map(|&c| space.cost(i, c)).fold(f64::INFINITY, f64::min);
    estimate_from(space.total_weight(), z, a, c_est, &sampler, cost_of, rng)
}

/// Clusters the candidate set `y` down to `k` centers.
///
/// `sample_size` uniform draws are assigned to their nearest candidate; the
/// counts become weights of a small instance solved by penalized seeding plus
/// `steps` local search steps at fixed `Θ`. Returns base-space indices.
pub fn fast_coreset_solve<S, R>(
    space: &S,
    y: &[usize],
    theta: PenaltyThreshold,
    k: usize,
    sample_size: usize,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<usize>>
where
    S: CostSpace + ?Sized,
    R: Rng + ?Sized,
{
    if k == 0 || y.is_empty() {
        return Err(Error::InvalidParameter("need k >= 1 and a nonempty candidate set"));
    }
    let mut y = y.to_vec();
    y.sort_unstable();
    y.dedup();
    if y.len() <= k {
        let mut out = y;
        pad_centers(space, &mut out, k);
        return Ok(out);
    }
    let sampler = WeightSampler::new(space)?;
    let mut counts = alloc::vec![0u64; y.len()];
    for _ in 0..sample_size.max(1) {
        let x = sampler.sample(rng);
        let mut best = (0usize, f64::INFINITY);
        for (j, &c) in y.iter().enumerate() {
            let d = space.cost(x, c);
            if d < best.1 {
                best = (j, d);
            }
        }
        counts[best.0] += 1;
    }
    let sub = WeightedSubset::new(space, y.clone(), counts)?;
    let seeds = overseed_penalized(&sub, k.min(sub.len()), theta, rng)?;
    let mut local = seeds.centers;
    pad_centers(&sub, &mut local, k);
    let local = if seeds.exhausted {
        local
    } else {
        local_search_fixed(&sub, local, theta, steps, rng)
    };
    Ok(local.into_iter().map(|i| sub.base_index(i)).collect())
}

/// Per-rung record of the fast algorithm, kept for inspection.
#[derive(Clone, Debug, PartialEq)]
pub struct FastRung {
    pub theta: PenaltyThreshold,
    pub centers: Vec<usize>,
    pub estimate: CostEstimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FastOutcome {
    pub solution: IndexedSolution,
    pub delegated: bool,
    pub rungs: Vec<FastRung>,
}

/// True when `z` is small enough that plain local search is already fast.
pub fn delegates(n: u64, k: usize, z: u64, c_delegate: f64) -> bool {
    let kf = k as f64;
    let lnn = ln((n as f64).max(2.0));
    let klogk = if k > 1 { kf * ln(kf) } else { 0.0 };
    (z as f64) <= c_delegate * klogk.max(lnn * lnn)
}

/// The end-to-end fast algorithm for k-means with outliers.
///
/// Small `z` delegates to [`local_search_with_outliers`] with `ε = 1` on the same
/// stream. Otherwise each rung `Θ = 2^i/z` runs metropolized overseeding, a
/// coreset solve and the robust-cost estimator; the rung with the smallest
/// estimate wins and its `⌈10Az⌉` farthest points are labelled outliers.
pub fn fast_algorithm<S: CostSpace + ?Sized>(
    space: &S,
    k: usize,
    z: u64,
    params: &FastParams,
    stream: RngStream,
) -> Result<FastOutcome> {
    let n = space.total_weight();
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive"));
    }
    if k as u64 + z >= n {
        return Err(Error::InvalidParameter("k + z must be smaller than n"));
    }
    if z == 0 || delegates(n, k, z, params.c_delegate) {
        let solution = local_search_with_outliers(space, k, z, 1.0, &params.search, stream)?;
        return Ok(FastOutcome {
            solution,
            delegated: true,
            rungs: Vec::new(),
        });
    }
    let delta_sq = space.diameter_sq_bound();
    let ladder = collapse_ladder(theta_ladder_with_beta(n, delta_sq, z, 1.0), delta_sq);
    let ell = (ceil(params.c_oversample * k as f64) as usize).clamp(k, space.len());
    let cfg = MhConfig::for_instance(n, z, params.c_mh);
    let lnn = ln((n as f64).max(2.0));
    let sample_size = ceil(params.c_coreset * n as f64 * k as f64 / z as f64 * lnn) as usize;
    let steps = params.search.step_budget(k, 1.0);
    let rungs = crate::par::map_indexed(ladder.len(), |r| -> Result<FastRung> {
        let theta = ladder[r].theta;
        let mut rng = stream.derive(r as u64).rng();
        let seeding = metropolized_overseed(space, ell, theta, &cfg, &mut rng)?;
        let centers = fast_coreset_solve(space, &seeding.centers, theta, k, sample_size, steps, &mut rng)?;
        let estimate = estimate_robust_cost_indexed(space, &centers, z, params.a, params.c_est, &mut rng)?;
        Ok(FastRung {
            theta,
            centers,
            estimate,
        })
    });
    let rungs: Vec<FastRung> = rungs.into_iter().collect::<Result<_>>()?;
    let mut best = 0;
    for (r, rung) in rungs.iter().enumerate() {
        if rung.estimate.zeta < rungs[best].estimate.zeta {
            best = r;
        }
    }
    let centers = rungs[best].centers.clone();
    let theta = rungs[best].theta;
    let costs = crate::cost::indexed_costs(space, &centers);
    let w: Vec<u64> = (0..space.len()).map(|i| space.weight(i)).collect();
    let declared = (ceil(10.0 * params.a * z as f64) as u64).min(n);
    let outliers = crate::cost::farthest_from_costs(&costs, &w, declared);
    let solution = IndexedSolution {
        phi_cost: crate::cost::phi_excluding(&costs, &w, &outliers),
        tau_cost: crate::cost::tau_from_costs(&costs, &w, theta),
        centers,
        outliers,
        theta,
        qualified: true,
    };
    Ok(FastOutcome {
        solution,
        delegated: false,
        rungs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn line(xs: &[f64]) -> Dataset {
        Dataset::from_rows(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn one_step_two_point_chain() {
        // π = (0.25, 0.75), uniform proposal, one step.
        let p = chain_distribution(&[1.0, 3.0], &[1, 1], 1);
        // From 0: propose 1 w.p. 1/2, always accepted. From 1: propose 0 w.p. 1/2, accepted w.p. 1/3.
        let expect0 = 0.5 * 0.5 + 0.5 * (0.5 * (1.0 / 3.0));
        assert!((p[0] - expect0).abs() < 1e-12);
        assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_mass_states_are_never_entered() {
        let p = chain_distribution(&[0.0, 1.0, 2.0], &[1, 1, 1], 5);
        let m = transition_matrix(&[0.0, 1.0, 2.0], &[1, 1, 1]);
        assert_eq!(m[1][0], 0.0);
        assert_eq!(m[2][0], 0.0);
        assert!(p[0] < 1.0 / 3.0);
    }

    #[test]
    fn estimator_is_zero_on_centers() {
        let x = line(&[1.0, 1.0, 4.0, 4.0]);
        let c = CenterSet::from_rows(1, &[vec![1.0], vec![4.0]]).unwrap();
        let mut rng = RngStream::new(1).rng();
        assert_eq!(estimate_robust_cost(&x, &c, 1, 2.0, 4.0, &mut rng).unwrap().zeta, 0.0);
    }

    #[test]
    fn estimator_trims_everything_when_z_is_n() {
        let x = line(&[0.0, 5.0, 9.0]);
        let c = CenterSet::from_rows(1, &[vec![0.0]]).unwrap();
        let mut rng = RngStream::new(1).rng();
        let e = estimate_robust_cost(&x, &c, 3, 1.0, 4.0, &mut rng).unwrap();
        assert_eq!(e.zeta, 0.0);
        assert_eq!(e.trimmed, e.sample_size);
    }

    #[test]
    fn coreset_reproduces_exact_candidates() {
        let x = line(&[0.0, 0.0, 10.0, 10.0, 20.0, 20.0]);
        let mut rng = RngStream::new(4).rng();
        let mut c = fast_coreset_solve(&x, &[0, 2, 4], PenaltyThreshold::infinite(), 3, 50, 10, &mut rng).unwrap();
        c.sort();
        assert_eq!(c, vec![0, 2, 4]);
    }

    #[test]
    fn coreset_keeps_zero_weight_candidates_eligible() {
        // Candidate 1 sits on a single far point that the subsample may miss; k = 3 forces it in.
        let x = line(&[0.0, 100.0, 50.0, 0.0, 50.0]);
        let mut rng = RngStream::new(2).rng();
        let mut c = fast_coreset_solve(&x, &[0, 1, 2], PenaltyThreshold::infinite(), 3, 1, 5, &mut rng).unwrap();
        c.sort();
        assert_eq!(c, vec![0, 1, 2]);
    }

    #[test]
    fn mh_rejects_zero_chain() {
        let x = line(&[3.0, 3.0]);
        let s = WeightSampler::new(&x).unwrap();
        let mut memo = RoundMemo::new(2);
        let mut rng = RngStream::new(1).rng();
        let cfg = MhConfig::new(4).unwrap();
        let r = mh_sample(&x, &[0], &mut memo, &s, PenaltyThreshold::infinite(), &cfg, &mut rng);
        assert!(matches!(r, Err(Error::TotalCostZero { .. })));
    }

    #[test]
    fn delegation_rule() {
        assert!(delegates(10_000, 10, 50, 1.0));
        assert!(!delegates(10_000, 10, 250, 1.0));
        assert!(delegates(10_000, 10, 250, 10.0));
    }
}
