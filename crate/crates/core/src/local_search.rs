//! Sampling-based local search on the penalized objective, and the full
//! outlier-aware procedure that runs it over a ladder of guesses for the optimum.
use alloc::vec::Vec;
use rand::Rng;

use crate::cache::CostCache;
use crate::cost::IndexedSolution;
use crate::data::PenaltyThreshold;
use crate::error::{Error, Result};
use crate::math::{ceil, ceil_log2, ln, pairwise_sum, powi2};
use crate::rng::RngStream;
use crate::seeding::{overseed_penalized, sample_tau_weighted};
use crate::space::CostSpace;

/// Result of one swap attempt.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwapOutcome {
    /// The sampled candidate.
    pub candidate: usize,
    /// Position whose center was replaced, or `None` if the set was kept.
    pub replaced: Option<usize>,
    pub cost_before: f64,
    pub cost_after: f64,
}

/// Penalized cost of the cached centers.
pub fn cached_tau<S: CostSpace + ?Sized>(space: &S, cache: &CostCache, theta: PenaltyThreshold) -> f64 {
    crate::cost::tau_from_costs(cache.d1(), &weights(space), theta)
}

fn weights<S: CostSpace + ?Sized>(space: &S) -> Vec<u64> {
    (0..space.len()).map(|i| space.weight(i)).collect()
}

/// Finds the best position to swap out for candidate `c`, given its costs to every item.
///
/// Returns `(position, cost)` of the best swap; `None` means keeping `C` is best.
/// Ties go to the lowest position, and keeping `C` is considered last.
pub fn best_swap<S: CostSpace + ?Sized>(
    space: &S,
    cache: &CostCache,
    c_costs: &[f64],
    theta: PenaltyThreshold,
) -> (Option<usize>, f64) {
    let k = cache.centers().len();
    let n = space.len();
    let (d1, d2, a1) = (cache.d1(), cache.d2(), cache.a1());
    let mut base_terms = Vec::with_capacity(n);
    let mut keep_terms = Vec::with_capacity(n);
    let mut delta = alloc::vec![0.0f64; k];
    for i in 0..n {
        let w = space.weight(i);
        if w == 0 {
            continue;
        }
        let w = w as f64;
        let dc = c_costs[i];
        let with_c = theta.clamp(d1[i].min(dc));
        base_terms.push(w * with_c);
        keep_terms.push(w * theta.clamp(d1[i]));
        let without_r = theta.clamp(d2[i].min(dc));
        if without_r != with_c {
            delta[a1[i]] += w * (without_r - with_c);
        }
    }
    let base = pairwise_sum(&base_terms);
    let keep = pairwise_sum(&keep_terms);
    let mut best = (None, keep);
    let mut best_val = f64::INFINITY;
    for (r, d) in delta.iter().enumerate() {
        let v = base + d;
        if v < best_val {
            best_val = v;
            best.0 = Some(r);
        }
    }
    if best_val <= keep {
        best.1 = best_val;
    } else {
        best.0 = None;
    }
    best
}

/// Samples a candidate proportionally to `w·τ` and applies the best swap in place.
///
/// Returns `None` when the penalized cost is already zero.
pub fn local_search_step<S, R>(
    space: &S,
    cache: &mut CostCache,
    theta: PenaltyThreshold,
    rng: &mut R,
) -> Option<SwapOutcome>
where
    S: CostSpace + ?Sized,
    R: Rng + ?Sized,
{
    let c = sample_tau_weighted(space, cache.d1(), theta, rng).ok()?;
    Some(swap_in(space, cache, c, theta))
}

/// Applies the best swap for a given candidate.
pub fn swap_in<S: CostSpace + ?Sized>(
    space: &S,
    cache: &mut CostCache,
    c: usize,
    theta: PenaltyThreshold,
) -> SwapOutcome {
    let c_costs = crate::par::map_indexed(space.len(), |i| space.cost(i, c));
    let keep = crate::cost::tau_from_costs(cache.d1(), &weights(space), theta);
    if cache.centers().contains(&c) {
        return SwapOutcome {
            candidate: c,
            replaced: None,
            cost_before: keep,
            cost_after: keep,
        };
    }
    let (pos, cost) = best_swap(space, cache, &c_costs, theta);
    if let Some(p) = pos {
        cache.replace_with_costs(space, p, c, &c_costs);
    }
    SwapOutcome {
        candidate: c,
        replaced: pos,
        cost_before: keep,
        cost_after: cost,
    }
}

/// Runs `steps` local search steps from `centers` at a fixed penalty.
pub fn local_search_fixed<S, R>(
    space: &S,
    centers: Vec<usize>,
    theta: PenaltyThreshold,
    steps: usize,
    rng: &mut R,
) -> Vec<usize>
where
    S: CostSpace + ?Sized,
    R: Rng + ?Sized,
{
    let mut cache = CostCache::new(space, centers);
    for _ in 0..steps {
        if local_search_step(space, &mut cache, theta, rng).is_none() {
            break;
        }
    }
    cache.centers().to_vec()
}

/// Brute-force reference for a swap: evaluates every `(C ∪ {c}) \ {d}` from scratch.
pub fn naive_swap<S: CostSpace + ?Sized>(
    space: &S,
    centers: &[usize],
    c: usize,
    theta: PenaltyThreshold,
) -> (Vec<usize>, f64) {
    let w = weights(space);
    let eval = |cs: &[usize]| crate::cost::tau_from_costs(&crate::cost::indexed_costs(space, cs), &w, theta);
    let mut best = (centers.to_vec(), eval(centers));
    if centers.contains(&c) {
        return best;
    }
    let mut best_val = f64::INFINITY;
    let mut best_set = None;
    for r in 0..centers.len() {
        let mut cs = centers.to_vec();
        cs[r] = c;
        let v = eval(&cs);
        if v < best_val {
            best_val = v;
            best_set = Some(cs);
        }
    }
    if best_val <= best.1 {
        best = (best_set.unwrap(), best_val);
    }
    best
}

/// One guess `2^i` for the optimum and the penalty derived from it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderEntry {
    pub index: usize,
    pub opt_guess: f64,
    pub theta: PenaltyThreshold,
}

/// Guesses `2^i` for `i = 0..=⌈log₂(n·Δ²)⌉` with `Θ = β·2^i / z`.
///
/// With `z = 0` there is nothing to penalize and the ladder is the single entry `Θ = ∞`.
pub fn theta_ladder_with_beta(n: u64, delta_sq: f64, z: u64, beta: f64) -> Vec<LadderEntry> {
    if z == 0 {
        return alloc::vec![LadderEntry {
            index: 0,
            opt_guess: f64::INFINITY,
            theta: PenaltyThreshold::infinite(),
        }];
    }
    let top = ceil_log2(n as f64 * delta_sq.max(1.0));
    (0..=top as usize)
        .map(|i| {
            let g = powi2(i as i32);
            LadderEntry {
                index: i,
                opt_guess: g,
                theta: PenaltyThreshold::new(beta * g / z as f64).expect("positive threshold"),
            }
        })
        .collect()
}

/// Drops every rung after the first whose penalty reaches `delta_sq`.
///
/// Once `Θ` is at least the largest possible cost, `min(Θ, ·)` is the identity and
/// all remaining rungs pose the same plain k-means problem.
pub fn collapse_ladder(mut ladder: Vec<LadderEntry>, delta_sq: f64) -> Vec<LadderEntry> {
    if let Some(p) = ladder.iter().position(|e| e.theta.value() >= delta_sq) {
        ladder.truncate(p + 1);
    }
    ladder
}

/// The ladder with `β = 300/ε`.
pub fn theta_ladder(n: u64, delta_sq: f64, z: u64, eps: f64) -> Vec<LadderEntry> {
    theta_ladder_with_beta(n, delta_sq, z, 300.0 / eps)
}

/// Constants of the step budget and the penalty scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchParams {
    pub c1: f64,
    pub c2: f64,
    /// `β = beta_scale / ε`.
    pub beta_scale: f64,
    /// Replaces the computed step budget when set.
    pub steps: Option<usize>,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            c1: 5.0,
            c2: 5.0,
            beta_scale: 300.0,
            steps: None,
        }
    }
}

impl SearchParams {
    /// `⌈c1·k·ln ln max(k,3) + c2·k·ln(1/ε)/ε⌉`.
    pub fn step_budget(&self, k: usize, eps: f64) -> usize {
        if let Some(s) = self.steps {
            return s;
        }
        let kf = k as f64;
        let lnln = ln(ln(kf.max(3.0)));
        let t = self.c1 * kf * lnln + self.c2 * kf * ln(1.0 / eps) / eps;
        ceil(t.max(0.0)) as usize
    }
}

struct RungResult {
    best: Option<(f64, Vec<usize>)>,
    fallback: (f64, Vec<usize>),
}

fn run_rung<S: CostSpace + ?Sized>(
    space: &S,
    k: usize,
    theta: PenaltyThreshold,
    steps: usize,
    cap: f64,
    stream: RngStream,
) -> Result<RungResult> {
    let mut rng = stream.rng();
    let mut seeds = overseed_penalized(space, k, theta, &mut rng)?.centers;
    pad_centers(space, &mut seeds, k);
    let mut cache = CostCache::new(space, seeds);
    let out_theta = 10.0 * theta.value();
    let w = weights(space);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut fallback: Option<(f64, Vec<usize>)> = None;
    let mut consider = |cache: &CostCache| {
        let d1 = cache.d1();
        let mut out_w = 0u64;
        let mut inl = Vec::with_capacity(d1.len());
        for (i, &d) in d1.iter().enumerate() {
            if d >= out_theta {
                out_w += w[i];
            } else if w[i] > 0 {
                inl.push(w[i] as f64 * d);
            }
        }
        if out_w as f64 <= cap {
            let phi = pairwise_sum(&inl);
            if best.as_ref().is_none_or(|b| phi < b.0) {
                best = Some((phi, cache.centers().to_vec()));
            }
        }
        let tau = crate::cost::tau_from_costs(d1, &w, theta);
        if fallback.as_ref().is_none_or(|f| tau < f.0) {
            fallback = Some((tau, cache.centers().to_vec()));
        }
    };
    consider(&cache);
    for _ in 0..steps {
        match local_search_step(space, &mut cache, theta, &mut rng) {
            None => break,
            Some(o) if o.replaced.is_some() => consider(&cache),
            Some(_) => {}
        }
    }
    Ok(RungResult {
        best,
        fallback: fallback.expect("at least one candidate"),
    })
}

/// Tops up a center list to `k` distinct items, taking unused items in index order.
pub fn pad_centers<S: CostSpace + ?Sized>(space: &S, centers: &mut Vec<usize>, k: usize) {
    let mut i = 0;
    while centers.len() < k && i < space.len() {
        if !centers.contains(&i) {
            centers.push(i);
        }
        i += 1;
    }
}

/// Local search with outliers: runs every rung of the ladder and returns the best
/// solution whose `out_{10Θ}` weight is at most `(1+ε)z`.
pub fn local_search_with_outliers<S: CostSpace + ?Sized>(
    space: &S,
    k: usize,
    z: u64,
    eps: f64,
    params: &SearchParams,
    stream: RngStream,
) -> Result<IndexedSolution> {
    local_search_with_outlier_cap(space, k, z, eps, (1.0 + eps) * z as f64, params, stream)
}

/// As [`local_search_with_outliers`] with an explicit cap on the outlier weight.
pub fn local_search_with_outlier_cap<S: CostSpace + ?Sized>(
    space: &S,
    k: usize,
    z: u64,
    eps: f64,
    cap: f64,
    params: &SearchParams,
    stream: RngStream,
) -> Result<IndexedSolution> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive"));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter("eps must lie in (0, 1]"));
    }
    let total = space.total_weight();
    let items = (0..space.len()).filter(|&i| space.weight(i) > 0).count();
    if items < k {
        return Err(Error::TooFewPoints {
            requested: k,
            available: items,
        });
    }
    if z > total {
        return Err(Error::InvalidParameter("z exceeds the total weight"));
    }
    let delta_sq = space.diameter_sq_bound();
    let ladder = collapse_ladder(theta_ladder_with_beta(total, delta_sq, z, params.beta_scale / eps), delta_sq);
    let steps = params.step_budget(k, eps);
    let results = crate::par::map_indexed(ladder.len(), |r| {
        run_rung(space, k, ladder[r].theta, steps, cap, stream.derive(r as u64))
    });
    let mut best: Option<(f64, usize, Vec<usize>)> = None;
    let mut fallbacks = Vec::with_capacity(results.len());
    for (r, res) in results.into_iter().enumerate() {
        let res = res?;
        if let Some((phi, cs)) = res.best {
            if best.as_ref().is_none_or(|b| phi < b.0) {
                best = Some((phi, r, cs));
            }
        }
        fallbacks.push(res.fallback.1);
    }
    let w = weights(space);
    if let Some((_, r, centers)) = best {
        let theta = ladder[r].theta;
        let costs = crate::cost::indexed_costs(space, &centers);
        let outliers = crate::cost::out_from_costs(&costs, PenaltyThreshold::new(10.0 * theta.value())?);
        return Ok(IndexedSolution {
            phi_cost: crate::cost::phi_excluding(&costs, &w, &outliers),
            tau_cost: crate::cost::tau_from_costs(&costs, &w, theta),
            centers,
            outliers,
            theta,
            qualified: true,
        });
    }
    // Nothing met the cap: keep the rung whose best penalized solution trims best.
    let mut pick: Option<(f64, usize, Vec<f64>)> = None;
    for (r, cs) in fallbacks.iter().enumerate() {
        let costs = crate::cost::indexed_costs(space, cs);
        let v = crate::cost::phi_minus_z_from_costs(&costs, &w, z);
        if pick.as_ref().is_none_or(|p| v < p.0) {
            pick = Some((v, r, costs));
        }
    }
    let (_, r, costs) = pick.expect("ladder is never empty");
    let outliers = crate::cost::farthest_from_costs(&costs, &w, z);
    Ok(IndexedSolution {
        phi_cost: crate::cost::phi_excluding(&costs, &w, &outliers),
        tau_cost: crate::cost::tau_from_costs(&costs, &w, ladder[r].theta),
        centers: fallbacks.swap_remove(r),
        outliers,
        theta: ladder[r].theta,
        qualified: false,
    })
}
