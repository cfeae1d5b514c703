use alloc::vec::Vec;
use rand::Rng;

use crate::data::{CenterSet, Dataset, PenaltyThreshold};
use crate::error::{Error, Result};
use crate::math::{ceil_log2, floor, log2, sqrt};
use crate::seeding::overseed_penalized;
use crate::space::{Counted, WeightSampler};

/// The part of the input held by one machine.
#[derive(Clone, Debug, PartialEq)]
pub struct MachineShard {
    pub machine_id: usize,
    pub data: Dataset,
    /// Index of the shard's first point in the full dataset.
    pub offset: usize,
}

/// Splits `data` into `m` contiguous shards whose sizes differ by at most one.
pub fn shard(data: &Dataset, m: usize) -> Result<Vec<MachineShard>> {
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one machine"));
    }
    let n = data.len();
    if m > n {
        return Err(Error::TooFewPoints {
            requested: m,
            available: n,
        });
    }
    let (base, extra) = (n / m, n % m);
    let mut out = Vec::with_capacity(m);
    let mut start = 0;
    for j in 0..m {
        let len = base + usize::from(j < extra);
        let idx: Vec<usize> = (start..start + len).collect();
        out.push(MachineShard {
            machine_id: j,
            data: data.subset(&idx),
            offset: start,
        });
        start += len;
    }
    Ok(out)
}

/// What a machine sends to the coordinator.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSummary {
    pub machine_id: usize,
    pub centers: CenterSet,
    /// Number of shard points (by weight) represented by each center.
    pub weights: Vec<u64>,
    /// Weight of shard points farther than `Θ` from every center.
    pub outliers_dropped: u64,
    /// `histograms[y][k]` counts represented points at distance in `[2^k, 2^{k+1})` from `y`
    /// (bucket 0 also takes distances below 1).
    pub histograms: Option<Vec<Vec<u64>>>,
}

impl WeightedSummary {
    /// Scalars transmitted: coordinates and weight per center, the drop counter, and histogram entries.
    pub fn scalar_count(&self) -> usize {
        let y = self.centers.len();
        let hist = self.histograms.as_ref().map_or(0, |h| h.iter().map(Vec::len).sum());
        y * (self.centers.dim() + 1) + 1 + hist
    }

    pub fn represented_weight(&self) -> u64 {
        self.weights.iter().sum::<u64>() + self.outliers_dropped
    }
}

/// Number of histogram buckets, `⌈log₂ Δ⌉ + 1`, for a squared-diameter bound.
pub fn histogram_levels(delta_sq: f64) -> usize {
    ceil_log2(sqrt(delta_sq)) as usize + 1
}

fn bucket(dist_sq: f64, levels: usize) -> usize {
    let d = sqrt(dist_sq);
    if d < 1.0 {
        return 0;
    }
    (floor(log2(d)) as usize).min(levels - 1)
}

/// Weights, drop count and optional histograms of `data` against `centers`.
pub(crate) fn summarize(
    machine_id: usize,
    data: &Dataset,
    centers: CenterSet,
    theta: PenaltyThreshold,
    refined: bool,
) -> WeightedSummary {
    let levels = histogram_levels(data.diameter_sq_bound());
    let mut weights = alloc::vec![0u64; centers.len()];
    let mut hist = refined.then(|| alloc::vec![alloc::vec![0u64; levels]; centers.len()]);
    let mut dropped = 0u64;
    let assignment = crate::cost::assign(data, &centers);
    for (i, &(y, d)) in assignment.iter().enumerate() {
        let w = data.weights()[i];
        if d >= theta.value() {
            dropped += w;
        } else {
            weights[y] += w;
            if let Some(h) = hist.as_mut() {
                h[y][bucket(d, levels)] += w;
            }
        }
    }
    WeightedSummary {
        machine_id,
        centers,
        weights,
        outliers_dropped: dropped,
        histograms: hist,
    }
}

/// Penalized overseeding on one shard followed by the weighted summary.
pub fn machine_overseed<R: Rng + ?Sized>(
    shard: &MachineShard,
    ell: usize,
    theta: PenaltyThreshold,
    refined: bool,
    rng: &mut R,
) -> Result<WeightedSummary> {
    machine_overseed_counted(shard, ell, theta, refined, rng).map(|p| p.0)
}

/// [`machine_overseed`] that also returns the number of distance evaluations.
pub(crate) fn machine_overseed_counted<R: Rng + ?Sized>(
    shard: &MachineShard,
    ell: usize,
    theta: PenaltyThreshold,
    refined: bool,
    rng: &mut R,
) -> Result<(WeightedSummary, u64)> {
    let space = Counted::new(&shard.data);
    let seeding = overseed_penalized(&space, ell, theta, rng)?;
    let centers = CenterSet::from_indices(&shard.data, &seeding.centers);
    let evals = space.evals() + (shard.data.len() * centers.len()) as u64;
    Ok((summarize(shard.machine_id, &shard.data, centers, theta, refined), evals))
}

/// Penalized k-means|| on one dataset: `rounds` rounds, each adding every point
/// independently with probability `min(1, ℓ·w·τ / Σ w·τ)`.
pub fn kmeans_par_overseed<R: Rng + ?Sized>(
    data: &Dataset,
    rounds: usize,
    ell: usize,
    theta: PenaltyThreshold,
    rng: &mut R,
) -> Result<WeightedSummary> {
    let shards = [MachineShard {
        machine_id: 0,
        data: data.clone(),
        offset: 0,
    }];
    let (mut s, _) = kmeans_par_sharded(&shards, rounds, ell, theta, false, rng)?;
    Ok(s.pop().expect("one shard"))
}

/// k-means|| run jointly over shards. Returns one summary per shard over the shared
/// center set, and the scalars each machine sent while sampling.
pub fn kmeans_par_sharded<R: Rng + ?Sized>(
    shards: &[MachineShard],
    rounds: usize,
    ell: usize,
    theta: PenaltyThreshold,
    refined: bool,
    rng: &mut R,
) -> Result<(Vec<WeightedSummary>, Vec<usize>)> {
    kmeans_par_counted(shards, rounds, ell, theta, refined, rng).map(|(s, sent, _)| (s, sent))
}

/// [`kmeans_par_sharded`] that also returns the number of distance evaluations.
pub(crate) fn kmeans_par_counted<R: Rng + ?Sized>(
    shards: &[MachineShard],
    rounds: usize,
    ell: usize,
    theta: PenaltyThreshold,
    refined: bool,
    rng: &mut R,
) -> Result<(Vec<WeightedSummary>, Vec<usize>, u64)> {
    if ell == 0 {
        return Err(Error::InvalidParameter("ell must be positive"));
    }
    let first = shards.first().ok_or(Error::EmptyInput("no shards"))?;
    let dim = first.data.dim();
    let mut sent = alloc::vec![0usize; shards.len()];
    let mut nearest: Vec<Vec<f64>> = shards.iter().map(|s| alloc::vec![f64::INFINITY; s.data.len()]).collect();
    let mut centers = CenterSet::new(dim);

    // One uniform seed over the union of shards.
    let sizes: Vec<u64> = shards.iter().map(|s| s.data.total_weight()).collect();
    let total: u64 = sizes.iter().sum();
    if total == 0 {
        return Err(Error::EmptyInput("all weights are zero"));
    }
    let mut u = rng.random_range(0..total);
    let mut j = 0;
    while u >= sizes[j] {
        u -= sizes[j];
        j += 1;
    }
    let local = WeightSampler::new(&shards[j].data)?.sample(rng);
    centers.push(shards[j].data.point(local))?;
    sent[j] += dim;
    let mut fresh_from = 0;
    let points: usize = shards.iter().map(|s| s.data.len()).sum();
    let mut evals = 0u64;
    for _ in 0..rounds {
        evals += (points * (centers.len() - fresh_from)) as u64;
        for (s, near) in shards.iter().zip(nearest.iter_mut()) {
            for (i, d) in near.iter_mut().enumerate() {
                for c in fresh_from..centers.len() {
                    let v = crate::data::sq_dist(s.data.point(i), centers.center(c));
                    if v < *d {
                        *d = v;
                    }
                }
            }
        }
        fresh_from = centers.len();
        let local_costs: Vec<f64> = shards
            .iter()
            .zip(&nearest)
            .map(|(s, near)| crate::cost::tau_from_costs(near, s.data.weights(), theta))
            .collect();
        for c in sent.iter_mut() {
            *c += 1;
        }
        let cost: f64 = local_costs.iter().sum();
        if cost <= 0.0 {
            break;
        }
        let mut added = Vec::new();
        for (j, (s, near)) in shards.iter().zip(&nearest).enumerate() {
            for (i, &d) in near.iter().enumerate() {
                let w = s.data.weights()[i] as f64;
                let p = (ell as f64 * w * theta.clamp(d) / cost).min(1.0);
                if p > 0.0 && rng.random::<f64>() < p {
                    added.push((j, i));
                }
            }
        }
        for (j, i) in added {
            centers.push(shards[j].data.point(i))?;
            sent[j] += dim;
        }
    }
    let summaries = shards
        .iter()
        .map(|s| summarize(s.machine_id, &s.data, centers.clone(), theta, refined))
        .collect();
    evals += (points * centers.len()) as u64;
    Ok((summaries, sent, evals))
}
