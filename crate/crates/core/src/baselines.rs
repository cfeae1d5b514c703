//! Lloyd iterations with outlier trimming, used as a baseline and as a refinement pass.
use alloc::vec::Vec;
use rand::Rng;

use crate::cost::{assign, farthest_from_costs, ClusteringSolution};
use crate::data::{CenterSet, Dataset, PenaltyThreshold};
use crate::error::{Error, Result};
use crate::seeding::seed_centers;
use crate::space::WeightSampler;

/// Lloyd's algorithm that ignores the `z` farthest points in every iteration.
///
/// A center left without inliers moves to a uniformly chosen current outlier, or to
/// a uniform point when there are none. Outliers of the result are the `z`
/// farthest points from the final centers.
pub fn lloyd_outliers<R: Rng + ?Sized>(
    data: &Dataset,
    init: &CenterSet,
    z: u64,
    iters: usize,
    rng: &mut R,
) -> Result<ClusteringSolution> {
    if init.is_empty() {
        return Err(Error::EmptyInput("no initial centers"));
    }
    if init.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: init.dim(),
        });
    }
    if z >= data.total_weight() {
        return Err(Error::InvalidParameter("z must be smaller than n"));
    }
    let uniform = WeightSampler::new(data)?;
    let dim = data.dim();
    let k = init.len();
    let mut centers = init.clone();
    for _ in 0..iters {
        let a = assign(data, &centers);
        let costs: Vec<f64> = a.iter().map(|p| p.1).collect();
        let outliers = farthest_from_costs(&costs, data.weights(), z);
        let mut is_out = alloc::vec![false; data.len()];
        for &o in &outliers {
            is_out[o] = true;
        }
        let mut sums = alloc::vec![0.0f64; k * dim];
        let mut mass = alloc::vec![0u64; k];
        for (i, &(c, _)) in a.iter().enumerate() {
            let w = data.weights()[i];
            if is_out[i] || w == 0 {
                continue;
            }
            mass[c] += w;
            for (s, x) in sums[c * dim..(c + 1) * dim].iter_mut().zip(data.point(i)) {
                *s += w as f64 * x;
            }
        }
        for c in 0..k {
            if mass[c] > 0 {
                let m = mass[c] as f64;
                for (t, s) in centers.center_mut(c).iter_mut().zip(&sums[c * dim..(c + 1) * dim]) {
                    *t = s / m;
                }
            } else {
                let pick = if outliers.is_empty() {
                    uniform.sample(rng)
                } else {
                    outliers[rng.random_range(0..outliers.len())]
                };
                centers.center_mut(c).copy_from_slice(data.point(pick));
            }
        }
    }
    let costs = crate::cost::point_costs(data, &centers);
    let outliers = farthest_from_costs(&costs, data.weights(), z);
    ClusteringSolution::evaluate(data, centers, outliers, PenaltyThreshold::infinite(), true)
}

/// `k` distinct points drawn uniformly, the random initialization of the Lloyd baseline.
pub fn random_init<R: Rng + ?Sized>(data: &Dataset, k: usize, rng: &mut R) -> Result<CenterSet> {
    if k > data.len() {
        return Err(Error::TooFewPoints {
            requested: k,
            available: data.len(),
        });
    }
    let idx = rand::seq::index::sample(rng, data.len(), k).into_vec();
    Ok(CenterSet::from_indices(data, &idx))
}

/// Baseline: k-means++ seeding followed by `iters` trimmed Lloyd iterations.
pub fn kmeans_pp_lloyd<R: Rng + ?Sized>(
    data: &Dataset,
    k: usize,
    z: u64,
    iters: usize,
    rng: &mut R,
) -> Result<ClusteringSolution> {
    let init = seed_centers(data, k, PenaltyThreshold::infinite(), rng)?;
    lloyd_outliers(data, &init, z, iters, rng)
}
