//! Penalized k-means++ overseeding.
//!
//! The first center is drawn proportionally to weight; every further center is
//! drawn proportionally to `w(x) · min(Θ, d²(x, C))`.
use alloc::vec::Vec;
use rand::Rng;

use crate::data::{CenterSet, Dataset, PenaltyThreshold};
use crate::error::{Error, Result};
use crate::space::{CostSpace, WeightSampler};

/// Centers drawn so far and whether sampling stopped because the penalized cost hit zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Seeding {
    pub centers: Vec<usize>,
    pub exhausted: bool,
}

/// Draws an index with probability `w_i·min(Θ, cost_i) / Σ_j w_j·min(Θ, cost_j)`.
///
/// `nearest` holds each item's current cost to the center set.
pub fn sample_tau_weighted<S, R>(
    space: &S,
    nearest: &[f64],
    theta: PenaltyThreshold,
    rng: &mut R,
) -> Result<usize>
where
    S: CostSpace + ?Sized,
    R: Rng + ?Sized,
{
    let mut prefix = Vec::with_capacity(nearest.len());
    let mut acc = 0.0;
    let mut last = None;
    for (i, &d) in nearest.iter().enumerate() {
        let w = space.weight(i);
        if w > 0 {
            let s = w as f64 * theta.clamp(d);
            if s > 0.0 {
                acc += s;
                last = Some(i);
            }
        }
        prefix.push(acc);
    }
    let Some(last) = last else {
        return Err(Error::TotalCostZero { centers: 0 });
    };
    let u = rng.random::<f64>() * acc;
    Ok(prefix.partition_point(|&p| p <= u).min(last))
}

/// Draws up to `ell` centers. Stops early, flagged by `exhausted`, once every item has zero cost.
pub fn overseed_penalized<S, R>(space: &S, ell: usize, theta: PenaltyThreshold, rng: &mut R) -> Result<Seeding>
where
    S: CostSpace + ?Sized,
    R: Rng + ?Sized,
{
    if ell == 0 {
        return Err(Error::InvalidParameter("ell must be positive"));
    }
    let n = space.len();
    if ell > n {
        return Err(Error::TooFewPoints {
            requested: ell,
            available: n,
        });
    }
    let sampler = WeightSampler::new(space)?;
    let first = sampler.sample(rng);
    let mut centers = Vec::with_capacity(ell);
    centers.push(first);
    let mut nearest = crate::par::map_indexed(n, |i| space.cost(i, first));
    while centers.len() < ell {
        let c = match sample_tau_weighted(space, &nearest, theta, rng) {
            Ok(c) => c,
            Err(Error::TotalCostZero { .. }) => {
                return Ok(Seeding {
                    centers,
                    exhausted: true,
                })
            }
            Err(e) => return Err(e),
        };
        centers.push(c);
        let fresh = crate::par::map_indexed(n, |i| space.cost(i, c));
        for (d, f) in nearest.iter_mut().zip(fresh) {
            if f < *d {
                *d = f;
            }
        }
    }
    Ok(Seeding {
        centers,
        exhausted: false,
    })
}

/// Euclidean convenience wrapper returning the seeded coordinates.
pub fn seed_centers<R: Rng + ?Sized>(
    data: &Dataset,
    ell: usize,
    theta: PenaltyThreshold,
    rng: &mut R,
) -> Result<CenterSet> {
    let s = overseed_penalized(data, ell, theta, rng)?;
    Ok(CenterSet::from_indices(data, &s.centers))
}

/// Sampling distribution of the next center given current centers: `w·τ / Σ w·τ`.
pub fn next_center_distribution<S: CostSpace + ?Sized>(
    space: &S,
    centers: &[usize],
    theta: PenaltyThreshold,
) -> Option<Vec<f64>> {
    let costs = crate::cost::indexed_costs(space, centers);
    let scores: Vec<f64> = (0..space.len())
        .map(|i| {
            let w = space.weight(i);
            if w == 0 {
                0.0
            } else {
                w as f64 * theta.clamp(costs[i])
            }
        })
        .collect();
    let total = crate::math::pairwise_sum(&scores);
    if total <= 0.0 {
        return None;
    }
    Some(scores.into_iter().map(|s| s / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use alloc::vec;

    fn line(xs: &[f64]) -> Dataset {
        Dataset::from_rows(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn second_center_law_example() {
        // X = {0, 1, 10}, first center 0, Θ = 4: scores 0, 1, 4.
        let x = line(&[0.0, 1.0, 10.0]);
        let p = next_center_distribution(&x, &[0], PenaltyThreshold::new(4.0).unwrap()).unwrap();
        assert_eq!(p, vec![0.0, 0.2, 0.8]);
    }

    #[test]
    fn second_center_empirical_frequency() {
        let x = line(&[0.0, 1.0, 10.0]);
        let theta = PenaltyThreshold::new(4.0).unwrap();
        let mut hits = [0usize; 3];
        let mut trials = 0;
        let mut rng = RngStream::new(11).rng();
        while trials < 20_000 {
            let s = overseed_penalized(&x, 2, theta, &mut rng).unwrap().centers;
            if s[0] == 0 {
                hits[s[1]] += 1;
                trials += 1;
            }
        }
        let f10 = hits[2] as f64 / trials as f64;
        assert_eq!(hits[0], 0);
        assert!((f10 - 0.8).abs() < 0.02, "{f10}");
    }

    #[test]
    fn ell_one_with_identical_points() {
        let x = line(&[2.0, 2.0, 2.0]);
        let mut rng = RngStream::new(1).rng();
        let c = overseed_penalized(&x, 1, PenaltyThreshold::infinite(), &mut rng).unwrap();
        assert_eq!(c.centers.len(), 1);
        assert!(!c.exhausted);
    }

    #[test]
    fn zero_cost_is_reported() {
        let x = line(&[2.0, 2.0, 2.0]);
        let mut rng = RngStream::new(1).rng();
        let p = overseed_penalized(&x, 2, PenaltyThreshold::infinite(), &mut rng).unwrap();
        assert!(p.exhausted);
        assert_eq!(p.centers.len(), 1);
        assert_eq!(
            sample_tau_weighted(&x, &[0.0; 3], PenaltyThreshold::infinite(), &mut rng),
            Err(Error::TotalCostZero { centers: 0 })
        );
    }

    #[test]
    fn ell_above_n_is_rejected() {
        let x = line(&[0.0, 1.0]);
        let mut rng = RngStream::new(1).rng();
        assert!(overseed_penalized(&x, 3, PenaltyThreshold::infinite(), &mut rng).is_err());
    }

    #[test]
    fn zero_weight_points_are_never_drawn() {
        let x = Dataset::from_rows_weighted(vec![vec![0.0], vec![100.0], vec![5.0]], vec![1, 0, 1])
            .unwrap();
        let mut rng = RngStream::new(3).rng();
        for _ in 0..200 {
            let c = overseed_penalized(&x, 2, PenaltyThreshold::infinite(), &mut rng).unwrap();
            assert!(!c.centers.contains(&1));
        }
    }

    #[test]
    fn same_seed_same_centers() {
        let x = line(&[0.0, 1.0, 3.0, 7.0, 15.0, 31.0]);
        let s = RngStream::new(5);
        let a = overseed_penalized(&x, 3, PenaltyThreshold::infinite(), &mut s.rng()).unwrap();
        let b = overseed_penalized(&x, 3, PenaltyThreshold::infinite(), &mut s.rng()).unwrap();
        assert_eq!(a, b);
    }
}
