//! Penalized and trimmed clustering costs.
use alloc::vec::Vec;

use crate::data::{sq_dist, CenterSet, Dataset, PenaltyThreshold, Point};
use crate::error::{Error, Result};
use crate::math::pairwise_sum;
use crate::space::CostSpace;

/// Relative tolerance used by every cost comparison in the crate.
pub const COST_REL_TOL: f64 = 1e-9;

/// `τ_Θ(x, C) = min(Θ, d²(x, C))`. With no centers the point pays `Θ`.
pub fn tau_point(x: &Point, centers: &CenterSet, theta: PenaltyThreshold) -> Result<f64> {
    if x.dim() != centers.dim() {
        return Err(Error::DimensionMismatch {
            expected: centers.dim(),
            found: x.dim(),
        });
    }
    Ok(theta.clamp(centers.nearest(x.coords()).1))
}

/// Squared distance from every point to its nearest center.
pub fn point_costs(data: &Dataset, centers: &CenterSet) -> Vec<f64> {
    crate::par::map_indexed(data.len(), |i| centers.nearest(data.point(i)).1)
}

/// Nearest-center index and squared distance for every point.
pub fn assign(data: &Dataset, centers: &CenterSet) -> Vec<(usize, f64)> {
    crate::par::map_indexed(data.len(), |i| centers.nearest(data.point(i)))
}

/// Cost of every item of a space to its nearest center, centers given as item indices.
pub fn indexed_costs<S: CostSpace + ?Sized>(space: &S, centers: &[usize]) -> Vec<f64> {
    crate::par::map_indexed(space.len(), |i| {
        let mut best = f64::INFINITY;
        for &c in centers {
            let d = space.cost(i, c);
            if d < best {
                best = d;
            }
        }
        best
    })
}

/// Weighted sum of `min(Θ, cost)`. Zero-weight items contribute nothing, even at infinite cost.
pub fn tau_from_costs(costs: &[f64], weights: &[u64], theta: PenaltyThreshold) -> f64 {
    let terms: Vec<f64> = costs
        .iter()
        .zip(weights)
        .map(|(&c, &w)| if w == 0 { 0.0 } else { w as f64 * theta.clamp(c) })
        .collect();
    pairwise_sum(&terms)
}

/// `τ_Θ(X, C)`.
pub fn tau_total(data: &Dataset, centers: &CenterSet, theta: PenaltyThreshold) -> Result<f64> {
    check_dims(data, centers)?;
    Ok(tau_from_costs(&point_costs(data, centers), data.weights(), theta))
}

/// `φ(X, C)`, the plain k-means cost.
pub fn phi(data: &Dataset, centers: &CenterSet) -> Result<f64> {
    tau_total(data, centers, PenaltyThreshold::infinite())
}

/// Order of items from most to least expensive; equal costs keep the lower index first.
fn by_cost_desc(costs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&a, &b| costs[b].total_cmp(&costs[a]).then(a.cmp(&b)));
    order
}

/// Cost after discarding `z` units of weight from the most expensive items.
///
/// Weighted items behave as multisets, so a heavy item can be partially trimmed.
pub fn phi_minus_z_from_costs(costs: &[f64], weights: &[u64], z: u64) -> f64 {
    let mut remaining = z;
    let mut terms = Vec::with_capacity(costs.len());
    for i in by_cost_desc(costs) {
        let w = weights[i];
        let cut = w.min(remaining);
        remaining -= cut;
        let keep = w - cut;
        if keep > 0 {
            terms.push(keep as f64 * costs[i]);
        }
    }
    pairwise_sum(&terms)
}

/// `φ^{-z}(X, C)`: the k-means cost with the `z` farthest points removed.
pub fn phi_minus_z(data: &Dataset, centers: &CenterSet, z: u64) -> Result<f64> {
    check_dims(data, centers)?;
    if z > data.total_weight() {
        return Err(Error::InvalidParameter("z exceeds the number of points"));
    }
    Ok(phi_minus_z_from_costs(&point_costs(data, centers), data.weights(), z))
}

/// The farthest whole items whose weights sum to at most `z`, sorted by index.
pub fn farthest_from_costs(costs: &[f64], weights: &[u64], z: u64) -> Vec<usize> {
    let mut left = z;
    let mut out = Vec::new();
    for i in by_cost_desc(costs) {
        let w = weights[i];
        if w == 0 {
            continue;
        }
        if w > left {
            break;
        }
        left -= w;
        out.push(i);
    }
    out.sort_unstable();
    out
}

/// Items whose cost is at least `Θ`, in index order.
pub fn out_from_costs(costs: &[f64], theta: PenaltyThreshold) -> Vec<usize> {
    (0..costs.len()).filter(|&i| costs[i] >= theta.value()).collect()
}

/// `out_Θ(X, C) = { x : d²(x, C) ≥ Θ }`.
pub fn out_set(data: &Dataset, centers: &CenterSet, theta: PenaltyThreshold) -> Result<Vec<usize>> {
    check_dims(data, centers)?;
    Ok(out_from_costs(&point_costs(data, centers), theta))
}

/// Weighted cost of the items not listed in `excluded` (which must be sorted).
pub fn phi_excluding(costs: &[f64], weights: &[u64], excluded: &[usize]) -> f64 {
    let mut terms = Vec::with_capacity(costs.len());
    let mut e = excluded.iter().peekable();
    for i in 0..costs.len() {
        if e.peek() == Some(&&i) {
            e.next();
            continue;
        }
        if weights[i] > 0 {
            terms.push(weights[i] as f64 * costs[i]);
        }
    }
    pairwise_sum(&terms)
}

fn check_dims(data: &Dataset, centers: &CenterSet) -> Result<()> {
    if data.dim() != centers.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: centers.dim(),
        });
    }
    Ok(())
}

/// A clustering of a Euclidean dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusteringSolution {
    pub centers: CenterSet,
    /// Indices of points declared outliers, sorted.
    pub outliers: Vec<usize>,
    /// k-means cost of the remaining points.
    pub phi_cost: f64,
    /// Penalized cost of all points at `theta`.
    pub tau_cost: f64,
    pub theta: PenaltyThreshold,
    /// False when the solver had to fall back because no candidate met its outlier budget.
    pub qualified: bool,
}

impl ClusteringSolution {
    /// Builds a solution whose costs are recomputed from the data.
    pub fn evaluate(
        data: &Dataset,
        centers: CenterSet,
        outliers: Vec<usize>,
        theta: PenaltyThreshold,
        qualified: bool,
    ) -> Result<Self> {
        check_dims(data, &centers)?;
        let costs = point_costs(data, &centers);
        let mut outliers = outliers;
        outliers.sort_unstable();
        outliers.dedup();
        Ok(ClusteringSolution {
            phi_cost: phi_excluding(&costs, data.weights(), &outliers),
            tau_cost: tau_from_costs(&costs, data.weights(), theta),
            centers,
            outliers,
            theta,
            qualified,
        })
    }

    pub fn outlier_weight(&self, data: &Dataset) -> u64 {
        self.outliers.iter().map(|&i| data.weights()[i]).sum()
    }
}

/// A clustering of a [`CostSpace`] with centers chosen among its items.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexedSolution {
    pub centers: Vec<usize>,
    pub outliers: Vec<usize>,
    pub phi_cost: f64,
    pub tau_cost: f64,
    pub theta: PenaltyThreshold,
    pub qualified: bool,
}

impl IndexedSolution {
    pub fn materialize(&self, data: &Dataset) -> ClusteringSolution {
        ClusteringSolution {
            centers: CenterSet::from_indices(data, &self.centers),
            outliers: self.outliers.clone(),
            phi_cost: self.phi_cost,
            tau_cost: self.tau_cost,
            theta: self.theta,
            qualified: self.qualified,
        }
    }

    pub fn outlier_weight<S: CostSpace + ?Sized>(&self, space: &S) -> u64 {
        self.outliers.iter().map(|&i| space.weight(i)).sum()
    }
}

/// Direct evaluation of `φ^{-z}` by sorting full point-to-center distances. Used as an oracle.
pub fn phi_minus_z_naive(data: &Dataset, centers: &CenterSet, z: usize) -> f64 {
    let mut per_point: Vec<f64> = data
        .rows()
        .map(|x| centers.iter().map(|c| sq_dist(x, c)).fold(f64::INFINITY, f64::min))
        .collect();
    per_point.sort_by(|a, b| a.total_cmp(b));
    per_point.truncate(per_point.len() - z);
    per_point.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn line(xs: &[f64]) -> Dataset {
        Dataset::from_rows(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    fn th(t: f64) -> PenaltyThreshold {
        PenaltyThreshold::new(t).unwrap()
    }

    #[test]
    fn tau_total_example() {
        let x = line(&[0.0, 1.0, 10.0]);
        let c = CenterSet::from_rows(1, &[vec![0.0]]).unwrap();
        assert_eq!(tau_total(&x, &c, th(4.0)).unwrap(), 5.0);
    }

    #[test]
    fn phi_minus_z_example() {
        let x = line(&[0.0, 1.0, 10.0]);
        let c = CenterSet::from_rows(1, &[vec![0.0]]).unwrap();
        assert_eq!(phi_minus_z(&x, &c, 1).unwrap(), 1.0);
    }

    #[test]
    fn out_set_example() {
        let x = line(&[0.0, 1.0, 10.0]);
        let c = CenterSet::from_rows(1, &[vec![0.0]]).unwrap();
        assert_eq!(out_set(&x, &c, th(4.0)).unwrap(), vec![2]);
    }

    #[test]
    fn tau_with_no_centers_charges_theta() {
        let x = Point::new(vec![1.0]).unwrap();
        let c = CenterSet::new(1);
        assert_eq!(tau_point(&x, &c, th(3.0)).unwrap(), 3.0);
    }

    #[test]
    fn phi_minus_z_rejects_large_z() {
        let x = line(&[0.0]);
        let c = CenterSet::from_rows(1, &[vec![0.0]]).unwrap();
        assert!(phi_minus_z(&x, &c, 2).is_err());
    }

    #[test]
    fn weighted_trim_is_partial() {
        // One heavy far item: trimming 2 of its 3 units leaves one unit.
        let costs = [1.0, 9.0];
        assert_eq!(phi_minus_z_from_costs(&costs, &[1, 3], 2), 10.0);
        assert_eq!(farthest_from_costs(&costs, &[1, 3], 2), Vec::<usize>::new());
        assert_eq!(farthest_from_costs(&costs, &[1, 3], 3), vec![1]);
    }

    #[test]
    fn farthest_ties_prefer_lower_index() {
        assert_eq!(farthest_from_costs(&[5.0, 5.0, 1.0], &[1, 1, 1], 1), vec![0]);
    }

    #[test]
    fn evaluate_recomputes_costs() {
        let x = line(&[0.0, 1.0, 10.0]);
        let c = CenterSet::from_rows(1, &[vec![0.0]]).unwrap();
        let s = ClusteringSolution::evaluate(&x, c, vec![2], th(4.0), true).unwrap();
        assert_eq!(s.phi_cost, 1.0);
        assert_eq!(s.tau_cost, 5.0);
    }
}
