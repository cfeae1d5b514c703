use alloc::vec::Vec;

use crate::data::{sq_dist, CenterSet};
use crate::error::{Error, Result};
use crate::math::{powi2, sqrt};
use crate::space::CostSpace;

use super::summary::WeightedSummary;

/// A copy `y^k` of center `y` standing for the points at distance about `2^k` from it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClonePoint {
    pub center: usize,
    pub level: u32,
    pub weight: u64,
}

/// An element of the almost-metric: an original center or one of its clones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Node {
    Base(usize),
    Clone(usize, u32),
}

/// Centers of all summaries plus one clone per nonzero histogram bucket.
///
/// `d'(y, y^k) = 2^k`, and any path between clones goes through their centers,
/// so `d'(y^k, y'^{k'}) = 2^k + d(y, y') + 2^{k'}`. In particular a clone is at
/// distance `2·2^k` from itself. As a cost space only the clones are items and
/// costs are squared distances.
#[derive(Clone, Debug, PartialEq)]
pub struct AlmostMetricInstance {
    base: CenterSet,
    clones: Vec<ClonePoint>,
    base_diameter: f64,
}

impl AlmostMetricInstance {
    pub fn new(base: CenterSet, clones: Vec<ClonePoint>) -> Result<Self> {
        if clones.iter().any(|c| c.center >= base.len()) {
            return Err(Error::InvalidParameter("clone refers to a missing center"));
        }
        let mut diam_sq = 0.0f64;
        for j in 0..base.dim() {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for c in base.iter() {
                lo = lo.min(c[j]);
                hi = hi.max(c[j]);
            }
            if lo.is_finite() {
                diam_sq += (hi - lo) * (hi - lo);
            }
        }
        Ok(AlmostMetricInstance {
            base,
            clones,
            base_diameter: sqrt(diam_sq),
        })
    }

    pub fn base(&self) -> &CenterSet {
        &self.base
    }

    pub fn clones(&self) -> &[ClonePoint] {
        &self.clones
    }

    /// The center a clone maps back to.
    pub fn map_to_base(&self, clone: usize) -> usize {
        self.clones[clone].center
    }

    fn base_dist(&self, a: usize, b: usize) -> f64 {
        if a == b {
            0.0
        } else {
            sqrt(sq_dist(self.base.center(a), self.base.center(b)))
        }
    }

    pub fn distance(&self, a: Node, b: Node) -> f64 {
        let (ya, ra) = match a {
            Node::Base(y) => (y, 0.0),
            Node::Clone(y, k) => (y, powi2(k as i32)),
        };
        let (yb, rb) = match b {
            Node::Base(y) => (y, 0.0),
            Node::Clone(y, k) => (y, powi2(k as i32)),
        };
        ra + self.base_dist(ya, yb) + rb
    }

    pub fn node(&self, clone: usize) -> Node {
        let c = self.clones[clone];
        Node::Clone(c.center, c.level)
    }
}

impl CostSpace for AlmostMetricInstance {
    fn len(&self) -> usize {
        self.clones.len()
    }

    fn weight(&self, i: usize) -> u64 {
        self.clones[i].weight
    }

    #[inline]
    fn cost(&self, i: usize, j: usize) -> f64 {
        let d = self.distance(self.node(i), self.node(j));
        d * d
    }

    fn diameter_sq_bound(&self) -> f64 {
        let top = self.clones.iter().map(|c| c.level).max().unwrap_or(0);
        let d = 2.0 * powi2(top as i32) + self.base_diameter;
        d * d
    }
}

/// Builds the almost-metric from refined summaries. Centers are numbered in summary order.
pub fn build_almost_metric(summaries: &[WeightedSummary]) -> Result<AlmostMetricInstance> {
    let dim = summaries.first().ok_or(Error::EmptyInput("no summaries"))?.centers.dim();
    let mut base = CenterSet::new(dim);
    let mut clones = Vec::new();
    for s in summaries {
        let hist = s
            .histograms
            .as_ref()
            .ok_or(Error::InvalidParameter("summary has no histograms"))?;
        for (y, row) in hist.iter().enumerate() {
            let id = base.len();
            base.push(s.centers.center(y))?;
            for (k, &w) in row.iter().enumerate() {
                if w > 0 {
                    clones.push(ClonePoint {
                        center: id,
                        level: k as u32,
                        weight: w,
                    });
                }
            }
        }
    }
    AlmostMetricInstance::new(base, clones)
}
