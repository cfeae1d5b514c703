//! Indexed weighted cost spaces. Solvers only see indices, weights and pairwise costs.
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::data::{sq_dist, Dataset};
use crate::error::{Error, Result};

/// A finite set of weighted items with a symmetric pairwise cost (a squared distance).
///
/// `cost(i, i)` is usually zero but need not be: the almost-metric built from
/// refined summaries has a positive self-cost.
pub trait CostSpace: Sync {
    fn len(&self) -> usize;

    fn weight(&self, i: usize) -> u64;

    fn cost(&self, i: usize, j: usize) -> f64;

    /// Any upper bound on the largest pairwise cost.
    fn diameter_sq_bound(&self) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn total_weight(&self) -> u64 {
        (0..self.len()).map(|i| self.weight(i)).sum()
    }
}

impl CostSpace for Dataset {
    fn len(&self) -> usize {
        Dataset::len(self)
    }

    #[inline]
    fn weight(&self, i: usize) -> u64 {
        self.weights()[i]
    }

    #[inline]
    fn cost(&self, i: usize, j: usize) -> f64 {
        sq_dist(self.point(i), self.point(j))
    }

    fn diameter_sq_bound(&self) -> f64 {
        Dataset::diameter_sq_bound(self)
    }

    fn total_weight(&self) -> u64 {
        Dataset::total_weight(self)
    }
}

impl<S: CostSpace + ?Sized> CostSpace for &S {
    fn len(&self) -> usize {
        (**self).len()
    }
    fn weight(&self, i: usize) -> u64 {
        (**self).weight(i)
    }
    fn cost(&self, i: usize, j: usize) -> f64 {
        (**self).cost(i, j)
    }
    fn diameter_sq_bound(&self) -> f64 {
        (**self).diameter_sq_bound()
    }
    fn total_weight(&self) -> u64 {
        (**self).total_weight()
    }
}

/// Wraps a space and counts every `cost` evaluation.
pub struct Counted<S> {
    inner: S,
    evals: AtomicU64,
}

impl<S: CostSpace> Counted<S> {
    pub fn new(inner: S) -> Self {
        Counted {
            inner,
            evals: AtomicU64::new(0),
        }
    }

    pub fn evals(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.evals.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }
}

impl<S: CostSpace> CostSpace for Counted<S> {
    fn len(&self) -> usize {
        self.inner.len()
    }
    fn weight(&self, i: usize) -> u64 {
        self.inner.weight(i)
    }
    #[inline]
    fn cost(&self, i: usize, j: usize) -> f64 {
        self.evals.fetch_add(1, Ordering::Relaxed);
        self.inner.cost(i, j)
    }
    fn diameter_sq_bound(&self) -> f64 {
        self.inner.diameter_sq_bound()
    }
    fn total_weight(&self) -> u64 {
        self.inner.total_weight()
    }
}

/// A reweighted selection of items from a base space.
pub struct WeightedSubset<'a, S: ?Sized> {
    base: &'a S,
    index: Vec<usize>,
    weights: Vec<u64>,
}

impl<'a, S: CostSpace + ?Sized> WeightedSubset<'a, S> {
    pub fn new(base: &'a S, index: Vec<usize>, weights: Vec<u64>) -> Result<Self> {
        if index.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: index.len(),
                found: weights.len(),
            });
        }
        if index.iter().any(|&i| i >= base.len()) {
            return Err(Error::InvalidParameter("subset index out of range"));
        }
        Ok(WeightedSubset {
            base,
            index,
            weights,
        })
    }

    /// Base-space index of subset item `i`.
    pub fn base_index(&self, i: usize) -> usize {
        self.index[i]
    }

    pub fn indices(&self) -> &[usize] {
        &self.index
    }
}

impl<S: CostSpace + ?Sized> CostSpace for WeightedSubset<'_, S> {
    fn len(&self) -> usize {
        self.index.len()
    }
    fn weight(&self, i: usize) -> u64 {
        self.weights[i]
    }
    #[inline]
    fn cost(&self, i: usize, j: usize) -> f64 {
        self.base.cost(self.index[i], self.index[j])
    }
    fn diameter_sq_bound(&self) -> f64 {
        self.base.diameter_sq_bound()
    }
}

/// An explicit cost matrix. Handy for small finite metrics.
#[derive(Clone, Debug)]
pub struct MatrixSpace {
    n: usize,
    costs: Vec<f64>,
    weights: Vec<u64>,
}

impl MatrixSpace {
    pub fn new(n: usize, costs: Vec<f64>, weights: Vec<u64>) -> Result<Self> {
        if costs.len() != n * n || weights.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: costs.len(),
            });
        }
        if costs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidParameter("costs must be finite and non-negative"));
        }
        Ok(MatrixSpace { n, costs, weights })
    }

    /// Squares every entry of a distance matrix.
    pub fn from_distances(n: usize, dist: &[f64], weights: Vec<u64>) -> Result<Self> {
        Self::new(n, dist.iter().map(|d| d * d).collect(), weights)
    }
}

impl CostSpace for MatrixSpace {
    fn len(&self) -> usize {
        self.n
    }
    fn weight(&self, i: usize) -> u64 {
        self.weights[i]
    }
    #[inline]
    fn cost(&self, i: usize, j: usize) -> f64 {
        self.costs[i * self.n + j]
    }
    fn diameter_sq_bound(&self) -> f64 {
        self.costs.iter().copied().fold(0.0, f64::max)
    }
}

/// Draws indices proportionally to weight. Falls back to a plain uniform draw for unit weights.
#[derive(Clone, Debug)]
pub struct WeightSampler {
    prefix: Option<Vec<u64>>,
    n: usize,
}

impl WeightSampler {
    pub fn new<S: CostSpace + ?Sized>(space: &S) -> Result<Self> {
        let n = space.len();
        if n == 0 {
            return Err(Error::EmptyInput("cannot sample from an empty space"));
        }
        if (0..n).all(|i| space.weight(i) == 1) {
            return Ok(WeightSampler { prefix: None, n });
        }
        let mut prefix = Vec::with_capacity(n);
        let mut acc = 0u64;
        for i in 0..n {
            acc += space.weight(i);
            prefix.push(acc);
        }
        if acc == 0 {
            return Err(Error::EmptyInput("all weights are zero"));
        }
        Ok(WeightSampler {
            prefix: Some(prefix),
            n,
        })
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.prefix {
            None => rng.random_range(0..self.n),
            Some(p) => {
                let total = *p.last().unwrap();
                let u = rng.random_range(0..total);
                p.partition_point(|&c| c <= u)
            }
        }
    }
}
