//! Points, datasets and center sets.
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A point in `R^d`. Coordinates are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyInput("point has no coordinates"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: 0 });
        }
        Ok(Point(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

/// Squared Euclidean distance between two points of equal dimension.
pub fn dist_sq(a: &Point, b: &Point) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(sq_dist(a.coords(), b.coords()))
}

/// Unchecked squared distance on raw coordinate slices.
#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s
}

/// Coordinate-wise mean of a non-empty set of points.
pub fn mean(points: &[Point]) -> Result<Point> {
    let first = points.first().ok_or(Error::EmptyInput("mean of empty set"))?;
    let dim = first.dim();
    let mut acc = alloc::vec![0.0; dim];
    for p in points {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        for (a, c) in acc.iter_mut().zip(p.coords()) {
            *a += c;
        }
    }
    let n = points.len() as f64;
    for a in &mut acc {
        *a /= n;
    }
    Point::new(acc)
}

/// The penalty `Θ` that caps each point's cost. `Θ = ∞` recovers plain k-means.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct PenaltyThreshold(f64);

impl PenaltyThreshold {
    pub fn new(theta: f64) -> Result<Self> {
        if theta.is_nan() || theta < 0.0 {
            return Err(Error::InvalidThreshold(theta));
        }
        Ok(PenaltyThreshold(theta))
    }

    pub const fn infinite() -> Self {
        PenaltyThreshold(f64::INFINITY)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    #[inline]
    pub fn clamp(self, cost: f64) -> f64 {
        if cost < self.0 {
            cost
        } else {
            self.0
        }
    }
}

/// A finite weighted point set stored row-major. Unweighted data has all weights equal to one.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<u64>,
}

impl Dataset {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        Self::from_rows_weighted(rows, alloc::vec![1; n])
    }

    pub fn from_points(points: &[Point]) -> Result<Self> {
        Self::from_rows(points.iter().map(|p| p.coords().to_vec()).collect())
    }

    /// Weights may be zero; such points never contribute cost.
    pub fn from_rows_weighted(rows: Vec<Vec<f64>>, weights: Vec<u64>) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyInput("dataset has no points"))?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::EmptyInput("point has no coordinates"));
        }
        if weights.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: weights.len(),
            });
        }
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            if r.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite { index: i });
            }
            coords.extend_from_slice(r);
        }
        Ok(Dataset {
            dim,
            coords,
            weights,
        })
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>, weights: Vec<u64>) -> Result<Self> {
        if dim == 0 || coords.is_empty() {
            return Err(Error::EmptyInput("dataset has no points"));
        }
        if coords.len() % dim != 0 || coords.len() / dim != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len() * dim,
                found: coords.len(),
            });
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: i / dim });
        }
        Ok(Dataset {
            dim,
            coords,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.iter().sum()
    }

    pub fn is_unit_weight(&self) -> bool {
        self.weights.iter().all(|&w| w == 1)
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn flat(&self) -> &[f64] {
        &self.coords
    }

    /// The points at `indices`, in that order, keeping their weights.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        let mut weights = Vec::with_capacity(indices.len());
        for &i in indices {
            coords.extend_from_slice(self.point(i));
            weights.push(self.weights[i]);
        }
        Dataset {
            dim: self.dim,
            coords,
            weights,
        }
    }

    pub fn with_weights(&self, weights: Vec<u64>) -> Result<Dataset> {
        Dataset::from_flat(self.dim, self.coords.clone(), weights)
    }

    /// Upper bound on the squared diameter from the bounding box.
    pub fn diameter_sq_bound(&self) -> f64 {
        let mut s = 0.0;
        for j in 0..self.dim {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for r in self.rows() {
                lo = lo.min(r[j]);
                hi = hi.max(r[j]);
            }
            s += (hi - lo) * (hi - lo);
        }
        s
    }
}

/// An ordered set of centers in `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct CenterSet {
    dim: usize,
    coords: Vec<f64>,
}

impl CenterSet {
    pub fn new(dim: usize) -> Self {
        CenterSet {
            dim,
            coords: Vec::new(),
        }
    }

    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut c = CenterSet::new(dim);
        for r in rows {
            c.push(r)?;
        }
        Ok(c)
    }

    pub fn from_indices(data: &Dataset, idx: &[usize]) -> Self {
        let mut c = CenterSet::new(data.dim());
        for &i in idx {
            c.coords.extend_from_slice(data.point(i));
        }
        c
    }

    pub fn push(&mut self, coords: &[f64]) -> Result<()> {
        if coords.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: self.len() });
        }
        self.coords.extend_from_slice(coords);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn center(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn center_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim.max(1))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(|c| c.to_vec()).collect()
    }

    /// Index and squared distance of the nearest center (lowest index on ties).
    #[inline]
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for (j, c) in self.iter().enumerate() {
            let d = sq_dist(x, c);
            if d < best.1 {
                best = (j, d);
            }
        }
        best
    }
}
