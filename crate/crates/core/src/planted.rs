//! Synthetic instances with known ground truth: Gaussian clusters plus far outliers.
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cost::{phi_excluding, point_costs};
use crate::data::{sq_dist, CenterSet, Dataset};
use crate::error::{Error, Result};
use crate::math::sqrt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantedParams {
    pub n: usize,
    pub k: usize,
    pub z: usize,
    pub dim: usize,
    /// Minimum distance between generating centers, in units of `noise_scale·√dim`.
    pub separation: f64,
    /// Standard deviation of each coordinate around its center.
    pub noise_scale: f64,
    /// Outliers start this many separations beyond the outermost center.
    pub outlier_scale: f64,
}

impl PlantedParams {
    pub fn new(n: usize, k: usize, z: usize, dim: usize) -> Self {
        PlantedParams {
            n,
            k,
            z,
            dim,
            separation: 10.0,
            noise_scale: 1.0,
            outlier_scale: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlantedInstance {
    pub dataset: Dataset,
    /// Means of the generated clusters.
    pub centers: CenterSet,
    /// Centers the clusters were drawn around.
    pub generating_centers: CenterSet,
    /// Cluster of each point, `None` for planted outliers.
    pub labels: Vec<Option<usize>>,
    /// Indices of the planted outliers, sorted.
    pub outliers: Vec<usize>,
    /// k-means cost of the planted inliers against `centers`.
    pub opt: f64,
}

impl PlantedInstance {
    pub fn inliers(&self) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i].is_some()).collect()
    }

    /// Recomputes `opt` from the dataset, labels and centers.
    pub fn recompute_opt(&self) -> f64 {
        phi_excluding(&point_costs(&self.dataset, &self.centers), self.dataset.weights(), &self.outliers)
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Draws a planted instance. Point order is shuffled so outliers are spread over the index range.
pub fn gen_planted<R: Rng + ?Sized>(p: &PlantedParams, rng: &mut R) -> Result<PlantedInstance> {
    if p.k == 0 || p.dim == 0 {
        return Err(Error::InvalidParameter("k and dim must be positive"));
    }
    if p.k + p.z >= p.n {
        return Err(Error::InvalidParameter("k + z must be smaller than n"));
    }
    if !(p.separation > 0.0 && p.noise_scale > 0.0 && p.outlier_scale >= 0.0) {
        return Err(Error::InvalidParameter("separation and noise scale must be positive"));
    }
    let dim = p.dim;
    let min_gap = p.separation * sqrt(dim as f64) * p.noise_scale;
    let mut side = min_gap * libm::pow(p.k as f64, 1.0 / dim as f64) * 2.0;
    let mut gen = CenterSet::new(dim);
    let mut tries = 0;
    while gen.len() < p.k {
        let c: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * side).collect();
        if gen.iter().all(|g| sqrt(sq_dist(g, &c)) >= min_gap) {
            gen.push(&c)?;
        }
        tries += 1;
        if tries % 1000 == 0 {
            side *= 1.5;
        }
    }
    let mut centroid = alloc::vec![0.0; dim];
    for g in gen.iter() {
        for (a, x) in centroid.iter_mut().zip(g) {
            *a += x / p.k as f64;
        }
    }
    let spread = gen.iter().map(|g| sqrt(sq_dist(g, &centroid))).fold(0.0, f64::max);
    let r0 = spread + p.outlier_scale * min_gap;

    let inliers = p.n - p.z;
    let mut rows: Vec<(Vec<f64>, Option<usize>)> = Vec::with_capacity(p.n);
    for i in 0..inliers {
        let c = i % p.k;
        let x: Vec<f64> = gen.center(c).iter().map(|&m| m + p.noise_scale * gaussian(rng)).collect();
        rows.push((x, Some(c)));
    }
    for _ in 0..p.z {
        let mut dir: Vec<f64> = (0..dim).map(|_| gaussian(rng)).collect();
        let norm = sqrt(dir.iter().map(|d| d * d).sum());
        let r = r0 * (1.0 + rng.random::<f64>());
        for (d, m) in dir.iter_mut().zip(&centroid) {
            *d = m + r * *d / norm;
        }
        rows.push((dir, None));
    }
    rows.shuffle(rng);

    let mut sums = alloc::vec![0.0; p.k * dim];
    let mut counts = alloc::vec![0usize; p.k];
    for (x, l) in &rows {
        if let Some(c) = *l {
            counts[c] += 1;
            for (s, v) in sums[c * dim..(c + 1) * dim].iter_mut().zip(x) {
                *s += v;
            }
        }
    }
    let mut centers = CenterSet::new(dim);
    for c in 0..p.k {
        let m: Vec<f64> = sums[c * dim..(c + 1) * dim].iter().map(|s| s / counts[c] as f64).collect();
        centers.push(&m)?;
    }
    let labels: Vec<Option<usize>> = rows.iter().map(|r| r.1).collect();
    let outliers: Vec<usize> = (0..p.n).filter(|&i| labels[i].is_none()).collect();
    let dataset = Dataset::from_rows(rows.into_iter().map(|r| r.0).collect())?;
    // Each inlier pays the distance to its own cluster mean.
    let opt_terms: Vec<f64> = (0..p.n)
        .filter_map(|i| labels[i].map(|c| sq_dist(dataset.point(i), centers.center(c))))
        .collect();
    let opt = crate::math::pairwise_sum(&opt_terms);
    Ok(PlantedInstance {
        dataset,
        centers,
        generating_centers: gen,
        labels,
        outliers,
        opt,
    })
}
