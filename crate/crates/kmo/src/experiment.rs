//! The experiment protocol: every (k, seed) pair runs the configured algorithm,
//! picks a penalty from the grid, refines with trimmed Lloyd and yields a report.
use std::time::Instant;

use kmo_core::baselines::{lloyd_outliers, random_init};
use kmo_core::cost::{farthest_from_costs, out_from_costs, phi_excluding, phi_minus_z_from_costs, point_costs, tau_from_costs};
use kmo_core::distributed::{run_distributed, shard, DistributedParams};
use kmo_core::local_search::{
    collapse_ladder, local_search_fixed, local_search_with_outliers, pad_centers, theta_ladder_with_beta, SearchParams,
};
use kmo_core::metropolis::{fast_algorithm, metropolized_overseed, FastParams, MhConfig};
use kmo_core::seeding::overseed_penalized;
use kmo_core::space::Counted;
use kmo_core::{CenterSet, Dataset, PenaltyThreshold, RngStream};
use rayon::prelude::*;

use crate::config::{Algorithm, RunConfig, ThetaGrid};
use crate::error::CliError;
use crate::report::RunReport;

/// Stream tag of the refinement pass, far from any grid index.
const REFINE_TAG: u64 = 1 << 40;

/// Scores of one grid candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct GridCandidate {
    pub centers: CenterSet,
    pub theta: PenaltyThreshold,
    /// Weight of `out_Θ`, the points at squared distance at least `Θ`.
    pub out_weight: u64,
    /// k-means cost of the points outside `out_Θ`.
    pub phi_inliers: f64,
    /// `φ^{-z}` of the candidate, used when no candidate is feasible.
    pub phi_minus_z: f64,
}

impl GridCandidate {
    pub fn score(data: &Dataset, centers: CenterSet, theta: PenaltyThreshold, z: u64) -> Self {
        let costs = point_costs(data, &centers);
        let out = out_from_costs(&costs, theta);
        GridCandidate {
            out_weight: out.iter().map(|&i| data.weights()[i]).sum(),
            phi_inliers: phi_excluding(&costs, data.weights(), &out),
            phi_minus_z: phi_minus_z_from_costs(&costs, data.weights(), z.min(data.total_weight())),
            centers,
            theta,
        }
    }
}

/// Index of the candidate with the lowest inlier cost among those with
/// `out_weight ≤ (1+ε)z`, and `true`; or, when none qualifies, the lowest
/// `φ^{-z}` and `false`. Ties go to the lower index.
pub fn select_candidate(cands: &[GridCandidate], z: u64, eps: f64) -> Option<(usize, bool)> {
    let cap = (1.0 + eps) * z as f64;
    let argmin = |key: &dyn Fn(&GridCandidate) -> Option<f64>| {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in cands.iter().enumerate() {
            if let Some(v) = key(c) {
                if best.is_none_or(|b| v < b.1) {
                    best = Some((i, v));
                }
            }
        }
        best.map(|b| b.0)
    };
    if let Some(i) = argmin(&|c| (c.out_weight as f64 <= cap).then_some(c.phi_inliers)) {
        return Some((i, true));
    }
    argmin(&|c| Some(c.phi_minus_z)).map(|i| (i, false))
}

/// Penalty values the grid specification expands to for this dataset.
pub fn grid_values(cfg: &RunConfig, data: &Dataset, z: u64) -> Result<Vec<PenaltyThreshold>, CliError> {
    let raw = match &cfg.theta_grid {
        ThetaGrid::Named(s) if s == "paper" => ThetaGrid::paper(),
        ThetaGrid::Named(s) if s == "ladder" => {
            let delta_sq = data.diameter_sq_bound();
            let ladder = theta_ladder_with_beta(data.total_weight(), delta_sq, z, cfg.beta / cfg.eps);
            return Ok(collapse_ladder(ladder, delta_sq).into_iter().map(|e| e.theta).collect());
        }
        ThetaGrid::Named(s) => return Err(CliError::Config(format!("unknown grid `{s}`"))),
        ThetaGrid::Values(v) => v.clone(),
    };
    raw.into_iter()
        .map(|t| PenaltyThreshold::new(t).map_err(|e| CliError::Config(e.to_string())))
        .collect()
}

fn search_params(cfg: &RunConfig) -> SearchParams {
    SearchParams {
        c1: cfg.c1,
        c2: cfg.c2,
        beta_scale: cfg.beta,
        steps: None,
    }
}

/// Result of an algorithm before refinement.
struct Raw {
    centers: CenterSet,
    theta: Option<PenaltyThreshold>,
    outliers: Vec<usize>,
    theta_feasible: bool,
    qualified: bool,
    evals: u64,
}

fn seed_indices<R: rand::Rng + ?Sized>(space: &Counted<&Dataset>, k: usize, theta: PenaltyThreshold, rng: &mut R) -> kmo_core::Result<Vec<usize>> {
    let mut c = overseed_penalized(space, k, theta, rng)?.centers;
    pad_centers(space, &mut c, k);
    Ok(c)
}

/// Centers for one grid point, and the distance evaluations spent.
fn grid_candidate(
    cfg: &RunConfig,
    data: &Dataset,
    k: usize,
    theta: PenaltyThreshold,
    stream: RngStream,
) -> kmo_core::Result<(CenterSet, u64)> {
    let mut rng = stream.rng();
    let space = Counted::new(data);
    let centers = match cfg.algorithm {
        Algorithm::Penalized => seed_indices(&space, k, theta, &mut rng)?,
        Algorithm::Metropolized => {
            let mut c = metropolized_overseed(&space, k, theta, &MhConfig::new(cfg.mh_steps)?, &mut rng)?.centers;
            pad_centers(&space, &mut c, k);
            c
        }
        Algorithm::LocalSearch => {
            let c = seed_indices(&space, k, theta, &mut rng)?;
            local_search_fixed(&space, c, theta, k, &mut rng)
        }
        Algorithm::Distributed => {
            let (centers, evals) = sharded_penalized(cfg, data, k, theta, &mut rng)?;
            return Ok((centers, evals + (data.len() * k) as u64));
        }
        _ => unreachable!("not a grid algorithm"),
    };
    // Scoring the candidate costs one pass over the data.
    let evals = space.evals() + (data.len() * centers.len()) as u64;
    Ok((CenterSet::from_indices(data, &centers), evals))
}

/// Penalized overseeding per machine, then penalized k-means++ on the weighted union.
fn sharded_penalized<R: rand::Rng + ?Sized>(
    cfg: &RunConfig,
    data: &Dataset,
    k: usize,
    theta: PenaltyThreshold,
    rng: &mut R,
) -> kmo_core::Result<(CenterSet, u64)> {
    let shards = shard(data, cfg.machines.min(data.len()))?;
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    let mut evals = 0u64;
    for s in &shards {
        let ell = (cfg.machine_ell_factor * k).min(s.data.len());
        let space = Counted::new(&s.data);
        let chosen = seed_indices(&space, ell, theta, rng)?;
        let local = CenterSet::from_indices(&s.data, &chosen);
        let mut w = vec![0u64; local.len()];
        for (i, x) in s.data.rows().enumerate() {
            let (y, d) = local.nearest(x);
            if d < theta.value() {
                w[y] += s.data.weights()[i];
            }
        }
        evals += space.evals() + (s.data.len() * local.len()) as u64;
        for (y, c) in local.iter().enumerate() {
            coords.extend_from_slice(c);
            weights.push(w[y]);
        }
    }
    let merged = Dataset::from_flat(data.dim(), coords, weights)?;
    let space = Counted::new(&merged);
    let idx = if merged.total_weight() == 0 {
        (0..k.min(merged.len())).collect()
    } else {
        seed_indices(&space, k.min(merged.len()), theta, rng)?
    };
    evals += space.evals();
    Ok((CenterSet::from_indices(&merged, &idx), evals))
}

fn run_grid(cfg: &RunConfig, data: &Dataset, k: usize, z: u64, stream: RngStream) -> kmo_core::Result<Raw> {
    let grid = grid_values(cfg, data, z).map_err(|_| kmo_core::Error::InvalidParameter("bad grid"))?;
    let results: Vec<kmo_core::Result<(CenterSet, u64)>> = (0..grid.len())
        .into_par_iter()
        .map(|g| grid_candidate(cfg, data, k, grid[g], stream.derive(g as u64)))
        .collect();
    let mut cands = Vec::with_capacity(grid.len());
    let mut evals = 0;
    for (g, r) in results.into_iter().enumerate() {
        let (centers, e) = r?;
        evals += e;
        cands.push(GridCandidate::score(data, centers, grid[g], z));
    }
    let (best, feasible) = select_candidate(&cands, z, cfg.eps).ok_or(kmo_core::Error::EmptyInput("empty grid"))?;
    let chosen = cands.swap_remove(best);
    let costs = point_costs(data, &chosen.centers);
    let outliers = if feasible {
        out_from_costs(&costs, chosen.theta)
    } else {
        farthest_from_costs(&costs, data.weights(), z)
    };
    Ok(Raw {
        centers: chosen.centers,
        theta: Some(chosen.theta),
        outliers,
        theta_feasible: feasible,
        qualified: true,
        evals,
    })
}

fn run_algorithm(cfg: &RunConfig, data: &Dataset, k: usize, z: u64, stream: RngStream) -> kmo_core::Result<Raw> {
    if cfg.algorithm.uses_grid() {
        return run_grid(cfg, data, k, z, stream);
    }
    let space = Counted::new(data);
    let n = data.len();
    let farthest = |centers: &CenterSet| farthest_from_costs(&point_costs(data, centers), data.weights(), z);
    let raw = match cfg.algorithm {
        Algorithm::Lloyd => {
            let centers = random_init(data, k, &mut stream.rng())?;
            Raw {
                outliers: farthest(&centers),
                centers,
                theta: None,
                theta_feasible: true,
                qualified: true,
                evals: 0,
            }
        }
        Algorithm::KmeansPP => {
            let idx = seed_indices(&space, k, PenaltyThreshold::infinite(), &mut stream.rng())?;
            let centers = CenterSet::from_indices(data, &idx);
            Raw {
                outliers: farthest(&centers),
                centers,
                theta: None,
                theta_feasible: true,
                qualified: true,
                evals: space.evals(),
            }
        }
        Algorithm::LsOutliers => {
            let sol = local_search_with_outliers(&space, k, z, cfg.eps, &search_params(cfg), stream)?;
            let e = space.evals() + (n * k) as u64;
            let sol = sol.materialize(data);
            Raw {
                centers: sol.centers,
                theta: Some(sol.theta),
                outliers: sol.outliers,
                theta_feasible: sol.qualified,
                qualified: sol.qualified,
                evals: e,
            }
        }
        Algorithm::Fast => {
            let params = FastParams {
                a: cfg.a,
                c_mh: cfg.c_mh,
                c_est: cfg.c_est,
                search: search_params(cfg),
                ..FastParams::default()
            };
            let out = fast_algorithm(&space, k, z, &params, stream)?;
            let e = space.evals() + (n * k) as u64;
            let sol = out.solution.materialize(data);
            Raw {
                centers: sol.centers,
                theta: Some(sol.theta),
                outliers: sol.outliers,
                theta_feasible: true,
                qualified: sol.qualified,
                evals: e,
            }
        }
        Algorithm::Coordinator => {
            let mut p = DistributedParams::new(cfg.machines.min(n), k, z, cfg.eps, cfg.mode.into());
            p.alpha = cfg.alpha;
            p.c_ell = cfg.c_ell;
            p.search = search_params(cfg);
            let out = run_distributed(data, &p, stream)?;
            Raw {
                theta: Some(out.solution.theta),
                outliers: out.solution.outliers,
                theta_feasible: out.solution.qualified,
                qualified: out.solution.qualified,
                centers: out.solution.centers,
                evals: out.distance_evals,
            }
        }
        _ => unreachable!("grid algorithms handled above"),
    };
    Ok(raw)
}

/// Runs one (k, seed) pair.
///
/// With `refine_iters > 0` the result is refined by trimmed Lloyd and the `z`
/// farthest points are the outliers; otherwise the algorithm's own outliers are kept.
pub fn run_one(cfg: &RunConfig, data: &Dataset, k: usize, z: u64, seed: u64) -> kmo_core::Result<RunReport> {
    let start = Instant::now();
    let stream = RngStream::with_stream(seed, k as u64);
    let raw = run_algorithm(cfg, data, k, z, stream)?;
    let n = data.len();
    let refine = cfg.refine_iters > 0 || cfg.algorithm == Algorithm::Lloyd;
    let (centers, outliers, evals) = if refine {
        let iters = cfg.refine_iters;
        let sol = lloyd_outliers(data, &raw.centers, z, iters, &mut stream.derive(REFINE_TAG).rng())?;
        let e = raw.evals + ((iters + 1) * n * sol.centers.len()) as u64;
        (sol.centers, sol.outliers, e)
    } else {
        (raw.centers, raw.outliers, raw.evals)
    };
    let costs = point_costs(data, &centers);
    let theta = raw.theta.unwrap_or(PenaltyThreshold::infinite());
    let runtime_ms = if cfg.record_timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    Ok(RunReport {
        algorithm: cfg.algorithm.name().to_owned(),
        n,
        dim: data.dim(),
        k,
        z,
        eps: cfg.eps,
        seed,
        theta: raw.theta.filter(|t| t.is_finite()).map(|t| t.value()),
        cost_phi_inliers: phi_excluding(&costs, data.weights(), &outliers),
        cost_tau: tau_from_costs(&costs, data.weights(), theta),
        num_outliers: outliers.iter().map(|&i| data.weights()[i]).sum(),
        runtime_ms,
        distance_evals: evals,
        queries_used: None,
        budget: None,
        relaxed_constants: None,
        theta_feasible: raw.theta_feasible,
        qualified: raw.qualified,
        error: None,
        centers: cfg.emit_centers.then(|| centers.to_rows()),
    })
}

fn failed(cfg: &RunConfig, data: &Dataset, k: usize, z: u64, seed: u64, e: kmo_core::Error) -> RunReport {
    RunReport {
        algorithm: cfg.algorithm.name().to_owned(),
        n: data.len(),
        dim: data.dim(),
        k,
        z,
        eps: cfg.eps,
        seed,
        theta: None,
        cost_phi_inliers: 0.0,
        cost_tau: 0.0,
        num_outliers: 0,
        runtime_ms: 0,
        distance_evals: 0,
        queries_used: None,
        budget: None,
        relaxed_constants: None,
        theta_feasible: false,
        qualified: false,
        error: Some(e.to_string()),
        centers: None,
    }
}

/// Runs every (k, seed) pair in parallel and returns the reports sorted by (k, seed).
///
/// A failing pair yields a report carrying the error; the rest of the batch still runs.
pub fn run_experiment(cfg: &RunConfig, data: &Dataset) -> Result<Vec<RunReport>, CliError> {
    cfg.validate()?;
    let n = data.total_weight();
    let z = cfg.z.resolve(data.len())?;
    let ks = cfg.k.to_vec();
    let kmax = *ks.iter().max().expect("validated nonempty");
    if kmax as u64 + z >= n {
        return Err(CliError::Infeasible {
            needed: kmax as u64 + z,
            n,
        });
    }
    grid_values(cfg, data, z)?;
    let mut jobs: Vec<(usize, u64)> = Vec::new();
    for &k in &ks {
        for &s in &cfg.seeds.to_vec() {
            jobs.push((k, s));
        }
    }
    jobs.sort_unstable();
    jobs.dedup();
    let reports = jobs
        .par_iter()
        .map(|&(k, seed)| run_one(cfg, data, k, z, seed).unwrap_or_else(|e| failed(cfg, data, k, z, seed, e)))
        .collect();
    Ok(reports)
}
