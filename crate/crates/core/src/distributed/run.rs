use alloc::vec::Vec;

use crate::cost::{farthest_from_costs, point_costs, ClusteringSolution};
use crate::data::{Dataset, PenaltyThreshold};
use crate::error::{Error, Result};
use crate::local_search::{collapse_ladder, theta_ladder_with_beta, SearchParams};
use crate::math::ceil;
use crate::rng::RngStream;

use super::coordinator::{coordinator_solve_refined, coordinator_solve_simple, CoordinatorOutcome, CoordinatorParams};
use super::summary::{kmeans_par_counted, machine_overseed_counted, shard, MachineShard, WeightedSummary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Per-machine penalized overseeding, plain weighted summaries.
    GuhaSimple,
    /// Per-machine penalized overseeding with distance histograms and the almost-metric coordinator.
    GuhaRefined,
    /// Joint k-means|| rounds, plain weighted summaries.
    KmeansPar,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistributedParams {
    pub machines: usize,
    pub k: usize,
    pub z: u64,
    pub eps: f64,
    pub alpha: f64,
    pub mode: Mode,
    /// Centers per machine, `⌈c_ell·k/ε⌉`, capped by the shard size.
    pub c_ell: f64,
    /// Rounds of k-means|| sampling.
    pub par_rounds: usize,
    /// Expected centers per k-means|| round; defaults to `2k`.
    pub par_ell: Option<usize>,
    pub search: SearchParams,
}

impl DistributedParams {
    pub fn new(machines: usize, k: usize, z: u64, eps: f64, mode: Mode) -> Self {
        DistributedParams {
            machines,
            k,
            z,
            eps,
            alpha: 1.0,
            mode,
            c_ell: 2.0,
            par_rounds: 5,
            par_ell: None,
            search: SearchParams::default(),
        }
    }

    pub fn ell(&self) -> usize {
        ceil(self.c_ell * self.k as f64 / self.eps) as usize
    }

    fn coordinator(&self) -> CoordinatorParams {
        CoordinatorParams {
            k: self.k,
            z: self.z,
            eps: self.eps,
            alpha: self.alpha,
            search: self.search,
        }
    }
}

/// Scalars sent by each machine over the whole run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MessageLedger {
    pub per_machine: Vec<usize>,
}

impl MessageLedger {
    pub fn total(&self) -> usize {
        self.per_machine.iter().sum()
    }

    pub fn max(&self) -> usize {
        self.per_machine.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RungOutcome {
    pub theta: PenaltyThreshold,
    pub summaries: Vec<WeightedSummary>,
    /// `None` when the machines dropped more than the budget allows.
    pub coordinator: Option<CoordinatorOutcome>,
    pub sent: Vec<usize>,
    /// Distance evaluations by machines and coordinator.
    pub distance_evals: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistributedOutcome {
    /// Solution over the full input; its outliers are the `declared_outliers` farthest points.
    pub solution: ClusteringSolution,
    pub declared_outliers: u64,
    pub ledger: MessageLedger,
    /// Index of the selected rung.
    pub rung: usize,
    pub rungs: Vec<RungOutcome>,
    /// Distance evaluations over all rungs and the final assignment.
    pub distance_evals: u64,
}

/// One penalty rung: machines summarize, the coordinator solves.
pub fn distributed_rung(
    shards: &[MachineShard],
    theta: PenaltyThreshold,
    params: &DistributedParams,
    stream: RngStream,
) -> Result<RungOutcome> {
    let (summaries, sent, mut evals) = match params.mode {
        Mode::GuhaSimple | Mode::GuhaRefined => {
            let refined = params.mode == Mode::GuhaRefined;
            let summaries = crate::par::map_indexed(shards.len(), |j| {
                let ell = params.ell().clamp(1, shards[j].data.len());
                let mut rng = stream.derive(j as u64 + 1).rng();
                machine_overseed_counted(&shards[j], ell, theta, refined, &mut rng)
            });
            let pairs: Vec<(WeightedSummary, u64)> = summaries.into_iter().collect::<Result<_>>()?;
            let evals = pairs.iter().map(|p| p.1).sum();
            let summaries: Vec<WeightedSummary> = pairs.into_iter().map(|p| p.0).collect();
            let sent = summaries.iter().map(WeightedSummary::scalar_count).collect();
            (summaries, sent, evals)
        }
        Mode::KmeansPar => {
            let ell = params.par_ell.unwrap_or(2 * params.k).max(1);
            let mut rng = stream.derive(1).rng();
            let (summaries, mut sent, evals) =
                kmeans_par_counted(shards, params.par_rounds, ell, theta, false, &mut rng)?;
            // Final weights and drop counter; the centers themselves were already sent while sampling.
            for (s, c) in summaries.iter().zip(sent.iter_mut()) {
                *c += s.weights.len() + 1;
            }
            (summaries, sent, evals)
        }
    };
    let cp = params.coordinator();
    let solved = match params.mode {
        Mode::GuhaRefined => coordinator_solve_refined(&summaries, &cp, stream.derive(0)),
        _ => coordinator_solve_simple(&summaries, &cp, stream.derive(0)),
    };
    let coordinator = match solved {
        Ok(o) => {
            evals += o.distance_evals;
            Some(o)
        }
        Err(Error::InfeasibleRung) => None,
        Err(e) => return Err(e),
    };
    Ok(RungOutcome {
        theta,
        summaries,
        coordinator,
        sent,
        distance_evals: evals,
    })
}

/// The full coordinator-model pipeline over the ladder `Θ = 2^i/(εz)`.
///
/// Every rung is run; among feasible rungs the coordinator keeps the one with the
/// lowest summary cost.
pub fn run_distributed(data: &Dataset, params: &DistributedParams, stream: RngStream) -> Result<DistributedOutcome> {
    if params.k == 0 {
        return Err(Error::InvalidParameter("k must be positive"));
    }
    if !(params.eps > 0.0 && params.eps <= 1.0) {
        return Err(Error::InvalidParameter("eps must lie in (0, 1]"));
    }
    let n = data.total_weight();
    if params.k as u64 + params.z >= n {
        return Err(Error::InvalidParameter("k + z must be smaller than n"));
    }
    let shards = shard(data, params.machines)?;
    let delta_sq = data.diameter_sq_bound();
    let ladder = collapse_ladder(theta_ladder_with_beta(n, delta_sq, params.z, 1.0 / params.eps), delta_sq);
    let rungs = crate::par::map_indexed(ladder.len(), |r| {
        distributed_rung(&shards, ladder[r].theta, params, stream.derive(r as u64))
    });
    let rungs: Vec<RungOutcome> = rungs.into_iter().collect::<Result<_>>()?;
    let mut ledger = MessageLedger {
        per_machine: alloc::vec![0; shards.len()],
    };
    for r in &rungs {
        for (t, s) in ledger.per_machine.iter_mut().zip(&r.sent) {
            *t += s;
        }
    }
    let mut best: Option<usize> = None;
    for (r, rung) in rungs.iter().enumerate() {
        if let Some(c) = &rung.coordinator {
            let better = match best {
                None => true,
                Some(b) => c.cost < rungs[b].coordinator.as_ref().unwrap().cost,
            };
            if better {
                best = Some(r);
            }
        }
    }
    let best = best.ok_or(Error::InfeasibleRung)?;
    let chosen = rungs[best].coordinator.clone().unwrap();
    let costs = point_costs(data, &chosen.centers);
    let outliers = farthest_from_costs(&costs, data.weights(), chosen.declared_outliers);
    let solution = ClusteringSolution {
        phi_cost: crate::cost::phi_excluding(&costs, data.weights(), &outliers),
        tau_cost: crate::cost::tau_from_costs(&costs, data.weights(), rungs[best].theta),
        centers: chosen.centers,
        outliers,
        theta: rungs[best].theta,
        qualified: chosen.qualified,
    };
    let distance_evals = rungs.iter().map(|r| r.distance_evals).sum::<u64>() + (data.len() * solution.centers.len()) as u64;
    Ok(DistributedOutcome {
        distance_evals,
        solution,
        declared_outliers: chosen.declared_outliers,
        ledger,
        rung: best,
        rungs,
    })
}
