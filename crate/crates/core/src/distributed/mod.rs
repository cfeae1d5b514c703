//! Coordinator-model simulation: machines summarize their shards by weighted
//! centers, a coordinator clusters the union of summaries.
mod almost_metric;
mod coordinator;
mod run;
mod summary;

pub use almost_metric::{build_almost_metric, AlmostMetricInstance, ClonePoint, Node};
pub use coordinator::{coordinator_solve_refined, coordinator_solve_simple, CoordinatorOutcome, CoordinatorParams};
pub use run::{
    distributed_rung, run_distributed, DistributedOutcome, DistributedParams, MessageLedger, Mode, RungOutcome,
};
pub use summary::{
    histogram_levels, kmeans_par_overseed, kmeans_par_sharded, machine_overseed, shard, MachineShard,
    WeightedSummary,
};
