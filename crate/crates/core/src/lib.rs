//! k-means clustering with outliers through penalized costs.
//!
//! Each point pays `min(Θ, d²(x, C))`, so far points cost at most the penalty `Θ`.
//! Sampling proportionally to that truncated cost picks centers that are not
//! captured by outliers, and a short local search fixes up the seeding. The
//! crate also ships a Metropolis-Hastings sampler that avoids recomputing all
//! costs after every new center, coordinator-model summaries, a query-counting
//! hard instance, and Lloyd baselines.
//!
//! Every solver works on a [`space::CostSpace`], an indexed finite space with
//! weights. Euclidean [`data::Dataset`]s implement it directly.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baselines;
pub mod cache;
pub mod cost;
pub mod data;
pub mod distributed;
pub mod error;
pub mod hardness;
pub mod local_search;
pub mod math;
pub mod metropolis;
mod par;
pub mod planted;
pub mod rng;
pub mod seeding;
pub mod space;

pub use cost::{ClusteringSolution, IndexedSolution};
pub use data::{CenterSet, Dataset, PenaltyThreshold, Point};
pub use error::{Error, Result};
pub use rng::RngStream;
pub use space::CostSpace;
