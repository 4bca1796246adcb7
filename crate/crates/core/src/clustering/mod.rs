//! Promising request combinations for the heuristic strategies, and the
//! superset expansion that turns them into bids.

mod pmp;
mod psc;
mod random;

pub use pmp::{
    cpmc_clusters, min_medians, solve_pmp, PmpConfig, PmpSolution, DEFAULT_PMP_EXACT_LIMIT,
};
pub use psc::{
    pair_synergy, psc_clusters, synergy_pairs, top_fraction, SynergyPair, DEFAULT_ALPHA,
};
pub use random::{ran_bids, ran_draws, rann_clusters, RanBids};

use crate::enumeration::{enumerate_supersets, price_sets, EnumerationError, SupersetMode};
use crate::model::{Bid, Instance, RequestSet};
use crate::tsp::PricingContext;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusteringError {
    #[error("requests {i} and {j} carry {load} units, above capacity {cap}")]
    CapacityViolated {
        i: usize,
        j: usize,
        load: u64,
        cap: u64,
    },
    #[error("({i}, {j}) is not a pair of distinct requests")]
    InvalidPair { i: usize, j: usize },
    #[error("no pair of requests fits one vehicle")]
    NoFeasiblePair,
    #[error("alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error(
        "{p} medians cannot serve {n} requests with total demand {total_demand} at capacity {cap}"
    )]
    Infeasible {
        p: usize,
        n: usize,
        total_demand: u64,
        cap: u64,
    },
    #[error("no capacity-feasible assignment to {p} medians was found")]
    NoFeasibleAssignment { p: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ClusterOrigin {
    Psc,
    Cpmc,
    Rann,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub origin: ClusterOrigin,
    pub clusters: Vec<RequestSet>,
}

impl ClusterSet {
    /// `{"origin":"PSC","clusters":[[0,3],[1,2]]}`
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("cluster set serializes")
    }
}

/// Elementary supersets of the given roots (roots included), priced.
pub fn heuristic_sets(
    instance: &Instance,
    clusters: &ClusterSet,
) -> Result<BTreeSet<RequestSet>, EnumerationError> {
    let mut union = BTreeSet::new();
    for &root in &clusters.clusters {
        union.extend(
            enumerate_supersets(instance, root, SupersetMode::Inclusive)?
                .into_iter()
                .map(|e| e.requests),
        );
    }
    Ok(union)
}

/// One bid on every elementary superset of every root, sorted by `(size, mask)`.
pub fn heuristic_bids(
    instance: &Instance,
    clusters: &ClusterSet,
    pricing: &PricingContext<'_>,
) -> Result<Vec<Bid>, EnumerationError> {
    let sets = heuristic_sets(instance, clusters)?;
    Ok(price_sets(pricing, sets)?)
}
