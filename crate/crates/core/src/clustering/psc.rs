//! Pairwise synergy clustering.

use super::{ClusterOrigin, ClusterSet, ClusteringError};
use crate::model::{Instance, RequestSet};

/// Default fraction of pairs kept.
pub const DEFAULT_ALPHA: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynergyPair {
    pub i: usize,
    pub j: usize,
    pub sigma: i128,
}

impl SynergyPair {
    pub fn requests(&self) -> RequestSet {
        RequestSet::singleton(self.i).with(self.j)
    }
}

/// Savings of serving `i` and `j` on one tour, times the idle capacity left:
/// `(dist(d,i) + dist(d,j) - dist(i,j)) * (cap - d_i - d_j)`.
pub fn pair_synergy(instance: &Instance, i: usize, j: usize) -> Result<i128, ClusteringError> {
    let n = instance.n();
    if i == j || i >= n || j >= n {
        return Err(ClusteringError::InvalidPair { i, j });
    }
    let load = instance.demand(i) + instance.demand(j);
    if load > instance.cap() {
        return Err(ClusteringError::CapacityViolated {
            i,
            j,
            load,
            cap: instance.cap(),
        });
    }
    let saving = instance.depot_dist(i) as i128 + instance.depot_dist(j) as i128
        - instance.request_dist(i, j) as i128;
    Ok(saving * (instance.cap() - load) as i128)
}

/// All capacity-feasible pairs, ordered by `(-sigma, i, j)`.
pub fn synergy_pairs(instance: &Instance) -> Vec<SynergyPair> {
    let n = instance.n();
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            if let Ok(sigma) = pair_synergy(instance, i, j) {
                pairs.push(SynergyPair { i, j, sigma });
            }
        }
    }
    pairs.sort_by(|a, b| {
        b.sigma
            .cmp(&a.sigma)
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
    });
    pairs
}

/// Keeps the top `ceil(alpha * len)` pairs of an already ranked list, plus
/// every pair tied with the last one kept.
pub fn top_fraction(
    ranked: &[SynergyPair],
    alpha: f64,
) -> Result<Vec<SynergyPair>, ClusteringError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(ClusteringError::InvalidAlpha(alpha));
    }
    if ranked.is_empty() {
        return Ok(Vec::new());
    }
    // The epsilon absorbs binary noise such as 0.1 * 30 = 3.0000000000000004.
    let len = ranked.len() as f64;
    let keep = ((alpha * len - 1e-9 * len).ceil() as usize).clamp(1, ranked.len());
    let cutoff = ranked[keep - 1].sigma;
    Ok(ranked
        .iter()
        .take_while(|p| p.sigma >= cutoff)
        .copied()
        .collect())
}

/// Pairs whose synergy lies in the top `alpha` fraction.
pub fn psc_clusters(instance: &Instance, alpha: f64) -> Result<ClusterSet, ClusteringError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(ClusteringError::InvalidAlpha(alpha));
    }
    let ranked = synergy_pairs(instance);
    if ranked.is_empty() {
        return Err(ClusteringError::NoFeasiblePair);
    }
    let clusters = top_fraction(&ranked, alpha)?
        .iter()
        .map(SynergyPair::requests)
        .collect();
    Ok(ClusterSet {
        clusters,
        origin: ClusterOrigin::Psc,
    })
}
