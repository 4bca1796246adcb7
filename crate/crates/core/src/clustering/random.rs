//! Random baselines.

use super::{ClusterOrigin, ClusterSet};
use crate::enumeration::price_sets;
use crate::model::{Bid, Instance, RequestSet};
use crate::rng::{self, Domain};
use crate::tsp::{PricingContext, TspError};
use rand::Rng;

/// The `n` raw random sets, duplicates included.
///
/// Set `k` draws requests uniformly without replacement from its own stream
/// and stops at the first draw that no longer fits the vehicle, or when no
/// request is left.
pub fn ran_draws(instance: &Instance, seed: u64) -> Vec<RequestSet> {
    let n = instance.n();
    (0..n)
        .map(|k| {
            let mut rng = rng::stream(seed, Domain::RandomBids, k as u64);
            let mut pool: Vec<usize> = (0..n).collect();
            let mut set = RequestSet::EMPTY;
            let mut load = 0;
            while !pool.is_empty() {
                let r = pool.remove(rng.gen_range(0..pool.len()));
                if load + instance.demand(r) > instance.cap() {
                    break;
                }
                load += instance.demand(r);
                set = set.with(r);
            }
            set
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RanBids {
    /// Distinct sets, sorted by `(size, mask)`.
    pub bids: Vec<Bid>,
    /// Draws that repeated an earlier set.
    pub duplicates: usize,
}

/// `n` random sets priced exactly; repeated sets are kept once.
pub fn ran_bids(
    instance: &Instance,
    pricing: &PricingContext<'_>,
    seed: u64,
) -> Result<RanBids, TspError> {
    let draws = ran_draws(instance, seed);
    let bids = price_sets(pricing, draws.iter().copied())?;
    Ok(RanBids {
        duplicates: draws.len() - bids.len(),
        bids,
    })
}

/// The random sets as roots for superset enumeration, first occurrence order.
pub fn rann_clusters(instance: &Instance, seed: u64) -> ClusterSet {
    let mut clusters: Vec<RequestSet> = Vec::new();
    for s in ran_draws(instance, seed) {
        if !clusters.contains(&s) {
            clusters.push(s);
        }
    }
    ClusterSet {
        clusters,
        origin: ClusterOrigin::Rann,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_instance, Point};

    fn instance(cap: u64) -> Instance {
        let c: Vec<_> = (0..9)
            .map(|i| (Point::new(3 * i - 10, (i * i) % 13), 1 + (i as u64 * 7) % 5))
            .collect();
        build_instance(Point::new(0, 0), &c, cap).unwrap()
    }

    #[test]
    fn large_capacity_exhausts_requests() {
        let inst = instance(1000);
        for s in ran_draws(&inst, 3) {
            assert_eq!(s, inst.requests());
        }
        let ran = ran_bids(&inst, &PricingContext::new(&inst), 3).unwrap();
        assert_eq!(ran.bids.len(), 1);
        assert_eq!(ran.duplicates, 8);
    }

    #[test]
    fn deterministic_and_elementary() {
        let inst = instance(7);
        let a = ran_draws(&inst, 11);
        assert_eq!(a, ran_draws(&inst, 11));
        assert_ne!(a, ran_draws(&inst, 12));
        assert_eq!(a.len(), inst.n());
        assert!(a.iter().all(|&s| !s.is_empty() && inst.is_elementary(s)));
        let rann = rann_clusters(&inst, 11);
        assert!(rann.clusters.len() <= inst.n());
        assert!(rann.clusters.iter().all(|&s| inst.is_elementary(s)));
    }
}
