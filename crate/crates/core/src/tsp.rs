//! Exact bundle pricing: the price of an elementary request set is the
//! length of a shortest closed tour from the depot through its customers.

use crate::model::{Instance, RequestSet};
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;
use thiserror::Error;

/// Largest set Held-Karp accepts by default (table of `2^18 * 18` entries).
pub const DEFAULT_HELD_KARP_LIMIT: usize = 18;

/// Largest set the permutation oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TspError {
    #[error("request set of size {size} exceeds the exact TSP limit {limit}")]
    SetTooLarge { size: usize, limit: usize },
    #[error("cannot price an empty request set")]
    EmptySet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TourResult {
    pub cost: u64,
    /// Visiting order, depot endpoints excluded.
    pub order: Vec<usize>,
}

/// Cost of depot -> order... -> depot.
pub fn tour_cost(instance: &Instance, order: &[usize]) -> u64 {
    let mut cost = 0;
    let mut prev = 0;
    for &id in order {
        cost += instance.node_dist(prev, id + 1);
        prev = id + 1;
    }
    cost + instance.node_dist(prev, 0)
}

fn check_size(s: RequestSet, limit: usize) -> Result<usize, TspError> {
    let k = s.len();
    if k == 0 {
        return Err(TspError::EmptySet);
    }
    if k > limit {
        return Err(TspError::SetTooLarge { size: k, limit });
    }
    Ok(k)
}

/// Held-Karp dynamic program with [`DEFAULT_HELD_KARP_LIMIT`].
pub fn tsp_exact(instance: &Instance, s: RequestSet) -> Result<TourResult, TspError> {
    tsp_exact_with_limit(instance, s, DEFAULT_HELD_KARP_LIMIT)
}

/// Optimal tour through the depot and the members of `s`.
///
/// Among optimal tours the lexicographically smallest visiting order (by
/// request id) is returned, which also fixes the direction of travel.
pub fn tsp_exact_with_limit(
    instance: &Instance,
    s: RequestSet,
    limit: usize,
) -> Result<TourResult, TspError> {
    let k = check_size(s, limit)?;
    let ids = s.to_vec();
    let nodes: Vec<usize> = ids.iter().map(|&id| id + 1).collect();
    if k == 1 {
        return Ok(TourResult {
            cost: 2 * instance.depot_dist(ids[0]),
            order: ids,
        });
    }

    // rest[mask * k + j]: shortest path that starts at member j, visits every
    // member in `mask` (j not in mask) and ends at the depot.
    let states = 1usize << k;
    let mut rest = vec![u64::MAX; states * k];
    for j in 0..k {
        rest[j] = instance.node_dist(nodes[j], 0);
    }
    for mask in 1..states {
        for j in 0..k {
            if mask & (1 << j) != 0 {
                continue;
            }
            let mut best = u64::MAX;
            let mut bits = mask;
            while bits != 0 {
                let l = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let cand = instance.node_dist(nodes[j], nodes[l]) + rest[(mask ^ (1 << l)) * k + l];
                best = best.min(cand);
            }
            rest[mask * k + j] = best;
        }
    }

    let full = states - 1;
    let cost = (0..k)
        .map(|j| instance.node_dist(0, nodes[j]) + rest[(full ^ (1 << j)) * k + j])
        .min()
        .expect("k >= 2");

    // Walk forward choosing the smallest id that stays optimal.
    let mut order = Vec::with_capacity(k);
    let mut remaining = full;
    let mut prev = 0usize;
    let mut budget = cost;
    while remaining != 0 {
        let next = (0..k)
            .filter(|&j| remaining & (1 << j) != 0)
            .find(|&j| {
                let edge = instance.node_dist(prev, nodes[j]);
                edge <= budget && edge + rest[(remaining ^ (1 << j)) * k + j] == budget
            })
            .expect("an optimal continuation exists");
        let edge = instance.node_dist(prev, nodes[next]);
        budget -= edge;
        remaining ^= 1 << next;
        prev = nodes[next];
        order.push(ids[next]);
    }
    debug_assert_eq!(budget, instance.node_dist(prev, 0));
    Ok(TourResult { cost, order })
}

/// Exhaustive search over all visiting orders; test oracle for [`tsp_exact`].
pub fn tsp_brute(instance: &Instance, s: RequestSet) -> Result<TourResult, TspError> {
    check_size(s, BRUTE_FORCE_LIMIT)?;
    let mut perm = s.to_vec();
    let mut best = TourResult {
        cost: tour_cost(instance, &perm),
        order: perm.clone(),
    };
    // Lexicographic order, so the first optimum found is the smallest one.
    while next_permutation(&mut perm) {
        let cost = tour_cost(instance, &perm);
        if cost < best.cost {
            best = TourResult {
                cost,
                order: perm.clone(),
            };
        }
    }
    Ok(best)
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len())
        .rev()
        .find(|&j| v[j] > v[i - 1])
        .expect("pivot has a successor");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Per-instance bundle pricing with a memo keyed by request mask.
///
/// Shareable across threads: the cache sits behind a lock and the hit/miss
/// counters are atomic. Two workers racing on the same mask both compute the
/// tour; the value is identical either way.
#[derive(Debug)]
pub struct PricingContext<'a> {
    instance: &'a Instance,
    limit: usize,
    cache: RwLock<HashMap<u64, u64>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl<'a> PricingContext<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        Self::with_limit(instance, DEFAULT_HELD_KARP_LIMIT)
    }

    pub fn with_limit(instance: &'a Instance, limit: usize) -> Self {
        PricingContext {
            instance,
            limit,
            cache: RwLock::new(HashMap::new()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// Cost-plus price with zero markup: the optimal tour length.
    pub fn price_bundle(&self, s: RequestSet) -> Result<u64, TspError> {
        if let Some(&p) = self
            .cache
            .read()
            .expect("pricing cache poisoned")
            .get(&s.mask())
        {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(p);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let price = tsp_exact_with_limit(self.instance, s, self.limit)?.cost;
        self.cache
            .write()
            .expect("pricing cache poisoned")
            .insert(s.mask(), price);
        Ok(price)
    }

    pub fn cache_hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn cache_misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn cached_len(&self) -> usize {
        self.cache.read().expect("pricing cache poisoned").len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_instance, Point};

    fn triangle() -> Instance {
        build_instance(
            Point::new(0, 0),
            &[(Point::new(3, 0), 1), (Point::new(3, 4), 1)],
            10,
        )
        .unwrap()
    }

    #[test]
    fn three_four_five_triangle() {
        let inst = triangle();
        let tour = tsp_exact(&inst, RequestSet::from_mask(0b11)).unwrap();
        assert_eq!(tour.cost, 12);
        assert_eq!(tour.order, vec![0, 1]);
        assert_eq!(tsp_brute(&inst, RequestSet::from_mask(0b11)).unwrap(), tour);
    }

    #[test]
    fn rounding_can_reward_extra_stops() {
        // sqrt(8) rounds up while both halves of it round down.
        let inst = build_instance(
            Point::new(0, 0),
            &[(Point::new(1, 1), 1), (Point::new(2, 2), 1)],
            10,
        )
        .unwrap();
        assert_eq!(tsp_exact(&inst, RequestSet::singleton(1)).unwrap().cost, 6);
        assert_eq!(
            tsp_exact(&inst, RequestSet::from_mask(0b11)).unwrap().cost,
            5
        );
    }

    #[test]
    fn rounding_can_make_merging_dearer() {
        let inst = build_instance(
            Point::new(0, 0),
            &[(Point::new(1, 1), 1), (Point::new(-1, -1), 1)],
            10,
        )
        .unwrap();
        let one = |i| tsp_exact(&inst, RequestSet::singleton(i)).unwrap().cost;
        assert_eq!(one(0) + one(1), 4);
        assert_eq!(
            tsp_exact(&inst, RequestSet::from_mask(0b11)).unwrap().cost,
            5
        );
    }

    #[test]
    fn singleton_is_pendular() {
        let inst = triangle();
        for id in 0..2 {
            let s = RequestSet::singleton(id);
            let expect = 2 * inst.depot_dist(id);
            assert_eq!(tsp_exact(&inst, s).unwrap().cost, expect);
            assert_eq!(tsp_brute(&inst, s).unwrap().cost, expect);
        }
    }

    #[test]
    fn size_limits() {
        let customers: Vec<_> = (0..20).map(|i| (Point::new(i + 1, 2 * i), 1)).collect();
        let inst = build_instance(Point::new(0, 0), &customers, 100).unwrap();
        assert_eq!(
            tsp_brute(&inst, RequestSet::full(10)).unwrap_err(),
            TspError::SetTooLarge { size: 10, limit: 9 }
        );
        assert_eq!(
            tsp_exact(&inst, RequestSet::full(19)).unwrap_err(),
            TspError::SetTooLarge {
                size: 19,
                limit: 18
            }
        );
        assert_eq!(
            tsp_exact(&inst, RequestSet::EMPTY).unwrap_err(),
            TspError::EmptySet
        );
    }

    #[test]
    fn ties_resolve_to_smallest_order() {
        // Square around the depot: both directions cost the same.
        let inst = build_instance(
            Point::new(0, 0),
            &[
                (Point::new(10, 10), 1),
                (Point::new(10, -10), 1),
                (Point::new(-10, -10), 1),
                (Point::new(-10, 10), 1),
            ],
            10,
        )
        .unwrap();
        let exact = tsp_exact(&inst, RequestSet::full(4)).unwrap();
        let brute = tsp_brute(&inst, RequestSet::full(4)).unwrap();
        assert_eq!(exact, brute);
        assert_eq!(exact.order, vec![0, 1, 2, 3]);
        assert_eq!(exact.cost, tour_cost(&inst, &exact.order));
    }

    #[test]
    fn memo_serves_second_call() {
        let inst = triangle();
        let ctx = PricingContext::new(&inst);
        let s = RequestSet::from_mask(0b11);
        assert_eq!(ctx.price_bundle(s).unwrap(), 12);
        assert_eq!((ctx.cache_hits(), ctx.cache_misses()), (0, 1));
        assert_eq!(ctx.price_bundle(s).unwrap(), 12);
        assert_eq!((ctx.cache_hits(), ctx.cache_misses()), (1, 1));
    }

    #[test]
    fn permutation_step() {
        let mut v = vec![0, 1, 2];
        let mut seen = vec![v.clone()];
        while next_permutation(&mut v) {
            seen.push(v.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[5], vec![2, 1, 0]);
    }
}
