//! Winner determination: the auctioneer picks a minimum-cost set of bids
//! whose request sets cover every tendered request (OR-bids, over-coverage
//! allowed).
//!
//! Among equal-cost optima the one whose ascending list of bid indices is
//! lexicographically smallest is returned, so clearing results do not depend
//! on search order.

use crate::model::{Bid, RequestSet, MAX_REQUESTS};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

mod lp;

/// Largest bid list [`wdp_brute`] accepts.
pub const BRUTE_FORCE_MAX_BIDS: usize = 20;

/// Slack on bound comparisons; costs are integers, so a bound within this of
/// the incumbent is treated as a possible tie.
const TOLERANCE: f64 = 1e-6;

/// Transposition table entries kept before new states stop being recorded.
const MAX_TABLE_ENTRIES: usize = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WdpError {
    #[error("no bid covers requests {requests}")]
    Uncoverable { requests: RequestSet },
    #[error("bid {index}: {reason}")]
    InvalidBid { index: usize, reason: String },
    #[error("{count} bids exceed the brute-force limit of {limit}")]
    TooManyBids { count: usize, limit: usize },
    #[error("{0} requests exceed the supported maximum of {MAX_REQUESTS}")]
    TooManyRequests(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WdpSolution {
    /// Ascending indices into the bid list.
    pub winning: Vec<usize>,
    /// Total procurement cost.
    pub total_cost: u64,
    pub per_carrier_revenue: BTreeMap<String, u64>,
}

impl WdpSolution {
    fn from_indices(bids: &[Bid], mut winning: Vec<usize>) -> Self {
        winning.sort_unstable();
        let mut per_carrier_revenue = BTreeMap::new();
        let mut total_cost = 0;
        for &i in &winning {
            total_cost += bids[i].price;
            *per_carrier_revenue
                .entry(bids[i].carrier.clone())
                .or_insert(0) += bids[i].price;
        }
        WdpSolution {
            winning,
            total_cost,
            per_carrier_revenue,
        }
    }

    pub fn revenue_of(&self, carrier: &str) -> u64 {
        self.per_carrier_revenue.get(carrier).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WdpOptions {
    /// Drop bids another bid covers at a lower price (or equal price and
    /// smaller index) before searching.
    pub remove_dominated: bool,
}

impl Default for WdpOptions {
    fn default() -> Self {
        WdpOptions {
            remove_dominated: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WdpStats {
    pub bids_after_preprocessing: usize,
    pub nodes: u64,
}

fn validate(n: usize, bids: &[Bid]) -> Result<RequestSet, WdpError> {
    if n > MAX_REQUESTS {
        return Err(WdpError::TooManyRequests(n));
    }
    let all = RequestSet::full(n);
    let mut covered = RequestSet::EMPTY;
    for (index, b) in bids.iter().enumerate() {
        let reason = if b.requests.is_empty() {
            "empty request set"
        } else if !b.requests.is_subset_of(all) {
            "names a request outside the tender"
        } else if b.price == 0 {
            "price must be positive"
        } else {
            covered = covered.union(b.requests);
            continue;
        };
        return Err(WdpError::InvalidBid {
            index,
            reason: reason.to_string(),
        });
    }
    if covered != all {
        return Err(WdpError::Uncoverable {
            requests: all.difference(covered),
        });
    }
    Ok(all)
}

pub fn solve_wdp(n_requests: usize, bids: &[Bid]) -> Result<WdpSolution, WdpError> {
    solve_wdp_with(n_requests, bids, WdpOptions::default()).map(|(s, _)| s)
}

/// Exact branch-and-bound.
///
/// Branches on the uncovered request with the fewest candidate bids. Each
/// node is bounded by the linear relaxation over the uncovered requests; a
/// child bid is cut when that bound plus the bid's reduced cost exceeds the
/// incumbent. Nodes that can only tie the incumbent are still explored so
/// ties resolve by index order, and a table of the cheapest path to every
/// uncovered set visited cuts repeated states.
pub fn solve_wdp_with(
    n_requests: usize,
    bids: &[Bid],
    options: WdpOptions,
) -> Result<(WdpSolution, WdpStats), WdpError> {
    let all = validate(n_requests, bids)?;
    if n_requests == 0 {
        return Ok((WdpSolution::from_indices(bids, vec![]), WdpStats::default()));
    }

    let mut items: Vec<Item> = bids
        .iter()
        .enumerate()
        .map(|(idx, b)| Item {
            mask: b.requests.mask(),
            price: b.price,
            idx,
        })
        .collect();
    items.sort_by_key(|it| (it.price, it.idx));
    if options.remove_dominated {
        items = remove_dominated(items, n_requests);
    }

    let mut by_request: Vec<Vec<u32>> = vec![Vec::new(); n_requests];
    for (pos, it) in items.iter().enumerate() {
        for r in RequestSet::from_mask(it.mask) {
            by_request[r].push(pos as u32);
        }
    }
    let mut order: Vec<usize> = (0..n_requests).collect();
    order.sort_by_key(|&r| (by_request[r].len(), r));

    let mut search = Search {
        items: &items,
        by_request: &by_request,
        order,
        best_cost: u64::MAX,
        best: Vec::new(),
        chosen: Vec::with_capacity(n_requests),
        table: HashMap::new(),
        nodes: 0,
    };
    search.greedy_incumbent(all.mask());
    search.visit(all.mask(), 0);

    let stats = WdpStats {
        bids_after_preprocessing: items.len(),
        nodes: search.nodes,
    };
    Ok((WdpSolution::from_indices(bids, search.best), stats))
}

#[derive(Debug, Clone, Copy)]
struct Item {
    mask: u64,
    price: u64,
    idx: usize,
}

/// `items` sorted by `(price, idx)`; every kept bid precedes, in that order,
/// anything it dominates.
fn remove_dominated(items: Vec<Item>, n: usize) -> Vec<Item> {
    let mut kept: Vec<Item> = Vec::with_capacity(items.len());
    let mut kept_by_request: Vec<Vec<u32>> = vec![Vec::new(); n];
    for it in items {
        let set = RequestSet::from_mask(it.mask);
        let probe = set
            .iter()
            .min_by_key(|&r| kept_by_request[r].len())
            .expect("bids are non-empty");
        let dominated = kept_by_request[probe]
            .iter()
            .any(|&k| it.mask & !kept[k as usize].mask == 0);
        if !dominated {
            for r in set {
                kept_by_request[r].push(kept.len() as u32);
            }
            kept.push(it);
        }
    }
    kept
}

/// `a` precedes `b` when the smallest index in exactly one of them is in `a`.
/// Coincides with lexicographic order on covers neither of which contains
/// the other. Both slices ascending.
fn first_difference_in(a: &[usize], b: &[usize]) -> Option<bool> {
    let (mut i, mut j) = (0, 0);
    loop {
        match (a.get(i), b.get(j)) {
            (None, None) => return None,
            (Some(_), None) => return Some(true),
            (None, Some(_)) => return Some(false),
            (Some(x), Some(y)) => match x.cmp(y) {
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
                Ordering::Less => return Some(true),
                Ordering::Greater => return Some(false),
            },
        }
    }
}

struct Search<'a> {
    items: &'a [Item],
    by_request: &'a [Vec<u32>],
    /// Requests by ascending number of candidate bids.
    order: Vec<usize>,
    best_cost: u64,
    /// Ascending original indices of the incumbent.
    best: Vec<usize>,
    /// Original indices on the current path.
    chosen: Vec<usize>,
    /// Uncovered mask -> cheapest known path (cost, ascending indices).
    table: HashMap<u64, (u64, Vec<usize>)>,
    nodes: u64,
}

impl Search<'_> {
    fn offer(&mut self, cost: u64) {
        let mut set = self.chosen.clone();
        set.sort_unstable();
        if cost < self.best_cost || (cost == self.best_cost && set < self.best) {
            self.best_cost = cost;
            self.best = set;
        }
    }

    fn greedy_incumbent(&mut self, all: u64) {
        let mut uncovered = all;
        let mut cost = 0;
        while uncovered != 0 {
            let it = self
                .items
                .iter()
                .filter(|it| it.mask & uncovered != 0)
                .min_by(|a, b| {
                    let (ka, kb) = (
                        (a.mask & uncovered).count_ones(),
                        (b.mask & uncovered).count_ones(),
                    );
                    (a.price as u128 * kb as u128)
                        .cmp(&(b.price as u128 * ka as u128))
                        .then(a.idx.cmp(&b.idx))
                })
                .expect("validated as coverable");
            uncovered &= !it.mask;
            cost += it.price;
            self.chosen.push(it.idx);
        }
        self.offer(cost);
        self.chosen.clear();
    }

    /// Returns false when an equal or better path to `uncovered` was seen.
    fn record(&mut self, uncovered: u64, cost: u64) -> bool {
        match self.table.get_mut(&uncovered) {
            Some((seen_cost, seen)) => {
                if *seen_cost < cost {
                    return false;
                }
                let mut path = self.chosen.clone();
                path.sort_unstable();
                if *seen_cost == cost && first_difference_in(&path, seen) != Some(true) {
                    return false;
                }
                *seen_cost = cost;
                *seen = path;
                true
            }
            None => {
                if self.table.len() < MAX_TABLE_ENTRIES {
                    let mut path = self.chosen.clone();
                    path.sort_unstable();
                    self.table.insert(uncovered, (cost, path));
                }
                true
            }
        }
    }

    fn visit(&mut self, uncovered: u64, cost: u64) {
        self.nodes += 1;
        if uncovered == 0 {
            self.offer(cost);
            return;
        }
        if !self.record(uncovered, cost) {
            return;
        }
        let budget = |best: u64| best.saturating_sub(cost) as f64 + TOLERANCE;

        let mut columns: Vec<(u64, u64)> = self
            .items
            .iter()
            .filter(|it| it.mask & uncovered != 0)
            .map(|it| (it.mask & uncovered, it.price))
            .collect();
        columns.sort_unstable();
        columns.dedup_by_key(|c| c.0);
        let lp = lp::covering_bound(uncovered, &columns, budget(self.best_cost));
        if lp.value > budget(self.best_cost) {
            return;
        }

        let branch = *self
            .order
            .iter()
            .find(|&&r| uncovered & (1 << r) != 0)
            .expect("uncovered is non-empty");
        // (newly covered, price, index); per newly covered set only the bid
        // with the smallest (price, index) survives.
        let mut children: Vec<(u64, u64, usize)> = self.by_request[branch]
            .iter()
            .map(|&pos| {
                let it = &self.items[pos as usize];
                (it.mask & uncovered, it.price, it.idx)
            })
            .collect();
        children.sort_unstable();
        children.dedup_by_key(|c| c.0);
        let mut children: Vec<(f64, u64, u64, usize)> = children
            .into_iter()
            .map(|(new, price, idx)| (lp.value + lp.reduced_cost(new, price), new, price, idx))
            .filter(|c| c.0 <= budget(self.best_cost))
            .collect();
        children.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.3.cmp(&b.3)));

        for (child_bound, new, price, idx) in children {
            if child_bound > budget(self.best_cost) {
                continue;
            }
            self.chosen.push(idx);
            self.visit(uncovered & !new, cost + price);
            self.chosen.pop();
        }
    }
}

/// Exhaustive search over all bid subsets; test oracle for [`solve_wdp`].
pub fn wdp_brute(n_requests: usize, bids: &[Bid]) -> Result<WdpSolution, WdpError> {
    if bids.len() > BRUTE_FORCE_MAX_BIDS {
        return Err(WdpError::TooManyBids {
            count: bids.len(),
            limit: BRUTE_FORCE_MAX_BIDS,
        });
    }
    let all = validate(n_requests, bids)?;
    let mut best: Option<(u64, Vec<usize>)> = None;
    for subset in 0u32..(1u32 << bids.len()) {
        let mut covered = RequestSet::EMPTY;
        let mut cost = 0u64;
        let mut members = Vec::new();
        for (i, b) in bids.iter().enumerate() {
            if subset & (1 << i) != 0 {
                covered = covered.union(b.requests);
                cost += b.price;
                members.push(i);
            }
        }
        if covered != all {
            continue;
        }
        let candidate = (cost, members);
        if best.as_ref().is_none_or(|b| candidate < *b) {
            best = Some(candidate);
        }
    }
    let (_, winning) = best.expect("validated as coverable");
    Ok(WdpSolution::from_indices(bids, winning))
}

/// JSON document written by the clearing step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub winning: Vec<usize>,
    pub f_a: u64,
    pub per_carrier: BTreeMap<String, u64>,
}

impl From<&WdpSolution> for SolutionDoc {
    fn from(s: &WdpSolution) -> Self {
        SolutionDoc {
            winning: s.winning.clone(),
            f_a: s.total_cost,
            per_carrier: s.per_carrier_revenue.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bid(carrier: &str, ids: &[usize], price: u64) -> Bid {
        Bid::new(carrier, ids.iter().copied().collect(), price)
    }

    /// Requests 1..4 of the worked example mapped to ids 0..3.
    fn example() -> Vec<Bid> {
        vec![
            bid("x", &[0, 1], 20),
            bid("x", &[2], 10),
            bid("y", &[0, 1, 2], 30),
            bid("y", &[0, 1, 3], 30),
            bid("z", &[0, 1], 21),
            bid("z", &[2], 11),
        ]
    }

    #[test]
    fn worked_example() {
        let sol = solve_wdp(4, &example()).unwrap();
        assert_eq!(sol.winning, vec![1, 3]);
        assert_eq!(sol.total_cost, 40);
        assert_eq!(sol.revenue_of("x"), 10);
        assert_eq!(sol.revenue_of("y"), 30);
        assert_eq!(sol, wdp_brute(4, &example()).unwrap());
    }

    #[test]
    fn single_covering_bid() {
        let bids = vec![bid("a", &[0, 1, 2], 9)];
        let sol = solve_wdp(3, &bids).unwrap();
        assert_eq!((sol.winning.clone(), sol.total_cost), (vec![0], 9));
    }

    #[test]
    fn uncoverable_lists_missing_requests() {
        let bids = vec![bid("a", &[0, 2], 9)];
        assert_eq!(
            solve_wdp(4, &bids).unwrap_err(),
            WdpError::Uncoverable {
                requests: [1, 3].into_iter().collect()
            }
        );
    }

    #[test]
    fn empty_tender() {
        let sol = wdp_brute(0, &[]).unwrap();
        assert!(sol.winning.is_empty());
        assert_eq!(sol.total_cost, 0);
        assert_eq!(solve_wdp(0, &[]).unwrap(), sol);
    }

    #[test]
    fn brute_force_limit() {
        let bids: Vec<Bid> = (0..21).map(|k| bid("a", &[k % 3], 1 + k as u64)).collect();
        assert_eq!(
            wdp_brute(3, &bids).unwrap_err(),
            WdpError::TooManyBids {
                count: 21,
                limit: 20
            }
        );
    }

    #[test]
    fn zero_price_rejected() {
        let bids = vec![bid("a", &[0], 0)];
        assert!(matches!(
            solve_wdp(1, &bids),
            Err(WdpError::InvalidBid { index: 0, .. })
        ));
    }

    #[test]
    fn ties_prefer_smaller_indices() {
        // {0,1}@10 ties with {0}@4 + {1}@6 and with the later duplicate.
        let bids = vec![
            bid("a", &[1], 6),
            bid("b", &[0, 1], 10),
            bid("c", &[0], 4),
            bid("d", &[0, 1], 10),
        ];
        let sol = solve_wdp(2, &bids).unwrap();
        assert_eq!(sol.winning, vec![0, 2]);
        assert_eq!(sol, wdp_brute(2, &bids).unwrap());
        let no_dominance = solve_wdp_with(
            2,
            &bids,
            WdpOptions {
                remove_dominated: false,
            },
        )
        .unwrap()
        .0;
        assert_eq!(no_dominance, sol);
    }

    #[test]
    fn dominance_keeps_cheapest_superset() {
        let items = vec![
            Item {
                mask: 0b011,
                price: 5,
                idx: 2,
            },
            Item {
                mask: 0b001,
                price: 5,
                idx: 0,
            },
            Item {
                mask: 0b001,
                price: 6,
                idx: 1,
            },
        ];
        let mut sorted = items.clone();
        sorted.sort_by_key(|it| (it.price, it.idx));
        let kept: Vec<usize> = remove_dominated(sorted, 2)
            .iter()
            .map(|it| it.idx)
            .collect();
        // idx 0 has a smaller index than its equal-priced superset.
        assert_eq!(kept, vec![0, 2]);
    }

    #[test]
    fn first_difference_rule() {
        assert_eq!(first_difference_in(&[1, 5], &[1, 3, 5]), Some(false));
        assert_eq!(first_difference_in(&[0, 9], &[1]), Some(true));
        assert_eq!(first_difference_in(&[2, 4], &[2, 4]), None);
    }

    #[test]
    fn solution_doc_layout() {
        let sol = solve_wdp(4, &example()).unwrap();
        let text = serde_json::to_string(&SolutionDoc::from(&sol)).unwrap();
        assert_eq!(
            text,
            r#"{"winning":[1,3],"f_a":40,"per_carrier":{"x":10,"y":30}}"#
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        /// Random coverable cases; small price range so ties are common.
        fn cases() -> impl Strategy<Value = (usize, Vec<Bid>)> {
            (1usize..=6).prop_flat_map(|n| {
                let bid = (1u64..(1 << n), 1u64..=12, 0usize..3).prop_map(|(mask, price, c)| {
                    Bid::new(format!("k{c}"), RequestSet::from_mask(mask), price)
                });
                (Just(n), prop::collection::vec(bid, 0..14)).prop_map(|(n, mut bids)| {
                    // Singletons at a high price keep every case coverable.
                    bids.extend((0..n).map(|r| Bid::new("s", RequestSet::singleton(r), 30)));
                    (n, bids)
                })
            })
        }

        proptest! {
            #[test]
            fn matches_oracle((n, bids) in cases()) {
                let oracle = wdp_brute(n, &bids).unwrap();
                prop_assert_eq!(&solve_wdp(n, &bids).unwrap(), &oracle);
                let plain = solve_wdp_with(n, &bids, WdpOptions { remove_dominated: false }).unwrap().0;
                prop_assert_eq!(&plain, &oracle);
            }

            #[test]
            fn more_bids_never_cost_more((n, bids) in cases(), extra in 1u64..64, price in 1u64..=12) {
                let before = solve_wdp(n, &bids).unwrap().total_cost;
                let mut more = bids.clone();
                more.push(Bid::new("z", RequestSet::from_mask(extra & RequestSet::full(n).mask()).with(0), price));
                prop_assert!(solve_wdp(n, &more).unwrap().total_cost <= before);
            }

            #[test]
            fn dominated_bids_never_win((n, bids) in cases()) {
                let sol = solve_wdp(n, &bids).unwrap();
                for &w in &sol.winning {
                    let dominated = bids.iter().enumerate().any(|(j, o)| {
                        j != w && bids[w].requests.is_subset_of(o.requests)
                            && (o.price < bids[w].price || (o.price == bids[w].price && j < w))
                    });
                    prop_assert!(!dominated, "bid {} wins although dominated", w);
                }
            }
        }
    }
}
