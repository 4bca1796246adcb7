//! Elementary request combinations and the exact bidding strategy built
//! on them.
//!
//! A set is elementary when its total demand fits one vehicle. The family
//! of elementary sets is closed under taking subsets, so a binary include /
//! exclude tree over the requests can cut an include branch as soon as the
//! running demand exceeds the capacity.

use crate::model::{Bid, Instance, RequestSet};
use crate::tsp::{PricingContext, TspError};
use rayon::prelude::*;
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumerationError {
    #[error("root {root} has demand {demand} above capacity {cap}")]
    RootNotElementary {
        root: RequestSet,
        demand: u64,
        cap: u64,
    },
    #[error("no collection of bids partitions {target}")]
    NoPartitionExists { target: RequestSet },
    #[error(transparent)]
    Pricing(#[from] TspError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ElementarySet {
    pub requests: RequestSet,
    pub total_demand: u64,
}

/// Whether the root itself is reported by [`enumerate_supersets`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SupersetMode {
    /// `T ⊇ root`
    #[default]
    Inclusive,
    /// `T ⊋ root`
    Strict,
}

/// Requests outside `fixed`, by non-ascending demand and then id.
fn branching_order(instance: &Instance, fixed: RequestSet) -> Vec<usize> {
    let mut order: Vec<usize> = instance.requests().difference(fixed).to_vec();
    order.sort_by(|&a, &b| instance.demand(b).cmp(&instance.demand(a)).then(a.cmp(&b)));
    order
}

struct TreeSearch<'a> {
    instance: &'a Instance,
    order: Vec<usize>,
    out: Vec<ElementarySet>,
}

impl TreeSearch<'_> {
    fn visit(&mut self, level: usize, set: RequestSet, demand: u64) {
        if level == self.order.len() {
            if !set.is_empty() {
                self.out.push(ElementarySet {
                    requests: set,
                    total_demand: demand,
                });
            }
            return;
        }
        let r = self.order[level];
        let with = demand + self.instance.demand(r);
        if with <= self.instance.cap() {
            self.visit(level + 1, set.with(r), with);
        }
        self.visit(level + 1, set, demand);
    }
}

fn search(instance: &Instance, root: RequestSet) -> Vec<ElementarySet> {
    let mut tree = TreeSearch {
        instance,
        order: branching_order(instance, root),
        out: Vec::new(),
    };
    tree.visit(0, root, instance.demand_of(root));
    tree.out
}

/// Every non-empty elementary set, each exactly once.
///
/// Output follows the leaves of the include-first depth-first traversal with
/// requests branched in non-ascending demand order (ties by id).
pub fn enumerate_elementary(instance: &Instance) -> Vec<ElementarySet> {
    search(instance, RequestSet::EMPTY)
}

/// Every elementary superset of `root`: the tree search with the root's
/// members fixed as included. An empty root yields [`enumerate_elementary`].
pub fn enumerate_supersets(
    instance: &Instance,
    root: RequestSet,
    mode: SupersetMode,
) -> Result<Vec<ElementarySet>, EnumerationError> {
    let demand = instance.demand_of(root);
    if demand > instance.cap() {
        return Err(EnumerationError::RootNotElementary {
            root,
            demand,
            cap: instance.cap(),
        });
    }
    let mut sets = search(instance, root);
    if mode == SupersetMode::Strict {
        sets.retain(|e| e.requests != root);
    }
    Ok(sets)
}

/// Prices `sets` (in parallel on the current rayon pool) and returns the
/// focal carrier's bids sorted by `(size, mask)`.
pub fn price_sets(
    pricing: &PricingContext<'_>,
    sets: impl IntoIterator<Item = RequestSet>,
) -> Result<Vec<Bid>, TspError> {
    let mut sets: Vec<RequestSet> = sets.into_iter().collect();
    sets.sort_by_key(|s| s.size_then_mask());
    sets.dedup();
    sets.par_iter()
        .map(|&s| pricing.price_bundle(s).map(|p| Bid::focal(s, p)))
        .collect()
}

/// Exact strategy: one bid on every elementary set.
pub fn ebbs_bids(instance: &Instance, pricing: &PricingContext<'_>) -> Result<Vec<Bid>, TspError> {
    debug_assert!(std::ptr::eq(instance, pricing.instance()));
    price_sets(
        pricing,
        enumerate_elementary(instance)
            .into_iter()
            .map(|e| e.requests),
    )
}

/// Cheapest price for `target` assembled from bids whose sets partition it.
pub fn infer_price(bids: &[Bid], target: RequestSet) -> Result<u64, EnumerationError> {
    if target.is_empty() {
        return Ok(0);
    }
    // Cheapest bid per set, grouped by lowest member.
    let mut cheapest: HashMap<RequestSet, u64> = HashMap::new();
    for b in bids {
        if !b.requests.is_empty() && b.requests.is_subset_of(target) {
            cheapest
                .entry(b.requests)
                .and_modify(|p| *p = (*p).min(b.price))
                .or_insert(b.price);
        }
    }
    let mut by_lowest: Vec<Vec<(RequestSet, u64)>> = vec![Vec::new(); 64];
    for (set, price) in cheapest {
        by_lowest[set.lowest().expect("non-empty")].push((set, price));
    }
    for group in &mut by_lowest {
        group.sort_unstable_by_key(|&(s, p)| (p, s));
    }

    fn best(
        rem: RequestSet,
        by_lowest: &[Vec<(RequestSet, u64)>],
        memo: &mut HashMap<RequestSet, Option<u64>>,
    ) -> Option<u64> {
        if rem.is_empty() {
            return Some(0);
        }
        if let Some(&v) = memo.get(&rem) {
            return v;
        }
        let low = rem.lowest().expect("non-empty");
        let mut result: Option<u64> = None;
        for &(set, price) in &by_lowest[low] {
            if !set.is_subset_of(rem) || result.is_some_and(|r| price >= r) {
                continue;
            }
            if let Some(tail) = best(rem.difference(set), by_lowest, memo) {
                let total = price + tail;
                if result.is_none_or(|r| total < r) {
                    result = Some(total);
                }
            }
        }
        memo.insert(rem, result);
        result
    }

    best(target, &by_lowest, &mut HashMap::new())
        .ok_or(EnumerationError::NoPartitionExists { target })
}

/// CSV bid list: `carrier,mask,size,price`, the mask in decimal.
pub fn bids_to_csv(bids: &[Bid]) -> String {
    let mut out = String::from("carrier,mask,size,price\n");
    for b in bids {
        writeln!(
            out,
            "{},{},{},{}",
            b.carrier,
            b.requests.mask(),
            b.requests.len(),
            b.price
        )
        .expect("writing to a String");
    }
    out
}

/// Parses [`bids_to_csv`] output; lines starting with `#` are skipped.
pub fn bids_from_csv(text: &str) -> Result<Vec<Bid>, String> {
    let mut bids = Vec::new();
    let mut saw_header = false;
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "carrier,mask,size,price" {
                return Err(format!("line {}: unexpected header `{line}`", k + 1));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(format!("line {}: expected 4 fields", k + 1));
        }
        let bad = |what: &str| format!("line {}: malformed {what}", k + 1);
        let mask: u64 = fields[1].parse().map_err(|_| bad("mask"))?;
        let size: usize = fields[2].parse().map_err(|_| bad("size"))?;
        let price: u64 = fields[3].parse().map_err(|_| bad("price"))?;
        let requests = RequestSet::from_mask(mask);
        if requests.len() != size {
            return Err(format!("line {}: size {size} does not match mask", k + 1));
        }
        bids.push(Bid::new(fields[0], requests, price));
    }
    if !saw_header {
        return Err("missing header".to_string());
    }
    Ok(bids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_instance, Point};

    fn by_demands(demands: &[u64], cap: u64) -> Instance {
        let customers: Vec<_> = demands
            .iter()
            .enumerate()
            .map(|(i, &d)| (Point::new(10 * i as i32 + 3, 7 - 2 * i as i32), d))
            .collect();
        build_instance(Point::new(0, 0), &customers, cap).unwrap()
    }

    fn masks(sets: &[ElementarySet]) -> Vec<u64> {
        let mut v: Vec<u64> = sets.iter().map(|e| e.requests.mask()).collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn hand_enumeration() {
        let inst = by_demands(&[2, 2, 3], 4);
        let sets = enumerate_elementary(&inst);
        assert_eq!(masks(&sets), vec![0b001, 0b010, 0b011, 0b100]);
        // include-first leaves over order (2, 0, 1)
        let order: Vec<u64> = sets.iter().map(|e| e.requests.mask()).collect();
        assert_eq!(order, vec![0b100, 0b011, 0b001, 0b010]);
        assert!(sets
            .iter()
            .all(|e| e.total_demand == inst.demand_of(e.requests)));
    }

    #[test]
    fn no_pruning_when_everything_fits() {
        let inst = by_demands(&[1, 2, 3, 4, 5], 15);
        assert_eq!(enumerate_elementary(&inst).len(), 31);
    }

    #[test]
    fn full_capacity_root_has_only_itself() {
        let inst = by_demands(&[2, 2, 3], 4);
        let root = RequestSet::from_mask(0b011);
        let sets = enumerate_supersets(&inst, root, SupersetMode::Inclusive).unwrap();
        assert_eq!(masks(&sets), vec![0b011]);
        assert!(enumerate_supersets(&inst, root, SupersetMode::Strict)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn empty_root_matches_enumerate_elementary() {
        let inst = by_demands(&[3, 1, 4, 1, 5, 2], 7);
        let all = enumerate_elementary(&inst);
        let rooted =
            enumerate_supersets(&inst, RequestSet::EMPTY, SupersetMode::Inclusive).unwrap();
        assert_eq!(all, rooted);
    }

    #[test]
    fn oversized_root_rejected() {
        let inst = by_demands(&[2, 2, 3], 4);
        let err = enumerate_supersets(&inst, RequestSet::from_mask(0b101), SupersetMode::Inclusive)
            .unwrap_err();
        assert!(matches!(
            err,
            EnumerationError::RootNotElementary { demand: 5, .. }
        ));
    }

    #[test]
    fn single_request_bids_pendular() {
        let inst = by_demands(&[3], 4);
        let pricing = PricingContext::new(&inst);
        let bids = ebbs_bids(&inst, &pricing).unwrap();
        assert_eq!(
            bids,
            vec![Bid::focal(RequestSet::singleton(0), 2 * inst.depot_dist(0))]
        );
    }

    #[test]
    fn infer_price_table_pattern() {
        // Seven elementary bids on requests a,b,c,d = 0,1,2,3.
        let bid = |ids: &[usize], p| Bid::focal(ids.iter().copied().collect(), p);
        let bids = vec![
            bid(&[0], 10),
            bid(&[1], 4),
            bid(&[2], 7),
            bid(&[3], 9),
            bid(&[0, 1], 12),
            bid(&[1, 2], 8),
            bid(&[1, 3], 11),
        ];
        let set = |ids: &[usize]| ids.iter().copied().collect::<RequestSet>();
        assert_eq!(infer_price(&bids, set(&[0, 2])).unwrap(), 17);
        assert_eq!(infer_price(&bids, set(&[1, 2])).unwrap(), 8);
        // {a,b,c}: min(a+b+c = 21, ab+c = 19, a+bc = 18)
        assert_eq!(infer_price(&bids, set(&[0, 1, 2])).unwrap(), 18);
        assert!(matches!(
            infer_price(&bids[..3], set(&[3])),
            Err(EnumerationError::NoPartitionExists { .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let bids = vec![
            Bid::focal(RequestSet::from_mask(0b101), 42),
            Bid::new("r3", RequestSet::from_mask(1 << 40), 7),
        ];
        let text = bids_to_csv(&bids);
        assert!(text.starts_with("carrier,mask,size,price\nc,5,2,42\n"));
        assert_eq!(bids_from_csv(&format!("# meta\n{text}")).unwrap(), bids);
        assert!(bids_from_csv("carrier,mask,size,price\nc,5,3,1\n").is_err());
    }
}
