//! The five bidding strategies behind one entry point.

use crate::clustering::{
    cpmc_clusters, heuristic_bids, psc_clusters, ran_bids, rann_clusters, ClusterSet,
    ClusteringError, PmpConfig, DEFAULT_ALPHA,
};
use crate::enumeration::{ebbs_bids, EnumerationError};
use crate::model::{Bid, Instance};
use crate::tsp::{PricingContext, TspError, DEFAULT_HELD_KARP_LIMIT};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Ebbs,
    Psc,
    Cpmc,
    Ran,
    Rann,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Ebbs,
        Strategy::Psc,
        Strategy::Cpmc,
        Strategy::Ran,
        Strategy::Rann,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Ebbs => "ebbs",
            Strategy::Psc => "psc",
            Strategy::Cpmc => "cpmc",
            Strategy::Ran => "ran",
            Strategy::Rann => "rann",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown strategy `{0}` (expected ebbs, psc, cpmc, ran or rann)")]
pub struct UnknownStrategy(pub String);

impl FromStr for Strategy {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownStrategy(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig {
    /// Fraction of synergy pairs kept by PSC.
    pub alpha: f64,
    /// Seed of the random strategies and of the p-median restarts.
    pub seed: u64,
    pub pmp: PmpConfig,
    pub held_karp_limit: usize,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            alpha: DEFAULT_ALPHA,
            seed: 0,
            pmp: PmpConfig::default(),
            held_karp_limit: DEFAULT_HELD_KARP_LIMIT,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error(transparent)]
    Pricing(#[from] TspError),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
    #[error(transparent)]
    Clustering(#[from] ClusteringError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedBids {
    pub strategy: Strategy,
    /// Focal bids sorted by `(size, mask)`.
    pub bids: Vec<Bid>,
    /// Roots of the superset enumeration, for the clustering strategies.
    pub clusters: Option<ClusterSet>,
}

/// Bids of the focal carrier under `strategy`.
pub fn generate_bids(
    instance: &Instance,
    pricing: &PricingContext<'_>,
    strategy: Strategy,
    config: &StrategyConfig,
) -> Result<GeneratedBids, StrategyError> {
    let expand = |clusters: ClusterSet| -> Result<GeneratedBids, StrategyError> {
        let bids = heuristic_bids(instance, &clusters, pricing)?;
        Ok(GeneratedBids {
            strategy,
            bids,
            clusters: Some(clusters),
        })
    };
    match strategy {
        Strategy::Ebbs => Ok(GeneratedBids {
            strategy,
            bids: ebbs_bids(instance, pricing)?,
            clusters: None,
        }),
        Strategy::Ran => {
            let bids = ran_bids(instance, pricing, config.seed)?.bids;
            Ok(GeneratedBids {
                strategy,
                bids,
                clusters: None,
            })
        }
        Strategy::Psc => expand(psc_clusters(instance, config.alpha)?),
        Strategy::Cpmc => {
            let pmp = PmpConfig {
                seed: config.seed,
                ..config.pmp
            };
            expand(cpmc_clusters(instance, &pmp)?)
        }
        Strategy::Rann => expand(rann_clusters(instance, config.seed)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_instance, Point};
    use std::collections::BTreeSet;

    fn instance() -> Instance {
        let c: Vec<_> = (0..9)
            .map(|i| {
                (
                    Point::new((i * 37) % 41 - 20, (i * 53) % 29 - 14),
                    2 + (i as u64 * 5) % 7,
                )
            })
            .collect();
        build_instance(Point::new(0, 0), &c, 14).unwrap()
    }

    #[test]
    fn parse_and_display() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert_eq!("PSC".parse::<Strategy>().unwrap(), Strategy::Psc);
        assert!("greedy".parse::<Strategy>().is_err());
        assert_eq!(serde_json::to_string(&Strategy::Rann).unwrap(), "\"rann\"");
    }

    #[test]
    fn heuristics_bid_on_subsets_of_ebbs() {
        let inst = instance();
        let pricing = PricingContext::new(&inst);
        let config = StrategyConfig {
            seed: 5,
            ..StrategyConfig::default()
        };
        let ebbs: BTreeSet<_> = generate_bids(&inst, &pricing, Strategy::Ebbs, &config)
            .unwrap()
            .bids
            .into_iter()
            .map(|b| (b.requests, b.price))
            .collect();
        for s in [Strategy::Psc, Strategy::Cpmc, Strategy::Ran, Strategy::Rann] {
            let out = generate_bids(&inst, &pricing, s, &config).unwrap();
            assert!(!out.bids.is_empty());
            assert_eq!(out.clusters.is_some(), s != Strategy::Ran);
            for b in out.bids {
                assert!(b.is_focal());
                assert!(ebbs.contains(&(b.requests, b.price)), "{s}: {}", b.requests);
            }
        }
    }

    #[test]
    fn cpmc_covers_every_request() {
        let inst = instance();
        let out = generate_bids(
            &inst,
            &PricingContext::new(&inst),
            Strategy::Cpmc,
            &StrategyConfig::default(),
        )
        .unwrap();
        let covered = out
            .bids
            .iter()
            .fold(crate::model::RequestSet::EMPTY, |acc, b| {
                acc.union(b.requests)
            });
        assert_eq!(covered, inst.requests());
    }
}
