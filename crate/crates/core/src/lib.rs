//! Bundle-bid generation for combinatorial transport auctions.
//!
//! A carrier facing a tender of transport requests decides which bundles to
//! bid on and at which price. The exact strategy ([`Strategy::Ebbs`]) bids on
//! every request set that fits one vehicle, priced by the optimal tour
//! through the depot; the clustering heuristics PSC and CPMC and the random
//! baselines RAN and RANN bid on subsets of those bids. The crate also holds
//! the auctioneer's winner determination, a scenario generator and the
//! evaluation harness.
//!
//! ```
//! use bundlebid_core::{build_instance, ebbs_bids, Point, PricingContext};
//!
//! let inst = build_instance(
//!     Point::new(0, 0),
//!     &[(Point::new(3, 4), 2), (Point::new(-3, 4), 2), (Point::new(0, -5), 3)],
//!     4,
//! )
//! .unwrap();
//! let bids = ebbs_bids(&inst, &PricingContext::new(&inst)).unwrap();
//! // Three singletons plus the only pair that fits.
//! assert_eq!(bids.len(), 4);
//! assert_eq!(bids[3].price, 16);
//! ```

pub mod clustering;
pub mod enumeration;
pub mod evaluation;
pub mod instance_gen;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod strategy;
pub mod tsp;
pub mod wdp;

pub use enumeration::{
    ebbs_bids, enumerate_elementary, enumerate_supersets, infer_price, SupersetMode,
};
pub use evaluation::{
    compute_metrics, run_auction, run_campaign, AuctionOutcome, CampaignConfig, Metrics, Report,
};
pub use instance_gen::{generate_rival_bids, generate_scenario, GenConfig, Source, SyntheticSpec};
pub use model::{
    build_instance, distance, import_cvrp, load_scenario, save_scenario, Bid, Instance, Point,
    RequestSet, Scenario,
};
pub use scalar::Scalar;
pub use strategy::{generate_bids, Strategy, StrategyConfig};
pub use tsp::{tsp_exact, PricingContext};
pub use wdp::{solve_wdp, wdp_brute, WdpSolution};

/// Exact metrics, as used in reports.
pub type MetricsRecord = evaluation::MetricsRecord;
/// Floating-point metrics for quick inspection.
pub type MetricsF64 = Metrics<f64>;
