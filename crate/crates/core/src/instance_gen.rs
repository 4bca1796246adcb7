//! Benchmark scenario generation: the focal instance is cut from a CVRP
//! source and rival bids are drawn at random.
//!
//! Rival bid `k` is drawn from its own random stream. A capacity
//! `cap' = cap * u` with `u` uniform on (0, 1) is drawn first, then requests
//! are drawn without replacement and added while the load stays within
//! `cap'`; the first request that does not fit ends the bid. When not even the
//! first request fits, the whole draw (including `u`) is repeated. The price
//! is the optimal tour length through the depot and the bid's customers,
//! scaled by a factor uniform on the jitter interval and rounded, at least 1.

use crate::model::{Bid, CvrpData, CvrpError, Instance, Point, RequestSet, Scenario};
use crate::rng::{self, Domain};
use crate::tsp::{PricingContext, TspError};
use rand::distributions::{Distribution, Open01, Uniform};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error(transparent)]
    Source(#[from] CvrpError),
    #[error("invalid price jitter interval [{lo}, {hi}]")]
    InvalidJitter { lo: String, hi: String },
    #[error("at least one rival carrier is needed")]
    NoRivalCarriers,
    #[error("rival bid pricing failed: {0}")]
    Pricing(#[from] TspError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    /// Number of tendered requests, taken from the front of the source.
    pub m: usize,
    /// Vehicle capacity; the source's capacity when `None`.
    pub cap: Option<u64>,
    pub rival_bid_count: usize,
    /// Closed interval of the price factor.
    pub price_jitter: (f64, f64),
    /// Carrier ids `r0, r1, ...` are assigned round-robin over this many rivals.
    pub rival_carriers: usize,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(m: usize, rival_bid_count: usize, seed: u64) -> Self {
        GenConfig {
            m,
            cap: None,
            rival_bid_count,
            price_jitter: (0.7, 1.3),
            rival_carriers: 5,
            seed,
        }
    }

    fn check(&self) -> Result<(), GenError> {
        let (lo, hi) = self.price_jitter;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(GenError::InvalidJitter {
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        if self.rival_carriers == 0 {
            return Err(GenError::NoRivalCarriers);
        }
        Ok(())
    }
}

/// The random quantities behind one rival bid.
#[derive(Debug, Clone, PartialEq)]
pub struct RivalDraw {
    pub requests: RequestSet,
    /// Every reduced capacity drawn, including attempts that were redrawn.
    pub reduced_caps: Vec<f64>,
    pub jitter: f64,
}

fn draw_rival(instance: &Instance, cfg: &GenConfig, k: usize) -> RivalDraw {
    let mut rng = rng::stream(cfg.seed, Domain::RivalBids, k as u64);
    let mut order: Vec<usize> = (0..instance.n()).collect();
    let mut reduced_caps = Vec::new();
    let requests = loop {
        let u: f64 = Open01.sample(&mut rng);
        let reduced = instance.cap() as f64 * u;
        reduced_caps.push(reduced);
        order.shuffle(&mut rng);
        let mut set = RequestSet::EMPTY;
        let mut load = 0;
        for &r in &order {
            load += instance.demand(r);
            if load as f64 > reduced {
                break;
            }
            set = set.with(r);
        }
        if !set.is_empty() {
            break set;
        }
    };
    let (lo, hi) = cfg.price_jitter;
    let jitter = Uniform::new_inclusive(lo, hi).sample(&mut rng);
    RivalDraw {
        requests,
        reduced_caps,
        jitter,
    }
}

/// The raw draws of the first `cfg.rival_bid_count` rival bids.
pub fn trace_rival_draws(instance: &Instance, cfg: &GenConfig) -> Result<Vec<RivalDraw>, GenError> {
    cfg.check()?;
    if instance.n() == 0 {
        return Ok(Vec::new());
    }
    Ok((0..cfg.rival_bid_count)
        .into_par_iter()
        .map(|k| draw_rival(instance, cfg, k))
        .collect())
}

pub fn generate_rival_bids(instance: &Instance, cfg: &GenConfig) -> Result<Vec<Bid>, GenError> {
    let draws = trace_rival_draws(instance, cfg)?;
    let pricing = PricingContext::new(instance);
    draws
        .par_iter()
        .enumerate()
        .map(|(k, d)| {
            let tour = pricing.price_bundle(d.requests)?;
            let price = ((tour as f64 * d.jitter).round() as u64).max(1);
            Ok(Bid::new(
                format!("r{}", k % cfg.rival_carriers),
                d.requests,
                price,
            ))
        })
        .collect()
}

/// Random CVRP-style source resembling the classic benchmark files:
/// integer coordinates on a 70 x 70 grid, depot in the middle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub customers: usize,
    pub cap: u64,
    pub max_demand: u64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(customers: usize, seed: u64) -> Self {
        SyntheticSpec {
            customers,
            cap: 160,
            max_demand: 40,
            seed,
        }
    }

    pub fn build(&self) -> CvrpData {
        let mut rng = rng::stream(self.seed, Domain::SyntheticSource, 0);
        let depot = Point::new(35, 35);
        let customers = (0..self.customers)
            .map(|_| {
                let p = loop {
                    let p = Point::new(rng.gen_range(0..=70), rng.gen_range(0..=70));
                    if p != depot {
                        break p;
                    }
                };
                (p, rng.gen_range(1..=self.max_demand.max(1)))
            })
            .collect();
        CvrpData {
            depot,
            customers,
            cap: self.cap,
            max_route_time: 999_999.0,
            drop_time: 0.0,
        }
    }
}

/// Renders a source in the plain-text CVRP layout read by
/// [`crate::model::import_cvrp`].
pub fn cvrp_text(data: &CvrpData) -> String {
    let mut out = format!(
        "{} {} {} {}\n{} {}\n",
        data.customers.len(),
        data.cap,
        data.max_route_time,
        data.drop_time,
        data.depot.x,
        data.depot.y
    );
    for (p, d) in &data.customers {
        writeln!(out, "{} {} {}", p.x, p.y, d).expect("writing to a String");
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Cvrp(CvrpData),
    Synthetic(SyntheticSpec),
}

pub fn generate_scenario(source: &Source, cfg: &GenConfig) -> Result<Scenario, GenError> {
    cfg.check()?;
    let data = match source {
        Source::Cvrp(data) => data.clone(),
        Source::Synthetic(spec) => spec.build(),
    };
    let instance = data.truncate(cfg.m)?.to_instance(cfg.cap)?;
    let rival_bids = generate_rival_bids(&instance, cfg)?;
    Ok(Scenario {
        instance,
        rival_bids,
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{import_cvrp, save_scenario};
    use crate::tsp::tsp_brute;

    fn scenario(m: usize, rivals: usize, cap: Option<u64>, seed: u64) -> Scenario {
        let mut cfg = GenConfig::new(m, rivals, seed);
        cfg.cap = cap;
        generate_scenario(&Source::Synthetic(SyntheticSpec::new(50, 3)), &cfg).unwrap()
    }

    #[test]
    fn truncates_source() {
        let s = scenario(15, 40, None, 1);
        assert_eq!(s.instance.n(), 15);
        assert_eq!(s.rival_bids.len(), 40);
        assert_eq!(s.seed, 1);
        s.validate().unwrap();
    }

    #[test]
    fn rival_bids_are_elementary_and_positive() {
        let s = scenario(20, 300, Some(60), 9);
        for b in &s.rival_bids {
            assert!(!b.requests.is_empty());
            assert!(s.instance.is_elementary(b.requests));
            assert!(b.price >= 1);
        }
        let carriers: std::collections::BTreeSet<_> =
            s.rival_bids.iter().map(|b| b.carrier.as_str()).collect();
        assert_eq!(
            carriers.into_iter().collect::<Vec<_>>(),
            vec!["r0", "r1", "r2", "r3", "r4"]
        );
    }

    #[test]
    fn draws_respect_reduced_capacity() {
        let s = scenario(20, 0, Some(60), 2);
        let cfg = GenConfig::new(20, 500, 4);
        for d in trace_rival_draws(&s.instance, &cfg).unwrap() {
            let accepted = *d.reduced_caps.last().unwrap();
            assert!(s.instance.demand_of(d.requests) as f64 <= accepted);
            assert!(d.reduced_caps.iter().all(|&c| c > 0.0 && c < 60.0));
            assert!((0.7..=1.3).contains(&d.jitter));
        }
    }

    #[test]
    fn unit_jitter_prices_at_tour_length() {
        let s = scenario(12, 0, Some(50), 2);
        let mut cfg = GenConfig::new(12, 60, 5);
        cfg.price_jitter = (1.0, 1.0);
        for b in generate_rival_bids(&s.instance, &cfg).unwrap() {
            assert_eq!(
                b.price.max(1),
                tsp_brute(&s.instance, b.requests).unwrap().cost.max(1)
            );
        }
    }

    #[test]
    fn bid_k_does_not_depend_on_count() {
        let s = scenario(15, 0, None, 2);
        let few = generate_rival_bids(&s.instance, &GenConfig::new(15, 10, 8)).unwrap();
        let many = generate_rival_bids(&s.instance, &GenConfig::new(15, 100, 8)).unwrap();
        assert_eq!(few[..], many[..10]);
    }

    #[test]
    fn regeneration_is_byte_identical() {
        let a = save_scenario(&scenario(15, 100, Some(80), 21));
        let b = save_scenario(&scenario(15, 100, Some(80), 21));
        assert_eq!(a, b);
        assert_ne!(a, save_scenario(&scenario(15, 100, Some(80), 22)));
    }

    #[test]
    fn zero_rivals() {
        assert!(scenario(15, 0, None, 1).rival_bids.is_empty());
    }

    #[test]
    fn synthetic_source_round_trips_through_text() {
        let data = SyntheticSpec::new(30, 11).build();
        assert_eq!(import_cvrp(&cvrp_text(&data)).unwrap(), data);
    }

    #[test]
    fn not_enough_customers() {
        let cfg = GenConfig::new(60, 0, 1);
        assert_eq!(
            generate_scenario(&Source::Synthetic(SyntheticSpec::new(50, 1)), &cfg).unwrap_err(),
            GenError::Source(CvrpError::NotEnoughCustomers {
                requested: 60,
                available: 50
            })
        );
    }

    #[test]
    fn bad_jitter() {
        let s = scenario(5, 0, None, 1);
        let mut cfg = GenConfig::new(5, 1, 1);
        cfg.price_jitter = (1.3, 0.7);
        assert!(matches!(
            generate_rival_bids(&s.instance, &cfg),
            Err(GenError::InvalidJitter { .. })
        ));
    }
}
