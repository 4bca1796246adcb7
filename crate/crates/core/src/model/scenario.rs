//! Scenario persistence.
//!
//! ```json
//! {"cap":160,"depot":[30,40],"customers":[[37,52,7],...],"seed":7,
//!  "rival_bids":[{"carrier":"r0","requests":[0,4],"price":93},...]}
//! ```
//!
//! Loading re-validates every invariant: demands fit the vehicle, rival
//! request sets are non-empty, name existing requests, are elementary and
//! carry a price of at least one.

use super::{build_instance, Bid, Instance, InstanceError, Point};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A tender as seen by the focal carrier: its own instance plus the bids
/// of its rivals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub instance: Instance,
    pub rival_bids: Vec<Bid>,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("malformed scenario document: {0}")]
    Malformed(String),
    #[error("invalid instance: {0}")]
    Instance(#[from] InstanceError),
    #[error("rival bid {index}: {reason}")]
    InvalidBid { index: usize, reason: String },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    cap: u64,
    depot: [i32; 2],
    customers: Vec<[i64; 3]>,
    seed: u64,
    rival_bids: Vec<Bid>,
}

impl Scenario {
    /// Checks the rival-bid invariants against the instance.
    pub fn validate(&self) -> Result<(), SchemaError> {
        for (index, bid) in self.rival_bids.iter().enumerate() {
            let reason = if bid.requests.is_empty() {
                Some("empty request set".to_string())
            } else if !self.instance.contains_set(bid.requests) {
                Some(format!("requests {} name unknown ids", bid.requests))
            } else if !self.instance.is_elementary(bid.requests) {
                Some(format!(
                    "requests {} have demand {} above capacity {}",
                    bid.requests,
                    self.instance.demand_of(bid.requests),
                    self.instance.cap()
                ))
            } else if bid.price < 1 {
                Some("price must be at least 1".to_string())
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(SchemaError::InvalidBid { index, reason });
            }
        }
        Ok(())
    }
}

pub fn save_scenario(s: &Scenario) -> Vec<u8> {
    let inst = &s.instance;
    let doc = ScenarioDoc {
        cap: inst.cap(),
        depot: [inst.depot().x, inst.depot().y],
        customers: inst
            .customers()
            .iter()
            .map(|c| [c.location.x as i64, c.location.y as i64, c.demand as i64])
            .collect(),
        seed: s.seed,
        rival_bids: s.rival_bids.clone(),
    };
    let mut out = serde_json::to_vec(&doc).expect("scenario serializes");
    out.push(b'\n');
    out
}

pub fn load_scenario(bytes: &[u8]) -> Result<Scenario, SchemaError> {
    let doc: ScenarioDoc =
        serde_json::from_slice(bytes).map_err(|e| SchemaError::Malformed(e.to_string()))?;
    let mut customers = Vec::with_capacity(doc.customers.len());
    for (k, &[x, y, demand]) in doc.customers.iter().enumerate() {
        let coord = |v: i64| {
            i32::try_from(v).map_err(|_| {
                SchemaError::Malformed(format!("customer {k}: coordinate {v} out of range"))
            })
        };
        let demand = u64::try_from(demand).map_err(|_| {
            SchemaError::Malformed(format!("customer {k}: negative demand {demand}"))
        })?;
        customers.push((Point::new(coord(x)?, coord(y)?), demand));
    }
    let instance = build_instance(Point::new(doc.depot[0], doc.depot[1]), &customers, doc.cap)?;
    let scenario = Scenario {
        instance,
        rival_bids: doc.rival_bids,
        seed: doc.seed,
    };
    scenario.validate()?;
    Ok(scenario)
}
