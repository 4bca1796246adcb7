//! Domain types: locations, the focal carrier's instance, bundle bids and
//! persisted scenarios.

mod cvrp;
mod request_set;
mod scenario;

pub use cvrp::{import_cvrp, CvrpData, CvrpError};
pub use request_set::{Ids, RequestSet, MAX_REQUESTS};
pub use scenario::{load_scenario, save_scenario, Scenario, SchemaError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Carrier id used for every bid the focal carrier submits.
pub const FOCAL_CARRIER: &str = "c";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    pub x: i32,
    pub y: i32,
}

impl Point {
    pub const fn new(x: i32, y: i32) -> Self {
        Point { x, y }
    }
}

/// Euclidean distance rounded to the nearest integer, halves away from zero.
///
/// Exact for the whole `i32` coordinate range: the squared length is kept in
/// `u128` and rounding is decided with integer arithmetic. Since the squared
/// length is an integer, `sqrt` never lands exactly on a half.
pub fn distance(p: Point, q: Point) -> u64 {
    let dx = (p.x as i64 - q.x as i64).unsigned_abs() as u128;
    let dy = (p.y as i64 - q.y as i64).unsigned_abs() as u128;
    let sq = dx * dx + dy * dy;
    let root = sq.isqrt();
    // sqrt(sq) >= root + 1/2  <=>  sq > root^2 + root
    if sq > root * root + root {
        (root + 1) as u64
    } else {
        root as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Customer {
    pub id: usize,
    pub location: Point,
    pub demand: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("request {id} has demand {demand} exceeding vehicle capacity {cap}")]
    DemandExceedsCapacity { id: usize, demand: u64, cap: u64 },
    #[error("request {id} has zero demand")]
    ZeroDemand { id: usize },
    #[error("request {id} is located at the depot")]
    AtDepot { id: usize },
    #[error("vehicle capacity must be positive")]
    ZeroCapacity,
    #[error("{count} requests given, at most {MAX_REQUESTS} supported")]
    TooManyRequests { count: usize },
}

/// The focal carrier's view of a tender: one depot (which is also the
/// shipper's warehouse), one customer per request and a single vehicle type.
///
/// Immutable once built; node `0` of the distance matrix is the depot and
/// node `i + 1` is request `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    depot: Point,
    customers: Vec<Customer>,
    cap: u64,
    dist: Vec<u64>,
}

/// Builds an instance, assigning request ids in input order.
pub fn build_instance(
    depot: Point,
    customers: &[(Point, u64)],
    cap: u64,
) -> Result<Instance, InstanceError> {
    if customers.len() > MAX_REQUESTS {
        return Err(InstanceError::TooManyRequests {
            count: customers.len(),
        });
    }
    if cap == 0 {
        return Err(InstanceError::ZeroCapacity);
    }
    let mut list = Vec::with_capacity(customers.len());
    for (id, &(location, demand)) in customers.iter().enumerate() {
        if demand == 0 {
            return Err(InstanceError::ZeroDemand { id });
        }
        if demand > cap {
            return Err(InstanceError::DemandExceedsCapacity { id, demand, cap });
        }
        // Serving it would cost nothing, so its bids could not carry a positive price.
        if distance(depot, location) == 0 {
            return Err(InstanceError::AtDepot { id });
        }
        list.push(Customer {
            id,
            location,
            demand,
        });
    }

    let nodes: Vec<Point> = std::iter::once(depot)
        .chain(list.iter().map(|c| c.location))
        .collect();
    let size = nodes.len();
    let mut dist = vec![0u64; size * size];
    for a in 0..size {
        for b in (a + 1)..size {
            let d = distance(nodes[a], nodes[b]);
            dist[a * size + b] = d;
            dist[b * size + a] = d;
        }
    }
    Ok(Instance {
        depot,
        customers: list,
        cap,
        dist,
    })
}

impl Instance {
    pub fn depot(&self) -> Point {
        self.depot
    }

    pub fn customers(&self) -> &[Customer] {
        &self.customers
    }

    /// Number of tendered requests.
    pub fn n(&self) -> usize {
        self.customers.len()
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn demand(&self, id: usize) -> u64 {
        self.customers[id].demand
    }

    pub fn total_demand(&self) -> u64 {
        self.customers.iter().map(|c| c.demand).sum()
    }

    /// Panics when `set` names a request outside the tender.
    pub fn demand_of(&self, set: RequestSet) -> u64 {
        set.iter().map(|id| self.customers[id].demand).sum()
    }

    /// A set is elementary when it only names tendered requests and one
    /// vehicle can serve all of it.
    pub fn is_elementary(&self, set: RequestSet) -> bool {
        self.contains_set(set) && self.demand_of(set) <= self.cap
    }

    /// All tendered requests.
    pub fn requests(&self) -> RequestSet {
        RequestSet::full(self.n())
    }

    /// `set` only names tendered requests.
    pub fn contains_set(&self, set: RequestSet) -> bool {
        set.is_subset_of(self.requests())
    }

    /// Distance between matrix nodes (`0` = depot, `i + 1` = request `i`).
    #[inline]
    pub fn node_dist(&self, a: usize, b: usize) -> u64 {
        self.dist[a * (self.n() + 1) + b]
    }

    #[inline]
    pub fn depot_dist(&self, id: usize) -> u64 {
        self.node_dist(0, id + 1)
    }

    #[inline]
    pub fn request_dist(&self, i: usize, j: usize) -> u64 {
        self.node_dist(i + 1, j + 1)
    }

    /// Location of a matrix node.
    pub fn node_point(&self, node: usize) -> Point {
        if node == 0 {
            self.depot
        } else {
            self.customers[node - 1].location
        }
    }
}

/// An all-or-nothing offer to serve `requests` for `price`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bid {
    pub carrier: String,
    pub requests: RequestSet,
    pub price: u64,
}

impl Bid {
    pub fn new(carrier: impl Into<String>, requests: RequestSet, price: u64) -> Self {
        Bid {
            carrier: carrier.into(),
            requests,
            price,
        }
    }

    pub fn focal(requests: RequestSet, price: u64) -> Self {
        Bid::new(FOCAL_CARRIER, requests, price)
    }

    pub fn is_focal(&self) -> bool {
        self.carrier == FOCAL_CARRIER
    }
}
