//! Capacitated p-median clustering.
//!
//! Pick `p` requests as medians and assign every request to one median so
//! that each median's assigned demand fits one vehicle, minimising the sum of
//! request-to-median distances (taken from the instance matrix). Each median
//! serves itself.
//!
//! Up to [`DEFAULT_PMP_EXACT_LIMIT`] requests the problem is solved exactly:
//! branch-and-bound over median subsets in lexicographic order, each leaf
//! solved by an exact depth-first capacitated assignment. Larger instances
//! use a seeded local search and the result is flagged as non-exact.

use super::{ClusterOrigin, ClusterSet, ClusteringError};
use crate::model::{Instance, RequestSet};
use crate::rng::{self, Domain};
use rand::seq::index::sample;

pub const DEFAULT_PMP_EXACT_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PmpConfig {
    /// Largest instance solved exactly.
    pub exact_limit: usize,
    /// Seed for the random restarts of the local search.
    pub seed: u64,
    /// Random restarts on top of the deterministic seeding.
    pub restarts: usize,
    /// Median-swap iterations per start.
    pub max_iterations: usize,
}

impl Default for PmpConfig {
    fn default() -> Self {
        PmpConfig {
            exact_limit: DEFAULT_PMP_EXACT_LIMIT,
            seed: 0,
            restarts: 4,
            max_iterations: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PmpSolution {
    /// Ascending request ids.
    pub medians: Vec<usize>,
    /// Median of every request, indexed by request id.
    pub assignment: Vec<usize>,
    pub objective: u64,
    /// `false` when produced by the local search.
    pub exact: bool,
}

impl PmpSolution {
    /// One request set per median, in median order.
    pub fn clusters(&self) -> Vec<RequestSet> {
        self.medians
            .iter()
            .map(|&m| {
                self.assignment
                    .iter()
                    .enumerate()
                    .filter(|&(_, &a)| a == m)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect()
    }
}

/// `ceil(total demand / cap)`.
pub fn min_medians(instance: &Instance) -> usize {
    instance.total_demand().div_ceil(instance.cap()) as usize
}

pub fn solve_pmp(
    instance: &Instance,
    p: usize,
    config: &PmpConfig,
) -> Result<PmpSolution, ClusteringError> {
    let n = instance.n();
    let total = instance.total_demand();
    if (p as u128) * (instance.cap() as u128) < total as u128 || p > n {
        return Err(ClusteringError::Infeasible {
            p,
            n,
            total_demand: total,
            cap: instance.cap(),
        });
    }
    if n == 0 {
        return Ok(PmpSolution {
            medians: vec![],
            assignment: vec![],
            objective: 0,
            exact: true,
        });
    }
    let solution = if n <= config.exact_limit {
        solve_exact(instance, p)
    } else {
        solve_heuristic(instance, p, config)
    };
    solution.ok_or(ClusteringError::NoFeasibleAssignment { p })
}

/// Partition of the requests from a p-median solution with the smallest
/// feasible `p >= ceil(total demand / cap)`.
pub fn cpmc_clusters(
    instance: &Instance,
    config: &PmpConfig,
) -> Result<ClusterSet, ClusteringError> {
    let mut p = min_medians(instance);
    loop {
        match solve_pmp(instance, p, config) {
            Ok(sol) => {
                let mut clusters = sol.clusters();
                clusters.sort_by_key(|c| c.mask());
                return Ok(ClusterSet {
                    clusters,
                    origin: ClusterOrigin::Cpmc,
                });
            }
            // The demand bound is not always packable; one more median may be.
            Err(ClusteringError::NoFeasibleAssignment { .. }) if p < instance.n() => p += 1,
            Err(e) => return Err(e),
        }
    }
}

fn objective(instance: &Instance, assignment: &[usize]) -> u64 {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &m)| instance.request_dist(i, m))
        .sum()
}

// ---------------------------------------------------------------- exact

struct ExactSearch<'a> {
    instance: &'a Instance,
    p: usize,
    best: Option<PmpSolution>,
}

impl ExactSearch<'_> {
    fn upper(&self) -> u64 {
        self.best.as_ref().map_or(u64::MAX, |b| b.objective)
    }

    /// Uncapacitated assignment cost when medians may come from `chosen` or
    /// from candidates `from..n`: a bound for every completion.
    fn bound(&self, chosen: &[usize], from: usize) -> u64 {
        let n = self.instance.n();
        (0..n)
            .map(|i| {
                chosen
                    .iter()
                    .copied()
                    .chain(from..n)
                    .map(|m| self.instance.request_dist(i, m))
                    .min()
                    .unwrap_or(u64::MAX)
            })
            .fold(0u64, |acc, d| acc.saturating_add(d))
    }

    fn choose(&mut self, from: usize, chosen: &mut Vec<usize>) {
        let n = self.instance.n();
        if chosen.len() == self.p {
            if self.bound(chosen, n) >= self.upper() {
                return;
            }
            if let Some((obj, assignment)) = assign_exact(self.instance, chosen, self.upper()) {
                self.best = Some(PmpSolution {
                    medians: chosen.clone(),
                    assignment,
                    objective: obj,
                    exact: true,
                });
            }
            return;
        }
        let needed = self.p - chosen.len();
        for c in from..=(n - needed) {
            chosen.push(c);
            // Ties never replace the incumbent, so the first optimum found
            // in lexicographic order is kept.
            if self.bound(chosen, c + 1) < self.upper() {
                self.choose(c + 1, chosen);
            }
            chosen.pop();
        }
    }
}

fn solve_exact(instance: &Instance, p: usize) -> Option<PmpSolution> {
    let mut search = ExactSearch {
        instance,
        p,
        best: None,
    };
    search.choose(0, &mut Vec::with_capacity(p));
    search.best
}

/// Optimal capacitated assignment to fixed medians with cost `< upper`.
fn assign_exact(instance: &Instance, medians: &[usize], upper: u64) -> Option<(u64, Vec<usize>)> {
    let n = instance.n();
    let cap = instance.cap();
    let mut load: Vec<u64> = medians.iter().map(|&m| instance.demand(m)).collect();
    let mut assignment = vec![usize::MAX; n];
    for &m in medians {
        assignment[m] = m;
    }
    let mut points: Vec<usize> = (0..n).filter(|i| !medians.contains(i)).collect();
    points.sort_by(|&a, &b| instance.demand(b).cmp(&instance.demand(a)).then(a.cmp(&b)));
    // Candidate medians per point, nearest first.
    let options: Vec<Vec<usize>> = points
        .iter()
        .map(|&i| {
            let mut opts: Vec<usize> = (0..medians.len()).collect();
            opts.sort_by_key(|&k| (instance.request_dist(i, medians[k]), medians[k]));
            opts
        })
        .collect();
    let mut tail = vec![0u64; points.len() + 1];
    for k in (0..points.len()).rev() {
        tail[k] = tail[k + 1] + instance.request_dist(points[k], medians[options[k][0]]);
    }

    struct Dfs<'a> {
        instance: &'a Instance,
        medians: &'a [usize],
        points: &'a [usize],
        options: &'a [Vec<usize>],
        tail: &'a [u64],
        cap: u64,
        best: u64,
        best_assignment: Option<Vec<usize>>,
    }
    impl Dfs<'_> {
        fn go(&mut self, k: usize, cost: u64, load: &mut [u64], assignment: &mut [usize]) {
            if cost + self.tail[k] >= self.best {
                return;
            }
            if k == self.points.len() {
                self.best = cost;
                self.best_assignment = Some(assignment.to_vec());
                return;
            }
            let i = self.points[k];
            let d = self.instance.demand(i);
            for &slot in &self.options[k] {
                if load[slot] + d > self.cap {
                    continue;
                }
                let m = self.medians[slot];
                load[slot] += d;
                assignment[i] = m;
                self.go(
                    k + 1,
                    cost + self.instance.request_dist(i, m),
                    load,
                    assignment,
                );
                load[slot] -= d;
            }
            assignment[i] = usize::MAX;
        }
    }

    let mut dfs = Dfs {
        instance,
        medians,
        points: &points,
        options: &options,
        tail: &tail,
        cap,
        best: upper,
        best_assignment: None,
    };
    dfs.go(0, 0, &mut load, &mut assignment);
    dfs.best_assignment.map(|a| (dfs.best, a))
}

// ------------------------------------------------------------ heuristic

/// Demand-weighted 1-median first, then repeatedly the request with the
/// largest `demand * distance to nearest median`.
fn seed_medians(instance: &Instance, p: usize) -> Vec<usize> {
    let n = instance.n();
    let weighted = |j: usize| -> u128 {
        (0..n)
            .map(|i| instance.demand(i) as u128 * instance.request_dist(i, j) as u128)
            .sum()
    };
    let first = (0..n).min_by_key(|&j| (weighted(j), j)).expect("n > 0");
    let mut medians = vec![first];
    while medians.len() < p {
        let next = (0..n)
            .filter(|j| !medians.contains(j))
            .max_by_key(|&j| {
                let near = medians
                    .iter()
                    .map(|&m| instance.request_dist(j, m))
                    .min()
                    .unwrap();
                (
                    instance.demand(j) as u128 * near as u128,
                    std::cmp::Reverse(j),
                )
            })
            .expect("p <= n");
        medians.push(next);
    }
    medians.sort_unstable();
    medians
}

/// Greedy capacitated assignment followed by best-improvement moves and swaps.
fn assign_heuristic(instance: &Instance, medians: &[usize]) -> Option<(u64, Vec<usize>)> {
    let n = instance.n();
    let nearest = |i: usize| {
        let mut d: Vec<u64> = medians
            .iter()
            .map(|&m| instance.request_dist(i, m))
            .collect();
        d.sort_unstable();
        (d[0], d.get(1).copied().unwrap_or(d[0]))
    };
    let others: Vec<usize> = (0..n).filter(|i| !medians.contains(i)).collect();

    let mut by_regret = others.clone();
    by_regret.sort_by_key(|&i| {
        let (a, b) = nearest(i);
        (std::cmp::Reverse(b - a), i)
    });
    let mut by_demand = others.clone();
    by_demand.sort_by_key(|&i| (std::cmp::Reverse(instance.demand(i)), i));

    let mut best: Option<(u64, Vec<usize>)> = None;
    for order in [by_regret, by_demand] {
        let Some(mut assignment) = greedy_assign(instance, medians, &order) else {
            continue;
        };
        improve_assignment(instance, medians, &mut assignment);
        let obj = objective(instance, &assignment);
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, assignment));
        }
    }
    best
}

fn greedy_assign(instance: &Instance, medians: &[usize], order: &[usize]) -> Option<Vec<usize>> {
    let mut assignment = vec![usize::MAX; instance.n()];
    let mut load: Vec<u64> = medians.iter().map(|&m| instance.demand(m)).collect();
    for &m in medians {
        assignment[m] = m;
    }
    for &i in order {
        let d = instance.demand(i);
        let slot = (0..medians.len())
            .filter(|&k| load[k] + d <= instance.cap())
            .min_by_key(|&k| (instance.request_dist(i, medians[k]), medians[k]))?;
        load[slot] += d;
        assignment[i] = medians[slot];
    }
    Some(assignment)
}

fn improve_assignment(instance: &Instance, medians: &[usize], assignment: &mut [usize]) {
    let cap = instance.cap();
    let slot_of = |m: usize| {
        medians
            .iter()
            .position(|&x| x == m)
            .expect("assigned to a median")
    };
    let mut load = vec![0u64; medians.len()];
    for (i, &m) in assignment.iter().enumerate() {
        load[slot_of(m)] += instance.demand(i);
    }
    let others: Vec<usize> = (0..instance.n()).filter(|i| !medians.contains(i)).collect();
    let dist = |i: usize, m: usize| instance.request_dist(i, m) as i128;

    enum Move {
        Shift(usize, usize),
        Swap(usize, usize),
    }
    loop {
        let mut best_delta = 0i128;
        let mut best_move = None;
        for &i in &others {
            let from = assignment[i];
            for (slot, &m) in medians.iter().enumerate() {
                if m == from || load[slot] + instance.demand(i) > cap {
                    continue;
                }
                let delta = dist(i, m) - dist(i, from);
                if delta < best_delta {
                    best_delta = delta;
                    best_move = Some(Move::Shift(i, m));
                }
            }
        }
        for (a, &i) in others.iter().enumerate() {
            for &j in &others[a + 1..] {
                let (mi, mj) = (assignment[i], assignment[j]);
                if mi == mj {
                    continue;
                }
                let (di, dj) = (instance.demand(i), instance.demand(j));
                if load[slot_of(mi)] - di + dj > cap || load[slot_of(mj)] - dj + di > cap {
                    continue;
                }
                let delta = dist(i, mj) + dist(j, mi) - dist(i, mi) - dist(j, mj);
                if delta < best_delta {
                    best_delta = delta;
                    best_move = Some(Move::Swap(i, j));
                }
            }
        }
        match best_move {
            None => break,
            Some(Move::Shift(i, m)) => {
                load[slot_of(assignment[i])] -= instance.demand(i);
                load[slot_of(m)] += instance.demand(i);
                assignment[i] = m;
            }
            Some(Move::Swap(i, j)) => {
                let (mi, mj) = (assignment[i], assignment[j]);
                let (di, dj) = (instance.demand(i), instance.demand(j));
                load[slot_of(mi)] = load[slot_of(mi)] - di + dj;
                load[slot_of(mj)] = load[slot_of(mj)] - dj + di;
                assignment[i] = mj;
                assignment[j] = mi;
            }
        }
    }
}

type Candidate = (u64, Vec<usize>, Vec<usize>);

fn better(a: &Candidate, b: &Option<Candidate>) -> bool {
    match b {
        None => true,
        Some(b) => (a.0, &a.1) < (b.0, &b.1),
    }
}

/// Best-improvement median swaps from `start`.
fn local_search(
    instance: &Instance,
    start: Vec<usize>,
    max_iterations: usize,
) -> Option<Candidate> {
    let n = instance.n();
    let eval = |medians: Vec<usize>| {
        assign_heuristic(instance, &medians).map(|(obj, a)| (obj, medians, a))
    };
    let mut medians = start;
    let mut current = eval(medians.clone());
    for _ in 0..max_iterations {
        let mut best: Option<Candidate> = None;
        for out in 0..medians.len() {
            for j in (0..n).filter(|j| !medians.contains(j)) {
                let mut trial = medians.clone();
                trial[out] = j;
                trial.sort_unstable();
                if let Some(c) = eval(trial) {
                    if better(&c, &best) {
                        best = Some(c);
                    }
                }
            }
        }
        match best {
            Some(c) if better(&c, &current) => {
                medians = c.1.clone();
                current = Some(c);
            }
            _ => break,
        }
    }
    current
}

fn solve_heuristic(instance: &Instance, p: usize, config: &PmpConfig) -> Option<PmpSolution> {
    let n = instance.n();
    let mut starts = vec![seed_medians(instance, p)];
    for r in 0..config.restarts {
        let mut rng = rng::stream(config.seed, Domain::MedianRestarts, r as u64);
        let mut medians = sample(&mut rng, n, p).into_vec();
        medians.sort_unstable();
        starts.push(medians);
    }
    let mut best: Option<Candidate> = None;
    for start in starts {
        if let Some(c) = local_search(instance, start, config.max_iterations) {
            if better(&c, &best) {
                best = Some(c);
            }
        }
    }
    best.map(|(objective, medians, assignment)| PmpSolution {
        medians,
        assignment,
        objective,
        exact: false,
    })
}
