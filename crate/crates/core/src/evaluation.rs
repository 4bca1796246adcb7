//! Auction simulation and the four performance criteria.
//!
//! For a strategy φ compared with the exact strategy E on one scenario:
//!
//! * κ1 = (f_a^φ − f_a^E) / f_a^E, the relative increase of the auctioneer's cost;
//! * κ2 = (1 + (f_b^φ − f_b^E) / f_b^E) · 100, the used sales potential;
//!   undefined when the exact strategy wins nothing;
//! * κ3 = 100 · won / submitted, the bid success rate;
//! * κ4 = 100 · submitted^φ / submitted^E, the relative number of bids.
//!
//! All of them are computed in a [`Scalar`]; reports use exact big rationals
//! and round only when printing.

use crate::model::Bid;
use crate::model::{Scenario, FOCAL_CARRIER};
use crate::scalar::Scalar;
use crate::strategy::{generate_bids, Strategy, StrategyConfig, StrategyError};
use crate::tsp::PricingContext;
use crate::wdp::{solve_wdp, WdpError, WdpSolution};
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;
use thiserror::Error;

/// Result of one auction in which the focal carrier used one strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuctionOutcome {
    pub strategy: Strategy,
    pub bids_submitted: usize,
    pub bids_won: usize,
    /// Auctioneer's total procurement cost.
    pub f_a: u64,
    /// Focal carrier's revenue.
    pub f_b: u64,
    /// Bid generation time, when measured.
    pub runtime_ms: Option<u64>,
    /// Winning bids, indices into rival bids followed by focal bids.
    pub solution: WdpSolution,
}

/// Clears rival bids together with the focal carrier's bids.
///
/// Rival bids come first in the combined list, so among equal-cost optima
/// the tie-break settles the rival part before the focal part.
pub fn run_auction(
    scenario: &Scenario,
    strategy: Strategy,
    focal_bids: &[Bid],
) -> Result<AuctionOutcome, WdpError> {
    let rivals = scenario.rival_bids.len();
    let mut all = Vec::with_capacity(rivals + focal_bids.len());
    all.extend_from_slice(&scenario.rival_bids);
    all.extend(focal_bids.iter().map(|b| Bid {
        carrier: FOCAL_CARRIER.to_string(),
        ..b.clone()
    }));
    let solution = solve_wdp(scenario.instance.n(), &all)?;
    let won: Vec<usize> = solution
        .winning
        .iter()
        .copied()
        .filter(|&i| i >= rivals)
        .collect();
    Ok(AuctionOutcome {
        strategy,
        bids_submitted: focal_bids.len(),
        bids_won: won.len(),
        f_a: solution.total_cost,
        f_b: won.iter().map(|&i| all[i].price).sum(),
        runtime_ms: None,
        solution,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics<T> {
    /// `None` only when the exact clearing costs nothing (empty tender).
    pub kappa1: Option<T>,
    /// `None` when the exact strategy wins nothing.
    pub kappa2: Option<T>,
    /// Zero when no bid was submitted.
    pub kappa3: T,
    /// Zero when the exact strategy submits no bid.
    pub kappa4: T,
}

fn as_i64(v: u64) -> i64 {
    i64::try_from(v).expect("value fits in i64")
}

pub fn compute_metrics<T: Scalar>(phi: &AuctionOutcome, ebbs: &AuctionOutcome) -> Metrics<T> {
    let hundred = T::from_int(100);
    let percent = |num: u64, den: u64| -> T {
        if den == 0 {
            T::zero()
        } else {
            T::ratio(as_i64(num), as_i64(den)) * hundred.clone()
        }
    };
    let kappa1 =
        (ebbs.f_a != 0).then(|| T::ratio(as_i64(phi.f_a) - as_i64(ebbs.f_a), as_i64(ebbs.f_a)));
    let kappa2 = (ebbs.f_b != 0).then(|| {
        (T::one() + T::ratio(as_i64(phi.f_b) - as_i64(ebbs.f_b), as_i64(ebbs.f_b)))
            * hundred.clone()
    });
    Metrics {
        kappa1,
        kappa2,
        kappa3: percent(phi.bids_won as u64, phi.bids_submitted as u64),
        kappa4: percent(phi.bids_submitted as u64, ebbs.bids_submitted as u64),
    }
}

/// Order statistics of one metric column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary<T> {
    pub count: usize,
    pub min: T,
    pub q1: T,
    pub median: T,
    pub q3: T,
    pub max: T,
    pub mean: T,
}

/// Quartiles by linear interpolation between order statistics at rank
/// `(count - 1) * k / 4`. `None` for an empty column.
pub fn summarize<T: Scalar>(values: &[T]) -> Option<Summary<T>> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("metrics are comparable"));
    let n = v.len();
    let quantile = |k: usize| -> T {
        let pos = (n - 1) * k;
        let (i, rem) = (pos / 4, pos % 4);
        if rem == 0 {
            v[i].clone()
        } else {
            let frac = T::ratio(rem as i64, 4);
            v[i].clone() + frac * (v[i + 1].clone() - v[i].clone())
        }
    };
    let total = v.iter().cloned().fold(T::zero(), |acc, x| acc + x);
    Some(Summary {
        count: n,
        min: v[0].clone(),
        q1: quantile(1),
        median: quantile(2),
        q3: quantile(3),
        max: v[n - 1].clone(),
        mean: total / T::from_int(n as i64),
    })
}

/// Identifies a scenario within a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ScenarioKey {
    pub seed: u64,
    pub n: usize,
    pub cap: u64,
}

impl ScenarioKey {
    pub fn of(scenario: &Scenario) -> Self {
        ScenarioKey {
            seed: scenario.seed,
            n: scenario.instance.n(),
            cap: scenario.instance.cap(),
        }
    }
}

/// One strategy's outcome as exchanged between pipeline stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    #[serde(flatten)]
    pub key: ScenarioKey,
    pub strategy: Strategy,
    /// Only meaningful for PSC.
    pub alpha: Option<f64>,
    pub bids: usize,
    pub won: usize,
    pub f_a: u64,
    pub f_b: u64,
    pub ms: Option<u64>,
    pub winning: Vec<usize>,
    pub per_carrier: BTreeMap<String, u64>,
}

impl OutcomeRecord {
    pub fn new(key: ScenarioKey, outcome: &AuctionOutcome, alpha: f64) -> Self {
        OutcomeRecord {
            key,
            strategy: outcome.strategy,
            alpha: (outcome.strategy == Strategy::Psc).then_some(alpha),
            bids: outcome.bids_submitted,
            won: outcome.bids_won,
            f_a: outcome.f_a,
            f_b: outcome.f_b,
            ms: outcome.runtime_ms,
            winning: outcome.solution.winning.clone(),
            per_carrier: outcome.solution.per_carrier_revenue.clone(),
        }
    }

    fn outcome(&self) -> AuctionOutcome {
        AuctionOutcome {
            strategy: self.strategy,
            bids_submitted: self.bids,
            bids_won: self.won,
            f_a: self.f_a,
            f_b: self.f_b,
            runtime_ms: self.ms,
            solution: WdpSolution {
                winning: self.winning.clone(),
                total_cost: self.f_a,
                per_carrier_revenue: self.per_carrier.clone(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("outcome serializes");
        s.push('\n');
        s
    }
}

pub type MetricsRecord = Metrics<BigRational>;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub record: OutcomeRecord,
    pub metrics: MetricsRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FailedScenario {
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    /// Scenario order, then strategy order.
    pub rows: Vec<ReportRow>,
    pub failures: Vec<FailedScenario>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReportError {
    #[error("scenario seed {0} has no ebbs outcome to compare against")]
    MissingBaseline(u64),
    #[error("scenario seed {seed} has two {strategy} outcomes")]
    Duplicate { seed: u64, strategy: Strategy },
}

fn fmt_metric(v: Option<&BigRational>) -> String {
    match v {
        Some(v) => format!("{:.4}", v.to_f64_lossy()),
        None => "NA".to_string(),
    }
}

/// Rounds for presentation.
fn present(v: &BigRational) -> f64 {
    (v.to_f64_lossy() * 1e6).round() / 1e6
}

#[derive(Serialize)]
struct SummaryDoc {
    count: usize,
    min: f64,
    q1: f64,
    median: f64,
    q3: f64,
    max: f64,
    mean: f64,
}

impl From<Summary<BigRational>> for SummaryDoc {
    fn from(s: Summary<BigRational>) -> Self {
        SummaryDoc {
            count: s.count,
            min: present(&s.min),
            q1: present(&s.q1),
            median: present(&s.median),
            q3: present(&s.q3),
            max: present(&s.max),
            mean: present(&s.mean),
        }
    }
}

#[derive(Serialize)]
struct StrategySummaryDoc {
    strategy: Strategy,
    scenarios: usize,
    kappa1: Option<SummaryDoc>,
    kappa2: Option<SummaryDoc>,
    /// Scenarios left out of κ2 because the exact strategy won nothing.
    kappa2_excluded: usize,
    kappa3: Option<SummaryDoc>,
    kappa4: Option<SummaryDoc>,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    strategies: Vec<StrategySummaryDoc>,
    failures: &'a [FailedScenario],
}

impl Report {
    /// Joins outcomes, grouped by scenario, into metric rows. Every scenario
    /// needs an EBBS outcome; scenarios appear in key order and strategies in
    /// [`Strategy::ALL`] order.
    pub fn from_records(records: Vec<OutcomeRecord>) -> Result<Report, ReportError> {
        let mut grouped: BTreeMap<ScenarioKey, BTreeMap<Strategy, OutcomeRecord>> = BTreeMap::new();
        for r in records {
            let seed = r.key.seed;
            let strategy = r.strategy;
            if grouped
                .entry(r.key)
                .or_default()
                .insert(strategy, r)
                .is_some()
            {
                return Err(ReportError::Duplicate { seed, strategy });
            }
        }
        let mut rows = Vec::new();
        for (key, by_strategy) in grouped {
            let ebbs = by_strategy
                .get(&Strategy::Ebbs)
                .ok_or(ReportError::MissingBaseline(key.seed))?
                .outcome();
            for record in by_strategy.into_values() {
                let metrics = compute_metrics(&record.outcome(), &ebbs);
                rows.push(ReportRow { record, metrics });
            }
        }
        Ok(Report {
            rows,
            failures: Vec::new(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,n,cap,strategy,alpha,bids,won,f_a,f_b,k1,k2,k3,k4,ms\n");
        for row in &self.rows {
            let r = &row.record;
            let m = &row.metrics;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.key.seed,
                r.key.n,
                r.key.cap,
                r.strategy,
                r.alpha.map_or(String::new(), |a| a.to_string()),
                r.bids,
                r.won,
                r.f_a,
                r.f_b,
                fmt_metric(m.kappa1.as_ref()),
                fmt_metric(m.kappa2.as_ref()),
                fmt_metric(Some(&m.kappa3)),
                fmt_metric(Some(&m.kappa4)),
                r.ms.map_or("-".to_string(), |ms| ms.to_string()),
            )
            .expect("writing to a String");
        }
        out
    }

    fn rows_of(&self, strategy: Strategy) -> impl Iterator<Item = &ReportRow> {
        self.rows
            .iter()
            .filter(move |r| r.record.strategy == strategy)
    }

    pub fn strategies(&self) -> Vec<Strategy> {
        Strategy::ALL
            .into_iter()
            .filter(|&s| self.rows_of(s).next().is_some())
            .collect()
    }

    /// Exact summary of one metric column for one strategy, NA values left out.
    pub fn summary(
        &self,
        strategy: Strategy,
        column: impl Fn(&MetricsRecord) -> Option<BigRational>,
    ) -> Option<Summary<BigRational>> {
        let values: Vec<BigRational> = self
            .rows_of(strategy)
            .filter_map(|r| column(&r.metrics))
            .collect();
        summarize(&values)
    }

    pub fn mean_kappa2(&self, strategy: Strategy) -> Option<BigRational> {
        self.summary(strategy, |m| m.kappa2.clone()).map(|s| s.mean)
    }

    pub fn mean_kappa4(&self, strategy: Strategy) -> Option<BigRational> {
        self.summary(strategy, |m| Some(m.kappa4.clone()))
            .map(|s| s.mean)
    }

    /// Aggregate statistics per strategy as JSON.
    pub fn summary_json(&self) -> String {
        let strategies = self
            .strategies()
            .into_iter()
            .map(|s| StrategySummaryDoc {
                strategy: s,
                scenarios: self.rows_of(s).count(),
                kappa1: self.summary(s, |m| m.kappa1.clone()).map(Into::into),
                kappa2: self.summary(s, |m| m.kappa2.clone()).map(Into::into),
                kappa2_excluded: self
                    .rows_of(s)
                    .filter(|r| r.metrics.kappa2.is_none())
                    .count(),
                kappa3: self.summary(s, |m| Some(m.kappa3.clone())).map(Into::into),
                kappa4: self.summary(s, |m| Some(m.kappa4.clone())).map(Into::into),
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&ReportDoc {
            strategies,
            failures: &self.failures,
        })
        .expect("summary serializes");
        s.push('\n');
        s
    }

    /// Plot data: κ2 per strategy in descending order, one line per point.
    pub fn kappa2_series(&self) -> String {
        let mut out = String::from("strategy,rank,k2\n");
        for s in self.strategies() {
            let mut values: Vec<BigRational> = self
                .rows_of(s)
                .filter_map(|r| r.metrics.kappa2.clone())
                .collect();
            values.sort_by(|a, b| b.cmp(a));
            for (rank, v) in values.iter().enumerate() {
                writeln!(out, "{s},{},{}", rank + 1, fmt_metric(Some(v)))
                    .expect("writing to a String");
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub strategies: Vec<Strategy>,
    /// Shared settings; the random strategies and the p-median restarts are
    /// seeded with each scenario's own seed instead of `strategy.seed`.
    pub strategy: StrategyConfig,
    /// Record bid generation times.
    pub timing: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CampaignError {
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Clearing(#[from] WdpError),
}

/// Generates bids with `strategy` and clears them against the rivals.
pub fn evaluate_strategy(
    scenario: &Scenario,
    pricing: &PricingContext<'_>,
    strategy: Strategy,
    config: &StrategyConfig,
    timing: bool,
) -> Result<(AuctionOutcome, Vec<Bid>), CampaignError> {
    let start = Instant::now();
    let bids = generate_bids(&scenario.instance, pricing, strategy, config)?.bids;
    let ms = start.elapsed().as_millis() as u64;
    let mut outcome = run_auction(scenario, strategy, &bids)?;
    outcome.runtime_ms = timing.then_some(ms);
    Ok((outcome, bids))
}

fn scenario_records(
    scenario: &Scenario,
    config: &CampaignConfig,
) -> Result<Vec<OutcomeRecord>, CampaignError> {
    let pricing = PricingContext::with_limit(&scenario.instance, config.strategy.held_karp_limit);
    let key = ScenarioKey::of(scenario);
    let settings = StrategyConfig {
        seed: scenario.seed,
        ..config.strategy
    };
    let mut strategies = vec![Strategy::Ebbs];
    strategies.extend(
        config
            .strategies
            .iter()
            .copied()
            .filter(|&s| s != Strategy::Ebbs),
    );
    strategies
        .into_iter()
        .map(|s| {
            let (outcome, _) = evaluate_strategy(scenario, &pricing, s, &settings, config.timing)?;
            Ok(OutcomeRecord::new(key, &outcome, config.strategy.alpha))
        })
        .collect()
}

/// Runs EBBS and every configured strategy on each scenario, scenarios in
/// parallel. A failing scenario is recorded and skipped.
pub fn run_campaign(scenarios: &[Scenario], config: &CampaignConfig) -> Report {
    let results: Vec<_> = scenarios
        .par_iter()
        .map(|s| (s.seed, scenario_records(s, config)))
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (seed, result) in results {
        match result {
            Ok(r) => records.extend(r),
            Err(e) => failures.push(FailedScenario {
                seed,
                error: e.to_string(),
            }),
        }
    }
    let mut report =
        Report::from_records(records).expect("every scenario has one baseline per strategy");
    report.failures = failures;
    report
}
