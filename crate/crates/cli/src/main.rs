//! `bundlebid`: generate scenarios, compute bids, clear auctions and report.
//!
//! Exit codes: 0 success, 2 bad input or configuration, 3 a computation
//! limit was exceeded, 4 the problem has no feasible solution.

mod bidfile;

use bidfile::{BidFile, Format};
use bundlebid_core::clustering::{ClusteringError, PmpConfig};
use bundlebid_core::enumeration::EnumerationError;
use bundlebid_core::evaluation::{OutcomeRecord, Report, ScenarioKey};
use bundlebid_core::instance_gen::GenError;
use bundlebid_core::model::{import_cvrp, load_scenario, save_scenario, Scenario};
use bundlebid_core::strategy::{generate_bids, StrategyError};
use bundlebid_core::tsp::TspError;
use bundlebid_core::wdp::WdpError;
use bundlebid_core::{
    generate_scenario, run_auction, run_campaign, CampaignConfig, GenConfig, PricingContext,
    Source, Strategy, StrategyConfig, SyntheticSpec,
};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "bundlebid",
    version,
    about = "Bundle bidding for combinatorial transport auctions"
)]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario: the first m customers of a source plus random rival bids.
    Gen(GenArgs),
    /// Compute the focal carrier's bids for a scenario.
    Bid(BidArgs),
    /// Clear an auction with the rival bids and a bid file.
    Clear(ClearArgs),
    /// Join outcome files into per-scenario metrics and aggregates.
    Report(ReportArgs),
    /// Generate scenarios and evaluate strategies in one process.
    Campaign(CampaignArgs),
}

#[derive(Args)]
struct SourceArgs {
    /// Christofides-style CVRP text file.
    #[arg(long, conflicts_with = "synthetic")]
    cvrp: Option<PathBuf>,
    /// Random CVRP-style source with this many customers.
    #[arg(long)]
    synthetic: Option<usize>,
}

#[derive(Args)]
struct RivalArgs {
    /// Vehicle capacity; taken from the source when omitted.
    #[arg(long)]
    cap: Option<u64>,
    /// Number of rival bids.
    #[arg(long, default_value_t = 1000)]
    rivals: usize,
    /// Lower end of the rival price factor.
    #[arg(long, default_value_t = 0.7)]
    jitter_min: f64,
    /// Upper end of the rival price factor.
    #[arg(long, default_value_t = 1.3)]
    jitter_max: f64,
    /// Rival carrier ids the bids are spread over.
    #[arg(long, default_value_t = 5)]
    rival_carriers: usize,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Number of tendered requests.
    #[arg(long)]
    m: usize,
    #[command(flatten)]
    rivals: RivalArgs,
    #[arg(long, env = "BUNDLEBID_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StrategyArgs {
    /// Fraction of synergy pairs kept by PSC, in (0, 1].
    #[arg(long, default_value_t = bundlebid_core::clustering::DEFAULT_ALPHA)]
    alpha: f64,
    /// Largest bundle priced by the exact TSP.
    #[arg(long, default_value_t = bundlebid_core::tsp::DEFAULT_HELD_KARP_LIMIT)]
    held_karp_limit: usize,
    /// Largest instance for which the p-median problem is solved exactly.
    #[arg(long, default_value_t = bundlebid_core::clustering::DEFAULT_PMP_EXACT_LIMIT)]
    pmp_exact_limit: usize,
    /// Record runtimes (makes output differ between runs).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct BidArgs {
    scenario: PathBuf,
    #[arg(long, value_parser = parse_strategy)]
    strategy: Strategy,
    #[command(flatten)]
    settings: StrategyArgs,
    /// Seed of the random strategies; the scenario's seed when omitted.
    #[arg(long, env = "BUNDLEBID_SEED")]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also write the clusters behind the bids as JSON.
    #[arg(long)]
    clusters: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClearArgs {
    scenario: PathBuf,
    bids: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Outcome files written by `clear`.
    #[arg(required = true)]
    outcomes: Vec<PathBuf>,
    /// Per-scenario table; standard output when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Aggregate statistics as JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Plot data: used sales potential per strategy, descending.
    #[arg(long)]
    series: Option<PathBuf>,
}

#[derive(Args)]
struct CampaignArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Number of scenarios.
    #[arg(long, default_value_t = 10)]
    scenarios: usize,
    /// Smallest request count; scenarios cycle from here to --m-max.
    #[arg(long, default_value_t = 15)]
    m_min: usize,
    #[arg(long, default_value_t = 15)]
    m_max: usize,
    #[command(flatten)]
    rivals: RivalArgs,
    /// Seed of the first scenario; scenario k uses seed + k.
    #[arg(long, env = "BUNDLEBID_SEED", default_value_t = 0)]
    seed: u64,
    /// Comma-separated strategies compared with EBBS.
    #[arg(long, value_delimiter = ',', value_parser = parse_strategy, default_value = "psc,cpmc,ran,rann")]
    strategies: Vec<Strategy>,
    #[command(flatten)]
    settings: StrategyArgs,
    /// Directory receiving report.csv, summary.json and series.csv.
    #[arg(long)]
    out_dir: PathBuf,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
        .map_err(|e: bundlebid_core::strategy::UnknownStrategy| e.to_string())
}

/// A failed command: message plus exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn limit(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }

    fn infeasible(message: impl Into<String>) -> Self {
        Failure {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<StrategyError> for Failure {
    fn from(e: StrategyError) -> Self {
        let message = e.to_string();
        match e {
            StrategyError::Pricing(TspError::SetTooLarge { .. })
            | StrategyError::Enumeration(EnumerationError::Pricing(TspError::SetTooLarge {
                ..
            })) => Failure::limit(message),
            StrategyError::Clustering(
                ClusteringError::Infeasible { .. }
                | ClusteringError::NoFeasibleAssignment { .. }
                | ClusteringError::NoFeasiblePair,
            ) => Failure::infeasible(message),
            _ => Failure::config(message),
        }
    }
}

impl From<WdpError> for Failure {
    fn from(e: WdpError) -> Self {
        match e {
            WdpError::Uncoverable { .. } => Failure::infeasible(e.to_string()),
            _ => Failure::config(e.to_string()),
        }
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Self {
        match e {
            GenError::Pricing(TspError::SetTooLarge { .. }) => Failure::limit(e.to_string()),
            _ => Failure::config(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, content: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, content)
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
}

fn emit(path: Option<&Path>, content: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write(p, content.as_bytes()),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    load_scenario(&read(path)?).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn source(args: &SourceArgs, seed: u64) -> Result<Source, Failure> {
    match (&args.cvrp, args.synthetic) {
        (Some(path), _) => {
            let text = String::from_utf8(read(path)?)
                .map_err(|_| Failure::config(format!("{} is not UTF-8 text", path.display())))?;
            let data = import_cvrp(&text)
                .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            Ok(Source::Cvrp(data))
        }
        (None, Some(customers)) => Ok(Source::Synthetic(SyntheticSpec::new(customers, seed))),
        (None, None) => Err(Failure::config("either --cvrp or --synthetic is required")),
    }
}

fn gen_config(m: usize, rivals: &RivalArgs, seed: u64) -> GenConfig {
    GenConfig {
        m,
        cap: rivals.cap,
        rival_bid_count: rivals.rivals,
        price_jitter: (rivals.jitter_min, rivals.jitter_max),
        rival_carriers: rivals.rival_carriers,
        seed,
    }
}

fn strategy_config(args: &StrategyArgs, seed: u64) -> Result<StrategyConfig, Failure> {
    if !(args.alpha > 0.0 && args.alpha <= 1.0) {
        return Err(Failure::config(format!(
            "--alpha must lie in (0, 1], got {}",
            args.alpha
        )));
    }
    Ok(StrategyConfig {
        alpha: args.alpha,
        seed,
        pmp: PmpConfig {
            exact_limit: args.pmp_exact_limit,
            ..PmpConfig::default()
        },
        held_karp_limit: args.held_karp_limit,
    })
}

fn cmd_gen(args: GenArgs) -> Result<(), Failure> {
    let src = source(&args.source, args.seed)?;
    let scenario = generate_scenario(&src, &gen_config(args.m, &args.rivals, args.seed))?;
    write(&args.out, &save_scenario(&scenario))?;
    println!(
        "seed {}: {} requests, capacity {}, {} rival bids -> {}",
        scenario.seed,
        scenario.instance.n(),
        scenario.instance.cap(),
        scenario.rival_bids.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_bid(args: BidArgs) -> Result<(), Failure> {
    let scenario = load(&args.scenario)?;
    let seed = args.seed.unwrap_or(scenario.seed);
    let config = strategy_config(&args.settings, seed)?;
    let pricing = PricingContext::with_limit(&scenario.instance, config.held_karp_limit);
    let start = Instant::now();
    let generated = generate_bids(&scenario.instance, &pricing, args.strategy, &config)?;
    let ms = start.elapsed().as_millis() as u64;
    if let Some(path) = &args.clusters {
        let clusters = generated.clusters.as_ref().ok_or_else(|| {
            Failure::config(format!("{} does not cluster requests", args.strategy))
        })?;
        let mut json = clusters.to_json();
        json.push('\n');
        write(path, json.as_bytes())?;
    }
    let file = BidFile {
        strategy: args.strategy,
        alpha: (args.strategy == Strategy::Psc).then_some(config.alpha),
        seed,
        ms: args.settings.timing.then_some(ms),
        bids: generated.bids,
    };
    emit(args.out.as_deref(), &file.render(args.format))?;
    if args.out.is_some() {
        println!("{}: {} bids", args.strategy, file.bids.len());
    }
    Ok(())
}

fn cmd_clear(args: ClearArgs) -> Result<(), Failure> {
    let scenario = load(&args.scenario)?;
    let text = String::from_utf8(read(&args.bids)?)
        .map_err(|_| Failure::config(format!("{} is not UTF-8 text", args.bids.display())))?;
    let file = BidFile::parse(&text)
        .map_err(|e| Failure::config(format!("{}: {e}", args.bids.display())))?;
    for (k, b) in file.bids.iter().enumerate() {
        if b.requests.is_empty() || !scenario.instance.is_elementary(b.requests) || b.price == 0 {
            return Err(Failure::config(format!(
                "{}: bid {k} on {} is not a valid elementary bid for this scenario",
                args.bids.display(),
                b.requests
            )));
        }
    }
    let mut outcome = run_auction(&scenario, file.strategy, &file.bids)?;
    outcome.runtime_ms = file.ms;
    let record = OutcomeRecord::new(
        ScenarioKey::of(&scenario),
        &outcome,
        file.alpha.unwrap_or_default(),
    );
    emit(args.out.as_deref(), &record.to_json())?;
    if args.out.is_some() {
        println!(
            "f_a {} f_b {} won {}/{}",
            outcome.f_a, outcome.f_b, outcome.bids_won, outcome.bids_submitted
        );
    }
    Ok(())
}

fn write_report(
    report: &Report,
    csv: Option<&Path>,
    summary: Option<&Path>,
    series: Option<&Path>,
) -> Result<(), Failure> {
    emit(csv, &report.to_csv())?;
    if let Some(p) = summary {
        write(p, report.summary_json().as_bytes())?;
    }
    if let Some(p) = series {
        write(p, report.kappa2_series().as_bytes())?;
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), Failure> {
    let mut records = Vec::new();
    for path in &args.outcomes {
        let text = String::from_utf8(read(path)?)
            .map_err(|_| Failure::config(format!("{} is not UTF-8 text", path.display())))?;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let record: OutcomeRecord = serde_json::from_str(line)
                .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            records.push(record);
        }
    }
    let report = Report::from_records(records).map_err(|e| Failure::config(e.to_string()))?;
    write_report(
        &report,
        args.csv.as_deref(),
        args.summary.as_deref(),
        args.series.as_deref(),
    )
}

fn cmd_campaign(args: CampaignArgs) -> Result<(), Failure> {
    if args.m_min > args.m_max {
        return Err(Failure::config("--m-min exceeds --m-max"));
    }
    let config = CampaignConfig {
        strategies: args.strategies.clone(),
        strategy: strategy_config(&args.settings, args.seed)?,
        timing: args.settings.timing,
    };
    let span = args.m_max - args.m_min + 1;
    let scenarios = (0..args.scenarios)
        .map(|k| {
            let seed = args.seed + k as u64;
            let src = source(&args.source, seed)?;
            Ok(generate_scenario(
                &src,
                &gen_config(args.m_min + k % span, &args.rivals, seed),
            )?)
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let report = run_campaign(&scenarios, &config);
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Failure::config(format!("cannot create {}: {e}", args.out_dir.display())))?;
    let dir = &args.out_dir;
    write_report(
        &report,
        Some(&dir.join("report.csv")),
        Some(&dir.join("summary.json")),
        Some(&dir.join("series.csv")),
    )?;
    for f in &report.failures {
        eprintln!("scenario {} failed: {}", f.seed, f.error);
    }
    println!(
        "{} rows, {} failed scenarios -> {}",
        report.rows.len(),
        report.failures.len(),
        dir.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| Failure::config(format!("cannot start {jobs} workers: {e}")))?;
    }
    match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Bid(a) => cmd_bid(a),
        Command::Clear(a) => cmd_clear(a),
        Command::Report(a) => cmd_report(a),
        Command::Campaign(a) => cmd_campaign(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
