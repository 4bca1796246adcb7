//! The `bundlebid` binary driven as a user would.

use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn bundlebid(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bundlebid"))
        .current_dir(dir)
        .env_remove("BUNDLEBID_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = bundlebid(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

const STRATEGIES: [&str; 5] = ["ebbs", "psc", "cpmc", "ran", "rann"];

/// gen, bid, clear and report for one scenario.
fn pipeline(dir: &Path, seed: &str) {
    ok(
        dir,
        &[
            "gen",
            "--synthetic",
            "10",
            "--m",
            "10",
            "--cap",
            "70",
            "--rivals",
            "150",
            "--seed",
            seed,
            "--out",
            "s.json",
        ],
    );
    let mut outcomes = Vec::new();
    for s in STRATEGIES {
        let bids = format!("{s}.csv");
        let outcome = format!("{s}.out.json");
        ok(dir, &["bid", "s.json", "--strategy", s, "--out", &bids]);
        ok(dir, &["clear", "s.json", &bids, "--out", &outcome]);
        outcomes.push(outcome);
    }
    let mut args = vec!["report"];
    args.extend(outcomes.iter().map(String::as_str));
    args.extend([
        "--csv",
        "report.csv",
        "--summary",
        "summary.json",
        "--series",
        "series.csv",
    ]);
    ok(dir, &args);
}

#[test]
fn pipeline_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    pipeline(a.path(), "5");
    pipeline(b.path(), "5");
    for name in [
        "s.json",
        "psc.csv",
        "cpmc.out.json",
        "report.csv",
        "summary.json",
        "series.csv",
    ] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
}

#[test]
fn pipeline_matches_campaign() {
    let dir = TempDir::new().unwrap();
    pipeline(dir.path(), "9");
    ok(
        dir.path(),
        &[
            "campaign",
            "--synthetic",
            "10",
            "--scenarios",
            "1",
            "--m-min",
            "10",
            "--m-max",
            "10",
            "--cap",
            "70",
            "--rivals",
            "150",
            "--seed",
            "9",
            "--out-dir",
            "camp",
        ],
    );
    assert_eq!(
        read(dir.path(), "report.csv"),
        read(dir.path(), "camp/report.csv")
    );
    assert_eq!(
        read(dir.path(), "summary.json"),
        read(dir.path(), "camp/summary.json")
    );
    assert_eq!(
        read(dir.path(), "series.csv"),
        read(dir.path(), "camp/series.csv")
    );
}

#[test]
fn report_has_one_row_per_strategy() {
    let dir = TempDir::new().unwrap();
    pipeline(dir.path(), "1");
    let csv = read(dir.path(), "report.csv");
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("seed,n,cap,strategy,alpha,bids,won,f_a,f_b,k1,k2,k3,k4,ms")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), STRATEGIES.len());
    assert!(rows[0].contains(",ebbs,"));
}

#[test]
fn json_bids_clear_like_csv_bids() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "gen",
            "--synthetic",
            "8",
            "--m",
            "8",
            "--cap",
            "60",
            "--rivals",
            "80",
            "--out",
            "s.json",
        ],
    );
    ok(d, &["bid", "s.json", "--strategy", "psc", "--out", "b.csv"]);
    ok(
        d,
        &[
            "bid",
            "s.json",
            "--strategy",
            "psc",
            "--format",
            "json",
            "--out",
            "b.json",
        ],
    );
    ok(d, &["clear", "s.json", "b.csv", "--out", "a.out"]);
    ok(d, &["clear", "s.json", "b.json", "--out", "b.out"]);
    assert_eq!(read(d, "a.out"), read(d, "b.out"));
}

#[test]
fn seed_flag_overrides_environment() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "gen",
            "--synthetic",
            "8",
            "--m",
            "8",
            "--rivals",
            "10",
            "--seed",
            "3",
            "--out",
            "a.json",
        ],
    );
    let out = Command::new(env!("CARGO_BIN_EXE_bundlebid"))
        .current_dir(d)
        .env("BUNDLEBID_SEED", "3")
        .args([
            "gen",
            "--synthetic",
            "8",
            "--m",
            "8",
            "--rivals",
            "10",
            "--out",
            "b.json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(read(d, "a.json"), read(d, "b.json"));
    ok(
        d,
        &[
            "gen",
            "--synthetic",
            "8",
            "--m",
            "8",
            "--rivals",
            "10",
            "--seed",
            "4",
            "--out",
            "c.json",
        ],
    );
    assert_ne!(read(d, "a.json"), read(d, "c.json"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(
        bundlebid(d, &["bid", "missing.json", "--strategy", "ebbs"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(bundlebid(d, &["bogus"]).status.code(), Some(2));
    ok(
        d,
        &[
            "gen",
            "--synthetic",
            "8",
            "--m",
            "8",
            "--cap",
            "200",
            "--rivals",
            "20",
            "--out",
            "s.json",
        ],
    );
    assert_eq!(
        bundlebid(d, &["bid", "s.json", "--strategy", "nope"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bundlebid(d, &["bid", "s.json", "--strategy", "psc", "--alpha", "1.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bundlebid(
            d,
            &[
                "bid",
                "s.json",
                "--strategy",
                "ebbs",
                "--held-karp-limit",
                "2"
            ]
        )
        .status
        .code(),
        Some(3)
    );
    // Bids on requests outside the tender are rejected.
    std::fs::write(
        d.join("bad.csv"),
        "# strategy=ebbs\ncarrier,mask,size,price\nc,1024,1,5\n",
    )
    .unwrap();
    assert_eq!(
        bundlebid(d, &["clear", "s.json", "bad.csv"]).status.code(),
        Some(2)
    );
}
