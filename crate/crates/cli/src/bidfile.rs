//! Bid files: a list of focal bids plus the settings that produced them.
//!
//! CSV files carry the settings as `#` comment lines above the bid table,
//! JSON files as fields next to the bid list. Runtimes are only written when
//! timing was requested, so files stay byte-identical between runs.

use bundlebid_core::enumeration::{bids_from_csv, bids_to_csv};
use bundlebid_core::{Bid, Strategy};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidFile {
    pub strategy: Strategy,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ms: Option<u64>,
    pub bids: Vec<Bid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl BidFile {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string(self).expect("bid file serializes");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = format!("# strategy={}\n", self.strategy);
                if let Some(alpha) = self.alpha {
                    s += &format!("# alpha={alpha}\n");
                }
                s += &format!("# seed={}\n", self.seed);
                if let Some(ms) = self.ms {
                    s += &format!("# ms={ms}\n");
                }
                s + &bids_to_csv(&self.bids)
            }
        }
    }

    /// Accepts either format.
    pub fn parse(text: &str) -> Result<BidFile, String> {
        if text.trim_start().starts_with('{') {
            return serde_json::from_str(text).map_err(|e| e.to_string());
        }
        let mut strategy = None;
        let mut alpha = None;
        let mut seed = 0;
        let mut ms = None;
        for line in text.lines().filter_map(|l| l.trim().strip_prefix('#')) {
            let Some((key, value)) = line.trim().split_once('=') else {
                continue;
            };
            let bad = || format!("malformed `{key}` setting `{value}`");
            match key.trim() {
                "strategy" => {
                    strategy = Some(
                        value
                            .trim()
                            .parse::<Strategy>()
                            .map_err(|e| e.to_string())?,
                    )
                }
                "alpha" => alpha = Some(value.trim().parse::<f64>().map_err(|_| bad())?),
                "seed" => seed = value.trim().parse().map_err(|_| bad())?,
                "ms" => ms = Some(value.trim().parse().map_err(|_| bad())?),
                _ => {}
            }
        }
        let strategy = strategy.ok_or("missing `# strategy=` line")?;
        Ok(BidFile {
            strategy,
            alpha,
            seed,
            ms,
            bids: bids_from_csv(text)?,
        })
    }
}
