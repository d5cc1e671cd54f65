//! Experiment records: seeded Monte Carlo estimates with CLT error bars,
//! config hashing, and CSV/JSON emission helpers shared by the CLI.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Result of one seeded Monte Carlo estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub estimate: f64,
    /// sample standard deviation / sqrt(n)
    pub clt_bar: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub wall_time_s: f64,
    pub config_hash: String,
    #[serde(default)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl ExperimentReport {
    pub fn from_samples(samples: &[f64], seed: u64, config_hash: String) -> ExperimentReport {
        let (mean, bar) = mean_and_clt_bar(samples);
        ExperimentReport {
            estimate: mean,
            clt_bar: bar,
            n_samples: samples.len(),
            seed,
            wall_time_s: 0.0,
            config_hash,
            extra: serde_json::Map::new(),
        }
    }
}

pub fn mean_and_clt_bar(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::INFINITY);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// CLT bar for an empirical fraction of `hits` out of `n` Bernoulli trials.
pub fn fraction_and_clt_bar(hits: usize, n: usize) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Stable hash of a serializable config; identical configs give identical
/// hashes across runs.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_string(config).expect("config serialization");
    let digest = Sha256::digest(json.as_bytes());
    hex_lower(&digest[..8])
}

fn hex_lower(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Serializes numbers with 17 significant digits so emitted files round-trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.17e}")
}

/// A plot-ready CSV table: header row plus float/str rows.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> CsvTable {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}
