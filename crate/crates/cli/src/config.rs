//! Run configuration and its reproducibility hash.

use std::path::PathBuf;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable read for the worker count when `--workers` is absent.
pub const WORKERS_ENV: &str = "BIQUAD_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldSelection {
    /// Every field with `min_t <= t <= max_t`.
    Range { min_t: u64, max_t: u64 },
    List(Vec<(u64, u64)>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub fields: FieldSelection,
    /// Cap on enumerated lattice points and escalation candidates.
    pub budget: u64,
    pub max_trace: u64,
    pub workers: usize,
    pub format: Format,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

/// The part of the configuration that can change a report's content.
#[derive(Serialize)]
struct Hashed<'a> {
    version: &'a str,
    fields: &'a FieldSelection,
    budget: u64,
    max_trace: u64,
    seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 || self.max_trace == 0 {
            bail!("budgets must be positive");
        }
        if self.workers == 0 {
            bail!("worker count must be positive");
        }
        if let FieldSelection::Range { min_t, max_t } = self.fields {
            if min_t > max_t {
                bail!("empty range {min_t}..={max_t}");
            }
        }
        if let Some(p) = &self.output {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            if !dir.is_dir() {
                bail!("output directory {} does not exist", dir.display());
            }
            if p.exists() && std::fs::metadata(p)?.permissions().readonly() {
                bail!("{} is read-only", p.display());
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the content-relevant settings. Worker count, output path
    /// and format are left out, since they never change a record.
    pub fn hash(&self) -> String {
        let h = Hashed {
            version: VERSION,
            fields: &self.fields,
            budget: self.budget,
            max_trace: self.max_trace,
            seed: self.seed,
        };
        let bytes = serde_json::to_vec(&h).expect("plain data serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// Worker count from the flag, else the environment, else the machine.
pub fn resolve_workers(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}
