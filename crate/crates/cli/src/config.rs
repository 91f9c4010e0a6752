//! Run configuration: a single JSON document with an explicit schema.
//! Unknown fields are rejected so misspelled settings cannot silently fall
//! back to defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Deserialize;

use nibb_core::{BoundaryData, ChainConfig, TimeParameter};

pub const DEFAULT_CONFIG_JSON: &str = include_str!("../../../configs/default.json");

fn default_seed() -> u64 {
    7
}
fn default_samples() -> usize {
    100_000
}
fn default_burn_in() -> usize {
    10_000
}
fn default_thin() -> usize {
    10
}
fn default_proposal_scale() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSpec {
    pub value: f64,
    pub mult: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub t: f64,
    pub starts: Vec<ClusterSpec>,
    pub ends: Vec<ClusterSpec>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_thin")]
    pub thin: usize,
    #[serde(default = "default_proposal_scale")]
    pub proposal_scale: f64,
    /// Per-check tolerance overrides, keyed by check name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Output directory for reports and sample archives.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Attach the squared-overlap row to matrix sample archives.
    #[serde(default)]
    pub overlaps: bool,
}

impl RunConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de)
            .map_err(|e| anyhow::anyhow!("{} (field path: {})", e.inner(), e.path()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                Self::from_json(&text).with_context(|| format!("parsing config {}", p.display()))
            }
            None => Self::from_json(DEFAULT_CONFIG_JSON).context("parsing built-in config"),
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.t > 0.0 && self.t < 1.0) {
            bail!("field t: observation time must lie in (0,1), got {}", self.t);
        }
        let start_total: usize = self.starts.iter().map(|c| c.mult).sum();
        let end_total: usize = self.ends.iter().map(|c| c.mult).sum();
        if start_total != self.n {
            bail!(
                "field starts: multiplicities sum to {start_total}, expected n = {}",
                self.n
            );
        }
        if end_total != self.n {
            bail!(
                "field ends: multiplicities sum to {end_total}, expected n = {}",
                self.n
            );
        }
        if self.samples == 0 {
            bail!("field samples: must be >= 1");
        }
        if self.thin == 0 {
            bail!("field thin: must be >= 1");
        }
        if !(self.proposal_scale > 0.0) {
            bail!(
                "field proposal_scale: must be positive, got {}",
                self.proposal_scale
            );
        }
        self.boundary_a().context("field starts")?;
        self.boundary_b().context("field ends")?;
        Ok(())
    }

    pub fn boundary_a(&self) -> anyhow::Result<BoundaryData> {
        let pairs: Vec<(f64, usize)> = self.starts.iter().map(|c| (c.value, c.mult)).collect();
        Ok(BoundaryData::from_pairs(&pairs)?)
    }

    pub fn boundary_b(&self) -> anyhow::Result<BoundaryData> {
        let pairs: Vec<(f64, usize)> = self.ends.iter().map(|c| (c.value, c.mult)).collect();
        Ok(BoundaryData::from_pairs(&pairs)?)
    }

    pub fn time(&self) -> TimeParameter {
        TimeParameter::new(self.t).expect("validated")
    }

    pub fn chain(&self, length: usize) -> ChainConfig {
        ChainConfig {
            burn_in: self.burn_in,
            thin: self.thin,
            proposal_scale: self.proposal_scale,
            length,
        }
    }
}
