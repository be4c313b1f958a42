//! Run manifest for `analyze` bundles: tool version, configuration echo,
//! and input digests, so a bundle can be traced back to what produced it.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: ConfigEcho,
    pub inputs: Vec<InputDigest>,
    pub years_analyzed: Vec<i32>,
    pub skipped_years: Vec<i32>,
    pub outputs: Vec<String>,
    pub conventions: Conventions,
}

#[derive(Serialize)]
pub struct ConfigEcho {
    pub years: String,
    pub bin_width: f64,
    pub max_lag: f64,
    pub weighted: bool,
    pub completeness: f64,
    pub t_spatial: f64,
    pub t_temporal: f64,
    pub min_windows: usize,
    pub windows: Vec<u32>,
    pub out: String,
}

#[derive(Serialize)]
pub struct InputDigest {
    pub role: &'static str,
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct Conventions {
    pub pct_explained: &'static str,
    pub rng: &'static str,
}

impl Conventions {
    pub fn current() -> Conventions {
        Conventions {
            pct_explained:
                "100 * (1 - (SS_res / (n - 2)) / (SS_tot / (n - 1))), clamped to [0, 100]",
            rng: "chacha8",
        }
    }
}

pub fn digest(role: &'static str, path: &Path, text: &str) -> InputDigest {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    InputDigest {
        role,
        path: path.display().to_string(),
        sha256: format!("{:x}", hasher.finalize()),
    }
}

pub fn write(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut json = serde_json::to_string_pretty(manifest).context("serializing manifest")?;
    json.push('\n');
    fs::write(path, json).with_context(|| format!("writing {}", path.display()))
}
