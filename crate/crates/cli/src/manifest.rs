//! Run manifests: every input of a pipeline run in one JSON file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ppsim_core::analysis::ProfileAveraging;
use ppsim_core::simulation::{DEFAULT_MAX_PERIODS, DEFAULT_TOLERANCE};
use ppsim_core::RegimeKind;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Rejected manifest, with a human-readable reason.
#[derive(Debug)]
pub struct ManifestError(pub String);

impl std::fmt::Display for ManifestError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid manifest: {}", self.0)
    }
}

impl std::error::Error for ManifestError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BudgetSource {
    Uniform(f64),
    PerCountry(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    pub grid: Vec<f64>,
    pub runs_per_point: usize,
    /// CSV with `country,corruption`.
    pub empirical: PathBuf,
}

fn default_regimes() -> Vec<RegimeKind> {
    RegimeKind::ALL.to_vec()
}
fn default_discovery_runs() -> usize {
    200
}
fn default_max_periods() -> usize {
    DEFAULT_MAX_PERIODS
}
fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// Long-format CSV: `country,year,<indicator>...`, blank cells missing.
    pub panel: PathBuf,
    /// CSV `indicator,reversed`.
    #[serde(default)]
    pub polarity: Option<PathBuf>,
    /// CSV `indicator,pillar`.
    #[serde(default)]
    pub pillars: Option<PathBuf>,
    /// Directory of `<country>.json` networks; estimated from the panel
    /// when absent.
    #[serde(default)]
    pub networks: Option<PathBuf>,
    /// Subset of countries to process, in this order. All when absent.
    #[serde(default)]
    pub countries: Option<Vec<String>>,
    #[serde(default = "default_regimes")]
    pub regimes: Vec<RegimeKind>,
    pub n_runs: usize,
    #[serde(default = "default_discovery_runs")]
    pub discovery_runs: usize,
    #[serde(default)]
    pub discovery_averaging: ProfileAveraging,
    pub master_seed: u64,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub calibration: Option<CalibrationSpec>,
    pub budget: BudgetSource,
    pub rule_of_law: String,
    pub control_of_corruption: String,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_max_periods")]
    pub max_periods: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub signed_weights: bool,
    #[serde(default)]
    pub clusters: Option<usize>,
}

/// A parsed manifest with paths resolved against its directory.
#[derive(Debug, Clone)]
pub struct LoadedManifest {
    pub manifest: RunManifest,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        serde_json::from_str(text).map_err(|e| ManifestError(e.to_string()).into())
    }

    pub fn validate(&self) -> Result<(), ManifestError> {
        let fail = |m: &str| Err(ManifestError(m.to_string()));
        if self.n_runs == 0 {
            return fail("n_runs must be at least 1");
        }
        if self.discovery_runs == 0 {
            return fail("discovery_runs must be at least 1");
        }
        if self.max_periods == 0 {
            return fail("max_periods must be at least 1");
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return fail("tolerance must be finite and non-negative");
        }
        if self.regimes.is_empty() {
            return fail("regime list is empty");
        }
        match (&self.gamma, &self.calibration) {
            (Some(_), Some(_)) => return fail("give either gamma or calibration, not both"),
            (None, None) => return fail("one of gamma or calibration is required"),
            (Some(g), None) if !(g.is_finite() && *g > 0.0) => {
                return fail("gamma must be strictly positive")
            }
            (None, Some(c)) => {
                if c.grid.is_empty() || c.grid.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
                    return fail("calibration grid must be non-empty and strictly positive");
                }
                if c.runs_per_point == 0 {
                    return fail("calibration runs_per_point must be at least 1");
                }
            }
            _ => {}
        }
        let budget_ok = |b: &f64| b.is_finite() && *b > 0.0;
        let ok = match &self.budget {
            BudgetSource::Uniform(b) => budget_ok(b),
            BudgetSource::PerCountry(m) => m.values().all(budget_ok),
        };
        if !ok {
            return fail("budgets must be strictly positive");
        }
        Ok(())
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.panel);
        join(&mut self.out_dir);
        for p in [&mut self.polarity, &mut self.pillars, &mut self.networks]
            .into_iter()
            .flatten()
        {
            join(p);
        }
        if let Some(c) = self.calibration.as_mut() {
            join(&mut c.empirical);
        }
    }

    fn check_paths(&self) -> Result<(), ManifestError> {
        let mut paths = vec![&self.panel];
        paths.extend(self.polarity.iter());
        paths.extend(self.pillars.iter());
        paths.extend(self.networks.iter());
        paths.extend(self.calibration.iter().map(|c| &c.empirical));
        for p in paths {
            if !p.exists() {
                return Err(ManifestError(format!("{} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn budget_for(&self, country: &str) -> Result<f64, ManifestError> {
        match &self.budget {
            BudgetSource::Uniform(b) => Ok(*b),
            BudgetSource::PerCountry(m) => m
                .get(country)
                .copied()
                .ok_or_else(|| ManifestError(format!("no budget given for {country}"))),
        }
    }
}

/// Reads, validates and resolves a manifest file. Relative paths are taken
/// relative to the manifest's directory.
pub fn load(path: &Path) -> anyhow::Result<LoadedManifest> {
    let bytes = fs::read(path)
        .map_err(|e| anyhow::Error::new(e).context(format!("reading {}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| ManifestError(e.to_string()))?;
    let mut manifest = RunManifest::from_json(text)?;
    manifest.validate()?;
    let base = path.parent().unwrap_or(Path::new("."));
    manifest.resolve(base);
    manifest.check_paths()?;
    Ok(LoadedManifest {
        manifest,
        sha256: sha256_hex(&bytes),
    })
}
