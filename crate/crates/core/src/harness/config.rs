use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::combin::DEFAULT_SUBSET_CAP;
use crate::graph::DiffusionModel;
use crate::presolve::{default_max_reac_size, PresolveLevel, PresolveOptions};

/// Which verifier `verify` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyKind {
    Theorem1,
    Prop1,
    Theorem2,
}

impl std::str::FromStr for VerifyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "theorem1" => Ok(VerifyKind::Theorem1),
            "prop1" => Ok(VerifyKind::Prop1),
            "theorem2" => Ok(VerifyKind::Theorem2),
            other => Err(format!("unknown verifier `{other}` (expected theorem1, prop1 or theorem2)")),
        }
    }
}

/// Settings of the verifiers. Bipartite suites draw `instances` random
/// networks with up to `max_sources` sources and `max_targets` targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub kind: VerifyKind,
    pub instances: usize,
    pub max_sources: usize,
    pub max_targets: usize,
    pub arc_density: f64,
    /// Complete-graph size for the connectivity check.
    pub n: usize,
    pub trials: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            kind: VerifyKind::Theorem1,
            instances: 20,
            max_sources: 6,
            max_targets: 6,
            arc_density: 0.4,
            n: 15,
            trials: 400,
        }
    }
}

/// One run of any command. Loaded from TOML or JSON; command-line flags
/// override individual fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Edge-list file of the social network.
    pub network: Option<PathBuf>,
    /// Scenario container written by `sample`; replaces sampling when set.
    pub scenarios: Option<PathBuf>,
    pub undirected: bool,
    pub model: DiffusionModel,
    /// Per-arc base probability of ICM.
    pub p: Option<f64>,
    pub k: usize,
    pub omega_count: usize,
    pub seed: Option<u64>,
    /// Enumerate every scenario instead of sampling.
    pub exhaustive: bool,
    pub enumeration_cap: u64,
    pub presolve: PresolveLevel,
    pub max_reac_size: Option<usize>,
    /// `MemLimPerScen` in bytes; defaults to `8/|Ω|` GB.
    pub mem_limit_per_scen: Option<u64>,
    pub master_cap: u64,
    /// Directory receiving output files.
    pub output: Option<PathBuf>,
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            network: None,
            scenarios: None,
            undirected: false,
            model: DiffusionModel::Icm,
            p: None,
            k: 5,
            omega_count: 250,
            seed: None,
            exhaustive: false,
            enumeration_cap: crate::sampling::DEFAULT_ENUMERATION_CAP,
            presolve: PresolveLevel::Default,
            max_reac_size: None,
            mem_limit_per_scen: None,
            master_cap: DEFAULT_SUBSET_CAP,
            output: None,
            verify: VerifyConfig::default(),
        }
    }
}

impl RunConfig {
    /// Parses JSON when the file name ends in `.json`, TOML otherwise.
    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).map_err(|e| HarnessError::Config(e.to_string()))
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.k == 0 {
            return Err(HarnessError::Config("k must be at least 1".into()));
        }
        if self.omega_count == 0 {
            return Err(HarnessError::Config("omega_count must be at least 1".into()));
        }
        if let Some(p) = self.p {
            if !(p > 0.0 && p <= 1.0) {
                return Err(HarnessError::Config(format!("p must lie in (0, 1], got {p}")));
            }
        }
        Ok(())
    }

    pub fn require_seed(&self) -> Result<u64, HarnessError> {
        self.seed.ok_or_else(|| HarnessError::Config("randomized commands need an explicit seed".into()))
    }

    pub fn require_p(&self) -> Result<f64, HarnessError> {
        self.p.ok_or_else(|| HarnessError::Config("ICM runs need the arc probability p".into()))
    }

    pub fn presolve_options(&self) -> PresolveOptions {
        let mut options = self.presolve.options(self.model);
        options.max_reac_size = self.max_reac_size.unwrap_or_else(|| default_max_reac_size(self.model));
        options
    }
}
