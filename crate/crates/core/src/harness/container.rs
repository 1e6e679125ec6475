use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::graph::{DiffusionModel, NodeId};
use crate::sampling::{LiveArcGraph, SamplingMode, ScenarioSet};

pub const CONTAINER_FORMAT: u32 = 1;

/// Reproducibility record stored next to the scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub model: DiffusionModel,
    pub mode: SamplingMode,
    pub seed: Option<u64>,
    pub p: Option<f64>,
    pub omega_count: usize,
    pub node_count: usize,
    pub arc_count: usize,
    pub undirected: bool,
    /// `|A| / |V|`.
    pub density: f64,
    /// `ρ` rounded to one decimal.
    pub density_rounded: f64,
    /// SHA-256 of the edge list as written by `write_edge_list`.
    pub network_sha256: String,
    /// SHA-256 of the canonical JSON encoding of the scenario list.
    pub scenarios_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredScenario {
    pub probability: f64,
    pub arcs: Vec<(NodeId, NodeId)>,
}

/// A scenario set with its manifest and the input node labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleContainer {
    pub manifest: Manifest,
    pub labels: Vec<u64>,
    pub scenarios: Vec<StoredScenario>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub(crate) fn stored(set: &ScenarioSet) -> Vec<StoredScenario> {
    set.scenarios.iter().map(|s| StoredScenario { probability: s.probability, arcs: s.arcs.clone() }).collect()
}

pub(crate) fn scenarios_checksum(scenarios: &[StoredScenario]) -> String {
    sha256_hex(&serde_json::to_vec(scenarios).expect("scenarios serialize"))
}

impl SampleContainer {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string(self).expect("container serializes");
        text.push('\n');
        text
    }

    /// Parses a container and checks its scenario checksum.
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let c: SampleContainer = serde_json::from_str(text).map_err(|e| HarnessError::Container(e.to_string()))?;
        if c.manifest.format != CONTAINER_FORMAT {
            return Err(HarnessError::Container(format!("unsupported container format {}", c.manifest.format)));
        }
        let actual = scenarios_checksum(&c.scenarios);
        if actual != c.manifest.scenarios_sha256 {
            return Err(HarnessError::Container(format!(
                "scenario checksum mismatch: manifest {} but content {}",
                c.manifest.scenarios_sha256, actual
            )));
        }
        Ok(c)
    }

    pub fn scenario_set(&self) -> ScenarioSet {
        let scenarios = self
            .scenarios
            .iter()
            .enumerate()
            .map(|(scenario, s)| LiveArcGraph {
                scenario,
                node_count: self.manifest.node_count,
                arcs: s.arcs.clone(),
                probability: s.probability,
            })
            .collect();
        ScenarioSet {
            model: self.manifest.model,
            node_count: self.manifest.node_count,
            mode: self.manifest.mode,
            rng_seed: self.manifest.seed,
            scenarios,
        }
    }
}
