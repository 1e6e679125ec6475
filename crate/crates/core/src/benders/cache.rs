use rayon::prelude::*;

use crate::graph::NodeId;
use crate::presolve::{ReducedModel, ScenarioSlice};

/// Bytes per stored node id.
pub const ID_BYTES: u64 = std::mem::size_of::<NodeId>() as u64;

/// Converts a byte budget into a budget counted in stored node ids.
pub fn ids_from_bytes(bytes: u64) -> u64 {
    bytes / ID_BYTES
}

/// Default `MemLimPerScen` of `8/|Ω|` GB, in ids.
pub fn default_mem_limit_ids(scenario_count: usize) -> u64 {
    ids_from_bytes(8_000_000_000 / scenario_count.max(1) as u64)
}

/// Expanded supports kept for separation, per scenario, filled in ascending
/// (topological) unit order until the per-scenario budget is reached.
#[derive(Debug, Clone, Default)]
pub struct ReachCache {
    limit_ids: u64,
    scenarios: Vec<ScenarioCache>,
}

#[derive(Debug, Clone, Default)]
struct ScenarioCache {
    supports: Vec<Vec<NodeId>>,
    stored_ids: u64,
}

impl ScenarioCache {
    fn build(slice: &ScenarioSlice, limit_ids: u64) -> Self {
        let graph = &slice.graph;
        let mut supports: Vec<Vec<NodeId>> = Vec::new();
        let mut stored_ids = 0u64;
        for u in 0..graph.unit_count() as u32 {
            let support = if graph.is_condensed() {
                let mut s = graph.members(u).to_vec();
                for &p in graph.predecessors(u) {
                    s = crate::presolve::merge_sorted_ids(&s, &supports[p as usize]);
                }
                s
            } else {
                graph.support(u)
            };
            if stored_ids + support.len() as u64 > limit_ids {
                break;
            }
            stored_ids += support.len() as u64;
            supports.push(support);
        }
        ScenarioCache { supports, stored_ids }
    }
}

impl ReachCache {
    /// A cache that stores nothing.
    pub fn disabled() -> Self {
        ReachCache::default()
    }

    pub fn build(model: &ReducedModel, limit_ids: u64) -> Self {
        let scenarios = model.slices.par_iter().map(|s| ScenarioCache::build(s, limit_ids)).collect();
        ReachCache { limit_ids, scenarios }
    }

    pub fn limit_ids(&self) -> u64 {
        self.limit_ids
    }

    pub fn get(&self, scenario: usize, unit: u32) -> Option<&[NodeId]> {
        self.scenarios.get(scenario)?.supports.get(unit as usize).map(Vec::as_slice)
    }

    pub fn stored_ids(&self, scenario: usize) -> u64 {
        self.scenarios.get(scenario).map_or(0, |s| s.stored_ids)
    }

    /// Number of leading units whose supports are stored.
    pub fn stored_units(&self, scenario: usize) -> usize {
        self.scenarios.get(scenario).map_or(0, |s| s.supports.len())
    }
}
