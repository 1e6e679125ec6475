use serde::{Deserialize, Serialize};

use crate::graph::{Csr, NodeId};
use crate::sampling::LiveArcGraph;

/// Per-scenario graph over aggregation units.
///
/// A unit is either a single node of `G^ω` (no SCC aggregation) or a strongly
/// connected component of `G^ω`, in which case the graph is the condensation
/// and unit ids follow a topological order. Member lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioGraph {
    members: Vec<Vec<NodeId>>,
    unit_of: Vec<u32>,
    succ: Csr,
    pred: Csr,
    acyclic: bool,
}

impl ScenarioGraph {
    /// One unit per node, arcs copied from the live-arc graph.
    pub fn identity(live: &LiveArcGraph) -> Self {
        let n = live.node_count;
        ScenarioGraph {
            members: (0..n as NodeId).map(|i| vec![i]).collect(),
            unit_of: (0..n as u32).collect(),
            succ: live.successors(),
            pred: live.predecessors(),
            acyclic: false,
        }
    }

    pub(crate) fn condensed(members: Vec<Vec<NodeId>>, unit_of: Vec<u32>, dag_arcs: &[(u32, u32)]) -> Self {
        let units = members.len();
        ScenarioGraph {
            succ: Csr::from_pairs(units, dag_arcs.iter().copied()),
            pred: Csr::from_pairs(units, dag_arcs.iter().map(|&(u, v)| (v, u))),
            members,
            unit_of,
            acyclic: true,
        }
    }

    pub fn unit_count(&self) -> usize {
        self.members.len()
    }

    pub fn node_count(&self) -> usize {
        self.unit_of.len()
    }

    /// True when this is a condensation with unit ids in topological order.
    pub fn is_condensed(&self) -> bool {
        self.acyclic
    }

    pub fn members(&self, unit: u32) -> &[NodeId] {
        &self.members[unit as usize]
    }

    pub fn unit_of(&self, node: NodeId) -> u32 {
        self.unit_of[node as usize]
    }

    pub fn successors(&self, unit: u32) -> &[u32] {
        self.succ.neighbors(unit)
    }

    pub fn predecessors(&self, unit: u32) -> &[u32] {
        self.pred.neighbors(unit)
    }

    pub fn arc_count(&self) -> usize {
        self.succ.edge_count()
    }

    /// Whether the unit's reachability set is the single node it contains.
    pub fn has_singleton_support(&self, unit: u32) -> bool {
        self.members(unit).len() == 1 && self.predecessors(unit).iter().all(|&p| p == unit)
    }

    /// Units with a directed path into `unit`, including itself, sorted.
    pub fn reverse_reach(&self, unit: u32) -> Vec<u32> {
        let mut seen = vec![false; self.unit_count()];
        let mut queue = vec![unit];
        seen[unit as usize] = true;
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            for &p in self.predecessors(v) {
                if !seen[p as usize] {
                    seen[p as usize] = true;
                    queue.push(p);
                }
            }
        }
        queue.sort_unstable();
        queue
    }

    /// Units reachable from any of `sources` (sources included).
    pub fn forward_reach(&self, sources: &[u32]) -> Vec<bool> {
        let mut seen = vec![false; self.unit_count()];
        let mut stack: Vec<u32> = Vec::with_capacity(sources.len());
        for &s in sources {
            if !seen[s as usize] {
                seen[s as usize] = true;
                stack.push(s);
            }
        }
        while let Some(v) = stack.pop() {
            for &w in self.successors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Original nodes of the given units, sorted.
    pub fn expand(&self, units: &[u32]) -> Vec<NodeId> {
        let mut nodes: Vec<NodeId> = units.iter().flat_map(|&u| self.members(u).iter().copied()).collect();
        nodes.sort_unstable();
        nodes
    }

    /// Expanded constraint support `∪_{v ∈ R(u)} SC_v` of a unit.
    pub fn support(&self, unit: u32) -> Vec<NodeId> {
        self.expand(&self.reverse_reach(unit))
    }

    /// `y(SC_u)`, summed in ascending node order.
    pub fn unit_sum(&self, unit: u32, y: &[f64]) -> f64 {
        self.members(unit).iter().map(|&j| y[j as usize]).sum()
    }
}
