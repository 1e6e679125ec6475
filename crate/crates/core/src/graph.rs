//! Directed multigraph representation of a social network and the diffusion
//! parameters derived from it.
//!
//! Node ids are dense `u32` indices. The original integer labels read from an
//! edge list are kept in [`SocialNetwork::labels`] so results can be reported
//! in terms of the input file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense node index.
pub type NodeId = u32;

/// Absolute tolerance used when comparing probabilities.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("edge list contains no nodes")]
    Empty,
    #[error("invalid diffusion parameter: {0}")]
    Parameter(String),
    #[error("arc ({src}, {dst}) references a node outside 0..{node_count}")]
    NodeOutOfRange { src: NodeId, dst: NodeId, node_count: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One distinct ordered pair of the network with its number of parallel arcs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arc {
    pub src: NodeId,
    pub dst: NodeId,
    pub multiplicity: u32,
}

/// Compressed sparse row adjacency.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Csr {
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl Csr {
    /// Builds the adjacency of `node_count` nodes from `(from, to)` pairs.
    /// Neighbour lists keep the order in which pairs are given.
    pub fn from_pairs(node_count: usize, pairs: impl IntoIterator<Item = (u32, u32)> + Clone) -> Self {
        let mut offsets = vec![0u32; node_count + 1];
        for (from, _) in pairs.clone() {
            offsets[from as usize + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![0u32; offsets[node_count] as usize];
        for (from, to) in pairs {
            let slot = &mut cursor[from as usize];
            targets[*slot as usize] = to;
            *slot += 1;
        }
        Csr { offsets, targets }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn neighbors(&self, node: u32) -> &[u32] {
        let lo = self.offsets[node as usize] as usize;
        let hi = self.offsets[node as usize + 1] as usize;
        &self.targets[lo..hi]
    }

    pub fn degree(&self, node: u32) -> usize {
        self.neighbors(node).len()
    }
}

/// The source graph `G = (V, A)`.
///
/// Invariants: every arc endpoint is `< node_count`, each ordered pair occurs
/// once (parallel arcs are folded into `multiplicity`), and arcs are sorted by
/// `(src, dst)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SocialNetwork {
    node_count: usize,
    arcs: Vec<Arc>,
    labels: Vec<u64>,
    undirected: bool,
}

impl SocialNetwork {
    /// Builds a network from `(src, dst)` pairs over nodes `0..node_count`.
    /// Repeated pairs increase the multiplicity of the stored arc.
    pub fn from_arcs(node_count: usize, pairs: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self, GraphError> {
        let mut counts: BTreeMap<(NodeId, NodeId), u32> = BTreeMap::new();
        for (src, dst) in pairs {
            if src as usize >= node_count || dst as usize >= node_count {
                return Err(GraphError::NodeOutOfRange { src, dst, node_count });
            }
            *counts.entry((src, dst)).or_default() += 1;
        }
        Ok(Self::from_counts(node_count, counts, (0..node_count as u64).collect(), false))
    }

    fn from_counts(
        node_count: usize,
        counts: BTreeMap<(NodeId, NodeId), u32>,
        labels: Vec<u64>,
        undirected: bool,
    ) -> Self {
        let arcs = counts.into_iter().map(|((src, dst), multiplicity)| Arc { src, dst, multiplicity }).collect();
        SocialNetwork { node_count, arcs, labels, undirected }
    }

    /// Complete digraph on `n` nodes: every ordered pair `(i, j)` with `i != j`.
    pub fn complete(n: usize) -> Self {
        let pairs = (0..n as NodeId).flat_map(|i| (0..n as NodeId).filter(move |&j| j != i).map(move |j| (i, j)));
        Self::from_arcs(n, pairs).expect("complete graph arcs are in range")
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Number of distinct arcs `|A|`.
    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Original label of every dense node id.
    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn label(&self, node: NodeId) -> u64 {
        self.labels[node as usize]
    }

    /// Whether the edge list this network came from was read as undirected.
    pub fn was_undirected(&self) -> bool {
        self.undirected
    }

    /// Incoming arcs grouped by destination: `in_arcs()[j]` lists arc indices
    /// ending in `j`, sorted by source.
    pub fn in_arcs(&self) -> Vec<Vec<usize>> {
        let mut incoming = vec![Vec::new(); self.node_count];
        for (idx, arc) in self.arcs.iter().enumerate() {
            incoming[arc.dst as usize].push(idx);
        }
        incoming
    }

    /// Total incoming multiplicity `n_j` of every node.
    pub fn in_multiplicity(&self) -> Vec<u64> {
        let mut total = vec![0u64; self.node_count];
        for arc in &self.arcs {
            total[arc.dst as usize] += arc.multiplicity as u64;
        }
        total
    }

    /// Density `ρ = |A| / |V|` counting distinct arcs.
    pub fn density(&self) -> f64 {
        if self.node_count == 0 {
            0.0
        } else {
            self.arcs.len() as f64 / self.node_count as f64
        }
    }
}

/// Density `ρ = |A| / |V|`.
pub fn density(network: &SocialNetwork) -> f64 {
    network.density()
}

/// Reads a whitespace-separated edge list.
///
/// Each line is `src dst`; a line holding a single integer declares an
/// isolated node. Lines starting with `#` and blank lines are skipped.
/// Labels are remapped to dense ids in ascending label order. When
/// `undirected` is set every edge `{i, j}` yields both `(i, j)` and `(j, i)`.
pub fn load_edge_list<R: BufRead>(reader: R, undirected: bool) -> Result<SocialNetwork, GraphError> {
    let mut edges: Vec<(u64, u64)> = Vec::new();
    let mut nodes: Vec<u64> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let parse = |tok: &str| {
            tok.parse::<u64>().map_err(|_| GraphError::Parse {
                line: lineno,
                message: format!("expected a non-negative integer node id, found {tok:?}"),
            })
        };
        let first = parse(fields.next().expect("non-empty line has a token"))?;
        match (fields.next(), fields.next()) {
            (None, _) => nodes.push(first),
            (Some(second), None) => {
                let second = parse(second)?;
                edges.push((first, second));
            }
            (Some(_), Some(extra)) => {
                return Err(GraphError::Parse {
                    line: lineno,
                    message: format!("expected `src dst`, found trailing token {extra:?}"),
                })
            }
        }
    }

    let mut labels: Vec<u64> = nodes.iter().copied().chain(edges.iter().flat_map(|&(a, b)| [a, b])).collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.is_empty() {
        return Err(GraphError::Empty);
    }
    if labels.len() > NodeId::MAX as usize {
        return Err(GraphError::Parse { line: 0, message: "too many distinct nodes".into() });
    }
    let dense = |label: u64| labels.binary_search(&label).expect("label collected above") as NodeId;

    let mut counts: BTreeMap<(NodeId, NodeId), u32> = BTreeMap::new();
    for &(a, b) in &edges {
        let (src, dst) = (dense(a), dense(b));
        *counts.entry((src, dst)).or_default() += 1;
        // a self-loop is a single arc even when read as undirected
        if undirected && src != dst {
            *counts.entry((dst, src)).or_default() += 1;
        }
    }
    Ok(SocialNetwork::from_counts(labels.len(), counts, labels, undirected))
}

/// Writes the network as a directed edge list that [`load_edge_list`] reads
/// back into an identical network. Parallel arcs are written as repeated
/// lines and nodes without arcs as single-label lines.
pub fn write_edge_list(network: &SocialNetwork) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# nodes: {} arcs: {}", network.node_count(), network.arc_count());
    let mut touched = vec![false; network.node_count()];
    for arc in network.arcs() {
        touched[arc.src as usize] = true;
        touched[arc.dst as usize] = true;
    }
    for (node, _) in touched.iter().enumerate().filter(|(_, &t)| !t) {
        let _ = writeln!(out, "{}", network.label(node as NodeId));
    }
    for arc in network.arcs() {
        for _ in 0..arc.multiplicity {
            let _ = writeln!(out, "{} {}", network.label(arc.src), network.label(arc.dst));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffusionModel {
    Icm,
    Ltm,
}

impl std::fmt::Display for DiffusionModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DiffusionModel::Icm => "icm",
            DiffusionModel::Ltm => "ltm",
        })
    }
}

impl std::str::FromStr for DiffusionModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "icm" => Ok(DiffusionModel::Icm),
            "ltm" => Ok(DiffusionModel::Ltm),
            other => Err(format!("unknown diffusion model `{other}` (expected icm or ltm)")),
        }
    }
}

/// Per-arc diffusion values aligned with [`SocialNetwork::arcs`]: activation
/// probabilities `π_ij` under ICM, influence weights `b_ij` under LTM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionParams {
    pub model: DiffusionModel,
    pub values: Vec<f64>,
}

impl DiffusionParams {
    /// Checks the model invariants against `network`: ICM values lie in
    /// `(0, 1]`, LTM incoming weights are non-negative and sum to at most one.
    pub fn validate(&self, network: &SocialNetwork) -> Result<(), GraphError> {
        if self.values.len() != network.arc_count() {
            return Err(GraphError::Parameter(format!(
                "{} values for {} arcs",
                self.values.len(),
                network.arc_count()
            )));
        }
        match self.model {
            DiffusionModel::Icm => {
                if let Some(bad) = self.values.iter().find(|&&v| !(v > 0.0 && v <= 1.0)) {
                    return Err(GraphError::Parameter(format!("activation probability {bad} outside (0, 1]")));
                }
            }
            DiffusionModel::Ltm => {
                let mut sums = vec![0.0f64; network.node_count()];
                for (arc, &b) in network.arcs().iter().zip(&self.values) {
                    if !(0.0..=1.0).contains(&b) {
                        return Err(GraphError::Parameter(format!("influence weight {b} outside [0, 1]")));
                    }
                    sums[arc.dst as usize] += b;
                }
                if let Some((node, s)) = sums.iter().enumerate().find(|(_, &s)| s > 1.0 + PROBABILITY_TOLERANCE) {
                    return Err(GraphError::Parameter(format!("incoming weights of node {node} sum to {s} > 1")));
                }
            }
        }
        Ok(())
    }
}

/// ICM probabilities `π_ij = 1 − (1 − p)^{n_ij}` for a per-arc probability `p`.
pub fn icm_params(network: &SocialNetwork, p: f64) -> Result<DiffusionParams, GraphError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(GraphError::Parameter(format!("p = {p} outside (0, 1]")));
    }
    let values = network.arcs().iter().map(|arc| 1.0 - (1.0 - p).powi(arc.multiplicity as i32)).collect();
    Ok(DiffusionParams { model: DiffusionModel::Icm, values })
}

/// LTM weights `b_ij = n_ij / n_j` with `n_j` the incoming multiplicity of `j`.
pub fn ltm_params(network: &SocialNetwork) -> DiffusionParams {
    let totals = network.in_multiplicity();
    let values = network.arcs().iter().map(|arc| arc.multiplicity as f64 / totals[arc.dst as usize] as f64).collect();
    DiffusionParams { model: DiffusionModel::Ltm, values }
}
