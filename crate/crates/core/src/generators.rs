//! Random instance generators for tests, benchmarks and verification runs.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{DiffusionModel, NodeId, SocialNetwork};
use crate::sampling::{LiveArcGraph, SamplingMode, ScenarioSet};

/// Each ordered pair `(i, j)`, self-loops included, is present with
/// probability `density`.
pub fn random_live_graph<R: Rng>(rng: &mut R, n: usize, density: f64) -> LiveArcGraph {
    let mut arcs = Vec::new();
    for i in 0..n as NodeId {
        for j in 0..n as NodeId {
            if rng.random::<f64>() < density {
                arcs.push((i, j));
            }
        }
    }
    LiveArcGraph { scenario: 0, node_count: n, arcs, probability: 1.0 }
}

/// Random DAG whose topological order is a random permutation of node ids.
pub fn random_dag<R: Rng>(rng: &mut R, n: usize, density: f64) -> LiveArcGraph {
    let mut order: Vec<NodeId> = (0..n as NodeId).collect();
    order.shuffle(rng);
    let mut arcs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < density {
                arcs.push((order[a], order[b]));
            }
        }
    }
    LiveArcGraph { scenario: 0, node_count: n, arcs, probability: 1.0 }
}

/// `omega` independent random live-arc graphs. Sampled sets are
/// equiprobable; otherwise the set is marked exhaustive and gets random
/// probabilities summing to one.
pub fn random_scenario_set<R: Rng>(rng: &mut R, n: usize, density: f64, omega: usize, exhaustive: bool) -> ScenarioSet {
    let lists: Vec<Vec<(NodeId, NodeId)>> = (0..omega).map(|_| random_live_graph(rng, n, density).arcs).collect();
    let mut set = ScenarioSet::from_arc_lists(DiffusionModel::Icm, n, lists);
    if exhaustive {
        let raw: Vec<f64> = (0..omega).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        for (s, r) in set.scenarios.iter_mut().zip(raw) {
            s.probability = r / total;
        }
        set.mode = SamplingMode::Exhaustive;
    }
    set
}

/// Random multigraph with exactly `arc_draws` arc draws (repeats raise
/// multiplicities); self-loops are skipped.
pub fn random_network<R: Rng>(rng: &mut R, n: usize, arc_draws: usize) -> SocialNetwork {
    let mut pairs = Vec::with_capacity(arc_draws);
    if n >= 2 {
        while pairs.len() < arc_draws {
            let i = rng.random_range(0..n as NodeId);
            let j = rng.random_range(0..n as NodeId);
            if i != j {
                pairs.push((i, j));
            }
        }
    }
    SocialNetwork::from_arcs(n, pairs).expect("generated arcs are in range")
}

/// One-way bipartite network: sources `0..m`, targets `m..m+t`, each pair
/// `(i, j)` present with probability `density` and multiplicity 1 or 2.
pub fn random_bipartite<R: Rng>(rng: &mut R, m: usize, t: usize, density: f64) -> SocialNetwork {
    let mut pairs = Vec::new();
    for i in 0..m as NodeId {
        for j in m as NodeId..(m + t) as NodeId {
            if rng.random::<f64>() < density {
                let copies = rng.random_range(1..=2);
                pairs.extend(std::iter::repeat_n((i, j), copies));
            }
        }
    }
    SocialNetwork::from_arcs(m + t, pairs).expect("generated arcs are in range")
}
