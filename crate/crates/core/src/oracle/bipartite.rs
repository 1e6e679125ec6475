//! One-way bipartite networks under LTM.
//!
//! With sources `M` (no incoming arcs) and targets `N` (no outgoing arcs),
//! the reachability set of a target is `{j}` or `{i, j}` in every scenario.
//! After SNA and INA the model keeps one weight `s_v` per node and one
//! variable per arc that is live in some scenario, and the remaining problem
//! is solvable greedily.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::graph::{DiffusionModel, NodeId, SocialNetwork};
use crate::presolve::{presolve, PresolveOptions};
use crate::sampling::ScenarioSet;

const IDENTITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteInstance {
    pub node_count: usize,
    /// `M`, ascending.
    pub sources: Vec<NodeId>,
    /// `N`, ascending.
    pub targets: Vec<NodeId>,
    /// `s_v` for every node.
    pub s: Vec<f64>,
    /// Reduced arc set `A'` with `c_ij`, ascending by `(i, j)`.
    pub arcs: Vec<(NodeId, NodeId, f64)>,
}

/// Counts of the reduced model next to their worst-case bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteReport {
    pub sources: usize,
    pub targets: usize,
    pub arcs: usize,
    pub reduced_arcs: usize,
    pub variables: usize,
    pub constraints: usize,
    pub variable_bound: usize,
    pub constraint_bound: usize,
    /// Largest deviation from `s_i = 1` and `s_j + Σ_i c_ij = 1`.
    pub identity_residual: f64,
    /// Largest deviation from coefficients computed directly from the
    /// scenario classes.
    pub direct_residual: f64,
}

impl BipartiteReport {
    pub fn passed(&self) -> bool {
        self.variables <= self.variable_bound
            && self.constraints <= self.constraint_bound
            && self.identity_residual <= IDENTITY_TOLERANCE
            && self.direct_residual <= IDENTITY_TOLERANCE
    }
}

fn split_nodes(network: &SocialNetwork) -> Result<(Vec<NodeId>, Vec<NodeId>), OracleError> {
    let n = network.node_count();
    let mut has_in = vec![false; n];
    let mut has_out = vec![false; n];
    for a in network.arcs() {
        has_out[a.src as usize] = true;
        has_in[a.dst as usize] = true;
    }
    if let Some(v) = (0..n).find(|&v| has_in[v] && has_out[v]) {
        return Err(OracleError::Structure(format!("node {v} has both incoming and outgoing arcs")));
    }
    let sources = (0..n as NodeId).filter(|&v| !has_in[v as usize]).collect();
    let targets = (0..n as NodeId).filter(|&v| has_in[v as usize]).collect();
    Ok((sources, targets))
}

fn check_scenarios(network: &SocialNetwork, scenarios: &ScenarioSet) -> Result<(), OracleError> {
    if scenarios.model != DiffusionModel::Ltm {
        return Err(OracleError::Structure("scenarios were not drawn under LTM".into()));
    }
    if scenarios.node_count != network.node_count() {
        return Err(OracleError::Structure("scenario node count differs from the network".into()));
    }
    let arcs: std::collections::HashSet<(NodeId, NodeId)> = network.arcs().iter().map(|a| (a.src, a.dst)).collect();
    for live in &scenarios.scenarios {
        if live.in_degrees().iter().any(|&d| d > 1) {
            return Err(OracleError::Structure(format!("scenario {} has a node with two live in-arcs", live.scenario)));
        }
        if let Some(a) = live.arcs.iter().find(|a| !arcs.contains(a)) {
            return Err(OracleError::Structure(format!(
                "scenario {} has arc {a:?} outside the network",
                live.scenario
            )));
        }
    }
    Ok(())
}

/// `s_v = Σ_{ω ∈ Ω(v)} p^ω` and `c_ij = Σ_{ω ∈ Ω(i,j)} p^ω`, read straight
/// off the scenarios.
pub fn direct_coefficients(node_count: usize, scenarios: &ScenarioSet) -> (Vec<f64>, BTreeMap<(NodeId, NodeId), f64>) {
    let mut s = vec![0.0; node_count];
    let mut c: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
    for live in &scenarios.scenarios {
        let indeg = live.in_degrees();
        for (v, &d) in indeg.iter().enumerate() {
            if d == 0 {
                s[v] += live.probability;
            }
        }
        for &(i, j) in &live.arcs {
            *c.entry((i, j)).or_default() += live.probability;
        }
    }
    (s, c)
}

/// Builds the reduced instance through the general SNA and INA reductions.
pub fn reduce_bipartite_ltm(
    network: &SocialNetwork,
    scenarios: &ScenarioSet,
) -> Result<(BipartiteInstance, BipartiteReport), OracleError> {
    let (sources, targets) = split_nodes(network)?;
    check_scenarios(network, scenarios)?;
    let n = network.node_count();
    let options = PresolveOptions { sna: true, scna: true, ina: true, max_reac_size: 2 };
    let reduced = presolve(scenarios, &options)?;
    let scale = reduced.weight_scale;

    let s: Vec<f64> = reduced.link_weights().into_iter().map(|w| w * scale).collect();
    let mut arcs = Vec::with_capacity(reduced.rep_count());
    for slice in &reduced.slices {
        for rep in &slice.reps {
            match slice.support(rep.unit)[..] {
                [a, b] => {
                    let (i, j) = if sources.binary_search(&a).is_ok() { (a, b) } else { (b, a) };
                    arcs.push((i, j, rep.weight * scale));
                }
                ref other => {
                    return Err(OracleError::Structure(format!("unexpected reachability set {other:?}")));
                }
            }
        }
    }
    arcs.sort_by_key(|a| (a.0, a.1));

    let mut identity_residual: f64 = 0.0;
    for &i in &sources {
        identity_residual = identity_residual.max((s[i as usize] - 1.0).abs());
    }
    let mut inflow = vec![0.0; n];
    for &(_, j, c) in &arcs {
        inflow[j as usize] += c;
    }
    for &j in &targets {
        identity_residual = identity_residual.max((s[j as usize] + inflow[j as usize] - 1.0).abs());
    }

    let (ds, dc) = direct_coefficients(n, scenarios);
    let mut direct_residual: f64 = s.iter().zip(&ds).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if dc.len() != arcs.len() {
        direct_residual = f64::INFINITY;
    } else {
        for (&(i, j, c), (&(di, dj), &d)) in arcs.iter().zip(&dc) {
            if (i, j) != (di, dj) {
                direct_residual = f64::INFINITY;
            } else {
                direct_residual = direct_residual.max((c - d).abs());
            }
        }
    }

    let report = BipartiteReport {
        sources: sources.len(),
        targets: targets.len(),
        arcs: network.arc_count(),
        reduced_arcs: arcs.len(),
        variables: n + reduced.rep_count(),
        constraints: reduced.rep_count() + 1,
        variable_bound: sources.len() + targets.len() + network.arc_count(),
        constraint_bound: network.arc_count() + 1,
        identity_residual,
        direct_residual,
    };
    Ok((BipartiteInstance { node_count: n, sources, targets, s, arcs }, report))
}

/// Objective of the reduced model at a binary seed set.
pub fn bipartite_value(instance: &BipartiteInstance, seeds: &[NodeId]) -> f64 {
    let mut y = vec![false; instance.node_count];
    for &v in seeds {
        y[v as usize] = true;
    }
    let nodes: f64 = seeds.iter().map(|&v| instance.s[v as usize]).sum();
    let arcs: f64 = instance.arcs.iter().filter(|&&(i, j, _)| y[i as usize] || y[j as usize]).map(|a| a.2).sum();
    nodes + arcs
}

/// Indices of the `k` largest values, ties broken towards smaller ids.
fn top_k(ids: &[NodeId], value: impl Fn(NodeId) -> f64, k: usize) -> Vec<NodeId> {
    let mut ranked: Vec<NodeId> = ids.to_vec();
    ranked.sort_by(|&a, &b| value(b).total_cmp(&value(a)).then(a.cmp(&b)));
    ranked.truncate(k);
    ranked
}

fn source_values(instance: &BipartiteInstance) -> Vec<f64> {
    let mut v = instance.s.clone();
    for &(i, _, c) in &instance.arcs {
        v[i as usize] += c;
    }
    v
}

/// Constructive optimum by cases on `K`.
pub fn solve_bipartite(instance: &BipartiteInstance, k: usize) -> (Vec<NodeId>, f64) {
    let m = instance.sources.len();
    let mut seeds = if k >= m + instance.targets.len() {
        (0..instance.node_count as NodeId).collect()
    } else if k >= m {
        let mut chosen = instance.sources.clone();
        chosen.extend(top_k(&instance.targets, |j| instance.s[j as usize], k - m));
        chosen
    } else {
        let v = source_values(instance);
        top_k(&instance.sources, |i| v[i as usize], k)
    };
    seeds.sort_unstable();
    let value = bipartite_value(instance, &seeds);
    (seeds, value)
}

/// Feasible solution of the dual of the LP relaxation
/// `max s·y + c·z, z_ij ≤ y_i + y_j, Σ y ≤ K, 0 ≤ y, z ≤ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    /// Multiplier of `Σ y ≤ K`.
    pub lambda: f64,
    /// Multipliers of `y_v ≤ 1`.
    pub mu: Vec<f64>,
    /// Multipliers of `z_ij − y_i − y_j ≤ 0`, aligned with the arcs.
    pub w: Vec<f64>,
    /// Multipliers of `z_ij ≤ 1`.
    pub nu: Vec<f64>,
    pub objective: f64,
}

impl DualCertificate {
    /// Largest violation of dual feasibility (sign and covering rows).
    pub fn max_violation(&self, instance: &BipartiteInstance) -> f64 {
        let mut worst: f64 = (-self.lambda).max(0.0);
        for (a, &(_, _, c)) in instance.arcs.iter().enumerate() {
            worst = worst.max(-self.w[a]).max(-self.nu[a]);
            worst = worst.max(c - self.w[a] - self.nu[a]);
        }
        let mut incident = vec![0.0; instance.node_count];
        for (a, &(i, j, _)) in instance.arcs.iter().enumerate() {
            incident[i as usize] += self.w[a];
            incident[j as usize] += self.w[a];
        }
        for ((&mu, &s), &inc) in self.mu.iter().zip(&instance.s).zip(&incident) {
            worst = worst.max(-mu);
            worst = worst.max(s - (self.lambda + mu - inc));
        }
        worst
    }

    /// `Kλ + Σ μ + Σ ν`.
    pub fn dual_objective(&self, k: usize) -> f64 {
        k as f64 * self.lambda + self.mu.iter().sum::<f64>() + self.nu.iter().sum::<f64>()
    }
}

/// A dual solution whose objective, by weak duality, bounds the LP value and
/// matches the constructive integer optimum.
pub fn lp_dual_certificate(instance: &BipartiteInstance, k: usize) -> DualCertificate {
    let n = instance.node_count;
    let m = instance.sources.len();
    let arcs = instance.arcs.len();
    let cert = if k < m {
        let v = source_values(instance);
        let ranked = top_k(&instance.sources, |i| v[i as usize], k);
        let lambda = ranked.last().map_or(0.0, |&i| v[i as usize]);
        let mut mu = vec![0.0; n];
        for &i in &instance.sources {
            mu[i as usize] = (v[i as usize] - lambda).max(0.0);
        }
        DualCertificate {
            lambda,
            mu,
            w: instance.arcs.iter().map(|a| a.2).collect(),
            nu: vec![0.0; arcs],
            objective: 0.0,
        }
    } else {
        let r = k - m;
        let ranked = top_k(&instance.targets, |j| instance.s[j as usize], r + 1);
        let lambda = if ranked.len() > r { instance.s[ranked[r] as usize] } else { 0.0 };
        let mu = (0..n).map(|v| (instance.s[v] - lambda).max(0.0)).collect();
        DualCertificate {
            lambda,
            mu,
            w: vec![0.0; arcs],
            nu: instance.arcs.iter().map(|a| a.2).collect(),
            objective: 0.0,
        }
    };
    let objective = cert.dual_objective(k);
    DualCertificate { objective, ..cert }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::random_bipartite;
    use crate::graph::ltm_params;
    use crate::oracle::brute_force_opt;
    use crate::sampling::{enumerate_scenarios, sample_ltm, DEFAULT_ENUMERATION_CAP};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn exhaustive(network: &SocialNetwork) -> ScenarioSet {
        enumerate_scenarios(network, &ltm_params(network), DEFAULT_ENUMERATION_CAP).unwrap()
    }

    #[test]
    fn always_live_arc() {
        let net = SocialNetwork::from_arcs(2, [(0, 1)]).unwrap();
        let (inst, _) = reduce_bipartite_ltm(&net, &exhaustive(&net)).unwrap();
        assert_eq!(inst.arcs, vec![(0, 1, 1.0)]);
        assert_eq!(inst.s, vec![1.0, 0.0]);
    }

    #[test]
    fn never_live_arc() {
        let net = SocialNetwork::from_arcs(2, [(0, 1)]).unwrap();
        let set = ScenarioSet::from_arc_lists(DiffusionModel::Ltm, 2, vec![vec![], vec![]]);
        let (inst, _) = reduce_bipartite_ltm(&net, &set).unwrap();
        assert!(inst.arcs.is_empty());
        assert_eq!(inst.s, vec![1.0, 1.0]);
    }

    #[test]
    fn full_budget_takes_everything() {
        let net = SocialNetwork::from_arcs(4, [(0, 2), (1, 2), (1, 3)]).unwrap();
        let (inst, _) = reduce_bipartite_ltm(&net, &exhaustive(&net)).unwrap();
        assert_eq!(solve_bipartite(&inst, 4), (vec![0, 1, 2, 3], 4.0));
    }

    #[test]
    fn uniform_sources_pick_smallest_ids() {
        let net = SocialNetwork::from_arcs(6, [(0, 3), (1, 4), (2, 5)]).unwrap();
        let (inst, _) = reduce_bipartite_ltm(&net, &exhaustive(&net)).unwrap();
        assert_eq!(solve_bipartite(&inst, 2).0, vec![0, 1]);
    }

    #[test]
    fn rejects_two_hop_paths() {
        let net = SocialNetwork::from_arcs(3, [(0, 1), (1, 2)]).unwrap();
        assert!(matches!(reduce_bipartite_ltm(&net, &exhaustive(&net)), Err(OracleError::Structure(_))));
    }

    proptest! {
        #[test]
        fn constructive_matches_brute_force(seed in any::<u64>(), m in 1usize..6, t in 1usize..6, k in 1usize..8, sampled in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = random_bipartite(&mut rng, m, t, 0.5);
            let set = if sampled {
                sample_ltm(&net, &ltm_params(&net), 6, seed).unwrap()
            } else {
                exhaustive(&net)
            };
            let (inst, report) = reduce_bipartite_ltm(&net, &set).unwrap();
            prop_assert!(report.passed(), "{:?}", report);
            let (seeds, value) = solve_bipartite(&inst, k);
            prop_assert!(seeds.len() <= k);
            let (_, best) = brute_force_opt(&set, k, 1 << 20).unwrap();
            prop_assert!((value - best).abs() < 1e-9, "{} vs {}", value, best);
            let cert = lp_dual_certificate(&inst, k);
            prop_assert!(cert.max_violation(&inst) <= 1e-9);
            prop_assert!((cert.objective - value).abs() < 1e-9);
        }
    }
}
