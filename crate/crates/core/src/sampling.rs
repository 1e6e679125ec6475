//! Live-arc scenario generation under ICM and LTM.
//!
//! Sampling is keyed by `(seed, scenario)`: scenario `ω` draws from its own
//! ChaCha stream, consuming one uniform per arc (ICM) or per node with
//! incoming arcs (LTM). Output is therefore identical for any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Csr, DiffusionModel, DiffusionParams, GraphError, NodeId, SocialNetwork, PROBABILITY_TOLERANCE};

/// Default cap on the number of enumerated scenarios.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("exhaustive enumeration needs about {estimate:.3e} scenarios, above the cap of {cap}")]
    CapExceeded { estimate: f64, cap: u64 },
    #[error("parameters are for {found} but {expected} sampling was requested")]
    WrongModel { expected: DiffusionModel, found: DiffusionModel },
    #[error("scenario count must be at least 1")]
    NoScenarios,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// One scenario `G^ω = (V, A^ω)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiveArcGraph {
    pub scenario: usize,
    pub node_count: usize,
    /// Live arcs, a subset of the parent network's arcs in the same order.
    pub arcs: Vec<(NodeId, NodeId)>,
    pub probability: f64,
}

impl LiveArcGraph {
    pub fn successors(&self) -> Csr {
        Csr::from_pairs(self.node_count, self.arcs.iter().copied())
    }

    pub fn predecessors(&self) -> Csr {
        Csr::from_pairs(self.node_count, self.arcs.iter().map(|&(s, d)| (d, s)))
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count];
        for &(_, dst) in &self.arcs {
            deg[dst as usize] += 1;
        }
        deg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    Sampled,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    pub model: DiffusionModel,
    pub node_count: usize,
    pub mode: SamplingMode,
    pub rng_seed: Option<u64>,
    pub scenarios: Vec<LiveArcGraph>,
}

impl ScenarioSet {
    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn total_probability(&self) -> f64 {
        self.scenarios.iter().map(|s| s.probability).sum()
    }

    /// Sampled sets are equiprobable with `p^ω = 1/|Ω|`.
    pub fn is_equiprobable(&self) -> bool {
        self.mode == SamplingMode::Sampled
    }

    /// Builds a sampled (equiprobable) set from explicit arc lists.
    pub fn from_arc_lists(model: DiffusionModel, node_count: usize, lists: Vec<Vec<(NodeId, NodeId)>>) -> Self {
        let p = 1.0 / lists.len() as f64;
        let scenarios = lists
            .into_iter()
            .enumerate()
            .map(|(scenario, arcs)| LiveArcGraph { scenario, node_count, arcs, probability: p })
            .collect();
        ScenarioSet { model, node_count, mode: SamplingMode::Sampled, rng_seed: None, scenarios }
    }
}

fn scenario_rng(seed: u64, scenario: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(scenario as u64);
    rng
}

fn check_model(params: &DiffusionParams, expected: DiffusionModel) -> Result<(), SamplingError> {
    if params.model != expected {
        return Err(SamplingError::WrongModel { expected, found: params.model });
    }
    Ok(())
}

/// Samples `count` ICM live-arc graphs: every arc is live independently with
/// probability `π_ij`.
pub fn sample_icm(
    network: &SocialNetwork,
    params: &DiffusionParams,
    count: usize,
    seed: u64,
) -> Result<ScenarioSet, SamplingError> {
    check_model(params, DiffusionModel::Icm)?;
    params.validate(network)?;
    if count == 0 {
        return Err(SamplingError::NoScenarios);
    }
    let p = 1.0 / count as f64;
    let scenarios = (0..count)
        .into_par_iter()
        .map(|scenario| {
            let mut rng = scenario_rng(seed, scenario);
            let arcs = network
                .arcs()
                .iter()
                .zip(&params.values)
                .filter(|&(_, &pi)| rng.random::<f64>() < pi)
                .map(|(arc, _)| (arc.src, arc.dst))
                .collect();
            LiveArcGraph { scenario, node_count: network.node_count(), arcs, probability: p }
        })
        .collect();
    Ok(ScenarioSet {
        model: DiffusionModel::Icm,
        node_count: network.node_count(),
        mode: SamplingMode::Sampled,
        rng_seed: Some(seed),
        scenarios,
    })
}

/// Samples `count` LTM live-arc graphs: every node keeps at most one incoming
/// arc, `(i, j)` with probability `b_ij` and none with `1 − Σ_i b_ij`.
pub fn sample_ltm(
    network: &SocialNetwork,
    params: &DiffusionParams,
    count: usize,
    seed: u64,
) -> Result<ScenarioSet, SamplingError> {
    check_model(params, DiffusionModel::Ltm)?;
    params.validate(network)?;
    if count == 0 {
        return Err(SamplingError::NoScenarios);
    }
    let incoming = network.in_arcs();
    let p = 1.0 / count as f64;
    let scenarios = (0..count)
        .into_par_iter()
        .map(|scenario| {
            let mut rng = scenario_rng(seed, scenario);
            let mut chosen: Vec<usize> = Vec::new();
            for arcs_in in incoming.iter().filter(|a| !a.is_empty()) {
                let u: f64 = rng.random();
                let mut cumulative = 0.0;
                for &idx in arcs_in {
                    cumulative += params.values[idx];
                    if u < cumulative {
                        chosen.push(idx);
                        break;
                    }
                }
            }
            chosen.sort_unstable();
            let arcs = chosen.iter().map(|&i| (network.arcs()[i].src, network.arcs()[i].dst)).collect();
            LiveArcGraph { scenario, node_count: network.node_count(), arcs, probability: p }
        })
        .collect();
    Ok(ScenarioSet {
        model: DiffusionModel::Ltm,
        node_count: network.node_count(),
        mode: SamplingMode::Sampled,
        rng_seed: Some(seed),
        scenarios,
    })
}

/// Dispatches to [`sample_icm`] or [`sample_ltm`] on `params.model`.
pub fn sample(
    network: &SocialNetwork,
    params: &DiffusionParams,
    count: usize,
    seed: u64,
) -> Result<ScenarioSet, SamplingError> {
    match params.model {
        DiffusionModel::Icm => sample_icm(network, params, count, seed),
        DiffusionModel::Ltm => sample_ltm(network, params, count, seed),
    }
}

/// Enumerates every live-arc graph of positive probability with its exact
/// product probability.
///
/// Arcs with `π_ij = 1` and LTM "no arc" options of probability zero are not
/// branched on, so the result holds `2^{#uncertain arcs}` ICM scenarios or
/// `Π_j (#options of j)` LTM scenarios.
pub fn enumerate_scenarios(
    network: &SocialNetwork,
    params: &DiffusionParams,
    cap: u64,
) -> Result<ScenarioSet, SamplingError> {
    params.validate(network)?;
    let n = network.node_count();
    let scenarios = match params.model {
        DiffusionModel::Icm => {
            let uncertain: Vec<usize> =
                (0..network.arc_count()).filter(|&i| params.values[i] < 1.0 - PROBABILITY_TOLERANCE).collect();
            let estimate = 2f64.powi(uncertain.len() as i32);
            if estimate > cap as f64 {
                return Err(SamplingError::CapExceeded { estimate, cap });
            }
            let mut live = vec![true; network.arc_count()];
            (0u64..1 << uncertain.len())
                .map(|mask| {
                    let mut probability = 1.0;
                    for (bit, &idx) in uncertain.iter().enumerate() {
                        let on = mask >> bit & 1 == 1;
                        live[idx] = on;
                        let pi = params.values[idx];
                        probability *= if on { pi } else { 1.0 - pi };
                    }
                    let arcs =
                        network.arcs().iter().zip(&live).filter(|(_, &on)| on).map(|(a, _)| (a.src, a.dst)).collect();
                    (arcs, probability)
                })
                .collect::<Vec<_>>()
        }
        DiffusionModel::Ltm => {
            // options per node: Some(arc index) or None for "no live arc"
            let mut options: Vec<Vec<(Option<usize>, f64)>> = Vec::new();
            for arcs_in in network.in_arcs().iter().filter(|a| !a.is_empty()) {
                let mut opts: Vec<(Option<usize>, f64)> = arcs_in
                    .iter()
                    .filter(|&&i| params.values[i] > PROBABILITY_TOLERANCE)
                    .map(|&i| (Some(i), params.values[i]))
                    .collect();
                let rest = 1.0 - arcs_in.iter().map(|&i| params.values[i]).sum::<f64>();
                if rest > PROBABILITY_TOLERANCE {
                    opts.push((None, rest));
                }
                options.push(opts);
            }
            let estimate: f64 = options.iter().map(|o| o.len() as f64).product();
            if estimate > cap as f64 {
                return Err(SamplingError::CapExceeded { estimate, cap });
            }
            let mut digits = vec![0usize; options.len()];
            let mut out = Vec::with_capacity(estimate as usize);
            loop {
                let mut probability = 1.0;
                let mut chosen: Vec<usize> = Vec::new();
                for (opts, &d) in options.iter().zip(&digits) {
                    let (arc, prob) = opts[d];
                    probability *= prob;
                    chosen.extend(arc);
                }
                chosen.sort_unstable();
                out.push((
                    chosen.iter().map(|&i| (network.arcs()[i].src, network.arcs()[i].dst)).collect(),
                    probability,
                ));
                // mixed-radix increment
                let mut pos = 0;
                loop {
                    if pos == digits.len() {
                        break;
                    }
                    digits[pos] += 1;
                    if digits[pos] < options[pos].len() {
                        break;
                    }
                    digits[pos] = 0;
                    pos += 1;
                }
                if pos == digits.len() {
                    break;
                }
            }
            out
        }
    };
    let scenarios = scenarios
        .into_iter()
        .enumerate()
        .map(|(scenario, (arcs, probability))| LiveArcGraph { scenario, node_count: n, arcs, probability })
        .collect();
    Ok(ScenarioSet { model: params.model, node_count: n, mode: SamplingMode::Exhaustive, rng_seed: None, scenarios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{icm_params, ltm_params};
    use std::collections::BTreeSet;

    fn net(n: usize, arcs: &[(u32, u32)]) -> SocialNetwork {
        SocialNetwork::from_arcs(n, arcs.iter().copied()).unwrap()
    }

    #[test]
    fn certain_arcs_are_always_live() {
        let g = net(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]);
        let set = sample_icm(&g, &icm_params(&g, 1.0).unwrap(), 25, 9).unwrap();
        let all: Vec<_> = g.arcs().iter().map(|a| (a.src, a.dst)).collect();
        assert_eq!(set.len(), 25);
        assert!(set.scenarios.iter().all(|s| s.arcs == all));
        assert!((set.total_probability() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn icm_half_frequency() {
        let g = net(2, &[(0, 1)]);
        let params = DiffusionParams { model: DiffusionModel::Icm, values: vec![0.5] };
        let set = sample_icm(&g, &params, 10_000, 42).unwrap();
        let live = set.scenarios.iter().filter(|s| !s.arcs.is_empty()).count() as f64 / 10_000.0;
        assert!((live - 0.5).abs() <= 0.02, "frequency {live}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = net(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 3)]);
        let p = icm_params(&g, 0.4).unwrap();
        assert_eq!(sample_icm(&g, &p, 50, 3).unwrap(), sample_icm(&g, &p, 50, 3).unwrap());
        assert_ne!(sample_icm(&g, &p, 50, 3).unwrap(), sample_icm(&g, &p, 50, 4).unwrap());
        let l = ltm_params(&g);
        assert_eq!(sample_ltm(&g, &l, 50, 3).unwrap(), sample_ltm(&g, &l, 50, 3).unwrap());
    }

    #[test]
    fn ltm_single_in_arc_always_live() {
        let g = net(2, &[(0, 1)]);
        let set = sample_ltm(&g, &ltm_params(&g), 100, 1).unwrap();
        assert!(set.scenarios.iter().all(|s| s.arcs == vec![(0, 1)]));
    }

    #[test]
    fn ltm_in_degree_at_most_one() {
        let g = net(5, &[(0, 1), (2, 1), (3, 1), (1, 2), (4, 2), (0, 4), (1, 0)]);
        let set = sample_ltm(&g, &ltm_params(&g), 2_000, 5).unwrap();
        assert!(set.scenarios.iter().all(|s| s.in_degrees().iter().all(|&d| d <= 1)));
    }

    #[test]
    fn ltm_selection_frequencies() {
        // node 2 receives multiplicities {2, 1} from nodes 0 and 1
        let g = SocialNetwork::from_arcs(3, [(0, 2), (0, 2), (1, 2)]).unwrap();
        let set = sample_ltm(&g, &ltm_params(&g), 9_000, 11).unwrap();
        let from0 = set.scenarios.iter().filter(|s| s.arcs == vec![(0, 2)]).count() as f64 / 9_000.0;
        let from1 = set.scenarios.iter().filter(|s| s.arcs == vec![(1, 2)]).count() as f64 / 9_000.0;
        assert!((from0 - 2.0 / 3.0).abs() <= 0.02, "{from0}");
        assert!((from1 - 1.0 / 3.0).abs() <= 0.02, "{from1}");
    }

    #[test]
    fn wrong_model_rejected() {
        let g = net(2, &[(0, 1)]);
        assert!(matches!(sample_icm(&g, &ltm_params(&g), 3, 0), Err(SamplingError::WrongModel { .. })));
        assert!(matches!(sample_icm(&g, &icm_params(&g, 0.2).unwrap(), 0, 0), Err(SamplingError::NoScenarios)));
    }

    #[test]
    fn enumerate_icm_two_arcs() {
        let g = net(3, &[(0, 1), (1, 2)]);
        let set = enumerate_scenarios(&g, &icm_params(&g, 0.5).unwrap(), DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(set.len(), 4);
        assert!(set.scenarios.iter().all(|s| s.probability == 0.25));
        assert_eq!(set.mode, SamplingMode::Exhaustive);
    }

    #[test]
    fn enumerate_icm_three_arcs_distinct_subsets() {
        let g = net(3, &[(0, 1), (1, 2), (2, 0)]);
        let params = DiffusionParams { model: DiffusionModel::Icm, values: vec![0.3, 0.6, 0.9] };
        let set = enumerate_scenarios(&g, &params, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(set.len(), 8);
        let subsets: BTreeSet<_> = set.scenarios.iter().map(|s| s.arcs.clone()).collect();
        assert_eq!(subsets.len(), 8);
        assert!((set.total_probability() - 1.0).abs() < 1e-12);
        // direct product check for the full scenario
        let full = set.scenarios.iter().find(|s| s.arcs.len() == 3).unwrap();
        assert!((full.probability - 0.3 * 0.6 * 0.9).abs() < 1e-15);
    }

    #[test]
    fn enumerate_ltm_two_options() {
        let g = net(3, &[(0, 2), (1, 2)]);
        let params = DiffusionParams { model: DiffusionModel::Ltm, values: vec![0.6, 0.4] };
        let set = enumerate_scenarios(&g, &params, DEFAULT_ENUMERATION_CAP).unwrap();
        let mut probs: Vec<f64> = set.scenarios.iter().map(|s| s.probability).collect();
        probs.sort_by(f64::total_cmp);
        assert_eq!(probs, vec![0.4, 0.6]);
    }

    #[test]
    fn enumerate_ltm_with_slack_counts_none_option() {
        // distinct in-neighbour counts are 2 and 1, weights leave slack
        let g = net(3, &[(0, 2), (1, 2), (2, 1)]);
        let params = DiffusionParams { model: DiffusionModel::Ltm, values: vec![0.5, 0.25, 0.5] };
        let set = enumerate_scenarios(&g, &params, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(set.len(), 3 * 2);
        assert!(set.scenarios.iter().all(|s| s.in_degrees().iter().all(|&d| d <= 1)));
        assert!((set.total_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn enumeration_cap_refuses() {
        let g = SocialNetwork::complete(6);
        let err = enumerate_scenarios(&g, &icm_params(&g, 0.5).unwrap(), 1 << 10).unwrap_err();
        assert!(matches!(err, SamplingError::CapExceeded { cap: 1024, .. }), "{err}");
    }

    #[test]
    fn sampled_spread_converges_to_exhaustive() {
        // expected number of nodes reached from node 0 on a 4-arc graph
        let g = net(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]);
        let params = icm_params(&g, 0.5).unwrap();
        let reached = |s: &LiveArcGraph| {
            let succ = s.successors();
            let mut seen = [false; 4];
            let mut stack = vec![0u32];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for &w in succ.neighbors(v) {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        stack.push(w);
                    }
                }
            }
            seen.iter().filter(|&&b| b).count() as f64
        };
        let exact_set = enumerate_scenarios(&g, &params, DEFAULT_ENUMERATION_CAP).unwrap();
        let exact: f64 = exact_set.scenarios.iter().map(|s| s.probability * reached(s)).sum();
        let second: f64 = exact_set.scenarios.iter().map(|s| s.probability * reached(s).powi(2)).sum();
        let sigma = ((second - exact * exact) / 10_000.0).sqrt();
        let sampled_set = sample_icm(&g, &params, 10_000, 2024).unwrap();
        let sampled: f64 = sampled_set.scenarios.iter().map(|s| s.probability * reached(s)).sum();
        assert!((sampled - exact).abs() <= 3.0 * sigma, "{sampled} vs {exact} (σ={sigma})");
    }
}
