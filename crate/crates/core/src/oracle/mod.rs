//! Ground-truth oracles and verifiers for the analytical special cases.

mod bipartite;
mod complete;

use thiserror::Error;

pub use bipartite::{
    bipartite_value, direct_coefficients, lp_dual_certificate, reduce_bipartite_ltm, solve_bipartite,
    BipartiteInstance, BipartiteReport, DualCertificate,
};
pub use complete::{check_condition_11, condition_11_terms, p_star, verify_theorem2, ConnectivityReport, PStar};

use crate::combin::{argmax_subset, binomial, seed_set_size};
use crate::graph::NodeId;
use crate::presolve::PresolveError;
use crate::sampling::{LiveArcGraph, SamplingError, ScenarioSet};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("brute force would visit {count} seed sets, above the cap of {cap}")]
    CapExceeded { count: u64, cap: u64 },
    #[error("not a one-way bipartite LTM instance: {0}")]
    Structure(String),
    #[error("condition (n = {n}, p = {p}) fails: max term {max_term:.6} exceeds 1")]
    ConditionViolated { n: usize, p: f64, max_term: f64 },
    #[error(transparent)]
    Presolve(#[from] PresolveError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// `σ^ω(S)`: nodes reachable from `seeds` in one live-arc graph.
pub fn scenario_spread(live: &LiveArcGraph, seeds: &[NodeId]) -> usize {
    let succ = live.successors();
    let mut seen = vec![false; live.node_count];
    let mut stack: Vec<NodeId> = Vec::new();
    for &s in seeds {
        if !seen[s as usize] {
            seen[s as usize] = true;
            stack.push(s);
        }
    }
    let mut count = stack.len();
    while let Some(v) = stack.pop() {
        for &w in succ.neighbors(v) {
            if !seen[w as usize] {
                seen[w as usize] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count
}

/// `σ(S) = Σ_ω p^ω σ^ω(S)`.
pub fn spread(seeds: &[NodeId], scenarios: &ScenarioSet) -> f64 {
    scenarios.scenarios.iter().map(|live| live.probability * scenario_spread(live, seeds) as f64).sum()
}

/// Exact optimum over all seed sets of size `min(K, |V|)`, lexicographically
/// first on ties.
pub fn brute_force_opt(scenarios: &ScenarioSet, k: usize, cap: u64) -> Result<(Vec<NodeId>, f64), OracleError> {
    let n = scenarios.node_count;
    let size = seed_set_size(n, k);
    let count = binomial(n, size);
    if count > cap {
        return Err(OracleError::CapExceeded { count, cap });
    }
    Ok(argmax_subset(n, size, 1e-9, |s| spread(s, scenarios)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::random_scenario_set;
    use crate::graph::DiffusionModel;
    use crate::model::build_full;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn five_node_example() -> ScenarioSet {
        ScenarioSet::from_arc_lists(DiffusionModel::Icm, 5, vec![vec![(0, 1), (1, 0), (1, 2), (2, 3), (3, 4), (4, 2)]])
    }

    #[test]
    fn spread_examples() {
        let s = five_node_example();
        assert_eq!(spread(&[0, 1, 2, 3, 4], &s), 5.0);
        assert_eq!(spread(&[], &s), 0.0);
        assert_eq!(spread(&[2], &s), 3.0);
    }

    #[test]
    fn brute_force_examples() {
        let star = ScenarioSet::from_arc_lists(DiffusionModel::Icm, 5, vec![(1..5).map(|j| (0, j)).collect()]);
        assert_eq!(brute_force_opt(&star, 1, 100).unwrap(), (vec![0], 5.0));
        assert_eq!(brute_force_opt(&star, 5, 100).unwrap().1, 5.0);
        let empty = ScenarioSet::from_arc_lists(DiffusionModel::Icm, 4, vec![vec![]]);
        assert_eq!(brute_force_opt(&empty, 2, 100).unwrap().1, 2.0);
        assert!(matches!(brute_force_opt(&empty, 2, 3), Err(OracleError::CapExceeded { count: 6, cap: 3 })));
    }

    #[test]
    fn relabelling_keeps_value() {
        let s = five_node_example();
        let perm = [3u32, 0, 4, 1, 2];
        let lists = vec![s.scenarios[0].arcs.iter().map(|&(i, j)| (perm[i as usize], perm[j as usize])).collect()];
        let t = ScenarioSet::from_arc_lists(DiffusionModel::Icm, 5, lists);
        assert_eq!(brute_force_opt(&s, 2, 100).unwrap().1, brute_force_opt(&t, 2, 100).unwrap().1);
    }

    proptest! {
        #[test]
        fn spread_matches_covering_model(seed in any::<u64>(), n in 1usize..9, omega in 1usize..5, exhaustive in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let set = random_scenario_set(&mut rng, n, 0.3, omega, exhaustive);
            let model = build_full(&set, n, None).unwrap();
            for mask in 0u32..1 << n {
                let seeds: Vec<u32> = (0..n as u32).filter(|j| mask >> j & 1 == 1).collect();
                prop_assert!((spread(&seeds, &set) - model.evaluate(&seeds)).abs() < 1e-9);
            }
        }

        #[test]
        fn optimum_is_monotone_in_k(seed in any::<u64>(), n in 2usize..8, omega in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let set = random_scenario_set(&mut rng, n, 0.25, omega, false);
            let mut last = 0.0;
            for k in 1..=n {
                let v = brute_force_opt(&set, k, 1 << 20).unwrap().1;
                prop_assert!(v + 1e-12 >= last);
                prop_assert!(v <= n as f64 + 1e-9);
                last = v;
            }
        }
    }
}
