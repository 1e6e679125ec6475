use serde::{Deserialize, Serialize};

use super::scc::CondensedGraph;
use super::units::ScenarioGraph;
use crate::graph::NodeId;

/// Reachability set `R(Ḡ^ω, u)` of one component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachSet {
    /// Sorted component ids.
    pub components: Vec<u32>,
    /// `Σ_{v ∈ R} |SC_v^ω|`.
    pub expanded_size: usize,
}

/// Union of two sorted, duplicate-free id lists.
pub(crate) fn merge_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Reachability of every unit of a condensed graph via the recurrence
/// `R(u) = {u} ∪ ⋃_{u' ∈ N^-(u)} R(u')`, processed in topological order.
pub fn unit_reach_sets(graph: &ScenarioGraph) -> Vec<ReachSet> {
    assert!(graph.is_condensed(), "the reach recurrence needs a topologically ordered DAG");
    let mut sets: Vec<ReachSet> = Vec::with_capacity(graph.unit_count());
    for u in 0..graph.unit_count() as u32 {
        let mut comps = vec![u];
        for &pred in graph.predecessors(u) {
            comps = merge_sorted(&comps, &sets[pred as usize].components);
        }
        let expanded_size = comps.iter().map(|&v| graph.members(v).len()).sum();
        sets.push(ReachSet { components: comps, expanded_size });
    }
    sets
}

pub fn reach_sets(cond: &CondensedGraph) -> Vec<ReachSet> {
    unit_reach_sets(cond.graph())
}

/// Expanded supports of all units, or `None` for units whose support holds
/// more than `limit` original nodes. Runs the same recurrence on node sets,
/// exploiting that a unit's support contains its predecessors' supports.
pub fn bounded_supports(graph: &ScenarioGraph, limit: usize) -> Vec<Option<Vec<NodeId>>> {
    assert!(graph.is_condensed(), "the reach recurrence needs a topologically ordered DAG");
    let mut out: Vec<Option<Vec<NodeId>>> = Vec::with_capacity(graph.unit_count());
    for u in 0..graph.unit_count() as u32 {
        let mut support = Some(graph.members(u).to_vec()).filter(|m| m.len() <= limit);
        for &pred in graph.predecessors(u) {
            support = match (support, &out[pred as usize]) {
                (Some(s), Some(p)) => Some(merge_sorted(&s, p)).filter(|m| m.len() <= limit),
                _ => None,
            };
        }
        out.push(support);
    }
    out
}

/// Expanded support size of every unit. Uses the recurrence on condensed
/// graphs and a reverse search per unit otherwise.
pub fn support_sizes(graph: &ScenarioGraph) -> Vec<usize> {
    if graph.is_condensed() {
        unit_reach_sets(graph).into_iter().map(|r| r.expanded_size).collect()
    } else {
        (0..graph.unit_count() as u32).map(|u| graph.support(u).len()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::random_dag;
    use crate::presolve::scc::scc_decompose;
    use crate::sampling::LiveArcGraph;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn live(n: usize, arcs: &[(u32, u32)]) -> LiveArcGraph {
        LiveArcGraph { scenario: 0, node_count: n, arcs: arcs.to_vec(), probability: 1.0 }
    }

    #[test]
    fn single_arc() {
        let cond = scc_decompose(&live(2, &[(0, 1)]));
        let r = reach_sets(&cond);
        assert_eq!(r[0].components, vec![0]);
        assert_eq!(r[1].components, vec![0, 1]);
    }

    #[test]
    fn five_node_example_reach() {
        let cond = scc_decompose(&live(5, &[(0, 1), (1, 0), (1, 2), (2, 3), (3, 4), (4, 2)]));
        let r = reach_sets(&cond);
        assert_eq!(r[0].components, vec![0]);
        assert_eq!(r[0].expanded_size, 2);
        assert_eq!(cond.graph().expand(&r[1].components), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn chain_reach_has_every_component() {
        let k = 9u32;
        let arcs: Vec<_> = (0..k - 1).map(|i| (i, i + 1)).collect();
        let cond = scc_decompose(&live(k as usize, &arcs));
        let r = reach_sets(&cond);
        assert_eq!(r[k as usize - 1].components.len(), k as usize);
    }

    #[test]
    fn bounded_supports_respect_limit() {
        let cond = scc_decompose(&live(4, &[(0, 1), (1, 2), (2, 3)]));
        let b = bounded_supports(cond.graph(), 2);
        assert_eq!(b[0], Some(vec![0]));
        assert_eq!(b[1], Some(vec![0, 1]));
        assert_eq!(b[2], None);
        assert_eq!(b[3], None);
        assert!(bounded_supports(cond.graph(), 0).iter().all(Option::is_none));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn recurrence_matches_reverse_search(seed in any::<u64>(), n in 1usize..14, density in 0.0f64..0.6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cond = scc_decompose(&random_dag(&mut rng, n, density));
            let sets = reach_sets(&cond);
            for (u, set) in sets.iter().enumerate() {
                prop_assert_eq!(&set.components, &cond.graph().reverse_reach(u as u32));
            }
        }

        #[test]
        fn bounded_support_agrees_with_full(seed in any::<u64>(), n in 1usize..12, density in 0.0f64..0.5, limit in 0usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = crate::generators::random_live_graph(&mut rng, n, density);
            let cond = scc_decompose(&g);
            let bounded = bounded_supports(cond.graph(), limit);
            for (u, b) in bounded.iter().enumerate() {
                let full = cond.graph().support(u as u32);
                if full.len() <= limit {
                    prop_assert_eq!(b.as_ref(), Some(&full));
                } else {
                    prop_assert!(b.is_none());
                }
            }
        }
    }
}
