use serde::{Deserialize, Serialize};

use super::units::ScenarioGraph;
use crate::graph::{Csr, NodeId};
use crate::sampling::LiveArcGraph;

/// SCC condensation `Ḡ^ω` of one live-arc graph.
///
/// Component ids are assigned in topological order, so every DAG arc
/// `(u, v)` has `u < v` and `topo_order` is the identity permutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensedGraph {
    pub scenario: usize,
    pub probability: f64,
    /// `|A^ω|` of the source live-arc graph.
    pub live_arc_count: usize,
    graph: ScenarioGraph,
    dag_arcs: Vec<(u32, u32)>,
    topo_order: Vec<u32>,
}

impl CondensedGraph {
    pub fn component_count(&self) -> usize {
        self.graph.unit_count()
    }

    pub fn component(&self, c: u32) -> &[NodeId] {
        self.graph.members(c)
    }

    pub fn components(&self) -> impl Iterator<Item = &[NodeId]> {
        (0..self.component_count() as u32).map(|c| self.graph.members(c))
    }

    pub fn scc_of(&self, node: NodeId) -> u32 {
        self.graph.unit_of(node)
    }

    /// Deduplicated component arcs `Ā^ω`, sorted.
    pub fn dag_arcs(&self) -> &[(u32, u32)] {
        &self.dag_arcs
    }

    pub fn topo_order(&self) -> &[u32] {
        &self.topo_order
    }

    pub fn graph(&self) -> &ScenarioGraph {
        &self.graph
    }

    pub fn into_graph(self) -> ScenarioGraph {
        self.graph
    }
}

/// Tarjan's algorithm with an explicit call stack. Components come out in
/// reverse topological order.
fn tarjan(succ: &Csr) -> Vec<Vec<NodeId>> {
    const UNVISITED: u32 = u32::MAX;
    let n = succ.node_count();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut calls: Vec<(u32, usize)> = Vec::new();
    let mut counter = 0u32;
    let mut components = Vec::new();

    for root in 0..n as u32 {
        if index[root as usize] != UNVISITED {
            continue;
        }
        index[root as usize] = counter;
        low[root as usize] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        calls.push((root, 0));

        while let Some(&mut (v, ref mut pos)) = calls.last_mut() {
            let nbrs = succ.neighbors(v);
            if *pos < nbrs.len() {
                let w = nbrs[*pos];
                *pos += 1;
                if index[w as usize] == UNVISITED {
                    index[w as usize] = counter;
                    low[w as usize] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    calls.push((w, 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(parent, _)) = calls.last() {
                low[parent as usize] = low[parent as usize].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack holds the component root");
                    on_stack[w as usize] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                components.push(comp);
            }
        }
    }
    components
}

/// Condenses `live` into its DAG of strongly connected components in
/// `O(|V| + |A^ω|)`.
pub fn scc_decompose(live: &LiveArcGraph) -> CondensedGraph {
    let mut components = tarjan(&live.successors());
    components.reverse();
    let mut unit_of = vec![0u32; live.node_count];
    for (c, members) in components.iter().enumerate() {
        for &node in members {
            unit_of[node as usize] = c as u32;
        }
    }
    let mut dag_arcs: Vec<(u32, u32)> =
        live.arcs.iter().map(|&(i, j)| (unit_of[i as usize], unit_of[j as usize])).filter(|(u, v)| u != v).collect();
    dag_arcs.sort_unstable();
    dag_arcs.dedup();
    let topo_order = (0..components.len() as u32).collect();
    CondensedGraph {
        scenario: live.scenario,
        probability: live.probability,
        live_arc_count: live.arcs.len(),
        graph: ScenarioGraph::condensed(components, unit_of, &dag_arcs),
        dag_arcs,
        topo_order,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::random_live_graph;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn live(n: usize, arcs: &[(u32, u32)]) -> LiveArcGraph {
        LiveArcGraph { scenario: 0, node_count: n, arcs: arcs.to_vec(), probability: 1.0 }
    }

    /// Nodes 1..=5 of the two-SCC example are ids 0..=4 here.
    pub(crate) fn five_node_example() -> LiveArcGraph {
        live(5, &[(0, 1), (1, 0), (1, 2), (2, 3), (3, 4), (4, 2)])
    }

    #[test]
    fn five_node_example_components() {
        let cond = scc_decompose(&five_node_example());
        let comps: Vec<Vec<u32>> = cond.components().map(|c| c.to_vec()).collect();
        assert_eq!(comps, vec![vec![0, 1], vec![2, 3, 4]]);
        assert_eq!(cond.dag_arcs(), &[(0, 1)]);
    }

    #[test]
    fn dag_input_gives_singletons() {
        let g = live(4, &[(0, 1), (0, 2), (1, 3), (2, 3), (0, 3)]);
        let cond = scc_decompose(&g);
        assert_eq!(cond.component_count(), 4);
        assert_eq!(cond.dag_arcs().len(), 5);
    }

    #[test]
    fn full_cycle_is_one_component() {
        let n = 7u32;
        let arcs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        let cond = scc_decompose(&live(n as usize, &arcs));
        assert_eq!(cond.component_count(), 1);
        assert_eq!(cond.component(0).len(), 7);
        assert!(cond.dag_arcs().is_empty());
    }

    #[test]
    fn self_loop_is_singleton_component() {
        let cond = scc_decompose(&live(2, &[(0, 0), (0, 1)]));
        assert_eq!(cond.component_count(), 2);
        assert_eq!(cond.dag_arcs().len(), 1);
    }

    #[test]
    fn long_path_does_not_overflow_stack() {
        let n = 200_000u32;
        let arcs: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).chain([(n - 1, 0)]).collect();
        let cond = scc_decompose(&live(n as usize, &arcs));
        assert_eq!(cond.component_count(), 1);
    }

    fn reaches(g: &LiveArcGraph, from: u32, to: u32) -> bool {
        let succ = g.successors();
        let mut seen = vec![false; g.node_count];
        let mut stack = vec![from];
        seen[from as usize] = true;
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            for &w in succ.neighbors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        false
    }

    proptest! {
        #[test]
        fn condensation_invariants(seed in any::<u64>(), n in 1usize..12, density in 0.0f64..0.5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_live_graph(&mut rng, n, density);
            let cond = scc_decompose(&g);
            // partition of V
            let total: usize = cond.components().map(|c| c.len()).sum();
            prop_assert_eq!(total, n);
            // same component iff mutually reachable
            for a in 0..n as u32 {
                for b in 0..n as u32 {
                    let same = cond.scc_of(a) == cond.scc_of(b);
                    prop_assert_eq!(same, reaches(&g, a, b) && reaches(&g, b, a));
                }
            }
            // topological ids and exact arc correspondence
            let mut expected: Vec<(u32, u32)> = g.arcs.iter()
                .map(|&(i, j)| (cond.scc_of(i), cond.scc_of(j)))
                .filter(|(u, v)| u != v)
                .collect();
            expected.sort_unstable();
            expected.dedup();
            prop_assert_eq!(cond.dag_arcs(), &expected[..]);
            prop_assert!(cond.dag_arcs().iter().all(|(u, v)| u < v));
            // condensing the condensation gives singletons only
            let dag = LiveArcGraph { scenario: 0, node_count: cond.component_count(), arcs: cond.dag_arcs().to_vec(), probability: 1.0 };
            let again = scc_decompose(&dag);
            prop_assert_eq!(again.component_count(), cond.component_count());
        }
    }
}
