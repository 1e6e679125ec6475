use serde::{Deserialize, Serialize};

use super::cut::BendersCut;
use super::BendersError;
use crate::combin::{argmax_subset, binomial, seed_set_size, DEFAULT_SUBSET_CAP};
use crate::graph::NodeId;

/// Master problem data: `max Σ_j l_j y_j + Σ_ω φ^ω` subject to the rows of
/// every scenario and `Σ_j y_j ≤ K`, in scaled weight units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MasterState {
    pub node_count: usize,
    pub cardinality: usize,
    /// Linear seed objective `l_j` (SNA link weights).
    pub linear: Vec<f64>,
    /// `Φ^ω(e_j)` per scenario.
    pub submodular: Vec<BendersCut>,
    /// Upper-bound row `φ^ω ≤ Σ_u f_u^ω` per scenario.
    pub ceilings: Vec<f64>,
    /// Optimality cuts added so far, per scenario.
    pub cuts: Vec<Vec<BendersCut>>,
    pub incumbent: Option<(Vec<NodeId>, f64)>,
    pub dual_bound: f64,
}

impl MasterState {
    pub fn scenario_count(&self) -> usize {
        self.submodular.len()
    }

    pub fn cut_count(&self) -> usize {
        self.cuts.iter().map(Vec::len).sum()
    }

    /// `φ^ω` reachable for the seed set: the minimum over the scenario's rows.
    pub fn phi_bound(&self, scenario: usize, seeds: &[NodeId]) -> f64 {
        let mut bound = self.submodular[scenario].evaluate_set(seeds).min(self.ceilings[scenario]);
        for cut in &self.cuts[scenario] {
            bound = bound.min(cut.evaluate_set(seeds));
        }
        bound
    }

    /// Master objective of a fixed seed set.
    pub fn value(&self, seeds: &[NodeId]) -> f64 {
        let linear: f64 = seeds.iter().map(|&j| self.linear[j as usize]).sum();
        linear + (0..self.scenario_count()).map(|w| self.phi_bound(w, seeds)).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MasterSolution {
    pub seeds: Vec<NodeId>,
    pub phi: Vec<f64>,
    pub value: f64,
}

/// An exact solver for the master problem.
pub trait MasterSolver {
    fn solve(&mut self, state: &MasterState) -> Result<MasterSolution, BendersError>;
}

/// Exact master by enumeration of all seed sets of size `min(K, n)`,
/// returning the lexicographically smallest optimum.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationMaster {
    pub cap: u64,
    pub tie_tolerance: f64,
}

impl Default for EnumerationMaster {
    fn default() -> Self {
        EnumerationMaster { cap: DEFAULT_SUBSET_CAP, tie_tolerance: 1e-9 }
    }
}

impl EnumerationMaster {
    pub fn with_cap(cap: u64) -> Self {
        EnumerationMaster { cap, ..Default::default() }
    }
}

/// Solves `state` with the default enumeration master under `cap`.
pub fn master_enumerate(state: &MasterState, cap: u64) -> Result<MasterSolution, BendersError> {
    EnumerationMaster::with_cap(cap).solve(state)
}

impl MasterSolver for EnumerationMaster {
    fn solve(&mut self, state: &MasterState) -> Result<MasterSolution, BendersError> {
        let n = state.node_count;
        let size = seed_set_size(n, state.cardinality);
        let count = binomial(n, size);
        if count > self.cap {
            return Err(BendersError::MasterCapExceeded { count, cap: self.cap });
        }
        let (seeds, value) = argmax_subset(n, size, self.tie_tolerance, |s| state.value(s));
        let phi = (0..state.scenario_count()).map(|w| state.phi_bound(w, &seeds)).collect();
        Ok(MasterSolution { seeds, phi, value })
    }
}
