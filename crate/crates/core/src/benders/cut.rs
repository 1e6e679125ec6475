use serde::{Deserialize, Serialize};

use super::cache::ReachCache;
use crate::graph::NodeId;
use crate::presolve::ScenarioSlice;

/// Optimality cut `φ^ω ≤ Σ_j c_j y_j + C` in scaled weight units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendersCut {
    pub scenario: usize,
    /// Dense `c_j^ω` over original nodes.
    pub coefficients: Vec<f64>,
    pub constant: f64,
}

impl BendersCut {
    pub fn evaluate(&self, y: &[f64]) -> f64 {
        self.coefficients.iter().zip(y).map(|(c, v)| c * v).sum::<f64>() + self.constant
    }

    /// `c · y_S + C` for a binary seed set.
    pub fn evaluate_set(&self, seeds: &[NodeId]) -> f64 {
        seeds.iter().map(|&j| self.coefficients[j as usize]).sum::<f64>() + self.constant
    }

    /// The cut with SNA link weights `(j, f)` added to `c_j`.
    pub fn with_links(mut self, links: &[(NodeId, f64)]) -> Self {
        for &(j, f) in links {
            self.coefficients[j as usize] += f;
        }
        self
    }

    /// Nonzero coefficients as `(node, c_j)` pairs.
    pub fn sparse(&self) -> Vec<(NodeId, f64)> {
        self.coefficients.iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(j, &c)| (j as NodeId, c)).collect()
    }
}

/// Closed-form dual of one representative: `(α, β) = (0, f)` when its
/// support is covered, `(f, 0)` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepDual {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiEvaluation {
    /// `Φ^ω(ȳ)` including SNA link terms.
    pub value: f64,
    /// One dual pair per surviving representative, in slice order.
    pub duals: Vec<RepDual>,
}

/// `Φ^ω(ȳ) = Σ_u f_u min{1, ȳ(support_u)} + Σ_links f ȳ_j` with the dual
/// solution of the scenario subproblem.
pub fn phi(slice: &ScenarioSlice, links: &[(NodeId, f64)], y: &[f64]) -> PhiEvaluation {
    let mut value: f64 = links.iter().map(|&(j, f)| f * y[j as usize]).sum();
    let mut duals = Vec::with_capacity(slice.reps.len());
    for rep in &slice.reps {
        let cover: f64 = slice.support(rep.unit).iter().map(|&j| y[j as usize]).sum();
        if cover >= 1.0 {
            value += rep.weight;
            duals.push(RepDual { alpha: 0.0, beta: rep.weight });
        } else {
            value += rep.weight * cover;
            duals.push(RepDual { alpha: rep.weight, beta: 0.0 });
        }
    }
    PhiEvaluation { value, duals }
}

/// Builds the optimality cut of one scenario at `ȳ`.
///
/// Units holding a node set to at least one in total seed everything they
/// reach forward, so those representatives go straight into `C` without a
/// reachability lookup. Remaining supports come from `cache` or a reverse
/// search.
pub fn benders_cut(slice: &ScenarioSlice, y: &[f64], cache: Option<&ReachCache>) -> BendersCut {
    let graph = &slice.graph;
    let n = graph.node_count();
    let seeded: Vec<u32> = (0..graph.unit_count() as u32).filter(|&u| graph.unit_sum(u, y) >= 1.0).collect();
    let reached = graph.forward_reach(&seeded);
    let mut coefficients = vec![0.0; n];
    let mut constant = 0.0;
    for rep in &slice.reps {
        if reached[rep.unit as usize] {
            constant += rep.weight;
            continue;
        }
        let owned;
        let support: &[NodeId] = match cache.and_then(|c| c.get(slice.scenario, rep.unit)) {
            Some(s) => s,
            None => {
                owned = slice.support(rep.unit);
                &owned
            }
        };
        let cover: f64 = support.iter().map(|&j| y[j as usize]).sum();
        if cover >= 1.0 {
            constant += rep.weight;
        } else {
            for &j in support {
                coefficients[j as usize] += rep.weight;
            }
        }
    }
    BendersCut { scenario: slice.scenario, coefficients, constant }
}

/// Cut assembled directly from the closed-form duals: `c_j = Σ α_u` over
/// representatives whose support holds `j`, and `C = Σ β_u`.
pub fn cut_from_duals(slice: &ScenarioSlice, duals: &[RepDual]) -> BendersCut {
    let mut coefficients = vec![0.0; slice.graph.node_count()];
    let mut constant = 0.0;
    for (rep, d) in slice.reps.iter().zip(duals) {
        constant += d.beta;
        if d.alpha != 0.0 {
            for j in slice.support(rep.unit) {
                coefficients[j as usize] += d.alpha;
            }
        }
    }
    BendersCut { scenario: slice.scenario, coefficients, constant }
}
