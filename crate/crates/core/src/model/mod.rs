//! Explicit MIP data of the covering formulations and text exports.
//!
//! The plain model has one binary `z_i^ω` per node and scenario with row
//! `Σ_{j ∈ R(G^ω, i)} y_j − z_i^ω ≥ 0`. Reduced models have one row per
//! surviving representative over its expanded support, and SNA weights are
//! moved into the objective coefficients of `y`. Every instance ends with
//! the cardinality row `Σ_j y_j ≤ K`.

mod lp;
mod mps;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lp::{parse_lp, write_lp};
pub use mps::{parse_mps, write_mps};

use crate::combin::{argmax_subset, binomial, seed_set_size};
use crate::presolve::ReducedModel;
use crate::sampling::ScenarioSet;

/// Name of the cardinality row in every export.
pub const CARDINALITY_ROW: &str = "card";

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("{format} line {line}: {message}")]
    Parse { format: &'static str, line: usize, message: String },
    #[error("unsupported export format `{0}` (expected lp or mps)")]
    UnsupportedFormat(String),
    #[error("enumerating {count} seed sets exceeds the cap of {cap}; export the model and use an external solver")]
    CapExceeded { count: u64, cap: u64 },
    #[error("cardinality bound must be at least 1")]
    ZeroCardinality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    /// `y_j`, seed indicator.
    Seed,
    /// `z_u^ω`, activation indicator.
    Cover,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A maximisation MIP over binary variables. Seed variables come first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MipInstance {
    pub name: String,
    pub variables: Vec<Variable>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Lp,
    Mps,
}

impl std::str::FromStr for ExportFormat {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lp" => Ok(ExportFormat::Lp),
            "mps" => Ok(ExportFormat::Mps),
            other => Err(ModelError::UnsupportedFormat(other.to_string())),
        }
    }
}

/// Formats a coefficient with 12 significant digits and no trailing noise.
pub(crate) fn fmt_num(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        "0".to_string()
    } else {
        format!("{rounded}")
    }
}

fn seed_names(n: usize, labels: Option<&[u64]>) -> Vec<String> {
    (0..n)
        .map(|j| match labels {
            Some(l) => format!("y_{}", l[j]),
            None => format!("y_{j}"),
        })
        .collect()
}

struct Builder {
    instance: MipInstance,
}

impl Builder {
    fn new(name: &str, n: usize, labels: Option<&[u64]>, seed_objective: &[f64]) -> Self {
        let variables = seed_names(n, labels)
            .into_iter()
            .zip(seed_objective)
            .map(|(name, &objective)| Variable { name, kind: VarKind::Seed, objective })
            .collect();
        Builder { instance: MipInstance { name: name.to_string(), variables, rows: Vec::new() } }
    }

    fn cover(&mut self, scenario: usize, rep: u32, objective: f64, support: &[u32]) {
        let z = self.instance.variables.len();
        let name = format!("z_{scenario}_{rep}");
        self.instance.variables.push(Variable { name: name.clone(), kind: VarKind::Cover, objective });
        let mut terms: Vec<(usize, f64)> = support.iter().map(|&j| (j as usize, 1.0)).collect();
        terms.push((z, -1.0));
        self.instance.rows.push(Row { name: format!("r_{scenario}_{rep}"), terms, sense: Sense::Ge, rhs: 0.0 });
    }

    fn finish(mut self, n: usize, k: usize) -> MipInstance {
        self.instance.rows.push(Row {
            name: CARDINALITY_ROW.to_string(),
            terms: (0..n).map(|j| (j, 1.0)).collect(),
            sense: Sense::Le,
            rhs: k as f64,
        });
        self.instance
    }
}

/// Plain covering model: one `z` per node and scenario, objective `p^ω`.
pub fn build_full(scenarios: &ScenarioSet, k: usize, labels: Option<&[u64]>) -> Result<MipInstance, ModelError> {
    if k == 0 {
        return Err(ModelError::ZeroCardinality);
    }
    let n = scenarios.node_count;
    let mut b = Builder::new("imp_full", n, labels, &vec![0.0; n]);
    for live in &scenarios.scenarios {
        let graph = crate::presolve::ScenarioGraph::identity(live);
        for i in 0..n as u32 {
            b.cover(live.scenario, i, live.probability, &graph.support(i));
        }
    }
    Ok(b.finish(n, k))
}

/// Model of a presolved instance: rows for surviving representatives and
/// SNA weights on the seed variables.
pub fn build_reduced(reduced: &ReducedModel, k: usize, labels: Option<&[u64]>) -> Result<MipInstance, ModelError> {
    if k == 0 {
        return Err(ModelError::ZeroCardinality);
    }
    let n = reduced.node_count;
    let scale = reduced.weight_scale;
    let seed_objective: Vec<f64> = reduced.link_weights().into_iter().map(|w| w * scale).collect();
    let mut b = Builder::new(&format!("imp_{}", reduced.level()), n, labels, &seed_objective);
    for slice in &reduced.slices {
        for rep in &slice.reps {
            b.cover(slice.scenario, rep.unit, rep.weight * scale, &slice.support(rep.unit));
        }
    }
    Ok(b.finish(n, k))
}

impl MipInstance {
    pub fn variable_count(&self) -> usize {
        self.variables.len()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn seed_count(&self) -> usize {
        self.variables.iter().take_while(|v| v.kind == VarKind::Seed).count()
    }

    pub fn cover_count(&self) -> usize {
        self.variable_count() - self.seed_count()
    }

    pub fn nonzero_count(&self) -> usize {
        self.rows.iter().map(|r| r.terms.len()).sum()
    }

    /// `K`, read from the cardinality row.
    pub fn cardinality(&self) -> Option<usize> {
        self.rows.iter().find(|r| r.name == CARDINALITY_ROW).map(|r| r.rhs.round() as usize)
    }

    /// Best objective for a fixed seed set: each `z` is set to 1 exactly when
    /// every row it appears in stays satisfied. Objective weights are
    /// nonnegative, so this is the optimal completion.
    pub fn evaluate(&self, seeds: &[u32]) -> f64 {
        let mut y = vec![0.0; self.variable_count()];
        for &j in seeds {
            y[j as usize] = 1.0;
        }
        let mut z_ok = vec![true; self.variable_count()];
        for row in &self.rows {
            let mut lhs = 0.0;
            let mut covers = Vec::new();
            for &(v, c) in &row.terms {
                match self.variables[v].kind {
                    VarKind::Seed => lhs += c * y[v],
                    VarKind::Cover => covers.push((v, c)),
                }
            }
            for (v, c) in covers {
                let with_one = lhs + c;
                let ok = match row.sense {
                    Sense::Ge => with_one >= row.rhs - 1e-12,
                    Sense::Le => with_one <= row.rhs + 1e-12,
                };
                if !ok {
                    z_ok[v] = false;
                }
            }
        }
        self.variables
            .iter()
            .enumerate()
            .map(|(v, var)| match var.kind {
                VarKind::Seed => var.objective * y[v],
                VarKind::Cover if z_ok[v] => var.objective,
                VarKind::Cover => 0.0,
            })
            .sum()
    }

    /// Exact optimum by enumerating all seed sets of size `min(K, n)`.
    pub fn solve_by_enumeration(&self, cap: u64) -> Result<(Vec<u32>, f64), ModelError> {
        let n = self.seed_count();
        let k = self.cardinality().ok_or(ModelError::ZeroCardinality)?;
        let size = seed_set_size(n, k);
        let count = binomial(n, size);
        if count > cap {
            return Err(ModelError::CapExceeded { count, cap });
        }
        Ok(argmax_subset(n, size, 1e-9, |s| self.evaluate(s)))
    }

    pub fn export(&self, format: ExportFormat) -> String {
        match format {
            ExportFormat::Lp => write_lp(self),
            ExportFormat::Mps => write_mps(self),
        }
    }
}

/// Seed or cover kind from a variable name.
pub(crate) fn kind_of(name: &str) -> VarKind {
    if name.starts_with("z_") {
        VarKind::Cover
    } else {
        VarKind::Seed
    }
}
