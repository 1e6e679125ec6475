//! Presolving reductions on the scenario-wise covering model.
//!
//! Three reductions are available and nest in the order SNA, SCNA, INA:
//!
//! * SCNA replaces the nodes of each strongly connected component of `G^ω`
//!   by one variable of weight `p^ω |SC_u^ω|`.
//! * SNA links every variable whose support is a single node `j` to `y_j`.
//! * INA merges variables whose expanded supports coincide, across and
//!   within scenarios, keeping the representative met first.
//!
//! Weights are stored in scaled units. For sampled (equiprobable) sets each
//! node carries mass 1 and [`ReducedModel::weight_scale`] is `1/|Ω|`, so all
//! weights and cut coefficients are small integers and exact in `f64`. For
//! exhaustive sets the mass is `p^ω` and the scale is 1.

mod reach;
mod scc;
mod stats;
mod units;

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub(crate) use reach::merge_sorted as merge_sorted_ids;
pub use reach::{bounded_supports, reach_sets, support_sizes, unit_reach_sets, ReachSet};
pub use scc::{scc_decompose, CondensedGraph};
pub use stats::{reduction_stats, PresolveStats, PresolveTimings};
pub use units::ScenarioGraph;

use crate::graph::{DiffusionModel, NodeId};
use crate::sampling::{LiveArcGraph, ScenarioSet};

/// Absolute tolerance of the mass-conservation check.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum PresolveError {
    #[error("INA operates on condensed graphs and needs SCNA enabled")]
    InaRequiresScna,
    #[error("scenario set is empty")]
    NoScenarios,
    #[error("mass conservation violated by {residual:e} after {stage}")]
    MassViolation { stage: &'static str, residual: f64 },
}

/// Presolve settings. `None` keeps the plain covering model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresolveLevel {
    None,
    Default,
    Scna,
    Ina,
}

impl PresolveLevel {
    pub const ALL: [PresolveLevel; 4] =
        [PresolveLevel::None, PresolveLevel::Default, PresolveLevel::Scna, PresolveLevel::Ina];

    pub fn options(self, model: DiffusionModel) -> PresolveOptions {
        let (sna, scna, ina) = match self {
            PresolveLevel::None => (false, false, false),
            PresolveLevel::Default => (true, false, false),
            PresolveLevel::Scna => (true, true, false),
            PresolveLevel::Ina => (true, true, true),
        };
        PresolveOptions { sna, scna, ina, max_reac_size: default_max_reac_size(model) }
    }
}

impl std::fmt::Display for PresolveLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PresolveLevel::None => "none",
            PresolveLevel::Default => "default",
            PresolveLevel::Scna => "scna",
            PresolveLevel::Ina => "ina",
        })
    }
}

impl std::str::FromStr for PresolveLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(PresolveLevel::None),
            "default" | "sna" => Ok(PresolveLevel::Default),
            "scna" => Ok(PresolveLevel::Scna),
            "ina" => Ok(PresolveLevel::Ina),
            other => Err(format!("unknown presolve level `{other}`")),
        }
    }
}

/// `MaxReacSize`: 8 under ICM, 4 under LTM.
pub fn default_max_reac_size(model: DiffusionModel) -> usize {
    match model {
        DiffusionModel::Icm => 8,
        DiffusionModel::Ltm => 4,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresolveOptions {
    pub sna: bool,
    pub scna: bool,
    pub ina: bool,
    pub max_reac_size: usize,
}

impl PresolveOptions {
    pub fn level(&self) -> PresolveLevel {
        match (self.sna, self.scna, self.ina) {
            (_, true, true) => PresolveLevel::Ina,
            (_, true, false) => PresolveLevel::Scna,
            (true, false, _) => PresolveLevel::Default,
            _ => PresolveLevel::None,
        }
    }
}

/// A surviving `z_u^ω` with its scaled objective weight `f_u^ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rep {
    pub unit: u32,
    pub weight: f64,
}

/// `z_u^ω := y_node`, with the weight moved onto `y_node`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnaLink {
    pub scenario: usize,
    pub unit: u32,
    pub node: NodeId,
    pub weight: f64,
}

/// `z_unit^scenario` merged into `z_into_unit^into_scenario`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InaMerge {
    pub scenario: usize,
    pub unit: u32,
    pub into_scenario: usize,
    pub into_unit: u32,
    pub weight: f64,
    pub support_size: usize,
}

/// Model data of one scenario after presolve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSlice {
    pub scenario: usize,
    pub probability: f64,
    /// Scaled weight of one original node in this scenario.
    pub unit_mass: f64,
    /// `|A^ω|`.
    pub live_arc_count: usize,
    pub graph: ScenarioGraph,
    /// Surviving variables, ascending by unit id.
    pub reps: Vec<Rep>,
}

impl ScenarioSlice {
    /// One variable per node of `G^ω` with weight `unit_mass`.
    pub fn identity(live: &LiveArcGraph, unit_mass: f64) -> Self {
        let graph = ScenarioGraph::identity(live);
        let reps = (0..graph.unit_count() as u32).map(|unit| Rep { unit, weight: unit_mass }).collect();
        ScenarioSlice {
            scenario: live.scenario,
            probability: live.probability,
            unit_mass,
            live_arc_count: live.arcs.len(),
            graph,
            reps,
        }
    }

    pub fn rep_weight_total(&self) -> f64 {
        self.reps.iter().map(|r| r.weight).sum()
    }

    /// Expanded support of a unit.
    pub fn support(&self, unit: u32) -> Vec<NodeId> {
        self.graph.support(unit)
    }
}

/// Post-presolve covering data for all scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedModel {
    pub model: DiffusionModel,
    pub node_count: usize,
    pub options: PresolveOptions,
    /// Multiplier turning scaled weights into expected-spread units.
    pub weight_scale: f64,
    pub slices: Vec<ScenarioSlice>,
    pub sna_links: Vec<SnaLink>,
    pub ina_merges: Vec<InaMerge>,
}

impl ReducedModel {
    pub fn scenario_count(&self) -> usize {
        self.slices.len()
    }

    pub fn level(&self) -> PresolveLevel {
        self.options.level()
    }

    pub fn rep_count(&self) -> usize {
        self.slices.iter().map(|s| s.reps.len()).sum()
    }

    /// Scaled SNA weights folded onto each `y_j`.
    pub fn link_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.node_count];
        for link in &self.sna_links {
            w[link.node as usize] += link.weight;
        }
        w
    }

    /// SNA links of one scenario as `(node, weight)` pairs.
    pub fn scenario_links(&self) -> Vec<Vec<(NodeId, f64)>> {
        let mut out = vec![Vec::new(); self.slices.len()];
        for link in &self.sna_links {
            out[link.scenario].push((link.node, link.weight));
        }
        out
    }

    /// `Σ f + Σ link weights − Σ_ω p^ω |V|`, in spread units.
    pub fn mass_residual(&self) -> f64 {
        let reps: f64 = self.slices.iter().map(ScenarioSlice::rep_weight_total).sum();
        let links: f64 = self.sna_links.iter().map(|l| l.weight).sum();
        let expected: f64 = self.slices.iter().map(|s| s.probability).sum::<f64>() * self.node_count as f64;
        (reps + links) * self.weight_scale - expected
    }

    pub fn check_mass(&self, stage: &'static str) -> Result<(), PresolveError> {
        let residual = self.mass_residual();
        if residual.abs() > MASS_TOLERANCE {
            return Err(PresolveError::MassViolation { stage, residual });
        }
        Ok(())
    }
}

/// Component-aggregated slice of one scenario: one variable per component with
/// weight `unit_mass · |SC_u^ω|`.
pub fn apply_scna(cond: CondensedGraph, unit_mass: f64) -> ScenarioSlice {
    let scenario = cond.scenario;
    let probability = cond.probability;
    let live_arc_count = cond.live_arc_count;
    let graph = cond.into_graph();
    let reps = (0..graph.unit_count() as u32)
        .map(|unit| Rep { unit, weight: unit_mass * graph.members(unit).len() as f64 })
        .collect();
    ScenarioSlice { scenario, probability, unit_mass, live_arc_count, graph, reps }
}

/// Removes every variable whose expanded support is one node and returns the
/// resulting links.
pub fn apply_sna(slice: &mut ScenarioSlice) -> Vec<SnaLink> {
    let mut links = Vec::new();
    let graph = &slice.graph;
    slice.reps.retain(|rep| {
        if graph.has_singleton_support(rep.unit) {
            links.push(SnaLink {
                scenario: slice.scenario,
                unit: rep.unit,
                node: graph.members(rep.unit)[0],
                weight: rep.weight,
            });
            false
        } else {
            true
        }
    });
    links
}

/// Hash-based isomorphic node aggregation over condensed slices.
///
/// Slices are visited in the given order and reps in ascending (topological)
/// unit order. A rep whose expanded support has at most `max_reac_size`
/// nodes is looked up by its exact support; on a hit its weight moves to the
/// stored representative and it is dropped.
pub fn apply_ina(slices: &mut [ScenarioSlice], max_reac_size: usize) -> Vec<InaMerge> {
    if max_reac_size == 0 {
        return Vec::new();
    }
    let supports: Vec<Vec<Option<Vec<NodeId>>>> = slices
        .par_iter()
        .map(|slice| {
            let bounded = bounded_supports(&slice.graph, max_reac_size);
            slice.reps.iter().map(|rep| bounded[rep.unit as usize].clone()).collect()
        })
        .collect();

    let mut table: HashMap<Vec<NodeId>, (usize, usize)> = HashMap::new();
    let mut removed: Vec<Vec<bool>> = slices.iter().map(|s| vec![false; s.reps.len()]).collect();
    let mut merges = Vec::new();
    for (si, slice_supports) in supports.into_iter().enumerate() {
        for (ri, support) in slice_supports.into_iter().enumerate() {
            let Some(key) = support else { continue };
            let support_size = key.len();
            match table.get(&key) {
                Some(&(ti, tj)) => {
                    let rep = slices[si].reps[ri];
                    slices[ti].reps[tj].weight += rep.weight;
                    removed[si][ri] = true;
                    merges.push(InaMerge {
                        scenario: slices[si].scenario,
                        unit: rep.unit,
                        into_scenario: slices[ti].scenario,
                        into_unit: slices[ti].reps[tj].unit,
                        weight: rep.weight,
                        support_size,
                    });
                }
                None => {
                    table.insert(key, (si, ri));
                }
            }
        }
    }
    for (slice, gone) in slices.iter_mut().zip(removed) {
        let mut it = gone.into_iter();
        slice.reps.retain(|_| !it.next().unwrap_or(false));
    }
    merges
}

/// Runs the configured reductions and records stage timings.
pub fn presolve_timed(
    scenarios: &ScenarioSet,
    options: &PresolveOptions,
) -> Result<(ReducedModel, PresolveTimings), PresolveError> {
    if scenarios.is_empty() {
        return Err(PresolveError::NoScenarios);
    }
    if options.ina && !options.scna {
        return Err(PresolveError::InaRequiresScna);
    }
    let sampled = scenarios.is_equiprobable();
    let weight_scale = if sampled { 1.0 / scenarios.len() as f64 } else { 1.0 };
    let mass = |live: &LiveArcGraph| if sampled { 1.0 } else { live.probability };

    let mut timings = PresolveTimings::default();
    let start = Instant::now();
    let slices: Vec<ScenarioSlice> = if options.scna {
        scenarios.scenarios.par_iter().map(|live| apply_scna(scc_decompose(live), mass(live))).collect()
    } else {
        scenarios.scenarios.par_iter().map(|live| ScenarioSlice::identity(live, mass(live))).collect()
    };
    timings.scna_seconds = start.elapsed().as_secs_f64();

    let mut model = ReducedModel {
        model: scenarios.model,
        node_count: scenarios.node_count,
        options: *options,
        weight_scale,
        slices,
        sna_links: Vec::new(),
        ina_merges: Vec::new(),
    };
    model.check_mass(if options.scna { "scna" } else { "model construction" })?;

    if options.sna {
        let start = Instant::now();
        let links: Vec<Vec<SnaLink>> = model.slices.par_iter_mut().map(apply_sna).collect();
        model.sna_links = links.into_iter().flatten().collect();
        timings.sna_seconds = start.elapsed().as_secs_f64();
        model.check_mass("sna")?;
    }
    if options.ina {
        let start = Instant::now();
        model.ina_merges = apply_ina(&mut model.slices, options.max_reac_size);
        timings.ina_seconds = start.elapsed().as_secs_f64();
        model.check_mass("ina")?;
    }
    Ok((model, timings))
}

pub fn presolve(scenarios: &ScenarioSet, options: &PresolveOptions) -> Result<ReducedModel, PresolveError> {
    presolve_timed(scenarios, options).map(|(model, _)| model)
}
