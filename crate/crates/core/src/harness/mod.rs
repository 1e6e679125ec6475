//! Experiment harness behind the command-line front end.
//!
//! Every command is a function of a [`RunConfig`] and the files it names.
//! Commands return their outputs as named text files: primary outputs are
//! deterministic, timings are kept in separate files.

mod config;
mod container;

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub use config::{RunConfig, VerifyConfig, VerifyKind};
pub use container::{sha256_hex, Manifest, SampleContainer, StoredScenario, CONTAINER_FORMAT};

use crate::benders::{self, BendersError, BoundRecord, EnumerationMaster, SolveOptions};
use crate::graph::{self, icm_params, ltm_params, DiffusionModel, DiffusionParams, GraphError, NodeId, SocialNetwork};
use crate::model::{self, build_reduced, ExportFormat, ModelError};
use crate::oracle::{self, OracleError};
use crate::presolve::{self, reduction_stats, PresolveError, PresolveStats};
use crate::sampling::{self, SamplingError, ScenarioSet};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("configuration: {0}")]
    Config(String),
    #[error("scenario container: {0}")]
    Container(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Presolve(#[from] PresolveError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Benders(#[from] BendersError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.to_path_buf(), source }
    }
}

/// Files produced by a command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommandOutput {
    /// Deterministic outputs as `(file name, content)`.
    pub files: Vec<(String, String)>,
    /// Wall-clock measurements, excluded from reproducibility checks.
    pub timing_files: Vec<(String, String)>,
    /// Short human-readable summary.
    pub summary: String,
    /// False when a verification assertion failed.
    pub passed: bool,
}

impl CommandOutput {
    fn new(summary: String) -> Self {
        CommandOutput { summary, passed: true, ..Default::default() }
    }

    fn file(mut self, name: &str, content: String) -> Self {
        self.files.push((name.to_string(), content));
        self
    }

    fn timing(mut self, name: &str, content: String) -> Self {
        self.timing_files.push((name.to_string(), content));
        self
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    /// Writes every file into `dir`, creating it if necessary.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let mut written = Vec::new();
        for (name, content) in self.files.iter().chain(&self.timing_files) {
            let path = dir.join(name);
            std::fs::write(&path, content).map_err(|e| HarnessError::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

/// `exp(mean(ln(v + shift))) − shift`.
pub fn shifted_geometric_mean(values: &[f64], shift: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().map(|v| (v + shift).ln()).sum::<f64>() / values.len() as f64;
    mean.exp() - shift
}

/// Scenario source of a run: the network with its parameters, or a stored
/// container.
struct Instance {
    scenarios: ScenarioSet,
    labels: Vec<u64>,
}

fn load_network(config: &RunConfig) -> Result<SocialNetwork, HarnessError> {
    let path = config.network.as_ref().ok_or_else(|| HarnessError::Config("no network file given".into()))?;
    let file = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(graph::load_edge_list(std::io::BufReader::new(file), config.undirected)?)
}

fn diffusion_params(config: &RunConfig, network: &SocialNetwork) -> Result<DiffusionParams, HarnessError> {
    Ok(match config.model {
        DiffusionModel::Icm => icm_params(network, config.require_p()?)?,
        DiffusionModel::Ltm => ltm_params(network),
    })
}

fn draw_scenarios(config: &RunConfig, network: &SocialNetwork) -> Result<ScenarioSet, HarnessError> {
    let params = diffusion_params(config, network)?;
    if config.exhaustive {
        Ok(sampling::enumerate_scenarios(network, &params, config.enumeration_cap)?)
    } else {
        Ok(sampling::sample(network, &params, config.omega_count, config.require_seed()?)?)
    }
}

fn load_instance(config: &RunConfig) -> Result<Instance, HarnessError> {
    config.validate()?;
    if let Some(path) = &config.scenarios {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let container = SampleContainer::from_json(&text)?;
        return Ok(Instance { scenarios: container.scenario_set(), labels: container.labels });
    }
    let network = load_network(config)?;
    let scenarios = draw_scenarios(config, &network)?;
    Ok(Instance { scenarios, labels: network.labels().to_vec() })
}

fn labelled(seeds: &[NodeId], labels: &[u64]) -> Vec<u64> {
    seeds.iter().map(|&j| labels[j as usize]).collect()
}

/// Builds the scenario container of a run.
pub fn build_container(config: &RunConfig, network: &SocialNetwork, scenarios: &ScenarioSet) -> SampleContainer {
    let stored = container::stored(scenarios);
    let rho = network.density();
    SampleContainer {
        manifest: Manifest {
            format: CONTAINER_FORMAT,
            model: scenarios.model,
            mode: scenarios.mode,
            seed: scenarios.rng_seed,
            p: if scenarios.model == DiffusionModel::Icm { config.p } else { None },
            omega_count: scenarios.len(),
            node_count: network.node_count(),
            arc_count: network.arc_count(),
            undirected: network.was_undirected(),
            density: rho,
            density_rounded: (rho * 10.0).round() / 10.0,
            network_sha256: sha256_hex(graph::write_edge_list(network).as_bytes()),
            scenarios_sha256: container::scenarios_checksum(&stored),
        },
        labels: network.labels().to_vec(),
        scenarios: stored,
    }
}

/// `sample`: draws the scenario set and writes it with its manifest.
pub fn cmd_sample(config: &RunConfig) -> Result<CommandOutput, HarnessError> {
    config.validate()?;
    let network = load_network(config)?;
    let scenarios = draw_scenarios(config, &network)?;
    let container = build_container(config, &network, &scenarios);
    let summary = format!(
        "{} scenarios ({:?}) over {} nodes and {} arcs, rho = {:.1}, sha256 {}",
        container.manifest.omega_count,
        container.manifest.mode,
        container.manifest.node_count,
        container.manifest.arc_count,
        container.manifest.density,
        container.manifest.scenarios_sha256
    );
    Ok(CommandOutput::new(summary)
        .file("manifest.json", to_json(&container.manifest))
        .file("scenarios.json", container.to_json()))
}

/// CSV table with one row per run and, for several runs, a row of shifted
/// geometric means (shift 1) of every percentage column.
pub fn stats_table(rows: &[PresolveStats]) -> String {
    let mut out = format!("{}\n", PresolveStats::CSV_HEADER);
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    if rows.len() > 1 {
        let cols: [fn(&PresolveStats) -> Option<f64>; 7] = [
            |s| s.delta_z,
            |s| s.delta_nnz,
            |s| s.scna_delta_z,
            |s| s.scna_delta_nnz,
            |s| s.delta_a,
            |s| s.ina_delta_z,
            |s| s.ina_delta_nnz,
        ];
        let cells: Vec<String> = cols
            .iter()
            .map(|f| {
                let vals: Option<Vec<f64>> = rows.iter().map(f).collect();
                vals.map(|v| format!("{:.4}", shifted_geometric_mean(&v, 1.0))).unwrap_or_default()
            })
            .collect();
        out.push_str(&format!("sgm,{},{},{}\n", rows[0].node_count, rows[0].scenario_count, cells.join(",")));
    }
    out
}

/// `presolve`: reduction statistics at the configured level. With
/// `repeats > 1` the run is repeated with consecutive seeds.
pub fn cmd_presolve(config: &RunConfig, repeats: usize) -> Result<CommandOutput, HarnessError> {
    let options = config.presolve_options();
    let mut stats = Vec::new();
    let mut timing_csv = String::from("run,T_SCNA,T_SNA,T_INA\n");
    for run in 0..repeats.max(1) {
        let mut c = config.clone();
        if let Some(seed) = config.seed {
            c.seed = Some(seed + run as u64);
        }
        let instance = load_instance(&c)?;
        let (reduced, timings) = presolve::presolve_timed(&instance.scenarios, &options)?;
        stats.push(reduction_stats(&reduced));
        timing_csv.push_str(&format!(
            "{run},{:.6},{:.6},{:.6}\n",
            timings.scna_seconds, timings.sna_seconds, timings.ina_seconds
        ));
    }
    let summary = stats_table(&stats);
    Ok(CommandOutput::new(summary.clone())
        .file("presolve.csv", summary)
        .file("presolve.json", to_json(&stats))
        .timing("presolve_timings.csv", timing_csv))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub level: presolve::PresolveLevel,
    pub k: usize,
    pub node_count: usize,
    pub omega_count: usize,
    /// Seed set as input labels.
    pub seeds: Vec<u64>,
    pub objective: f64,
    pub bound: f64,
    pub iterations: usize,
    pub total_cuts: usize,
    pub cuts_per_scenario: Vec<usize>,
    pub history: Vec<BoundRecord>,
}

fn export_files(
    out: CommandOutput,
    reduced: &presolve::ReducedModel,
    k: usize,
    labels: &[u64],
) -> Result<CommandOutput, HarnessError> {
    let instance = build_reduced(reduced, k, Some(labels))?;
    Ok(out.file("model.lp", instance.export(ExportFormat::Lp)).file("model.mps", instance.export(ExportFormat::Mps)))
}

/// `solve`: sample, presolve and Benders. When the enumeration master is
/// over its cap the reduced model is exported as LP and MPS instead.
pub fn cmd_solve(config: &RunConfig) -> Result<CommandOutput, HarnessError> {
    let instance = load_instance(config)?;
    let reduced = presolve::presolve(&instance.scenarios, &config.presolve_options())?;
    let mut options = SolveOptions::for_scenarios(reduced.scenario_count());
    if let Some(bytes) = config.mem_limit_per_scen {
        options.mem_limit_ids = benders::ids_from_bytes(bytes);
    }
    let mut master = EnumerationMaster::with_cap(config.master_cap);
    match benders::solve_timed(&reduced, config.k, &mut master, &options) {
        Ok((result, timings)) => {
            let report = SolveReport {
                level: reduced.level(),
                k: config.k,
                node_count: reduced.node_count,
                omega_count: reduced.scenario_count(),
                seeds: labelled(&result.seeds, &instance.labels),
                objective: result.objective,
                bound: result.bound,
                iterations: result.iterations,
                total_cuts: result.total_cuts,
                cuts_per_scenario: result.cuts_per_scenario,
                history: result.history,
            };
            let summary = format!(
                "objective {:.6} with seeds {:?} after {} iterations and {} cuts",
                report.objective, report.seeds, report.iterations, report.total_cuts
            );
            Ok(CommandOutput::new(summary)
                .file("solve.json", to_json(&report))
                .timing("solve_timings.json", to_json(&timings)))
        }
        Err(err @ BendersError::MasterCapExceeded { .. }) => {
            let out = CommandOutput::new(format!("{err}; wrote model.lp and model.mps"));
            export_files(out, &reduced, config.k, &instance.labels)
        }
        Err(err) => Err(err.into()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub k: usize,
    pub seeds: Vec<u64>,
    pub value: f64,
}

/// `oracle`: exhaustive seed-set search.
pub fn cmd_oracle(config: &RunConfig) -> Result<CommandOutput, HarnessError> {
    let instance = load_instance(config)?;
    let (seeds, value) = oracle::brute_force_opt(&instance.scenarios, config.k, config.master_cap)?;
    let report = OracleReport { k: config.k, seeds: labelled(&seeds, &instance.labels), value };
    let summary = format!("optimum {:.6} with seeds {:?}", report.value, report.seeds);
    Ok(CommandOutput::new(summary).file("oracle.json", to_json(&report)))
}

/// `export`: reduced model as LP or MPS text.
pub fn cmd_export(config: &RunConfig, format: ExportFormat) -> Result<CommandOutput, HarnessError> {
    let instance = load_instance(config)?;
    let reduced = presolve::presolve(&instance.scenarios, &config.presolve_options())?;
    let mip = build_reduced(&reduced, config.k, Some(&instance.labels))?;
    let name = match format {
        ExportFormat::Lp => "model.lp",
        ExportFormat::Mps => "model.mps",
    };
    let summary =
        format!("{} variables, {} rows, {} nonzeros", mip.variable_count(), mip.row_count(), mip.nonzero_count());
    Ok(CommandOutput::new(summary).file(name, mip.export(format)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct BipartiteCase {
    index: usize,
    sources: usize,
    targets: usize,
    scenarios: usize,
    report: oracle::BipartiteReport,
    /// `(K, constructive value, brute-force value, dual objective, dual violation)`.
    checks: Vec<(usize, f64, f64, f64, f64)>,
    passed: bool,
}

fn bipartite_suite(config: &RunConfig, with_optimality: bool) -> Result<(Vec<BipartiteCase>, bool), HarnessError> {
    let seed = config.require_seed()?;
    let v = &config.verify;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for index in 0..v.instances {
        let mut rng = ChaCha8Rng::seed_from_u64(master.random());
        let m = rng.random_range(1..=v.max_sources.max(1));
        let t = rng.random_range(1..=v.max_targets.max(1));
        let network = crate::generators::random_bipartite(&mut rng, m, t, v.arc_density);
        let params = ltm_params(&network);
        let scenarios = match sampling::enumerate_scenarios(&network, &params, config.enumeration_cap) {
            Ok(s) => s,
            Err(SamplingError::CapExceeded { .. }) => {
                sampling::sample_ltm(&network, &params, config.omega_count, rng.random())?
            }
            Err(e) => return Err(e.into()),
        };
        let (inst, report) = oracle::reduce_bipartite_ltm(&network, &scenarios)?;
        let mut passed = report.passed();
        let mut checks = Vec::new();
        if with_optimality {
            for k in 1..=m + t {
                let (_, value) = oracle::solve_bipartite(&inst, k);
                let (_, best) = oracle::brute_force_opt(&scenarios, k, config.master_cap)?;
                let cert = oracle::lp_dual_certificate(&inst, k);
                let violation = cert.max_violation(&inst);
                passed &= (value - best).abs() <= 1e-9 && violation <= 1e-9 && (cert.objective - value).abs() <= 1e-9;
                checks.push((k, value, best, cert.objective, violation));
            }
        }
        cases.push(BipartiteCase { index, sources: m, targets: t, scenarios: scenarios.len(), report, checks, passed });
    }
    let all = cases.iter().all(|c| c.passed);
    Ok((cases, all))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ConnectivityOutput {
    skipped: bool,
    message: Option<String>,
    report: Option<oracle::ConnectivityReport>,
    passed: bool,
}

/// `verify`: runs the configured theory check.
pub fn cmd_verify(config: &RunConfig) -> Result<CommandOutput, HarnessError> {
    config.validate()?;
    match config.verify.kind {
        VerifyKind::Theorem1 | VerifyKind::Prop1 => {
            let optimality = config.verify.kind == VerifyKind::Prop1;
            let (cases, passed) = bipartite_suite(config, optimality)?;
            let failed = cases.iter().filter(|c| !c.passed).count();
            let summary = format!(
                "{}: {} instances, {} failed",
                if optimality { "prop1" } else { "theorem1" },
                cases.len(),
                failed
            );
            let mut out = CommandOutput::new(summary).file("verify.json", to_json(&cases));
            out.passed = passed;
            Ok(out)
        }
        VerifyKind::Theorem2 => {
            let v = &config.verify;
            let p = config.require_p()?;
            let seed = config.require_seed()?;
            let result = match oracle::verify_theorem2(v.n, p, config.omega_count, v.trials, seed) {
                Ok(report) => {
                    let passed = report.passed();
                    ConnectivityOutput { skipped: false, message: None, report: Some(report), passed }
                }
                Err(err @ OracleError::ConditionViolated { .. }) => {
                    ConnectivityOutput { skipped: true, message: Some(err.to_string()), report: None, passed: true }
                }
                Err(err) => return Err(err.into()),
            };
            let summary = match (&result.report, &result.message) {
                (Some(r), _) => format!(
                    "theorem2: {}/{} trials connected (fraction {:.4}, p* = {:.6}, threshold {:.6}), {} structure failures",
                    r.connected_trials, r.trials, r.empirical_fraction, r.p_star.value, r.lower_threshold, r.structure_failures
                ),
                (None, Some(m)) => format!("theorem2 skipped: {m}"),
                _ => String::new(),
            };
            let mut out = CommandOutput::new(summary).file("verify.json", to_json(&result));
            out.passed = result.passed;
            Ok(out)
        }
    }
}

/// The reduced covering model of a run, for callers that need it directly.
pub fn reduced_model(config: &RunConfig) -> Result<(presolve::ReducedModel, Vec<u64>), HarnessError> {
    let instance = load_instance(config)?;
    Ok((presolve::presolve(&instance.scenarios, &config.presolve_options())?, instance.labels))
}

/// Exact model instance of a run, as built for export.
pub fn mip_instance(config: &RunConfig) -> Result<model::MipInstance, HarnessError> {
    let (reduced, labels) = reduced_model(config)?;
    Ok(build_reduced(&reduced, config.k, Some(&labels))?)
}
