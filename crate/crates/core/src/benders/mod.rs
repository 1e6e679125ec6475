//! Benders decomposition of the reduced covering model.
//!
//! Projecting out `z` leaves one variable `φ^ω` per scenario bounded by
//! `Φ^ω(y)`, the optimum of a scenario subproblem whose dual has the closed
//! form used in [`phi`]. The loop alternates an exact master over the current
//! cuts with separation at the master's integer optimum until no cut is
//! violated, at which point the master value equals the true objective.

mod cache;
mod cut;
mod master;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{default_mem_limit_ids, ids_from_bytes, ReachCache, ID_BYTES};
pub use cut::{benders_cut, cut_from_duals, phi, BendersCut, PhiEvaluation, RepDual};
pub use master::{master_enumerate, EnumerationMaster, MasterSolution, MasterSolver, MasterState};

use crate::graph::NodeId;
use crate::presolve::ReducedModel;

/// Absolute violation tolerance for emitting a cut.
pub const VIOLATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum BendersError {
    #[error("the enumeration master would visit {count} seed sets, above the cap of {cap}; export the model as LP or MPS and use an external solver")]
    MasterCapExceeded { count: u64, cap: u64 },
    #[error("no convergence after {0} iterations")]
    IterationLimit(usize),
    #[error("cardinality bound must be at least 1")]
    ZeroCardinality,
}

/// `Φ^ω(e_j)` for every node as a cut with zero constant, from one pass over
/// the representatives' supports. SNA link terms are excluded.
pub fn submodular_rows(reduced: &ReducedModel, cache: Option<&ReachCache>) -> Vec<BendersCut> {
    reduced
        .slices
        .par_iter()
        .map(|slice| {
            let mut coefficients = vec![0.0; reduced.node_count];
            for rep in &slice.reps {
                let owned;
                let support = match cache.and_then(|c| c.get(slice.scenario, rep.unit)) {
                    Some(s) => s,
                    None => {
                        owned = slice.support(rep.unit);
                        &owned[..]
                    }
                };
                for &j in support {
                    coefficients[j as usize] += rep.weight;
                }
            }
            BendersCut { scenario: slice.scenario, coefficients, constant: 0.0 }
        })
        .collect()
}

/// Separation at `ȳ`: the cut of every scenario whose `φ̄^ω` exceeds it by
/// more than [`VIOLATION_TOLERANCE`], in scenario order.
pub fn separate(y: &[f64], phi_bar: &[f64], reduced: &ReducedModel, cache: &ReachCache) -> Vec<BendersCut> {
    reduced
        .slices
        .par_iter()
        .zip(phi_bar.par_iter())
        .filter_map(|(slice, &phi)| {
            let cut = benders_cut(slice, y, Some(cache));
            (phi > cut.evaluate(y) + VIOLATION_TOLERANCE).then_some(cut)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// `MemLimPerScen`, in stored node ids.
    pub mem_limit_ids: u64,
    pub max_iterations: usize,
}

impl SolveOptions {
    pub fn for_scenarios(scenario_count: usize) -> Self {
        SolveOptions { mem_limit_ids: default_mem_limit_ids(scenario_count), max_iterations: 10_000 }
    }
}

/// One master iteration, in expected-spread units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub dual_bound: f64,
    pub incumbent: f64,
    pub cuts_added: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    /// Optimal seed set, as dense node ids.
    pub seeds: Vec<NodeId>,
    pub objective: f64,
    pub bound: f64,
    pub iterations: usize,
    pub cuts_per_scenario: Vec<usize>,
    pub total_cuts: usize,
    pub history: Vec<BoundRecord>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveTimings {
    pub cache_seconds: f64,
    pub master_seconds: f64,
    pub separation_seconds: f64,
}

/// True objective (scaled) of a binary seed set: SNA terms plus `Σ_ω Φ^ω`.
pub fn scaled_objective(reduced: &ReducedModel, seeds: &[NodeId]) -> f64 {
    let mut y = vec![0.0; reduced.node_count];
    for &j in seeds {
        y[j as usize] = 1.0;
    }
    let links = reduced.scenario_links();
    reduced.slices.iter().zip(&links).map(|(slice, l)| phi(slice, l, &y).value).sum()
}

pub fn initial_master(reduced: &ReducedModel, k: usize, cache: &ReachCache) -> MasterState {
    MasterState {
        node_count: reduced.node_count,
        cardinality: k,
        linear: reduced.link_weights(),
        submodular: submodular_rows(reduced, Some(cache)),
        ceilings: reduced.slices.iter().map(|s| s.rep_weight_total()).collect(),
        cuts: vec![Vec::new(); reduced.scenario_count()],
        incumbent: None,
        dual_bound: f64::INFINITY,
    }
}

pub fn solve_timed<M: MasterSolver>(
    reduced: &ReducedModel,
    k: usize,
    master: &mut M,
    options: &SolveOptions,
) -> Result<(SolveResult, SolveTimings), BendersError> {
    if k == 0 {
        return Err(BendersError::ZeroCardinality);
    }
    let scale = reduced.weight_scale;
    let mut timings = SolveTimings::default();
    let start = Instant::now();
    let cache = ReachCache::build(reduced, options.mem_limit_ids);
    timings.cache_seconds = start.elapsed().as_secs_f64();

    let mut state = initial_master(reduced, k, &cache);
    let links = reduced.scenario_links();
    let mut history = Vec::new();
    for iteration in 1..=options.max_iterations {
        let start = Instant::now();
        let sol = master.solve(&state)?;
        timings.master_seconds += start.elapsed().as_secs_f64();
        state.dual_bound = state.dual_bound.min(sol.value);

        let start = Instant::now();
        let mut y = vec![0.0; reduced.node_count];
        for &j in &sol.seeds {
            y[j as usize] = 1.0;
        }
        let true_value: f64 = reduced.slices.iter().zip(&links).map(|(s, l)| phi(s, l, &y).value).sum();
        if state.incumbent.as_ref().is_none_or(|(_, v)| true_value > *v) {
            state.incumbent = Some((sol.seeds.clone(), true_value));
        }
        let cuts = separate(&y, &sol.phi, reduced, &cache);
        timings.separation_seconds += start.elapsed().as_secs_f64();

        let incumbent = state.incumbent.as_ref().map_or(0.0, |(_, v)| *v);
        history.push(BoundRecord {
            dual_bound: state.dual_bound * scale,
            incumbent: incumbent * scale,
            cuts_added: cuts.len(),
        });
        if cuts.is_empty() {
            let (seeds, value) = state.incumbent.clone().expect("incumbent set in the first iteration");
            let result = SolveResult {
                seeds,
                objective: value * scale,
                bound: state.dual_bound * scale,
                iterations: iteration,
                cuts_per_scenario: state.cuts.iter().map(Vec::len).collect(),
                total_cuts: state.cut_count(),
                history,
            };
            return Ok((result, timings));
        }
        for cut in cuts {
            let w = cut.scenario;
            state.cuts[w].push(cut);
        }
    }
    Err(BendersError::IterationLimit(options.max_iterations))
}

pub fn solve<M: MasterSolver>(
    reduced: &ReducedModel,
    k: usize,
    master: &mut M,
    options: &SolveOptions,
) -> Result<SolveResult, BendersError> {
    solve_timed(reduced, k, master, options).map(|(r, _)| r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::random_scenario_set;
    use crate::graph::DiffusionModel;
    use crate::presolve::{presolve, PresolveLevel, PresolveOptions};
    use crate::sampling::ScenarioSet;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reduced(s: &ScenarioSet, level: PresolveLevel) -> ReducedModel {
        presolve(s, &PresolveOptions { max_reac_size: 8, ..level.options(DiffusionModel::Icm) }).unwrap()
    }

    fn cycle(n: u32) -> ScenarioSet {
        ScenarioSet::from_arc_lists(DiffusionModel::Icm, n as usize, vec![(0..n).map(|i| (i, (i + 1) % n)).collect()])
    }

    fn solve_default(r: &ReducedModel, k: usize) -> SolveResult {
        solve(r, k, &mut EnumerationMaster::default(), &SolveOptions::for_scenarios(r.scenario_count())).unwrap()
    }

    #[test]
    fn phi_of_strongly_connected_scenario() {
        let r = reduced(&cycle(5), PresolveLevel::Scna);
        for j in 0..5 {
            let mut y = vec![0.0; 5];
            y[j] = 1.0;
            assert_eq!(phi(&r.slices[0], &[], &y).value, 5.0);
        }
    }

    #[test]
    fn phi_at_zero() {
        let r = reduced(&cycle(4), PresolveLevel::None);
        let e = phi(&r.slices[0], &[], &[0.0; 4]);
        assert_eq!(e.value, 0.0);
        assert!(e.duals.iter().all(|d| d.alpha == 1.0 && d.beta == 0.0));
    }

    #[test]
    fn submodular_rows_examples() {
        let r = reduced(&cycle(4), PresolveLevel::Scna);
        assert_eq!(submodular_rows(&r, None)[0].coefficients, vec![4.0; 4]);
        let iso = ScenarioSet::from_arc_lists(DiffusionModel::Icm, 3, vec![vec![(0, 1)]]);
        let r = reduced(&iso, PresolveLevel::None);
        assert_eq!(submodular_rows(&r, None)[0].coefficients, vec![2.0, 1.0, 1.0]);
    }

    #[test]
    fn separation_at_zero_matches_submodular_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = random_scenario_set(&mut rng, 8, 0.25, 4, false);
        let r = reduced(&s, PresolveLevel::Scna);
        let cache = ReachCache::build(&r, 1 << 20);
        let phi_bar: Vec<f64> = r.slices.iter().map(|s| s.rep_weight_total()).collect();
        let cuts = separate(&[0.0; 8], &phi_bar, &r, &cache);
        let sub = submodular_rows(&r, None);
        for cut in cuts {
            assert_eq!(cut.constant, 0.0);
            assert_eq!(cut.coefficients, sub[cut.scenario].coefficients);
        }
    }

    #[test]
    fn no_cut_at_all_ones() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_scenario_set(&mut rng, 6, 0.3, 3, false);
        let r = reduced(&s, PresolveLevel::None);
        let cache = ReachCache::build(&r, 1 << 20);
        let phi_bar: Vec<f64> = r.slices.iter().map(|s| s.rep_weight_total()).collect();
        assert!(separate(&[1.0; 6], &phi_bar, &r, &cache).is_empty());
    }

    #[test]
    fn star_graph() {
        let k = 6u32;
        let s =
            ScenarioSet::from_arc_lists(DiffusionModel::Icm, k as usize + 1, vec![(1..=k).map(|j| (0, j)).collect()]);
        for level in PresolveLevel::ALL {
            let res = solve_default(&reduced(&s, level), 1);
            assert_eq!(res.seeds, vec![0]);
            assert_eq!(res.objective, (k + 1) as f64);
        }
    }

    #[test]
    fn full_budget_needs_one_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = random_scenario_set(&mut rng, 7, 0.2, 5, false);
        let res = solve_default(&reduced(&s, PresolveLevel::Ina), 7);
        assert_eq!(res.iterations, 1);
        assert!((res.objective - 7.0).abs() < 1e-9);
    }

    #[test]
    fn master_cap_is_enforced() {
        let r = reduced(&cycle(30), PresolveLevel::Default);
        let err = solve(&r, 10, &mut EnumerationMaster::with_cap(1000), &SolveOptions::for_scenarios(1)).unwrap_err();
        assert!(matches!(err, BendersError::MasterCapExceeded { .. }));
    }

    #[test]
    fn master_with_zero_cuts() {
        let r = reduced(&cycle(3), PresolveLevel::Scna);
        let cache = ReachCache::disabled();
        let mut state = initial_master(&r, 1, &cache);
        state.cuts[0].push(BendersCut { scenario: 0, coefficients: vec![0.0; 3], constant: 0.0 });
        let sol = EnumerationMaster::default().solve(&state).unwrap();
        assert_eq!(sol.value, 0.0);
    }

    #[test]
    fn cache_respects_budget() {
        let s = ScenarioSet::from_arc_lists(DiffusionModel::Icm, 4, vec![vec![(0, 1), (1, 2), (2, 3)]]);
        let r = reduced(&s, PresolveLevel::Scna);
        let cache = ReachCache::build(&r, 6);
        assert_eq!(cache.stored_units(0), 3);
        assert_eq!(cache.stored_ids(0), 6);
        assert_eq!(cache.get(0, 2), Some(&[0, 1, 2][..]));
        assert_eq!(cache.get(0, 3), None);
    }

    #[test]
    fn default_memory_rule() {
        assert_eq!(default_mem_limit_ids(1), 2_000_000_000);
        assert_eq!(default_mem_limit_ids(1000), 2_000_000);
    }

    fn subsets(n: usize) -> impl Iterator<Item = Vec<u32>> {
        (0u32..1 << n).map(move |mask| (0..n as u32).filter(|j| mask >> j & 1 == 1).collect())
    }

    proptest! {
        #[test]
        fn cuts_are_valid_and_tight(seed in any::<u64>(), n in 1usize..8, omega in 1usize..4, level_idx in 0usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_scenario_set(&mut rng, n, 0.3, omega, false);
            let r = reduced(&s, PresolveLevel::ALL[level_idx]);
            let gen: Vec<u32> = (0..n as u32).filter(|_| rng.random::<bool>()).collect();
            let mut y = vec![0.0; n];
            for &j in &gen { y[j as usize] = 1.0; }
            for slice in &r.slices {
                let cut = benders_cut(slice, &y, None);
                let e = phi(slice, &[], &y);
                prop_assert_eq!(cut.evaluate(&y), e.value);
                prop_assert_eq!(&cut_from_duals(slice, &e.duals), &cut);
                for set in subsets(n) {
                    let mut ys = vec![0.0; n];
                    for &j in &set { ys[j as usize] = 1.0; }
                    prop_assert!(cut.evaluate_set(&set) >= phi(slice, &[], &ys).value);
                }
            }
        }

        #[test]
        fn bounds_are_monotone(seed in any::<u64>(), n in 2usize..9, omega in 1usize..6, k in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_scenario_set(&mut rng, n, 0.2, omega, false);
            let r = reduced(&s, PresolveLevel::Default);
            let res = solve_default(&r, k);
            prop_assert!(res.iterations <= 50);
            for w in res.history.windows(2) {
                prop_assert!(w[1].dual_bound <= w[0].dual_bound + 1e-12);
                prop_assert!(w[1].incumbent >= w[0].incumbent - 1e-12);
            }
            for h in &res.history {
                prop_assert!(h.incumbent <= h.dual_bound + 1e-9);
            }
            prop_assert!((res.objective - res.bound).abs() < 1e-9);
        }
    }
}
