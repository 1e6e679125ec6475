//! Complete digraphs under ICM with a uniform arc probability `p`.
//!
//! When every sampled live-arc graph is strongly connected, SCNA leaves one
//! variable per scenario and INA merges them into a single one, so the
//! reduced model has `n + 1` variables and two rows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::graph::{icm_params, SocialNetwork};
use crate::model::build_reduced;
use crate::presolve::{presolve, scc_decompose, PresolveOptions};
use crate::sampling::sample_icm;

/// The two terms `(n−1)(1−p²)^{n/2+1}` and `2(1−p²)^{3n/16−1}`.
///
/// At `p = 1` both are taken as zero: the base vanishes and the complete
/// graph is strongly connected in every scenario.
pub fn condition_11_terms(n: usize, p: f64) -> (f64, f64) {
    let q = 1.0 - p * p;
    if q <= 0.0 {
        return (0.0, 0.0);
    }
    let n = n as f64;
    ((n - 1.0) * q.powf(n / 2.0 + 1.0), 2.0 * q.powf(3.0 * n / 16.0 - 1.0))
}

/// Whether `max{(n−1)(1−p²)^{n/2+1}, 2(1−p²)^{3n/16−1}} ≤ 1`.
pub fn check_condition_11(n: usize, p: f64) -> bool {
    let (a, b) = condition_11_terms(n, p);
    a.max(b) <= 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PStar {
    pub value: f64,
    /// `1 − n(n−1)(1−p²)^{n−1}` before clamping.
    pub inner: f64,
    /// The inner term was negative and has been clamped to zero.
    pub clamped: bool,
}

/// `p* = (1 − n(n−1)(1−p²)^{n−1})^{|Ω|}`, a lower bound on the probability
/// that all `|Ω|` scenarios are strongly connected.
pub fn p_star(n: usize, p: f64, omega_count: usize) -> PStar {
    let q = 1.0 - p * p;
    let nf = n as f64;
    let inner = if q <= 0.0 { 1.0 } else { 1.0 - nf * (nf - 1.0) * q.powf(nf - 1.0) };
    let clamped = inner < 0.0;
    let base = inner.clamp(0.0, 1.0);
    let value = if omega_count == 0 { 1.0 } else { base.powf(omega_count as f64) };
    PStar { value, inner, clamped }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub n: usize,
    pub p: f64,
    pub omega_count: usize,
    pub trials: usize,
    pub seed: u64,
    pub condition_terms: (f64, f64),
    pub p_star: PStar,
    /// Trials in which every scenario was strongly connected.
    pub connected_trials: usize,
    pub empirical_fraction: f64,
    /// `√(p*(1−p*)/trials)`.
    pub sigma: f64,
    /// `p* − 3σ`.
    pub lower_threshold: f64,
    /// Connected trials whose reduced model did not have `n + 1` variables
    /// and two rows.
    pub structure_failures: usize,
}

impl ConnectivityReport {
    pub fn fraction_ok(&self) -> bool {
        self.empirical_fraction >= self.lower_threshold
    }

    pub fn passed(&self) -> bool {
        self.fraction_ok() && self.structure_failures == 0
    }
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng.random()
}

/// Monte-Carlo check of the strong-connectivity bound on `K_n`.
///
/// Each trial samples `omega_count` scenarios from its own RNG stream. For
/// trials where all scenarios are strongly connected the full presolve (with
/// `MaxReacSize = n`) must leave `n + 1` variables and two rows.
pub fn verify_theorem2(
    n: usize,
    p: f64,
    omega_count: usize,
    trials: usize,
    seed: u64,
) -> Result<ConnectivityReport, OracleError> {
    let condition_terms = condition_11_terms(n, p);
    if condition_terms.0.max(condition_terms.1) > 1.0 {
        return Err(OracleError::ConditionViolated { n, p, max_term: condition_terms.0.max(condition_terms.1) });
    }
    let network = SocialNetwork::complete(n);
    let params = icm_params(&network, p).map_err(crate::sampling::SamplingError::from)?;
    let options = PresolveOptions { sna: true, scna: true, ina: true, max_reac_size: n };

    let outcomes: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(bool, bool), OracleError> {
            let set = sample_icm(&network, &params, omega_count, trial_seed(seed, t))?;
            let connected = set.scenarios.iter().all(|live| scc_decompose(live).component_count() == 1);
            if !connected {
                return Ok((false, true));
            }
            let reduced = presolve(&set, &options)?;
            let model = build_reduced(&reduced, 1, None).expect("cardinality is positive");
            Ok((true, model.variable_count() == n + 1 && model.row_count() == 2))
        })
        .collect::<Result<_, _>>()?;

    let connected_trials = outcomes.iter().filter(|o| o.0).count();
    let structure_failures = outcomes.iter().filter(|o| o.0 && !o.1).count();
    let ps = p_star(n, p, omega_count);
    let sigma = if trials == 0 { 0.0 } else { (ps.value * (1.0 - ps.value) / trials as f64).sqrt() };
    Ok(ConnectivityReport {
        n,
        p,
        omega_count,
        trials,
        seed,
        condition_terms,
        p_star: ps,
        connected_trials,
        empirical_fraction: if trials == 0 { 1.0 } else { connected_trials as f64 / trials as f64 },
        sigma,
        lower_threshold: ps.value - 3.0 * sigma,
        structure_failures,
    })
}
