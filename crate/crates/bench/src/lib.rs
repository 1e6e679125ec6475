//! Instance builders shared by the benchmarks.

use infmax_core::generators::random_network;
use infmax_core::{icm_params, ltm_params, sample, DiffusionModel, ScenarioSet, SocialNetwork};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random network with `n` nodes and about `density · n` arcs.
pub fn network(n: usize, density: f64, seed: u64) -> SocialNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_network(&mut rng, n, (density * n as f64) as usize)
}

/// `omega` sampled scenarios of `network` (`p = 0.1` under ICM).
pub fn scenarios(network: &SocialNetwork, model: DiffusionModel, omega: usize, seed: u64) -> ScenarioSet {
    let params = match model {
        DiffusionModel::Icm => icm_params(network, 0.1).expect("valid probability"),
        DiffusionModel::Ltm => ltm_params(network),
    };
    sample(network, &params, omega, seed).expect("positive scenario count")
}
