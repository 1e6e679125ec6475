//! Exact solver toolkit for sampled influence maximization.
//!
//! The pipeline samples live-arc scenarios from a social network, reduces the
//! scenario-wise covering model with SNA, SCNA and INA, and solves it with a
//! Benders decomposition whose duals are available in closed form. Oracles
//! and verifiers for the bipartite-LTM and complete-graph-ICM special cases
//! live in [`oracle`].

pub mod benders;
pub mod combin;
pub mod generators;
pub mod graph;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod presolve;
pub mod sampling;

pub use graph::{
    density, icm_params, load_edge_list, ltm_params, write_edge_list, Arc, DiffusionModel, DiffusionParams, GraphError,
    NodeId, SocialNetwork,
};
pub use presolve::{presolve, CondensedGraph, PresolveLevel, PresolveOptions, PresolveStats, ReachSet, ReducedModel};
pub use sampling::{enumerate_scenarios, sample, sample_icm, sample_ltm, LiveArcGraph, SamplingMode, ScenarioSet};
