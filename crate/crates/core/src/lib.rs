//! Communication-aware submodular maximization for multi-robot teams.
//!
//! Robots pick trajectories greedily to maximize a submodular team
//! objective, then deviate as little as possible from those picks so the
//! communication graph is connected at the end of every planning epoch:
//!
//! 1. [`submodular::greedy_partition_matroid`] picks one trajectory per robot.
//! 2. [`netgraph::mst`] extracts a topology from the deviation-cost graph
//!    over the greedy endpoints.
//! 3. [`deviation::solve_deviation`] moves robots to realize that topology.
//!
//! [`tracking`] wires these into a target-tracking simulation and
//! [`harness`] runs Monte Carlo experiments over it.

// `!(x > 0.0)` rejects NaN along with non-positive values, on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Symmetric matrix fills read better with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod checks;
pub mod deviation;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod netgraph;
pub mod submodular;
pub mod tracking;

pub use deviation::{
    feasibility_fallback, grid_oracle, solve_deviation, DeviationProblem, DeviationSolution, ObjectiveMode,
    Residuals, SolveStatus, SolverOptions,
};
pub use error::{CsmError, Result};
pub use geometry::{point, Disk, Point};
pub use netgraph::{
    bottleneck, build_proximity_graph, edge_weight, is_connected, mst, ProximityGraph, SpanningTree,
    WeightedCompleteGraph,
};
pub use submodular::{
    brute_force_opt, greedy_partition_matroid, marginal_gain, sgg, PartitionedGroundSet, Selection, SetFunction,
    SggOutcome, Trajectory,
};
pub use tracking::{Algorithm, ScenarioConfig, WeightScheme};
