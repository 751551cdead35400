//! Active target tracking: the case-study world the planners run in.

pub mod config;
pub mod coverage;
pub mod robot;
pub mod target;
pub mod weights;
pub mod world;

pub use config::{Algorithm, ScenarioConfig, PRESETS};
pub use coverage::{coverage_objective, CoverageObjective};
pub use robot::{discretize_reachable, RobotState};
pub use target::{kf_predict, kf_update, TargetEstimate, TargetState};
pub use weights::{compute_weights, WeightScheme};
pub use world::{initial_lattice, plan_epoch, run_epoch, EpochMetrics, EpochPlan, WorldState};
