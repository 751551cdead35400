//! Scenario files, Monte Carlo runs, and result aggregation.

pub mod config;
pub mod experiment;
pub mod plotdata;
pub mod summary;

pub use config::{apply_override, load_config, parse_config};
pub use experiment::{read_results, run_experiment, write_results, ExperimentResult, NetworkSnapshot, RESULTS_HEADER};
pub use plotdata::{emit_plotdata, read_snapshots, write_bars, write_snapshots, PlotFiles};
pub use summary::{mean_std, summarize, EpochStats, SeriesSummary, Summary};
