//! Declarative experiments and the text grammars used by configs and the CLI.

pub mod grammar;
pub mod config;
pub mod presets;
pub mod report;
pub mod runner;

pub use config::{ExperimentConfig, ExperimentKind, Format, Mode};
pub use presets::{preset, preset_ids, PRESETS};
pub use report::{resolve_out_dir, Expectation, ExperimentReport, GridPoint, LadderSummary, OUT_DIR_ENV};
pub use runner::run_experiment;
