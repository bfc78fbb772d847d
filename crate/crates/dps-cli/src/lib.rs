//! Harness library behind the `dps` CLI: JSON configs, run execution,
//! ablation sweeps and best-configuration selection.

pub mod config;
pub mod error;
pub mod io;
pub mod runner;
pub mod select;
pub mod sweep;

pub use config::{RunConfig, SweepSpec};
pub use error::{HarnessError, Result};
pub use runner::{run_single, write_artifacts, RunRecord, RunResult};
pub use select::{read_selection_csv, select_best};
pub use sweep::{run_sweep, write_sweep_csv, SweepOutput, SweepRow};
