//! Command-line layer over `mvdw-core`: configuration, parameter sweeps,
//! results files and an eigensolver benchmark.

pub mod bench;
pub mod config;
mod error;
pub mod report;
pub mod sweep;
pub mod table;

pub use config::{ForceMethod, LPolicy, Overrides, RunConfig, Substrate, Truncation};
pub use error::{CliError, CliResult};
pub use report::{emit_report, regenerate, ReportFiles};
pub use sweep::{run_point, run_sweep, SweepOutcome};
pub use table::{SampleRow, Status, SweepTable};
