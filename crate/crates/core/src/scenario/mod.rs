//! Declarative scenarios: a JSON config drives the whole pipeline and yields a report.

pub mod config;
pub mod report;
pub mod run;

pub use config::ScenarioConfig;
pub use report::{emit_outputs, Mode, ScenarioReport, Status, Timings};
pub use run::{run_scenario, RunOptions};
