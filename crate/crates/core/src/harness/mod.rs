//! Configuration, suite execution and the JSON report.

pub mod config;
pub mod gridspec;
pub mod report;
pub mod suites;

pub use config::{RunConfig, Suite};
pub use gridspec::GridSpec;
pub use report::{compare_reports, DiffEntry, Report, ReportDiff, SuiteRecord, SCHEMA_VERSION};
pub use suites::{run_suite, run_with_artifacts, Artifact, RunOutput};
