//! Command-line front end for `mudich-core`: experiment configs, report
//! emission and the example-reproduction suite.

pub mod config;
pub mod report;
pub mod runner;
pub mod suite;

pub use config::{CommandKind, ExperimentConfig};
pub use report::{CsvGrid, Report, Verdict};
pub use runner::{run, RunError, RunOptions};
pub use suite::{paper_examples_suite, Corruption, SubCheck, SuiteReport};
