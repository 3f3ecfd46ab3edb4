//! Configuration files, report and field writers, and the command runners
//! behind the `hichom` binary.

pub mod commands;
pub mod config;
pub mod tables;
pub mod vtk;

pub use commands::{report, run, RunOutcome, REPORT_FORMAT};
pub use config::{parse_config, Command, RunConfig};
pub use tables::Table;
pub use vtk::VtkDocument;
