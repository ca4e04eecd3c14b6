//! Command-line verification suites for `ltf-core`: configuration, experiment runners and
//! CSV/JSON reports.

pub mod commands;
pub mod config;
pub mod report;
