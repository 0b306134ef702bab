//! The `ionage` command-line tool.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod scan;
