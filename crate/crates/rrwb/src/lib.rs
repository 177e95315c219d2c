//! File formats, run configuration, reports and the `rrwb` command-line tool
//! built on [`rrwb_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod pipeline;
pub mod report;

pub use config::RunConfig;
pub use error::{Result, WorkbenchError};
pub use rrwb_core;
