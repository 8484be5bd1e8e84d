//! Experiment runner for `seqnoma-core`: scenario files, seed fan-out over a
//! thread pool, output formats and the `seqnoma` command line.

pub mod cli;
pub mod config;
pub mod exec;
pub mod formats;
pub mod runner;
