//! Command-line driver for cuspl-core: coefficient cache, CSV/JSON reports
//! and a thread-pool runner for mean squares.

pub mod cache;
pub mod cli;
pub mod format;
pub mod manifest;
pub mod moments;
