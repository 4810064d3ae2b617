//! Command-line front end, configuration and file formats for
//! `freqalloc-core`.

pub mod cli;
pub mod config;
pub mod io;
pub mod parallel;
