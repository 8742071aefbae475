//! Parameter sweeps, figure presets, run configuration files and the
//! `blockade` command-line tool, built on [`blockade_core`].

pub mod cli;
pub mod config;
pub mod output;
pub mod presets;
pub mod sweep;
