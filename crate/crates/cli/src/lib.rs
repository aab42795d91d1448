//! Command-line laboratory around `sktlab-core`: structured experiment
//! configs, simulation runs with CSV/JSON artifacts, parameter sweeps and
//! built-in verification suites.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod reference;
pub mod verify;
