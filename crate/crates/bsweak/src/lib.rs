//! Configuration, report formats and the command-line driver for
//! `bsweak-core`.

#![forbid(unsafe_code)]

pub mod commands;
pub mod config;
pub mod output;
pub mod table;
pub mod verify;

pub use commands::{Command, Exit, Outcome};
pub use config::{load_potential, ConfigError, RunConfig};
pub use table::Table;
