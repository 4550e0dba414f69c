//! Command-line front end of the hullab laboratory: run configuration,
//! artifact emission, the slice-topology check and the demo pipeline.

pub mod commands;
pub mod config;
pub mod demo;
pub mod error;
pub mod plot;
pub mod topology;

pub use commands::run;
pub use error::CliError;
