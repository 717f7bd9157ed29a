//! Command-line driver for the Y-linked bisexual branching process:
//! simulation, ABC inference, posterior summaries and predictive runs.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod parallel;
pub mod plot;

pub use cli::{run, Cli};
pub use error::{AppError, AppResult};
