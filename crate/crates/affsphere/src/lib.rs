//! File formats, configuration and the command layer of the `affsphere`
//! command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod literal;
pub mod svg;
pub mod table;

pub use commands::{run, Command, Outcome};
pub use config::{Overrides, RunConfig};
pub use error::{AppError, Result};
