//! Batch driver for the screen analysis: configuration, file formats and
//! the subcommands that chain the library stages together.

pub mod commands;
pub mod config;
pub mod dispatch;
pub mod io;

pub use dispatch::{dispatch, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
