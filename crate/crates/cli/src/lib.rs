//! Command-line driver for `intcheb-core`: JSON databases, run records,
//! checkpoints and the `verify`, `search`, `bound` and `factors` commands.

pub mod commands;
pub mod format;
pub mod record;

pub use commands::{run, Cli};
