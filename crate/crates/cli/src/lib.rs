//! Library side of the `symbreak` binary, split out so the commands can be
//! driven from tests.

pub mod commands;
pub mod report;

pub use commands::{run, Cli, Command};
pub use report::{Format, Item, Outcome, Parsed, Report};
