//! File formats, command dispatch and benchmark harness for the `wmlq` binary.

pub mod app;
pub mod bench;
pub mod format;
pub mod generate;

pub use app::{run, Cli, Command, EXIT_BUDGET, EXIT_FAILURE, EXIT_INFEASIBLE, EXIT_OK};
