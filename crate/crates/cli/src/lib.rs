//! The `penum` pipeline: each subcommand reads the corpus, writes its
//! results under `--out`, and later stages pick those files up.

pub mod cli;
pub mod commands;
pub mod config;

pub use cli::{Cli, Command};
pub use commands::run;
