//! Front end for `spinlink-core`: flat TOML configuration, CSV/JSON tables,
//! parallel sweeps and the named figure recipes.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod recipes;

pub use error::{AppError, AppResult};
