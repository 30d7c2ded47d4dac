//! Configuration, field export and the driver commands behind the
//! `oldroyd` binary.

pub mod commands;
pub mod config;
pub mod export;
pub mod expr;

pub use commands::{cmd_certify, cmd_mms, cmd_probe, cmd_solve, RunOutcome};
pub use config::RunConfig;
pub use expr::Expr;
