//! Library side of the experiment driver: configuration handling and the
//! four experiment commands. The binary in `main.rs` is a thin wrapper so
//! that integration tests can call the commands directly.

pub mod commands;
pub mod config;

pub use commands::{cmd_example1, cmd_orders, cmd_quadcheck, cmd_transport, Check, Report};
pub use config::{ExperimentConfig, TransportSection};
