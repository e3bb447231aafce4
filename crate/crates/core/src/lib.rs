//! Discrete-event simulator comparing a clustered multi-hop sensor-network
//! protocol (MLEACH) with a DSDV baseline under a first-order radio model.

pub mod audit;
pub mod cli;
pub mod config;
pub mod dsdv;
pub mod energy;
pub mod engine;
pub mod metrics;
pub mod mleach;
pub mod mobility;
pub mod model;
pub mod network;
pub mod sim;
pub mod traffic;

pub use config::{validate_config, ConfigError, SimConfig};
pub use metrics::{export_csv, MetricsLog, RunSummary};
pub use sim::{simulate, ProtocolKind, Simulation};
