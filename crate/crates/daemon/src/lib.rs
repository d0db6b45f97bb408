//! Pusher and collector daemons, their REST control API, and a harness that
//! runs synthetic-cluster case studies in process.

pub mod config;
pub mod daemon;
pub mod dryrun;
pub mod jobs;
pub mod node;
pub mod rest;
pub mod scenario;
pub mod sources;
pub mod sysinfo;

pub use config::{ConfigError, DaemonConfig, Role};
pub use daemon::{Daemon, DaemonError};
