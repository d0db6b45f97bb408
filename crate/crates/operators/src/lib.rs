//! Operator framework: plugin configuration, operator lifecycle, scheduling
//! and the built-in analysis plugins.

pub mod config;
pub mod error;
pub mod manager;
pub mod plugin;
pub mod plugins;
pub mod scheduler;

pub use config::{parse_plugin_config, Arrangement, Mode, OperatorConfig};
pub use error::ManagerError;
pub use manager::{job_blocks, LoadReport, Operator, OperatorManager, OperatorStatus, TickReport};
pub use plugin::{ActionOutcome, BlockOutputs, ComputeError, Ctx, OperatorLogic, Plugin, PluginRegistry, Publisher};
pub use scheduler::{Scheduler, DEFAULT_WORKERS};
