use odaframe_core::{BlockError, ConfError, QueryError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManagerError {
    #[error("unknown plugin {0:?}")]
    UnknownPlugin(String),
    #[error("plugin {0:?} is not loaded")]
    NotLoaded(String),
    #[error("unknown operator {operator:?} in plugin {plugin:?}")]
    UnknownOperator { plugin: String, operator: String },
    #[error("operator {operator:?} has no block {block:?}")]
    UnknownBlock { operator: String, block: String },
    #[error("operator {operator:?} is in {mode} mode")]
    WrongMode { operator: String, mode: &'static str },
    #[error("operator {operator:?} is stopped")]
    Stopped { operator: String },
    #[error("plugin {plugin:?} has no action {action:?}")]
    UnknownAction { plugin: String, action: String },
    #[error("configuration error at {0}")]
    Config(#[from] ConfError),
    #[error("operator {operator:?}: {message}")]
    Invalid { operator: String, message: String },
    #[error("operator {operator:?}: {source}")]
    Instantiation {
        operator: String,
        #[source]
        source: BlockError,
    },
    #[error("configuration defines no operator")]
    NoOperators,
    #[error("{0}")]
    Action(String),
    #[error("compute failed: {0}")]
    Compute(String),
    #[error(transparent)]
    Query(#[from] QueryError),
}

impl ManagerError {
    /// Short machine-readable code used by the REST layer.
    pub fn code(&self) -> &'static str {
        match self {
            ManagerError::UnknownPlugin(_) | ManagerError::NotLoaded(_) => "unknown_plugin",
            ManagerError::UnknownOperator { .. } => "unknown_operator",
            ManagerError::UnknownBlock { .. } => "unknown_block",
            ManagerError::WrongMode { .. } => "wrong_mode",
            ManagerError::Stopped { .. } => "stopped",
            ManagerError::UnknownAction { .. } => "unknown_action",
            ManagerError::Config(_) => "config_error",
            ManagerError::Invalid { .. } => "invalid_config",
            ManagerError::Instantiation { .. } => "instantiation_error",
            ManagerError::NoOperators => "no_operators",
            ManagerError::Action(_) => "action_failed",
            ManagerError::Compute(_) => "compute_failed",
            ManagerError::Query(_) => "query_error",
        }
    }
}
