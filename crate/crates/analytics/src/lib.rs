//! Numerical building blocks for the analysis plugins.

pub mod error;
pub mod forest;
pub mod gmm;
pub mod perf;
pub mod quantile;
pub mod stats;

pub use error::AnalyticsError;
pub use forest::{ForestModel, ForestParams, RegressionTree};
pub use gmm::{Assignment, DensityScale, MixtureModel, MixtureParams, OUTLIER_LABEL};
pub use quantile::deciles;
pub use stats::{feature_vector, WindowStats};
