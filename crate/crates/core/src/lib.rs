//! Core data model for the ODA framework: sensor topics and readings, ring
//! caches, the hierarchical sensor tree, sensor expressions and block
//! templates, and the query engine that serves data to operators.

pub mod block;
pub mod cache;
pub mod conf;
pub mod error;
pub mod expr;
pub mod job;
pub mod query;
pub mod registry;
pub mod sensor;
pub mod tree;

pub use block::{instantiate_blocks, Block, BlockTemplate, Instantiation};
pub use cache::{SensorCache, SharedCache};
pub use error::{BlockError, ConfError, ExprParseError, InvalidRange, QueryError, SkippedBlock, TopicError, TreeError};
pub use expr::SensorExpression;
pub use job::JobInfo;
pub use query::{DataSourceBinding, QueryEngine, QueryRequest, QueryResult, StoreLookup, TimeRange};
pub use registry::{SensorMeta, SensorRegistry};
pub use sensor::{SensorReading, Topic, NS_PER_MS, NS_PER_SEC};
pub use tree::{HierarchySpec, LevelSpec, NodeId, SensorTree};
