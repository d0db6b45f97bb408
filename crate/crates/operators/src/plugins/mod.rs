//! Built-in plugins.

use std::sync::Arc;

use odaframe_core::{Block, Topic};

use crate::config::OperatorConfig;
use crate::plugin::{OperatorLogic, Plugin};

pub mod actuator;
pub mod clustering;
pub mod identity;
pub mod perfmetrics;
pub mod persyst;
pub mod querytest;
pub mod regressor;
pub mod tester;

type Factory = fn(&OperatorConfig) -> Result<Box<dyn OperatorLogic>, String>;

/// A compiled-in plugin: a name, an output scale and a constructor.
pub struct Builtin {
    name: &'static str,
    scale: i64,
    factory: Factory,
}

impl Builtin {
    pub const fn new(name: &'static str, scale: i64, factory: Factory) -> Self {
        Builtin { name, scale, factory }
    }
}

impl Plugin for Builtin {
    fn name(&self) -> &str {
        self.name
    }

    fn create(&self, config: &OperatorConfig) -> Result<Box<dyn OperatorLogic>, String> {
        (self.factory)(config)
    }

    fn output_scale(&self) -> i64 {
        self.scale
    }
}

pub fn all() -> Vec<Arc<dyn Plugin>> {
    vec![
        Arc::new(actuator::PLUGIN),
        Arc::new(clustering::PLUGIN),
        Arc::new(identity::PLUGIN),
        Arc::new(perfmetrics::PLUGIN),
        Arc::new(persyst::PLUGIN),
        Arc::new(querytest::PLUGIN),
        Arc::new(regressor::PLUGIN),
    ]
}

/// First input of `block` whose sensor name is `name`.
pub(crate) fn input_named<'a>(block: &'a Block, name: &str) -> Option<&'a Topic> {
    block.inputs.iter().find(|t| t.name() == name)
}
