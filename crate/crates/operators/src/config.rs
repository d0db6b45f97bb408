//! Operator configuration read from plugin configuration files.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use odaframe_core::conf::{ConfDoc, ConfSection};
use odaframe_core::{BlockTemplate, ConfError, SensorExpression, NS_PER_MS};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Online,
    OnDemand,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Online => "online",
            Mode::OnDemand => "on-demand",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "online" => Ok(Mode::Online),
            "on-demand" | "ondemand" => Ok(Mode::OnDemand),
            other => Err(format!("unknown mode {other:?} (expected online or on-demand)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Arrangement {
    /// One operator owns every block and processes them in order.
    Sequential,
    /// One operator instance per block.
    Parallel,
}

impl Arrangement {
    pub fn as_str(self) -> &'static str {
        match self {
            Arrangement::Sequential => "sequential",
            Arrangement::Parallel => "parallel",
        }
    }
}

impl FromStr for Arrangement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sequential" => Ok(Arrangement::Sequential),
            "parallel" => Ok(Arrangement::Parallel),
            other => Err(format!("unknown arrangement {other:?} (expected sequential or parallel)")),
        }
    }
}

const RESERVED: &[&str] = &["mode", "interval_ms", "arrangement", "streaming", "job", "job_prefix"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorConfig {
    pub name: String,
    pub mode: Mode,
    pub interval_ns: u64,
    pub arrangement: Arrangement,
    pub template: BlockTemplate,
    /// Publish outputs to the transport in addition to the local caches.
    pub streaming: bool,
    /// Blocks are built per running job instead of per tree node.
    pub job: bool,
    pub job_prefix: String,
    /// Plugin-specific keys.
    pub params: BTreeMap<String, String>,
}

impl OperatorConfig {
    pub fn new(name: impl Into<String>, template: BlockTemplate) -> Self {
        OperatorConfig {
            name: name.into(),
            mode: Mode::Online,
            interval_ns: 1000 * NS_PER_MS,
            arrangement: Arrangement::Sequential,
            template,
            streaming: true,
            job: false,
            job_prefix: "/job".to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn param<T: FromStr>(&self, key: &str) -> Result<Option<T>, String>
    where
        T::Err: fmt::Display,
    {
        self.params
            .get(key)
            .map(|v| v.parse().map_err(|e| format!("{key} = {v:?}: {e}")))
            .transpose()
    }

    pub fn param_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, String>
    where
        T::Err: fmt::Display,
    {
        Ok(self.param(key)?.unwrap_or(default))
    }

    /// Reads one `[operator NAME]` section, with `defaults` supplying keys
    /// the section leaves out.
    pub fn from_section(section: &ConfSection, defaults: Option<&ConfSection>) -> Result<Self, ConfError> {
        let name = section
            .name
            .clone()
            .ok_or_else(|| ConfError::new(section.line, "operator section needs a name"))?;
        let lookup = |key: &str| section.entry(key).or_else(|| defaults.and_then(|d| d.entry(key)));
        let get = |key: &str| lookup(key).map(|e| (e.value.clone(), e.line));

        let exprs = |list: &str| -> Result<Vec<SensorExpression>, ConfError> {
            let Some(l) = section.list(list) else {
                return Ok(Vec::new());
            };
            l.items
                .iter()
                .map(|(text, line)| {
                    SensorExpression::parse(text).map_err(|e| ConfError::new(*line, format!("{text:?}: {e}")))
                })
                .collect()
        };
        let inputs = exprs("input")?;
        let outputs = exprs("output")?;
        let operator_outputs = section
            .list("operator_output")
            .map(|l| l.values().map(str::to_string).collect())
            .unwrap_or_default();
        let template = BlockTemplate::new(inputs, outputs, operator_outputs)
            .map_err(|e| ConfError::new(section.line, format!("operator {name}: {e}")))?;

        let mut cfg = OperatorConfig::new(name, template);
        let bad = |line: usize, key: &str, e: String| ConfError::new(line, format!("{key}: {e}"));
        if let Some((v, line)) = get("mode") {
            cfg.mode = v.parse().map_err(|e| bad(line, "mode", e))?;
        }
        if let Some((v, line)) = get("arrangement") {
            cfg.arrangement = v.parse().map_err(|e| bad(line, "arrangement", e))?;
        }
        if let Some((v, line)) = get("interval_ms") {
            let ms: u64 = v.parse().map_err(|e: std::num::ParseIntError| bad(line, "interval_ms", e.to_string()))?;
            if ms == 0 && cfg.mode == Mode::Online {
                return Err(ConfError::new(line, "interval_ms must be positive for online operators"));
            }
            cfg.interval_ns = ms * NS_PER_MS;
        }
        if let Some((v, line)) = get("streaming") {
            cfg.streaming = v.parse().map_err(|e: std::str::ParseBoolError| bad(line, "streaming", e.to_string()))?;
        }
        if let Some((v, line)) = get("job") {
            cfg.job = v.parse().map_err(|e: std::str::ParseBoolError| bad(line, "job", e.to_string()))?;
        }
        if let Some((v, line)) = get("job_prefix") {
            if !v.starts_with('/') || v.ends_with('/') || v.len() < 2 {
                return Err(ConfError::new(line, "job_prefix must look like /name"));
            }
            cfg.job_prefix = v;
        }
        for src in defaults.into_iter().chain(Some(section)) {
            for e in &src.entries {
                if !RESERVED.contains(&e.key.as_str()) {
                    cfg.params.insert(e.key.clone(), e.value.clone());
                }
            }
        }
        Ok(cfg)
    }

    /// Writes the configuration back as an operator section.
    pub fn to_section(&self) -> ConfSection {
        let mut s = ConfSection::new("operator", Some(self.name.clone()));
        s.set("mode", self.mode.as_str());
        s.set("interval_ms", self.interval_ns / NS_PER_MS);
        s.set("arrangement", self.arrangement.as_str());
        s.set("streaming", self.streaming);
        if self.job {
            s.set("job", true);
            s.set("job_prefix", &self.job_prefix);
        }
        for (k, v) in &self.params {
            s.set(k, v);
        }
        if !self.template.inputs.is_empty() {
            s.set_list("input", &self.template.inputs);
        }
        s.set_list("output", &self.template.outputs);
        if !self.template.operator_outputs.is_empty() {
            s.set_list("operator_output", &self.template.operator_outputs);
        }
        s
    }
}

/// Parses a plugin configuration: an optional `[global]` section of
/// defaults followed by one `[operator NAME]` section per operator.
pub fn parse_plugin_config(text: &str) -> Result<Vec<OperatorConfig>, ConfError> {
    let doc = ConfDoc::parse(text)?;
    let defaults = doc.section("global");
    let mut out: Vec<OperatorConfig> = Vec::new();
    for s in &doc.sections {
        match s.kind.as_str() {
            "global" => {}
            "operator" => {
                let cfg = OperatorConfig::from_section(s, defaults)?;
                if out.iter().any(|c| c.name == cfg.name) {
                    return Err(ConfError::new(s.line, format!("duplicate operator name {:?}", cfg.name)));
                }
                out.push(cfg);
            }
            other => return Err(ConfError::new(s.line, format!("unknown section kind {other:?}"))),
        }
    }
    Ok(out)
}

pub fn format_plugin_config(configs: &[OperatorConfig]) -> String {
    ConfDoc {
        sections: configs.iter().map(OperatorConfig::to_section).collect(),
    }
    .to_string()
}
