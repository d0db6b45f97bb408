//! Daemon configuration files.
//!
//! ```text
//! [global]
//! role = pusher
//! connect = 127.0.0.1:9300
//! rest = 127.0.0.1:8080
//! cache_s = 180
//! interval_ms = 1000
//!
//! [source tester]
//! type = tester
//! prefix = /n01
//! count = 1000
//!
//! [plugin querytest]
//! config = querytest.conf
//! start = true
//! ```
//!
//! Relative paths are resolved against the directory of the configuration
//! file by [`DaemonConfig::load`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use odaframe_core::conf::{ConfDoc, ConfSection};
use odaframe_core::{ConfError, HierarchySpec, NS_PER_MS, NS_PER_SEC};
use thiserror::Error;

pub const DEFAULT_CACHE_S: u64 = 180;
pub const DEFAULT_INTERVAL_MS: u64 = 1000;
pub const DEFAULT_WORKERS: usize = 4;
pub const DEFAULT_QUEUE: usize = 10_000;
pub const DEFAULT_REST: &str = "127.0.0.1:8080";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.as_ref().map_or("<config>".to_string(), |p| p.display().to_string()))]
    Invalid {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            path: None,
            line,
            message: message.into(),
        }
    }

    fn in_file(self, file: &Path) -> Self {
        match self {
            ConfigError::Invalid { line, message, .. } => ConfigError::Invalid {
                path: Some(file.to_path_buf()),
                line,
                message,
            },
            other => other,
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            ConfigError::Invalid { line, .. } => Some(*line),
            ConfigError::Io { .. } => None,
        }
    }
}

impl From<ConfError> for ConfigError {
    fn from(e: ConfError) -> Self {
        ConfigError::at(e.line, e.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Pusher,
    Collector,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Pusher => "pusher",
            Role::Collector => "collector",
        }
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pusher" => Ok(Role::Pusher),
            "collector" => Ok(Role::Collector),
            other => Err(format!("unknown role {other:?} (expected pusher or collector)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceKind {
    /// `count` monotonic counters under `prefix`.
    Tester { prefix: String, count: usize },
    /// Replays a `topic,timestamp_ns,value` CSV file.
    Replay { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceConfig {
    pub name: String,
    pub kind: SourceKind,
    pub interval_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PluginSection {
    pub name: String,
    pub config: PathBuf,
    pub start: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DaemonConfig {
    pub role: Role,
    /// Collector address a pusher publishes to.
    pub connect: Option<String>,
    /// Address a collector accepts pushers on.
    pub listen: Option<String>,
    /// REST address; `None` disables the API.
    pub rest: Option<String>,
    pub cache_s: u64,
    pub interval_ms: u64,
    pub workers: usize,
    pub queue: usize,
    pub hierarchy: Vec<String>,
    pub store: Option<PathBuf>,
    /// JSON-lines file of jobs loaded at startup.
    pub jobs: Option<PathBuf>,
    pub sources: Vec<SourceConfig>,
    pub plugins: Vec<PluginSection>,
}

impl DaemonConfig {
    /// Defaults for `role` with no addresses set.
    pub fn new(role: Role) -> Self {
        DaemonConfig {
            role,
            connect: None,
            listen: None,
            rest: Some(DEFAULT_REST.to_string()),
            cache_s: DEFAULT_CACHE_S,
            interval_ms: DEFAULT_INTERVAL_MS,
            workers: DEFAULT_WORKERS,
            queue: DEFAULT_QUEUE,
            hierarchy: Vec::new(),
            store: None,
            jobs: None,
            sources: Vec::new(),
            plugins: Vec::new(),
        }
    }

    pub fn cache_ns(&self) -> u64 {
        self.cache_s * NS_PER_SEC
    }

    pub fn interval_ns(&self) -> u64 {
        self.interval_ms * NS_PER_MS
    }

    pub fn hierarchy_spec(&self) -> Option<HierarchySpec> {
        if self.hierarchy.is_empty() {
            None
        } else {
            HierarchySpec::new(&self.hierarchy).ok()
        }
    }

    /// Reads and validates a file, resolving relative paths against its
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse(&text).map_err(|e| e.in_file(path))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = cfg.store.as_mut() {
            resolve(p);
        }
        if let Some(p) = cfg.jobs.as_mut() {
            resolve(p);
        }
        for s in &mut cfg.sources {
            if let SourceKind::Replay { file } = &mut s.kind {
                resolve(file);
            }
        }
        for p in &mut cfg.plugins {
            resolve(&mut p.config);
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let doc = ConfDoc::parse(text)?;
        let mut global: Option<&ConfSection> = None;
        for s in &doc.sections {
            match s.kind.as_str() {
                "global" => {
                    if global.is_some() {
                        return Err(ConfigError::at(s.line, "duplicate [global] section"));
                    }
                    global = Some(s);
                }
                "source" | "plugin" => {}
                other => return Err(ConfigError::at(s.line, format!("unknown section kind {other:?}"))),
            }
        }
        let g = global.ok_or_else(|| ConfigError::at(1, "missing [global] section"))?;
        allow_keys(
            g,
            &[
                "role",
                "connect",
                "listen",
                "rest",
                "cache_s",
                "interval_ms",
                "workers",
                "queue",
                "store",
                "jobs",
            ],
            &["hierarchy"],
        )?;
        let role: Role = g
            .parse("role")?
            .ok_or_else(|| ConfigError::at(g.line, "missing key role"))?;
        let mut cfg = DaemonConfig::new(role);
        cfg.connect = g.get("connect").map(str::to_string);
        cfg.listen = g.get("listen").map(str::to_string);
        cfg.rest = match g.get("rest") {
            Some("off" | "none") => None,
            Some(addr) => Some(addr.to_string()),
            None => cfg.rest,
        };
        cfg.cache_s = positive(g, "cache_s", DEFAULT_CACHE_S)?;
        cfg.interval_ms = positive(g, "interval_ms", DEFAULT_INTERVAL_MS)?;
        cfg.workers = positive(g, "workers", DEFAULT_WORKERS)?;
        cfg.queue = positive(g, "queue", DEFAULT_QUEUE)?;
        cfg.store = g.get("store").map(PathBuf::from);
        cfg.jobs = g.get("jobs").map(PathBuf::from);
        if let Some(list) = g.list("hierarchy") {
            cfg.hierarchy = list.values().map(str::to_string).collect();
            HierarchySpec::new(&cfg.hierarchy).map_err(|e| ConfigError::at(list.line, e.to_string()))?;
        }

        for s in doc.sections("source") {
            let name = s
                .name
                .clone()
                .ok_or_else(|| ConfigError::at(s.line, "source section needs a name"))?;
            if cfg.sources.iter().any(|o| o.name == name) {
                return Err(ConfigError::at(s.line, format!("duplicate source {name:?}")));
            }
            let kind = match s.get("type") {
                Some("tester") => {
                    allow_keys(s, &["type", "prefix", "count", "interval_ms"], &[])?;
                    let prefix = s.get("prefix").unwrap_or("/tester").to_string();
                    if !prefix.starts_with('/') {
                        return Err(ConfigError::at(line_of(s, "prefix"), "prefix must start with '/'"));
                    }
                    SourceKind::Tester {
                        prefix,
                        count: positive(s, "count", 1000)?,
                    }
                }
                Some("replay") => {
                    allow_keys(s, &["type", "file", "interval_ms"], &[])?;
                    SourceKind::Replay {
                        file: s
                            .get("file")
                            .map(PathBuf::from)
                            .ok_or_else(|| ConfigError::at(s.line, "replay source needs a file"))?,
                    }
                }
                Some(other) => {
                    return Err(ConfigError::at(
                        line_of(s, "type"),
                        format!("unknown source type {other:?} (expected tester or replay)"),
                    ))
                }
                None => return Err(ConfigError::at(s.line, "source section needs a type")),
            };
            cfg.sources.push(SourceConfig {
                name,
                kind,
                interval_ms: positive(s, "interval_ms", cfg.interval_ms)?,
            });
        }

        for s in doc.sections("plugin") {
            allow_keys(s, &["config", "start"], &[])?;
            let name = s
                .name
                .clone()
                .ok_or_else(|| ConfigError::at(s.line, "plugin section needs a name"))?;
            if cfg.plugins.iter().any(|o| o.name == name) {
                return Err(ConfigError::at(s.line, format!("duplicate plugin {name:?}")));
            }
            cfg.plugins.push(PluginSection {
                name,
                config: s
                    .get("config")
                    .map(PathBuf::from)
                    .ok_or_else(|| ConfigError::at(s.line, "plugin section needs a config path"))?,
                start: s.parse_or("start", true)?,
            });
        }

        match role {
            Role::Pusher => {
                if cfg.connect.is_none() {
                    return Err(ConfigError::at(g.line, "a pusher needs a connect address"));
                }
            }
            Role::Collector => {
                if cfg.listen.is_none() {
                    return Err(ConfigError::at(g.line, "a collector needs a listen address"));
                }
                if cfg.store.is_none() {
                    return Err(ConfigError::at(g.line, "a collector needs a store directory"));
                }
                if let Some(s) = doc.sections("source").next() {
                    return Err(ConfigError::at(s.line, "sources are only sampled by pushers"));
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_doc(&self) -> ConfDoc {
        let mut g = ConfSection::new("global", None);
        g.set("role", self.role.as_str());
        if let Some(c) = &self.connect {
            g.set("connect", c);
        }
        if let Some(l) = &self.listen {
            g.set("listen", l);
        }
        g.set("rest", self.rest.as_deref().unwrap_or("off"));
        g.set("cache_s", self.cache_s);
        g.set("interval_ms", self.interval_ms);
        g.set("workers", self.workers);
        g.set("queue", self.queue);
        if let Some(s) = &self.store {
            g.set("store", s.display());
        }
        if let Some(j) = &self.jobs {
            g.set("jobs", j.display());
        }
        if !self.hierarchy.is_empty() {
            g.set_list("hierarchy", &self.hierarchy);
        }
        let mut doc = ConfDoc { sections: vec![g] };
        for src in &self.sources {
            let mut s = ConfSection::new("source", Some(src.name.clone()));
            match &src.kind {
                SourceKind::Tester { prefix, count } => {
                    s.set("type", "tester");
                    s.set("prefix", prefix);
                    s.set("count", count);
                }
                SourceKind::Replay { file } => {
                    s.set("type", "replay");
                    s.set("file", file.display());
                }
            }
            s.set("interval_ms", src.interval_ms);
            doc.sections.push(s);
        }
        for p in &self.plugins {
            let mut s = ConfSection::new("plugin", Some(p.name.clone()));
            s.set("config", p.config.display());
            s.set("start", p.start);
            doc.sections.push(s);
        }
        doc
    }
}

impl fmt::Display for DaemonConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_doc())
    }
}

fn line_of(s: &ConfSection, key: &str) -> usize {
    s.entry(key).map_or(s.line, |e| e.line)
}

fn allow_keys(s: &ConfSection, keys: &[&str], lists: &[&str]) -> Result<(), ConfigError> {
    if let Some(e) = s.entries.iter().find(|e| !keys.contains(&e.key.as_str())) {
        return Err(ConfigError::at(e.line, format!("unknown key {:?} in [{}]", e.key, s.kind)));
    }
    if let Some(l) = s.lists.iter().find(|l| !lists.contains(&l.name.as_str())) {
        return Err(ConfigError::at(l.line, format!("unknown list {:?} in [{}]", l.name, s.kind)));
    }
    Ok(())
}

fn positive<T>(s: &ConfSection, key: &str, default: T) -> Result<T, ConfigError>
where
    T: FromStr + PartialEq + Default,
    T::Err: fmt::Display,
{
    let v = s.parse_or(key, default)?;
    if v == T::default() {
        return Err(ConfigError::at(line_of(s, key), format!("{key} must be positive")));
    }
    Ok(v)
}
