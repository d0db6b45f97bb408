//! JSON-over-HTTP control and data API.
//!
//! Every response body is a JSON object with a `status` field, `"ok"` or
//! `"error"`; errors add a machine-readable `code` and a `message`.

use std::collections::BTreeMap;
use std::io::Read;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use log::{debug, warn};
use odaframe_core::{JobInfo, QueryError, QueryRequest, Topic};
use odaframe_operators::ManagerError;
use percent_encoding::percent_decode_str;
use serde_json::{json, Value};

use crate::node::Runtime;

const MAX_BODY: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Reply {
    pub http: u16,
    pub body: Value,
}

impl Reply {
    fn ok(mut body: Value) -> Reply {
        body["status"] = json!("ok");
        Reply { http: 200, body }
    }

    fn error(http: u16, code: &str, message: impl Into<String>) -> Reply {
        Reply {
            http,
            body: json!({"status": "error", "code": code, "message": message.into()}),
        }
    }

    pub fn code(&self) -> Option<&str> {
        self.body.get("code").and_then(Value::as_str)
    }
}

fn manager_error(e: &ManagerError) -> Reply {
    let http = match e {
        ManagerError::UnknownPlugin(_)
        | ManagerError::NotLoaded(_)
        | ManagerError::UnknownOperator { .. }
        | ManagerError::UnknownBlock { .. }
        | ManagerError::UnknownAction { .. } => 404,
        ManagerError::WrongMode { .. } | ManagerError::Stopped { .. } | ManagerError::Action(_) => 409,
        ManagerError::Config(_)
        | ManagerError::Invalid { .. }
        | ManagerError::Instantiation { .. }
        | ManagerError::NoOperators => 400,
        ManagerError::Compute(_) => 503,
        ManagerError::Query(q) => return query_error(q),
    };
    let mut r = Reply::error(http, e.code(), e.to_string());
    if let ManagerError::Config(c) = e {
        r.body["line"] = json!(c.line);
    }
    r
}

fn query_error(e: &QueryError) -> Reply {
    match e {
        QueryError::UnknownSensor(_) => Reply::error(404, "unknown_sensor", e.to_string()),
        QueryError::InvalidRange(_) => Reply::error(400, "invalid_range", e.to_string()),
        QueryError::JobsUnavailable => Reply::error(503, "jobs_unavailable", e.to_string()),
        QueryError::Storage(_) => Reply::error(500, "storage_error", e.to_string()),
    }
}

type Params = BTreeMap<String, String>;

fn param<T: std::str::FromStr>(params: &Params, key: &str) -> Result<Option<T>, Reply> {
    params
        .get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| Reply::error(400, "bad_parameter", format!("cannot parse {key}={v:?}")))
        })
        .transpose()
}

/// Routes requests to the daemon's subsystems. Holds no state of its own.
#[derive(Clone)]
pub struct Api {
    rt: Runtime,
}

impl Api {
    pub fn new(rt: Runtime) -> Api {
        Api { rt }
    }

    /// Handles one request. `url` is the path with an optional query string.
    pub fn handle(&self, method: &str, url: &str, body: &str) -> Reply {
        let (path, query) = url.split_once('?').unwrap_or((url, ""));
        let params: Params = form_urlencoded::parse(query.as_bytes()).into_owned().collect();
        let trailing = path.len() > 1 && path.ends_with('/');
        let segs: Vec<String> = path
            .split('/')
            .filter(|s| !s.is_empty())
            .map(|s| percent_decode_str(s).decode_utf8_lossy().into_owned())
            .collect();
        let segs: Vec<&str> = segs.iter().map(String::as_str).collect();
        let result = match (method, segs.as_slice()) {
            ("GET", ["sensors"]) => self.sensors(&params),
            ("GET", ["data"]) => self.data(&params),
            ("GET", ["operators"]) => Ok(Reply::ok(json!({"operators": self.rt.manager.statuses()}))),
            ("PUT", ["operators", plugin, op, action]) => self.action(plugin, op, action, &params),
            ("GET", ["compute", plugin, op, block @ ..]) if !block.is_empty() => {
                let mut name = format!("/{}", block.join("/"));
                if trailing {
                    name.push('/');
                }
                self.compute(plugin, op, &name)
            }
            ("GET", ["plugins"]) => Ok(self.plugins()),
            ("POST", ["plugins", name, "load"]) => self.load(name, body, &params),
            ("POST", ["plugins", name, "unload"]) => self
                .rt
                .manager
                .unload_plugin(name)
                .map(|_| Reply::ok(json!({"plugin": name})))
                .map_err(|e| manager_error(&e)),
            ("GET", ["jobs"]) => Ok(Reply::ok(json!({"jobs": self.rt.jobs.snapshot()}))),
            ("POST", ["jobs"]) => self.submit_job(body),
            (_, [first, ..]) if KNOWN.contains(first) => {
                Err(Reply::error(405, "method_not_allowed", format!("{method} {path}")))
            }
            _ => Err(Reply::error(404, "no_route", format!("{method} {path}"))),
        };
        result.unwrap_or_else(|e| e)
    }

    fn sensors(&self, params: &Params) -> Result<Reply, Reply> {
        let prefix = params.get("prefix").map_or("/", String::as_str);
        let tree = self.rt.qe.navigator();
        let mut topics: Vec<&str> = tree.topics().filter(|t| t.has_prefix(prefix)).map(Topic::as_str).collect();
        topics.sort_unstable();
        Ok(Reply::ok(json!({"sensors": topics})))
    }

    fn data(&self, params: &Params) -> Result<Reply, Reply> {
        let sensor = params
            .get("sensor")
            .ok_or_else(|| Reply::error(400, "missing_parameter", "sensor is required"))?;
        let topic = Topic::new(sensor).map_err(|e| Reply::error(400, "bad_parameter", e.to_string()))?;
        let rel: Option<u64> = param(params, "rel")?;
        let t0: Option<u64> = param(params, "t0")?;
        let t1: Option<u64> = param(params, "t1")?;
        let req = match (rel, t0, t1) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(Reply::error(400, "conflicting_range", "give either rel or t0 and t1"))
            }
            (Some(rel), None, None) => QueryRequest::relative(topic, rel),
            (None, Some(t0), Some(t1)) => QueryRequest::absolute(topic, t0, t1),
            (None, None, None) => return Err(Reply::error(400, "missing_range", "give either rel or t0 and t1")),
            _ => return Err(Reply::error(400, "missing_range", "t0 and t1 go together")),
        };
        let result = self.rt.qe.query(&req).map_err(|e| query_error(&e))?;
        let mut body = serde_json::to_value(&result).expect("serializable");
        body["sensor"] = json!(sensor);
        Ok(Reply::ok(body))
    }

    fn action(&self, plugin: &str, op: &str, action: &str, params: &Params) -> Result<Reply, Reply> {
        let result = self
            .rt
            .manager
            .action(plugin, op, action, params)
            .map_err(|e| manager_error(&e))?;
        Ok(Reply::ok(
            json!({"plugin": plugin, "operator": op, "action": action, "result": result}),
        ))
    }

    fn compute(&self, plugin: &str, op: &str, block: &str) -> Result<Reply, Reply> {
        let outputs = self
            .rt
            .manager
            .on_demand(plugin, op, block)
            .map_err(|e| manager_error(&e))?;
        let outputs: Vec<Value> = outputs
            .iter()
            .map(|(t, r)| json!({"sensor": t.as_str(), "value": r.value, "timestamp": r.timestamp}))
            .collect();
        Ok(Reply::ok(json!({"plugin": plugin, "operator": op, "block": block, "outputs": outputs})))
    }

    fn plugins(&self) -> Reply {
        let mut loaded: Vec<String> = self.rt.manager.statuses().into_iter().map(|s| s.plugin).collect();
        loaded.dedup();
        Reply::ok(json!({"available": self.rt.manager.plugin_names(), "loaded": loaded}))
    }

    fn load(&self, name: &str, body: &str, params: &Params) -> Result<Reply, Reply> {
        let start: bool = param(params, "start")?.unwrap_or(false);
        let report = self
            .rt
            .manager
            .load_plugin(name, body)
            .map_err(|e| manager_error(&e))?;
        if start {
            self.rt.manager.start_all(name).map_err(|e| manager_error(&e))?;
        }
        let mut body = serde_json::to_value(&report).expect("serializable");
        body["started"] = json!(start);
        Ok(Reply::ok(body))
    }

    fn submit_job(&self, body: &str) -> Result<Reply, Reply> {
        let job: JobInfo = serde_json::from_str(body).map_err(|e| Reply::error(400, "bad_body", e.to_string()))?;
        let id = job.job_id.clone();
        self.rt
            .jobs
            .submit(job)
            .map_err(|e| Reply::error(400, "invalid_job", e))?;
        Ok(Reply::ok(json!({"job_id": id})))
    }
}

const KNOWN: &[&str] = &["sensors", "data", "operators", "compute", "plugins", "jobs"];

/// HTTP front end serving an [`Api`] from a small thread pool.
pub struct RestServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    threads: Vec<JoinHandle<()>>,
}

impl RestServer {
    pub fn start(addr: &str, api: Api, threads: usize) -> std::io::Result<RestServer> {
        let server = tiny_http::Server::http(addr).map_err(std::io::Error::other)?;
        let local = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| std::io::Error::other("not an IP listener"))?;
        let server = Arc::new(server);
        let stop = Arc::new(AtomicBool::new(false));
        let handles = (0..threads.max(1))
            .map(|i| {
                let server = server.clone();
                let api = api.clone();
                let stop = stop.clone();
                std::thread::Builder::new()
                    .name(format!("rest-{i}"))
                    .spawn(move || serve(&server, &api, &stop))
                    .expect("spawn REST worker")
            })
            .collect();
        Ok(RestServer {
            addr: local,
            stop,
            threads: handles,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) {
        self.halt();
    }

    fn halt(&mut self) {
        self.stop.store(true, Ordering::Release);
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

impl Drop for RestServer {
    fn drop(&mut self) {
        self.halt();
    }
}

fn serve(server: &tiny_http::Server, api: &Api, stop: &AtomicBool) {
    while !stop.load(Ordering::Acquire) {
        let mut req = match server.recv_timeout(Duration::from_millis(100)) {
            Ok(Some(r)) => r,
            Ok(None) => continue,
            Err(e) => {
                warn!("REST listener failed: {e}");
                return;
            }
        };
        let mut body = String::new();
        let reply = match req.as_reader().take(MAX_BODY).read_to_string(&mut body) {
            Ok(_) => api.handle(req.method().as_str(), req.url(), &body),
            Err(e) => Reply::error(400, "bad_body", e.to_string()),
        };
        debug!("{} {} -> {}", req.method(), req.url(), reply.http);
        let response = tiny_http::Response::from_string(reply.body.to_string())
            .with_status_code(reply.http)
            .with_header(
                tiny_http::Header::from_bytes(&b"Content-Type"[..], &b"application/json"[..]).expect("static header"),
            );
        if let Err(e) = req.respond(response) {
            debug!("client went away: {e}");
        }
    }
}
