use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::path::Path;
use std::time::{Duration, Instant};

use odaframe::config::DaemonConfig;
use odaframe::Daemon;
use odaframe_core::Topic;
use odaframe_transport::Store;
use serde_json::Value;

const SENSORS: usize = 8;

fn get(addr: SocketAddr, path: &str) -> Value {
    let mut s = TcpStream::connect(addr).unwrap();
    write!(s, "GET {path} HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n").unwrap();
    let mut raw = String::new();
    s.read_to_string(&mut raw).unwrap();
    serde_json::from_str(raw.split_once("\r\n\r\n").unwrap().1).unwrap()
}

fn wait_for(what: &str, timeout: Duration, mut done: impl FnMut() -> bool) {
    let t = Instant::now();
    while !done() {
        assert!(t.elapsed() < timeout, "timed out waiting for {what}");
        std::thread::sleep(Duration::from_millis(20));
    }
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn pusher_feeds_collector_store_and_operators() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "mirror.conf",
        "[operator mirror]\ninterval_ms = 100\ninput:\n    <bottomup>tester0000\noutput:\n    <bottomup>mirror\n",
    );
    let ccfg = DaemonConfig::load(write(
        dir.path(),
        "collector.conf",
        "[global]\nrole = collector\nlisten = 127.0.0.1:0\nrest = 127.0.0.1:0\nstore = store\ncache_s = 60\ninterval_ms = 100\n\n[plugin identity]\nconfig = mirror.conf\n",
    ))
    .unwrap();
    let collector = Daemon::start(&ccfg).unwrap();
    // Nothing to bind to yet: the plugin waits for the first sensors.
    assert!(collector.runtime().manager.statuses().is_empty());

    let pcfg = DaemonConfig::parse(&format!(
        "[global]\nrole = pusher\nconnect = {}\nrest = off\ncache_s = 10\n\n[source t]\ntype = tester\nprefix = /r00/n00\ncount = {SENSORS}\ninterval_ms = 100\n",
        collector.data_addr().unwrap()
    ))
    .unwrap();
    let pusher = Daemon::start(&pcfg).unwrap();
    assert!(pusher.rest_addr().is_none());

    let c = collector.collector().unwrap();
    wait_for("20 samples", Duration::from_secs(20), || c.ingested() >= (20 * SENSORS) as u64);
    wait_for("plugin load", Duration::from_secs(10), || {
        collector.runtime().manager.statuses().iter().any(|s| s.plugin == "identity")
    });
    let rest = collector.rest_addr().unwrap();
    wait_for("mirror output", Duration::from_secs(10), || {
        get(rest, "/sensors?prefix=/r00/n00")["sensors"]
            .as_array()
            .unwrap()
            .iter()
            .any(|s| s == "/r00/n00/mirror")
    });
    let data = get(rest, "/data?sensor=/r00/n00/tester0003&rel=60000000000");
    assert_eq!(data["status"], "ok");
    assert!(data["readings"].as_array().unwrap().len() >= 20);

    pusher.shutdown().unwrap();
    collector.shutdown().unwrap();

    let store = Store::open(dir.path().join("store")).unwrap();
    let mut lengths = Vec::new();
    for i in 0..SENSORS {
        let t = Topic::new(format!("/r00/n00/tester{i:04}")).unwrap();
        let rs = store.query(&t, 0, u64::MAX).unwrap();
        let values: Vec<i64> = rs.iter().map(|r| r.value).collect();
        let expected: Vec<i64> = (1..=rs.len() as i64).collect();
        assert_eq!(values, expected, "{t}: every sample arrives once and in order");
        assert!(rs.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
        lengths.push(rs.len());
    }
    assert!(lengths.iter().all(|&n| n == lengths[0]), "{lengths:?}");
    assert!(store.record_count(&Topic::new("/r00/n00/mirror").unwrap()) > 0);
}

#[test]
fn lone_collector_idles_and_answers() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = DaemonConfig::parse("[global]\nrole = collector\nlisten = 127.0.0.1:0\nrest = 127.0.0.1:0\nstore = s\n").unwrap();
    cfg.store = Some(dir.path().join("s"));
    let d = Daemon::start(&cfg).unwrap();
    std::thread::sleep(Duration::from_millis(300));
    let rest = d.rest_addr().unwrap();
    assert_eq!(get(rest, "/sensors")["sensors"], serde_json::json!([]));
    assert_eq!(get(rest, "/operators")["operators"], serde_json::json!([]));
    assert_eq!(get(rest, "/data?sensor=/a/b&rel=1")["code"], "unknown_sensor");
    assert_eq!(d.collector().unwrap().ingested(), 0);
    d.shutdown().unwrap();
}

#[test]
fn bind_conflict_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let holder = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let mut cfg = DaemonConfig::parse("[global]\nrole = collector\nlisten = 127.0.0.1:0\nrest = off\nstore = s\n").unwrap();
    cfg.store = Some(dir.path().join("s"));
    cfg.listen = Some(holder.local_addr().unwrap().to_string());
    let err = Daemon::start(&cfg).err().expect("port is taken");
    assert!(err.to_string().contains("data listener"), "{err}");
}
