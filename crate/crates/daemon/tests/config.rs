use odaframe::config::{DaemonConfig, Role, SourceKind};

const PUSHER: &str = "\
# node-local pusher
[global]
role = pusher
connect = 127.0.0.1:9300
rest = 127.0.0.1:0
cache_s = 120
interval_ms = 500
workers = 2
queue = 500
hierarchy:
    rack r\\d+
    node n\\d+

[source counters]
type = tester
prefix = /r01/n01
count = 16

[source recorded]
type = replay
file = data/replay.csv
interval_ms = 250

[plugin regressor]
config = plugins/regressor.conf
start = false
";

#[test]
fn round_trips_through_text() {
    let cfg = DaemonConfig::parse(PUSHER).unwrap();
    assert_eq!(cfg.role, Role::Pusher);
    assert_eq!(cfg.cache_s, 120);
    assert_eq!(cfg.hierarchy.len(), 2);
    assert_eq!(cfg.sources.len(), 2);
    assert_eq!(
        cfg.sources[0].kind,
        SourceKind::Tester {
            prefix: "/r01/n01".into(),
            count: 16
        }
    );
    assert_eq!(cfg.sources[0].interval_ms, 500);
    assert_eq!(cfg.sources[1].interval_ms, 250);
    assert!(!cfg.plugins[0].start);
    let again = DaemonConfig::parse(&cfg.to_string()).unwrap();
    assert_eq!(again, cfg);
}

#[test]
fn errors_carry_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "[global]\nrole = pusher\nconnect = x:1\n\n[source s]\ntype = sampler\n").unwrap();
    let err = DaemonConfig::load(&path).unwrap_err();
    assert_eq!(err.line(), Some(6));
    let text = err.to_string();
    assert!(text.starts_with(&format!("{}:6:", path.display())), "{text}");

    let cases = [
        ("[global]\nrole = pusher\nconnect = x:1\ncache_s = 0\n", 4),
        ("[global]\nrole = janitor\n", 2),
        ("[global]\nrole = collector\nlisten = :1\n", 1),
        ("[global]\nrole = collector\nlisten = :1\nstore = s\n[source t]\ntype = tester\n", 5),
        ("[global]\nrole = pusher\nconnect = x:1\n[plugin p]\nstart = true\n", 4),
        ("[global]\nrole = pusher\nconnect = x:1\n[widget w]\n", 4),
    ];
    for (text, line) in cases {
        let err = DaemonConfig::parse(text).unwrap_err();
        assert_eq!(err.line(), Some(line), "{text:?}: {err}");
    }
    assert!(DaemonConfig::load(dir.path().join("missing.conf")).unwrap_err().line().is_none());
}

#[test]
fn relative_paths_resolve_against_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("collector.conf");
    std::fs::write(
        &path,
        "[global]\nrole = collector\nlisten = 127.0.0.1:0\nrest = off\nstore = store\njobs = /abs/jobs.jsonl\n\n[plugin persyst]\nconfig = persyst.conf\n",
    )
    .unwrap();
    let cfg = DaemonConfig::load(&path).unwrap();
    assert_eq!(cfg.store.as_deref(), Some(dir.path().join("store").as_path()));
    assert_eq!(cfg.jobs.as_deref(), Some(std::path::Path::new("/abs/jobs.jsonl")));
    assert_eq!(cfg.plugins[0].config, dir.path().join("persyst.conf"));
    assert!(cfg.plugins[0].start);
    assert!(cfg.rest.is_none());
}
