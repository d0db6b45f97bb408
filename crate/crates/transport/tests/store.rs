use std::sync::Arc;

use odaframe_core::{SensorReading, StoreLookup, Topic, NS_PER_SEC};
use odaframe_transport::Store;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const S: u64 = NS_PER_SEC;

fn t(s: &str) -> Topic {
    Topic::new(s).unwrap()
}

fn seconds(range: std::ops::RangeInclusive<u64>) -> Vec<SensorReading> {
    range.map(|k| SensorReading::new(k as i64 * 10, k * S)).collect()
}

#[test]
fn range_query_filters_inclusively() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    store.append(&t("/a/power"), &seconds(1..=10)).unwrap();
    let got = store.query(&t("/a/power"), 4 * S, 6 * S).unwrap();
    assert_eq!(got, seconds(4..=6));
    assert!(store.query(&t("/nope"), 0, u64::MAX).unwrap().is_empty());
    assert!(store.query(&t("/a/power"), 5, 4).is_err());
    assert_eq!(store.query(&t("/a/power"), 0, u64::MAX).unwrap().len(), 10);
    assert_eq!(store.newest(&t("/a/power")).unwrap(), Some(SensorReading::new(100, 10 * S)));
}

#[test]
fn reopen_preserves_contents() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let topics: Vec<Topic> = (0..50).map(|i| t(&format!("/r{}/n{i}/x", i % 3))).collect();
    let mut before = Vec::new();
    {
        let store = Store::open(dir.path()).unwrap();
        for tp in &topics {
            let mut ts = 0u64;
            let rs: Vec<SensorReading> = (0..rng.random_range(1..200))
                .map(|_| {
                    ts += rng.random_range(1..1000);
                    SensorReading::new(rng.random(), ts)
                })
                .collect();
            store.append(tp, &rs).unwrap();
        }
        store.flush().unwrap();
        for tp in &topics {
            before.push(store.query(tp, 0, u64::MAX).unwrap());
        }
    }
    let store = Store::open(dir.path()).unwrap();
    assert_eq!(store.topics().len(), 50);
    for (tp, b) in topics.iter().zip(&before) {
        assert_eq!(&store.query(tp, 0, u64::MAX).unwrap(), b);
    }
    // Appends after reopen continue the same segments.
    let last = before[0].last().unwrap().timestamp;
    store.append(&topics[0], &[SensorReading::new(1, last + 1)]).unwrap();
    assert_eq!(store.record_count(&topics[0]), before[0].len() as u64 + 1);
}

#[test]
fn out_of_order_batches_are_sorted_and_stale_records_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    let tp = t("/x");
    let r = |ts: u64| SensorReading::new(ts as i64, ts);
    let rep = store.append(&tp, &[r(5), r(3), r(9)]).unwrap();
    assert_eq!((rep.written, rep.rejected), (3, 0));
    let rep = store.append(&tp, &[r(8), r(12), r(9), r(2)]).unwrap();
    assert_eq!((rep.written, rep.rejected), (2, 2));
    assert_eq!(store.rejected(), 2);
    let ts: Vec<u64> = store.query(&tp, 0, 100).unwrap().iter().map(|r| r.timestamp).collect();
    assert_eq!(ts, vec![3, 5, 9, 9, 12]);
}

#[test]
fn torn_records_and_index_lines_are_recovered() {
    let dir = tempfile::tempdir().unwrap();
    {
        let store = Store::open(dir.path()).unwrap();
        store.append(&t("/a"), &seconds(1..=3)).unwrap();
        store.append(&t("/b"), &seconds(1..=2)).unwrap();
    }
    let seg = dir.path().join("00000000.seg");
    let mut bytes = std::fs::read(&seg).unwrap();
    bytes.extend([1, 2, 3]);
    std::fs::write(&seg, bytes).unwrap();
    let index = dir.path().join("index");
    let mut text = std::fs::read_to_string(&index).unwrap();
    text.push_str("00000002.seg");
    std::fs::write(&index, text).unwrap();

    let store = Store::open(dir.path()).unwrap();
    assert_eq!(store.query(&t("/a"), 0, u64::MAX).unwrap(), seconds(1..=3));
    assert_eq!(store.topics().len(), 2);
}

#[test]
fn readers_see_consistent_prefixes_during_appends() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(Store::open(dir.path()).unwrap());
    let tp = t("/hot");
    std::thread::scope(|s| {
        let w = store.clone();
        let wt = tp.clone();
        s.spawn(move || {
            for k in 0..2000u64 {
                w.append(&wt, &[SensorReading::new(k as i64, k)]).unwrap();
            }
        });
        for _ in 0..4 {
            let r = store.clone();
            let rt = tp.clone();
            s.spawn(move || {
                for _ in 0..300 {
                    let got = r.query(&rt, 0, u64::MAX).unwrap();
                    assert!(got.iter().enumerate().all(|(i, x)| x.timestamp == i as u64 && x.value == i as i64));
                }
            });
        }
    });
    assert_eq!(store.record_count(&tp), 2000);
}

#[test]
fn store_lookup_distinguishes_unknown_topics() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    store.append(&t("/a"), &seconds(1..=3)).unwrap();
    let lookup: &dyn StoreLookup = &store;
    assert_eq!(lookup.query_range(&t("/zz"), 0, 10).unwrap(), None);
    assert_eq!(lookup.query_range(&t("/a"), 2 * S, 9 * S).unwrap().unwrap().len(), 2);
    assert_eq!(lookup.newest(&t("/a")).unwrap().unwrap().timestamp, 3 * S);
}
