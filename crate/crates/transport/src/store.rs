//! Embedded append-only time-series store.
//!
//! Each topic has a segment file of 16-byte records (timestamp u64 BE,
//! value i64 BE) sorted by timestamp. `index` maps segment files to topics,
//! one `FILE<TAB>TOPIC` line per topic. Readers use positional reads against
//! a published record count, so queries run concurrently with appends and
//! see a consistent prefix.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::os::unix::fs::FileExt;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use odaframe_core::{SensorReading, StoreLookup, Topic};
use parking_lot::{Mutex, RwLock};
use thiserror::Error;

use crate::frame::RECORD_LEN;

const INDEX_FILE: &str = "index";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("invalid range: t0 {t0} > t1 {t1}")]
    InvalidRange { t0: u64, t1: u64 },
    #[error("corrupt index line {line}: {message}")]
    CorruptIndex { line: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AppendReport {
    pub written: usize,
    /// Records older than the segment's newest record.
    pub rejected: usize,
}

struct Segment {
    path: PathBuf,
    file: File,
    records: AtomicU64,
    /// Timestamp of the last record; meaningful when `records > 0`.
    tail: AtomicU64,
    write: Mutex<()>,
}

impl Segment {
    /// Opens a segment; `fresh` discards any unindexed leftover file.
    fn open(path: PathBuf, fresh: bool) -> Result<Segment, StoreError> {
        let file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)
            .map_err(io_err(&path))?;
        if fresh {
            file.set_len(0).map_err(io_err(&path))?;
        }
        let len = file.metadata().map_err(io_err(&path))?.len();
        let whole = len / RECORD_LEN as u64;
        if whole * RECORD_LEN as u64 != len {
            log::warn!("{}: dropping a torn trailing record", path.display());
            file.set_len(whole * RECORD_LEN as u64).map_err(io_err(&path))?;
        }
        let seg = Segment {
            path,
            file,
            records: AtomicU64::new(whole),
            tail: AtomicU64::new(0),
            write: Mutex::new(()),
        };
        if whole > 0 {
            let last = seg.record(whole - 1)?;
            seg.tail.store(last.timestamp, Ordering::Release);
        }
        Ok(seg)
    }

    fn record(&self, i: u64) -> Result<SensorReading, StoreError> {
        let mut b = [0u8; RECORD_LEN];
        self.file
            .read_exact_at(&mut b, i * RECORD_LEN as u64)
            .map_err(io_err(&self.path))?;
        Ok(decode_record(&b))
    }

    /// First index in `[0, n)` whose timestamp is not below `t`.
    fn lower_bound(&self, n: u64, t: u64) -> Result<u64, StoreError> {
        let (mut lo, mut hi) = (0, n);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.record(mid)?.timestamp < t {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    fn range(&self, t0: u64, t1: u64) -> Result<Vec<SensorReading>, StoreError> {
        let n = self.records.load(Ordering::Acquire);
        let lo = self.lower_bound(n, t0)?;
        let hi = match t1.checked_add(1) {
            Some(t) => self.lower_bound(n, t)?,
            None => n,
        };
        if hi <= lo {
            return Ok(Vec::new());
        }
        let mut buf = vec![0u8; ((hi - lo) as usize) * RECORD_LEN];
        self.file
            .read_exact_at(&mut buf, lo * RECORD_LEN as u64)
            .map_err(io_err(&self.path))?;
        Ok(buf.chunks_exact(RECORD_LEN).map(decode_record).collect())
    }
}

fn decode_record(b: &[u8]) -> SensorReading {
    SensorReading::new(
        i64::from_be_bytes(b[8..16].try_into().expect("8 bytes")),
        u64::from_be_bytes(b[..8].try_into().expect("8 bytes")),
    )
}

pub struct Store {
    dir: PathBuf,
    segments: RwLock<HashMap<Topic, Arc<Segment>>>,
    index: Mutex<File>,
    rejected: AtomicU64,
}

impl Store {
    /// Opens (or creates) a store directory, reloading the index.
    pub fn open(dir: impl AsRef<Path>) -> Result<Store, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let index_path = dir.join(INDEX_FILE);
        let mut segments = HashMap::new();
        if index_path.exists() {
            let f = File::open(&index_path).map_err(io_err(&index_path))?;
            let mut lines = BufReader::new(f).lines().enumerate().peekable();
            while let Some((i, line)) = lines.next() {
                let line = line.map_err(io_err(&index_path))?;
                let parsed = line
                    .split_once('\t')
                    .ok_or_else(|| "missing tab".to_string())
                    .and_then(|(file, topic)| Ok((file.to_string(), Topic::new(topic).map_err(|e| e.to_string())?)));
                let (file, topic) = match parsed {
                    Ok(p) => p,
                    // A torn last line from an interrupted write.
                    Err(_) if lines.peek().is_none() => break,
                    Err(message) => return Err(StoreError::CorruptIndex { line: i + 1, message }),
                };
                if segments.contains_key(&topic) {
                    return Err(StoreError::CorruptIndex {
                        line: i + 1,
                        message: format!("{topic} listed twice"),
                    });
                }
                segments.insert(topic, Arc::new(Segment::open(dir.join(file), false)?));
            }
        }
        let index = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&index_path)
            .map_err(io_err(&index_path))?;
        Ok(Store {
            dir,
            segments: RwLock::new(segments),
            index: Mutex::new(index),
            rejected: AtomicU64::new(0),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn segment(&self, topic: &Topic) -> Option<Arc<Segment>> {
        self.segments.read().get(topic).cloned()
    }

    fn segment_or_create(&self, topic: &Topic) -> Result<Arc<Segment>, StoreError> {
        if let Some(s) = self.segment(topic) {
            return Ok(s);
        }
        let mut segs = self.segments.write();
        if let Some(s) = segs.get(topic) {
            return Ok(s.clone());
        }
        let file = format!("{:08}.seg", segs.len());
        let seg = Arc::new(Segment::open(self.dir.join(&file), true)?);
        let mut index = self.index.lock();
        let path = self.dir.join(INDEX_FILE);
        index
            .write_all(format!("{file}\t{topic}\n").as_bytes())
            .map_err(io_err(&path))?;
        segs.insert(topic.clone(), seg.clone());
        Ok(seg)
    }

    /// Appends a batch, sorted by timestamp first. Records older than the
    /// newest stored record of the topic are rejected and counted.
    pub fn append(&self, topic: &Topic, readings: &[SensorReading]) -> Result<AppendReport, StoreError> {
        if readings.is_empty() {
            return Ok(AppendReport::default());
        }
        let seg = self.segment_or_create(topic)?;
        let mut batch = readings.to_vec();
        batch.sort_by_key(|r| r.timestamp);
        let _guard = seg.write.lock();
        let n = seg.records.load(Ordering::Acquire);
        let floor = if n > 0 { seg.tail.load(Ordering::Acquire) } else { 0 };
        let keep: Vec<&SensorReading> = batch.iter().filter(|r| r.timestamp >= floor).collect();
        let rejected = batch.len() - keep.len();
        if rejected > 0 {
            self.rejected.fetch_add(rejected as u64, Ordering::Relaxed);
        }
        if keep.is_empty() {
            return Ok(AppendReport { written: 0, rejected });
        }
        let mut buf = Vec::with_capacity(keep.len() * RECORD_LEN);
        for r in &keep {
            buf.extend_from_slice(&r.timestamp.to_be_bytes());
            buf.extend_from_slice(&r.value.to_be_bytes());
        }
        (&seg.file).write_all(&buf).map_err(io_err(&seg.path))?;
        seg.tail.store(keep[keep.len() - 1].timestamp, Ordering::Release);
        seg.records.store(n + keep.len() as u64, Ordering::Release);
        Ok(AppendReport {
            written: keep.len(),
            rejected,
        })
    }

    /// Stored readings of `topic` with `t0 <= timestamp <= t1`, sorted.
    /// Unknown topics yield an empty list.
    pub fn query(&self, topic: &Topic, t0: u64, t1: u64) -> Result<Vec<SensorReading>, StoreError> {
        if t0 > t1 {
            return Err(StoreError::InvalidRange { t0, t1 });
        }
        match self.segment(topic) {
            Some(seg) => seg.range(t0, t1),
            None => Ok(Vec::new()),
        }
    }

    pub fn newest(&self, topic: &Topic) -> Result<Option<SensorReading>, StoreError> {
        let Some(seg) = self.segment(topic) else {
            return Ok(None);
        };
        match seg.records.load(Ordering::Acquire) {
            0 => Ok(None),
            n => seg.record(n - 1).map(Some),
        }
    }

    pub fn contains(&self, topic: &Topic) -> bool {
        self.segments.read().contains_key(topic)
    }

    pub fn topics(&self) -> Vec<Topic> {
        let mut t: Vec<Topic> = self.segments.read().keys().cloned().collect();
        t.sort();
        t
    }

    pub fn record_count(&self, topic: &Topic) -> u64 {
        self.segment(topic).map_or(0, |s| s.records.load(Ordering::Acquire))
    }

    /// Records rejected since the store was opened.
    pub fn rejected(&self) -> u64 {
        self.rejected.load(Ordering::Relaxed)
    }

    /// Forces segment and index data to disk.
    pub fn flush(&self) -> Result<(), StoreError> {
        for seg in self.segments.read().values() {
            seg.file.sync_data().map_err(io_err(&seg.path))?;
        }
        let path = self.dir.join(INDEX_FILE);
        self.index.lock().sync_data().map_err(io_err(&path))
    }
}

impl StoreLookup for Store {
    fn query_range(&self, topic: &Topic, t0: u64, t1: u64) -> Result<Option<Vec<SensorReading>>, String> {
        if !self.contains(topic) {
            return Ok(None);
        }
        self.query(topic, t0, t1).map(Some).map_err(|e| e.to_string())
    }

    fn newest(&self, topic: &Topic) -> Result<Option<SensorReading>, String> {
        Store::newest(self, topic).map_err(|e| e.to_string())
    }
}
