//! Per-sensor in-memory ring cache.
//!
//! A cache retains a fixed span of history (`capacity_ns`) and supports two
//! access modes. Relative views are anchored at the newest reading and are
//! located with index arithmetic from the nominal sampling interval, followed
//! by a short boundary fix-up scan. Absolute views binary-search the ring.

use std::sync::Arc;

use parking_lot::RwLock;

use crate::error::InvalidRange;
use crate::sensor::SensorReading;

/// Longest boundary fix-up scan before a relative lookup falls back to
/// binary search.
pub const FIXUP_WINDOW: usize = 16;

const MIN_SLOTS: usize = 4;

#[derive(Debug, Clone)]
pub struct SensorCache {
    capacity_ns: u64,
    nominal_interval_ns: u64,
    slots: Vec<SensorReading>,
    /// Physical index of the oldest entry.
    start: usize,
    len: usize,
    dropped: u64,
}

/// Result of locating the start of a relative view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelativeProbe {
    /// Logical index of the first reading in the view.
    pub start: usize,
    /// Ring positions inspected by the arithmetic guess and fix-up scan.
    pub touched: usize,
    /// Whether the fix-up window was exhausted and binary search was used.
    pub fell_back: bool,
}

impl SensorCache {
    /// Creates a cache holding `capacity_ns` of history for a sensor sampled
    /// every `nominal_interval_ns`. The ring is pre-sized with 10% headroom
    /// and grows when sampling is denser than nominal.
    pub fn new(capacity_ns: u64, nominal_interval_ns: u64) -> Self {
        let interval = nominal_interval_ns.max(1);
        let expected = (capacity_ns / interval) as usize + 1;
        let slots = (expected + expected.div_ceil(10)).max(MIN_SLOTS);
        SensorCache {
            capacity_ns,
            nominal_interval_ns: interval,
            slots: vec![SensorReading::new(0, 0); slots],
            start: 0,
            len: 0,
            dropped: 0,
        }
    }

    pub fn capacity_ns(&self) -> u64 {
        self.capacity_ns
    }

    pub fn nominal_interval_ns(&self) -> u64 {
        self.nominal_interval_ns
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of out-of-order readings that were dropped.
    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    /// Current ring size in slots.
    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    /// Physical position of the most recent entry.
    pub fn write_index(&self) -> Option<usize> {
        (self.len > 0).then(|| (self.start + self.len - 1) % self.slots.len())
    }

    pub fn newest(&self) -> Option<SensorReading> {
        (self.len > 0).then(|| self.get(self.len - 1))
    }

    pub fn oldest(&self) -> Option<SensorReading> {
        (self.len > 0).then(|| self.get(0))
    }

    /// Entry at logical index `i` (0 = oldest).
    fn get(&self, i: usize) -> SensorReading {
        debug_assert!(i < self.len);
        self.slots[(self.start + i) % self.slots.len()]
    }

    /// Appends a reading and evicts history older than the retention span.
    /// Readings older than the current newest entry are dropped and counted.
    pub fn store(&mut self, reading: SensorReading) {
        if let Some(newest) = self.newest() {
            if reading.timestamp < newest.timestamp {
                self.dropped += 1;
                return;
            }
        }
        let cutoff = reading.timestamp.saturating_sub(self.capacity_ns);
        while self.len > 0 && self.get(0).timestamp < cutoff {
            self.start = (self.start + 1) % self.slots.len();
            self.len -= 1;
        }
        if self.len == self.slots.len() {
            self.grow();
        }
        let pos = (self.start + self.len) % self.slots.len();
        self.slots[pos] = reading;
        self.len += 1;
    }

    fn grow(&mut self) {
        let old = self.slots.len();
        let mut slots = Vec::with_capacity(old + old / 2 + 1);
        slots.extend((0..self.len).map(|i| self.get(i)));
        slots.resize(old + old / 2 + 1, SensorReading::new(0, 0));
        self.slots = slots;
        self.start = 0;
    }

    /// All entries, oldest to newest.
    pub fn to_vec(&self) -> Vec<SensorReading> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    fn slice(&self, from: usize, to: usize) -> Vec<SensorReading> {
        (from..to).map(|i| self.get(i)).collect()
    }

    /// First logical index in `[lo, hi)` for which `pred` is false, assuming
    /// `pred` is true on a prefix. Returns the index and the comparison count.
    fn partition_point(
        &self,
        mut lo: usize,
        mut hi: usize,
        pred: impl Fn(&SensorReading) -> bool,
    ) -> (usize, usize) {
        let mut comparisons = 0;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            comparisons += 1;
            if pred(&self.get(mid)) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        (lo, comparisons)
    }

    /// Locates the first reading with `timestamp >= newest - offset_ns`.
    pub fn locate_relative(&self, offset_ns: u64) -> Option<RelativeProbe> {
        let newest = self.newest()?;
        let target = newest.timestamp.saturating_sub(offset_ns);
        let back = usize::try_from(offset_ns / self.nominal_interval_ns).unwrap_or(usize::MAX);
        let mut idx = (self.len - 1).saturating_sub(back);
        let mut touched = 1;

        if self.get(idx).timestamp >= target {
            while idx > 0 && self.get(idx - 1).timestamp >= target {
                if touched > FIXUP_WINDOW {
                    return Some(self.relative_fallback(target, touched));
                }
                idx -= 1;
                touched += 1;
            }
        } else {
            // newest >= target, so this scan terminates inside the ring.
            while self.get(idx).timestamp < target {
                if touched > FIXUP_WINDOW {
                    return Some(self.relative_fallback(target, touched));
                }
                idx += 1;
                touched += 1;
            }
        }
        Some(RelativeProbe {
            start: idx,
            touched,
            fell_back: false,
        })
    }

    fn relative_fallback(&self, target: u64, touched: usize) -> RelativeProbe {
        let (start, comparisons) = self.partition_point(0, self.len, |r| r.timestamp < target);
        RelativeProbe {
            start,
            touched: touched + comparisons,
            fell_back: true,
        }
    }

    /// Readings with `timestamp >= newest - offset_ns`, oldest first.
    /// An offset of zero yields the newest reading (and any readings sharing
    /// its timestamp).
    pub fn view_relative(&self, offset_ns: u64) -> Vec<SensorReading> {
        match self.locate_relative(offset_ns) {
            Some(probe) => self.slice(probe.start, self.len),
            None => Vec::new(),
        }
    }

    /// Logical index range `[lo, hi)` of readings in `[t0, t1]` and the
    /// number of comparisons spent finding it.
    pub fn locate_absolute(&self, t0: u64, t1: u64) -> Result<(usize, usize, usize), InvalidRange> {
        if t0 > t1 {
            return Err(InvalidRange { t0, t1 });
        }
        let (lo, c1) = self.partition_point(0, self.len, |r| r.timestamp < t0);
        let (hi, c2) = self.partition_point(lo, self.len, |r| r.timestamp <= t1);
        Ok((lo, hi, c1 + c2))
    }

    /// Readings with `t0 <= timestamp <= t1`, oldest first.
    pub fn view_absolute(&self, t0: u64, t1: u64) -> Result<Vec<SensorReading>, InvalidRange> {
        let (lo, hi, _) = self.locate_absolute(t0, t1)?;
        Ok(self.slice(lo, hi))
    }
}

/// A cache shared between one writer and many readers. Readers copy out a
/// consistent view under a read lock.
#[derive(Debug, Clone)]
pub struct SharedCache(Arc<RwLock<SensorCache>>);

impl SharedCache {
    pub fn new(capacity_ns: u64, nominal_interval_ns: u64) -> Self {
        SharedCache(Arc::new(RwLock::new(SensorCache::new(
            capacity_ns,
            nominal_interval_ns,
        ))))
    }

    pub fn store(&self, reading: SensorReading) {
        self.0.write().store(reading);
    }

    pub fn store_all(&self, readings: &[SensorReading]) {
        let mut cache = self.0.write();
        for r in readings {
            cache.store(*r);
        }
    }

    pub fn view_relative(&self, offset_ns: u64) -> Vec<SensorReading> {
        self.0.read().view_relative(offset_ns)
    }

    pub fn view_absolute(&self, t0: u64, t1: u64) -> Result<Vec<SensorReading>, InvalidRange> {
        self.0.read().view_absolute(t0, t1)
    }

    pub fn newest(&self) -> Option<SensorReading> {
        self.0.read().newest()
    }

    pub fn oldest(&self) -> Option<SensorReading> {
        self.0.read().oldest()
    }

    /// Oldest and newest entries taken under a single lock.
    pub fn bounds(&self) -> Option<(SensorReading, SensorReading)> {
        let cache = self.0.read();
        Some((cache.oldest()?, cache.newest()?))
    }

    pub fn len(&self) -> usize {
        self.0.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.read().is_empty()
    }

    pub fn dropped(&self) -> u64 {
        self.0.read().dropped()
    }

    /// Runs `f` against the cache under a read lock.
    pub fn with<R>(&self, f: impl FnOnce(&SensorCache) -> R) -> R {
        f(&self.0.read())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor::NS_PER_SEC;

    fn secs(range: std::ops::RangeInclusive<u64>) -> SensorCache {
        let mut c = SensorCache::new(180 * NS_PER_SEC, NS_PER_SEC);
        for s in range {
            c.store(SensorReading::new(s as i64, s * NS_PER_SEC));
        }
        c
    }

    fn stamps(v: &[SensorReading]) -> Vec<u64> {
        v.iter().map(|r| r.timestamp / NS_PER_SEC).collect()
    }

    #[test]
    fn first_insertion() {
        let mut c = SensorCache::new(180 * NS_PER_SEC, NS_PER_SEC);
        c.store(SensorReading::new(5, NS_PER_SEC));
        assert_eq!(c.len(), 1);
        assert_eq!(c.newest().unwrap().timestamp, NS_PER_SEC);
        assert_eq!(c.write_index(), Some(0));
    }

    #[test]
    fn retention_bounded_by_capacity() {
        let c = secs(1..=600);
        assert!(c.len() <= 181, "len {}", c.len());
        assert_eq!(c.oldest().unwrap().timestamp, 420 * NS_PER_SEC);
        // ring never needed to grow at nominal rate
        assert_eq!(c.slot_count(), 181 + 19);
    }

    #[test]
    fn out_of_order_dropped() {
        let mut c = SensorCache::new(180 * NS_PER_SEC, NS_PER_SEC);
        c.store(SensorReading::new(1, 5 * NS_PER_SEC));
        c.store(SensorReading::new(2, 3 * NS_PER_SEC));
        assert_eq!(c.len(), 1);
        assert_eq!(c.dropped(), 1);
    }

    #[test]
    fn relative_views() {
        let empty = SensorCache::new(NS_PER_SEC, NS_PER_SEC);
        assert!(empty.view_relative(NS_PER_SEC).is_empty());

        let c = secs(1..=10);
        assert_eq!(stamps(&c.view_relative(3 * NS_PER_SEC)), vec![7, 8, 9, 10]);
        assert_eq!(stamps(&c.view_relative(0)), vec![10]);
        assert_eq!(c.view_relative(u64::MAX).len(), 10);
    }

    #[test]
    fn absolute_views() {
        let c = secs(1..=10);
        assert_eq!(
            stamps(&c.view_absolute(4 * NS_PER_SEC, 6 * NS_PER_SEC).unwrap()),
            vec![4, 5, 6]
        );
        assert!(c.view_absolute(0, NS_PER_SEC / 2).unwrap().is_empty());
        assert_eq!(
            stamps(&c.view_absolute(7 * NS_PER_SEC, 7 * NS_PER_SEC).unwrap()),
            vec![7]
        );
        assert_eq!(
            c.view_absolute(2, 1).unwrap_err(),
            InvalidRange { t0: 2, t1: 1 }
        );
    }

    #[test]
    fn relative_lookup_is_constant_at_nominal_rate() {
        let c = secs(1..=600);
        for offset in [0, 1, 30, 90, 180] {
            let probe = c.locate_relative(offset * NS_PER_SEC).unwrap();
            assert!(!probe.fell_back);
            assert!(probe.touched <= 2, "offset {offset}: {probe:?}");
        }
    }

    #[test]
    fn relative_lookup_falls_back_under_jitter() {
        // Sampled 10x faster than nominal: the arithmetic guess is far off.
        let mut c = SensorCache::new(100 * NS_PER_SEC, NS_PER_SEC);
        for i in 1..=1000u64 {
            c.store(SensorReading::new(i as i64, i * NS_PER_SEC / 10));
        }
        let probe = c.locate_relative(50 * NS_PER_SEC).unwrap();
        assert!(probe.fell_back);
        let view = c.view_relative(50 * NS_PER_SEC);
        assert_eq!(view.first().unwrap().timestamp, 50 * NS_PER_SEC);
        assert_eq!(view.len(), 501);
    }

    #[test]
    fn absolute_lookup_is_logarithmic() {
        let c = secs(1..=600);
        let (_, _, comparisons) = c.locate_absolute(450 * NS_PER_SEC, 500 * NS_PER_SEC).unwrap();
        let bound = 2 * ((c.len() as f64).log2().ceil() as usize + 1);
        assert!(comparisons <= bound, "{comparisons} > {bound}");
    }

    #[test]
    fn grows_when_sampling_is_dense() {
        let mut c = SensorCache::new(10 * NS_PER_SEC, NS_PER_SEC);
        let before = c.slot_count();
        for i in 1..=100u64 {
            c.store(SensorReading::new(i as i64, i * NS_PER_SEC / 10));
        }
        assert!(c.slot_count() > before);
        assert_eq!(c.len(), 100);
        assert!(c.to_vec().windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
    }

    #[test]
    fn equal_timestamps_are_kept() {
        let mut c = SensorCache::new(10 * NS_PER_SEC, NS_PER_SEC);
        c.store(SensorReading::new(1, NS_PER_SEC));
        c.store(SensorReading::new(2, NS_PER_SEC));
        assert_eq!(c.len(), 2);
        assert_eq!(c.view_relative(0).len(), 2);
    }
}
