//! Wall-clock scheduling of online operators on a worker pool.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use crossbeam_channel::unbounded;
use odaframe_core::sensor::now_ns;

use crate::config::Mode;
use crate::manager::{Operator, OperatorManager};

pub const DEFAULT_WORKERS: usize = 4;

const MAX_SLEEP_NS: u64 = 20_000_000;

/// Handle to the scheduler thread and its workers; dropping it stops both.
pub struct Scheduler {
    stop: Arc<AtomicBool>,
    threads: Vec<JoinHandle<()>>,
}

impl Scheduler {
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

impl Drop for Scheduler {
    fn drop(&mut self) {
        self.halt();
    }
}

impl OperatorManager {
    /// Fires each running online operator at every multiple of its interval
    /// since the manager's epoch. A tick is skipped (and counted) while the
    /// operator's previous tick is queued or running.
    pub fn spawn_scheduler(&self, workers: usize) -> Scheduler {
        let stop = Arc::new(AtomicBool::new(false));
        let (tx, rx) = unbounded::<(Arc<Operator>, u64)>();
        let mut threads = Vec::new();
        for i in 0..workers.max(1) {
            let rx = rx.clone();
            let mgr = self.clone();
            threads.push(
                std::thread::Builder::new()
                    .name(format!("op-worker-{i}"))
                    .spawn(move || {
                        for (op, at) in rx {
                            mgr.tick_operator(&op, at);
                            op.in_flight.store(false, Ordering::Release);
                        }
                    })
                    .expect("spawn worker"),
            );
        }
        let mgr = self.clone();
        let flag = stop.clone();
        // Joined first: its exit drops the sender and releases the workers.
        threads.insert(
            0,
            std::thread::Builder::new()
                .name("op-scheduler".into())
                .spawn(move || {
                    let epoch = mgr.inner.epoch;
                    while !flag.load(Ordering::Acquire) {
                        let now = now_ns();
                        let mut wake = now + MAX_SLEEP_NS;
                        for op in mgr.all_operators() {
                            if !op.is_running() || op.config.mode != Mode::Online {
                                continue;
                            }
                            let interval = op.config.interval_ns.max(1);
                            let slot = mgr.slot(&op, now);
                            if slot > op.last_slot.load(Ordering::Acquire) {
                                op.last_slot.store(slot, Ordering::Release);
                                if op.in_flight.swap(true, Ordering::AcqRel) {
                                    op.count_skip();
                                } else if tx.send((op.clone(), epoch + slot * interval)).is_err() {
                                    return;
                                }
                            }
                            wake = wake.min(epoch + (slot + 1) * interval);
                        }
                        let now = now_ns();
                        if wake > now {
                            std::thread::sleep(Duration::from_nanos(wake - now));
                        }
                    }
                })
                .expect("spawn scheduler"),
        );
        Scheduler { stop, threads }
    }
}
