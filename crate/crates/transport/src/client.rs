//! Pusher-side publisher and the subscriber client.

use std::collections::VecDeque;
use std::io::{BufReader, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use odaframe_core::{SensorReading, Topic};
use parking_lot::{Condvar, Mutex};

use crate::broker::{PREAMBLE_PUBLISH, PREAMBLE_SUBSCRIBE, SUBSCRIBE_ACK};
use crate::frame::{encode, read_frame, EncodeError, Frame, ReadError};

#[derive(Debug, Clone)]
pub struct PublisherOptions {
    /// Frames buffered while disconnected; the oldest is dropped beyond this.
    pub queue_capacity: usize,
    pub backoff_initial: Duration,
    pub backoff_max: Duration,
    pub connect_timeout: Duration,
}

impl Default for PublisherOptions {
    fn default() -> Self {
        PublisherOptions {
            queue_capacity: 10_000,
            backoff_initial: Duration::from_millis(50),
            backoff_max: Duration::from_secs(2),
            connect_timeout: Duration::from_secs(1),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PublisherStats {
    pub sent: u64,
    /// Dropped from a full queue.
    pub dropped: u64,
    /// Lost in a failed write.
    pub lost: u64,
    pub connects: u64,
    pub queued: usize,
}

struct Queue {
    frames: VecDeque<Vec<u8>>,
    in_flight: bool,
}

struct PubShared {
    addr: String,
    opts: PublisherOptions,
    queue: Mutex<Queue>,
    wake: Condvar,
    stop: AtomicBool,
    sent: AtomicU64,
    dropped: AtomicU64,
    lost: AtomicU64,
    connects: AtomicU64,
}

/// Streams frames to a broker from a background thread. Publishing never
/// blocks on the network.
pub struct FramePublisher {
    shared: Arc<PubShared>,
    thread: Option<JoinHandle<()>>,
}

impl FramePublisher {
    pub fn start(addr: impl Into<String>, opts: PublisherOptions) -> FramePublisher {
        let shared = Arc::new(PubShared {
            addr: addr.into(),
            opts,
            queue: Mutex::new(Queue {
                frames: VecDeque::new(),
                in_flight: false,
            }),
            wake: Condvar::new(),
            stop: AtomicBool::new(false),
            sent: AtomicU64::new(0),
            dropped: AtomicU64::new(0),
            lost: AtomicU64::new(0),
            connects: AtomicU64::new(0),
        });
        let s = shared.clone();
        let thread = std::thread::Builder::new()
            .name("frame-publisher".into())
            .spawn(move || sender(&s))
            .expect("spawn publisher thread");
        FramePublisher {
            shared,
            thread: Some(thread),
        }
    }

    pub fn publish(&self, topic: &Topic, readings: &[SensorReading]) -> Result<(), EncodeError> {
        let bytes = encode(topic, readings)?;
        let mut q = self.shared.queue.lock();
        if q.frames.len() >= self.shared.opts.queue_capacity.max(1) {
            q.frames.pop_front();
            self.shared.dropped.fetch_add(1, Ordering::Relaxed);
        }
        q.frames.push_back(bytes);
        self.shared.wake.notify_all();
        Ok(())
    }

    /// Waits until the queue is empty and the last frame was written.
    pub fn flush(&self, timeout: Duration) -> bool {
        let deadline = Instant::now() + timeout;
        let mut q = self.shared.queue.lock();
        while !q.frames.is_empty() || q.in_flight {
            if self.shared.wake.wait_until(&mut q, deadline).timed_out() {
                return q.frames.is_empty() && !q.in_flight;
            }
        }
        true
    }

    pub fn stats(&self) -> PublisherStats {
        let s = &self.shared;
        PublisherStats {
            sent: s.sent.load(Ordering::Relaxed),
            dropped: s.dropped.load(Ordering::Relaxed),
            lost: s.lost.load(Ordering::Relaxed),
            connects: s.connects.load(Ordering::Relaxed),
            queued: s.queue.lock().frames.len(),
        }
    }

    /// Flushes for at most `timeout`, then stops; unsent frames are dropped.
    pub fn close(mut self, timeout: Duration) -> PublisherStats {
        self.flush(timeout);
        self.halt();
        self.stats()
    }

    fn halt(&mut self) {
        self.shared.stop.store(true, Ordering::Release);
        self.shared.wake.notify_all();
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for FramePublisher {
    fn drop(&mut self) {
        self.halt();
    }
}

fn connect(shared: &PubShared) -> std::io::Result<TcpStream> {
    let mut last = std::io::Error::new(std::io::ErrorKind::NotFound, "address did not resolve");
    for addr in shared.addr.to_socket_addrs()? {
        match TcpStream::connect_timeout(&addr, shared.opts.connect_timeout) {
            Ok(mut s) => {
                let _ = s.set_nodelay(true);
                s.write_all(&[PREAMBLE_PUBLISH])?;
                return Ok(s);
            }
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn sender(shared: &PubShared) {
    let mut conn: Option<TcpStream> = None;
    let mut backoff = shared.opts.backoff_initial;
    loop {
        if shared.stop.load(Ordering::Acquire) {
            return;
        }
        if conn.is_none() {
            {
                let mut q = shared.queue.lock();
                while q.frames.is_empty() && !shared.stop.load(Ordering::Acquire) {
                    shared.wake.wait(&mut q);
                }
            }
            match connect(shared) {
                Ok(s) => {
                    shared.connects.fetch_add(1, Ordering::Relaxed);
                    backoff = shared.opts.backoff_initial;
                    conn = Some(s);
                }
                Err(e) => {
                    log::debug!("connect to {} failed: {e}; retrying in {backoff:?}", shared.addr);
                    let mut q = shared.queue.lock();
                    shared.wake.wait_for(&mut q, backoff);
                    backoff = (backoff * 2).min(shared.opts.backoff_max);
                    continue;
                }
            }
        }
        let frame = {
            let mut q = shared.queue.lock();
            while q.frames.is_empty() && !shared.stop.load(Ordering::Acquire) {
                shared.wake.wait(&mut q);
            }
            let Some(f) = q.frames.pop_front() else {
                return;
            };
            q.in_flight = true;
            f
        };
        let ok = conn.as_mut().is_some_and(|c| c.write_all(&frame).is_ok());
        if ok {
            shared.sent.fetch_add(1, Ordering::Relaxed);
        } else {
            shared.lost.fetch_add(1, Ordering::Relaxed);
            conn = None;
        }
        shared.queue.lock().in_flight = false;
        shared.wake.notify_all();
    }
}

/// A subscription to every frame whose topic lies under a prefix.
pub struct Subscription {
    reader: BufReader<TcpStream>,
}

impl Subscription {
    pub fn connect(addr: impl ToSocketAddrs, prefix: &str) -> std::io::Result<Subscription> {
        let mut stream = TcpStream::connect(addr)?;
        let len = u16::try_from(prefix.len())
            .map_err(|_| std::io::Error::new(std::io::ErrorKind::InvalidInput, "prefix too long"))?;
        let mut hello = vec![PREAMBLE_SUBSCRIBE];
        hello.extend_from_slice(&len.to_be_bytes());
        hello.extend_from_slice(prefix.as_bytes());
        stream.write_all(&hello)?;
        let mut ack = [0u8; 1];
        stream.read_exact(&mut ack)?;
        if ack[0] != SUBSCRIBE_ACK {
            return Err(std::io::Error::new(std::io::ErrorKind::InvalidData, "bad subscription ack"));
        }
        Ok(Subscription {
            reader: BufReader::new(stream),
        })
    }

    pub fn set_timeout(&self, timeout: Option<Duration>) -> std::io::Result<()> {
        self.reader.get_ref().set_read_timeout(timeout)
    }

    /// Next frame; `Ok(None)` once the broker closed the connection. With a
    /// timeout set, an expired wait is an I/O error of kind `WouldBlock` or
    /// `TimedOut`.
    pub fn recv(&mut self) -> Result<Option<Frame>, ReadError> {
        read_frame(&mut self.reader)
    }
}
