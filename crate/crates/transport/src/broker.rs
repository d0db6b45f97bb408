//! Collector-side endpoint.
//!
//! Every connection starts with a one-byte preamble:
//! - `P`: the peer publishes; frames follow until it disconnects.
//! - `S`: the peer subscribes; a u16 big-endian length and a topic prefix
//!   follow, the broker answers `K` once registered and then streams every
//!   matching frame.
//!
//! Delivery is at most once: a subscriber whose queue is full misses frames.

use std::io::{BufReader, Read, Write};
use std::net::{Ipv4Addr, Ipv6Addr, SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use crossbeam_channel::{bounded, Sender, TrySendError};
use parking_lot::{Mutex, RwLock};

use crate::frame::{read_frame, Frame};

pub const PREAMBLE_PUBLISH: u8 = b'P';
pub const PREAMBLE_SUBSCRIBE: u8 = b'S';
pub const SUBSCRIBE_ACK: u8 = b'K';
const SUBSCRIBER_QUEUE: usize = 16_384;

/// Receives every frame published to the broker, before fan-out.
pub type Sink = Arc<dyn Fn(&Frame) + Send + Sync>;

struct Subscriber {
    id: u64,
    prefix: String,
    tx: Sender<Arc<Vec<u8>>>,
}

#[derive(Default)]
struct Counters {
    frames: AtomicU64,
    readings: AtomicU64,
    bad_frames: AtomicU64,
    dropped: AtomicU64,
    connections: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BrokerStats {
    pub frames: u64,
    pub readings: u64,
    pub bad_frames: u64,
    /// Frames a subscriber missed because its queue was full.
    pub dropped: u64,
    pub connections: u64,
}

struct Shared {
    sink: Sink,
    stop: AtomicBool,
    subscribers: RwLock<Vec<Subscriber>>,
    next_id: AtomicU64,
    streams: Mutex<Vec<TcpStream>>,
    handlers: Mutex<Vec<JoinHandle<()>>>,
    counters: Counters,
}

pub struct Broker {
    addr: SocketAddr,
    shared: Arc<Shared>,
    accept: Option<JoinHandle<()>>,
}

impl Broker {
    /// Listens on `addr` (port 0 picks a free port).
    pub fn bind(addr: &str, sink: Sink) -> std::io::Result<Broker> {
        let listener = TcpListener::bind(addr)?;
        let addr = listener.local_addr()?;
        let shared = Arc::new(Shared {
            sink,
            stop: AtomicBool::new(false),
            subscribers: RwLock::new(Vec::new()),
            next_id: AtomicU64::new(0),
            streams: Mutex::new(Vec::new()),
            handlers: Mutex::new(Vec::new()),
            counters: Counters::default(),
        });
        let s = shared.clone();
        let accept = std::thread::Builder::new()
            .name("broker-accept".into())
            .spawn(move || accept_loop(listener, s))?;
        Ok(Broker {
            addr,
            shared,
            accept: Some(accept),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn stats(&self) -> BrokerStats {
        let c = &self.shared.counters;
        BrokerStats {
            frames: c.frames.load(Ordering::Relaxed),
            readings: c.readings.load(Ordering::Relaxed),
            bad_frames: c.bad_frames.load(Ordering::Relaxed),
            dropped: c.dropped.load(Ordering::Relaxed),
            connections: c.connections.load(Ordering::Relaxed),
        }
    }

    pub fn subscriber_count(&self) -> usize {
        self.shared.subscribers.read().len()
    }

    /// Closes the listener and every connection, and waits until all frames
    /// already read have reached the sink.
    pub fn shutdown(mut self) {
        self.halt();
    }

    fn halt(&mut self) {
        let Some(accept) = self.accept.take() else {
            return;
        };
        self.shared.stop.store(true, Ordering::Release);
        // Wake the blocking accept; it sees the flag and exits.
        let mut wake = self.addr;
        if wake.ip().is_unspecified() {
            wake.set_ip(match wake {
                SocketAddr::V4(_) => Ipv4Addr::LOCALHOST.into(),
                SocketAddr::V6(_) => Ipv6Addr::LOCALHOST.into(),
            });
        }
        let _ = TcpStream::connect_timeout(&wake, Duration::from_secs(1));
        let _ = accept.join();
        for s in self.shared.streams.lock().drain(..) {
            let _ = s.shutdown(std::net::Shutdown::Both);
        }
        self.shared.subscribers.write().clear();
        let handlers: Vec<_> = self.shared.handlers.lock().drain(..).collect();
        for h in handlers {
            let _ = h.join();
        }
    }
}

impl Drop for Broker {
    fn drop(&mut self) {
        self.halt();
    }
}

fn accept_loop(listener: TcpListener, shared: Arc<Shared>) {
    while !shared.stop.load(Ordering::Acquire) {
        match listener.accept() {
            Ok((stream, peer)) => {
                if shared.stop.load(Ordering::Acquire) {
                    break;
                }
                let _ = stream.set_nodelay(true);
                if let Ok(clone) = stream.try_clone() {
                    shared.streams.lock().push(clone);
                }
                shared.counters.connections.fetch_add(1, Ordering::Relaxed);
                let s = shared.clone();
                match std::thread::Builder::new()
                    .name(format!("broker-{peer}"))
                    .spawn(move || handle(stream, s))
                {
                    Ok(h) => {
                        let mut handlers = shared.handlers.lock();
                        handlers.retain(|h| !h.is_finished());
                        handlers.push(h);
                    }
                    Err(e) => log::error!("cannot spawn connection handler: {e}"),
                }
            }
            Err(e) => {
                log::warn!("accept failed: {e}");
                std::thread::sleep(Duration::from_millis(20));
            }
        }
    }
}

fn handle(mut stream: TcpStream, shared: Arc<Shared>) {
    let mut preamble = [0u8; 1];
    if stream.read_exact(&mut preamble).is_err() {
        return;
    }
    match preamble[0] {
        PREAMBLE_PUBLISH => publisher(stream, &shared),
        PREAMBLE_SUBSCRIBE => subscriber(stream, &shared),
        other => log::warn!("unknown preamble byte {other:#04x}, closing"),
    }
}

fn publisher(stream: TcpStream, shared: &Shared) {
    let mut reader = BufReader::with_capacity(64 * 1024, stream);
    loop {
        match read_frame(&mut reader) {
            Ok(Some(frame)) => {
                let c = &shared.counters;
                c.frames.fetch_add(1, Ordering::Relaxed);
                c.readings.fetch_add(frame.readings.len() as u64, Ordering::Relaxed);
                (shared.sink)(&frame);
                fan_out(shared, &frame);
            }
            Ok(None) => return,
            Err(crate::frame::ReadError::Decode(e)) => {
                shared.counters.bad_frames.fetch_add(1, Ordering::Relaxed);
                log::warn!("dropping publisher connection: {e}");
                return;
            }
            Err(crate::frame::ReadError::Io(e)) => {
                if !shared.stop.load(Ordering::Acquire) {
                    log::debug!("publisher connection closed: {e}");
                }
                return;
            }
        }
    }
}

fn fan_out(shared: &Shared, frame: &Frame) {
    let subs = shared.subscribers.read();
    let mut bytes: Option<Arc<Vec<u8>>> = None;
    for s in subs.iter().filter(|s| frame.topic.has_prefix(&s.prefix)) {
        let b = bytes
            .get_or_insert_with(|| Arc::new(frame.encode().expect("decoded frames re-encode")))
            .clone();
        if let Err(TrySendError::Full(_)) = s.tx.try_send(b) {
            shared.counters.dropped.fetch_add(1, Ordering::Relaxed);
        }
    }
}

fn subscriber(mut stream: TcpStream, shared: &Shared) {
    let mut len = [0u8; 2];
    if stream.read_exact(&mut len).is_err() {
        return;
    }
    let mut prefix = vec![0u8; u16::from_be_bytes(len) as usize];
    if stream.read_exact(&mut prefix).is_err() {
        return;
    }
    let Ok(prefix) = String::from_utf8(prefix) else {
        log::warn!("subscription prefix is not UTF-8");
        return;
    };
    let (tx, rx) = bounded(SUBSCRIBER_QUEUE);
    let id = shared.next_id.fetch_add(1, Ordering::Relaxed);
    shared.subscribers.write().push(Subscriber { id, prefix, tx });
    let ok = stream.write_all(&[SUBSCRIBE_ACK]).is_ok();
    if ok {
        for bytes in rx {
            if stream.write_all(&bytes).is_err() {
                break;
            }
        }
    }
    shared.subscribers.write().retain(|s| s.id != id);
}
