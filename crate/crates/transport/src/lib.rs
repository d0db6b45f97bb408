//! Wire protocol and persistence.
//!
//! Pushers stream [`Frame`]s to a collector's [`Broker`] over TCP; the broker
//! writes them through to a sink (caches and [`Store`]) and fans them out to
//! prefix subscribers.

pub mod broker;
pub mod client;
pub mod frame;
pub mod store;

pub use broker::{Broker, BrokerStats, Sink};
pub use client::{FramePublisher, PublisherOptions, PublisherStats, Subscription};
pub use frame::{read_frame, DecodeError, DecodeErrorKind, EncodeError, Frame, ReadError};
pub use store::{AppendReport, Store, StoreError};
