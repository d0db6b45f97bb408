//! Frame layout, all integers big-endian:
//!
//! ```text
//! "ODA1" | version u8 = 1 | topic_len u16 | topic | count u32 | count x (timestamp u64, value i64)
//! ```
//!
//! A frame is `11 + topic_len + 16 * count` bytes long.

use std::io::{self, Read};

use odaframe_core::{SensorReading, Topic};
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"ODA1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 11;
pub const RECORD_LEN: usize = 16;
/// Upper bound on readings per frame accepted from a stream.
pub const MAX_STREAM_READINGS: u32 = 1 << 20;

const TOPIC_OFFSET: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub topic: Topic,
    pub readings: Vec<SensorReading>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("a frame needs at least one reading")]
    Empty,
    #[error("topic is {0} bytes, the limit is 65535")]
    TopicTooLong(usize),
    #[error("{0} readings exceed the frame limit")]
    TooManyReadings(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeErrorKind {
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    BadVersion(u8),
    #[error("truncated frame, {needed} more bytes expected")]
    Truncated { needed: usize },
    #[error("invalid topic: {0}")]
    BadTopic(String),
    #[error("reading count is zero")]
    ZeroCount,
    #[error("count {0} exceeds the stream limit")]
    CountTooLarge(u32),
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}")]
pub struct DecodeError {
    pub offset: usize,
    pub kind: DecodeErrorKind,
}

fn fail<T>(offset: usize, kind: DecodeErrorKind) -> Result<T, DecodeError> {
    Err(DecodeError { offset, kind })
}

pub fn frame_len(topic_len: usize, count: usize) -> usize {
    HEADER_LEN + topic_len + RECORD_LEN * count
}

impl Frame {
    pub fn new(topic: Topic, readings: Vec<SensorReading>) -> Self {
        Frame { topic, readings }
    }

    pub fn encode(&self) -> Result<Vec<u8>, EncodeError> {
        encode(&self.topic, &self.readings)
    }

    pub fn decode(buf: &[u8]) -> Result<Frame, DecodeError> {
        let (frame, used) = decode_prefix(buf)?;
        if used != buf.len() {
            return fail(used, DecodeErrorKind::TrailingBytes(buf.len() - used));
        }
        Ok(frame)
    }
}

pub fn encode(topic: &Topic, readings: &[SensorReading]) -> Result<Vec<u8>, EncodeError> {
    if readings.is_empty() {
        return Err(EncodeError::Empty);
    }
    let t = topic.as_str().as_bytes();
    let topic_len = u16::try_from(t.len()).map_err(|_| EncodeError::TopicTooLong(t.len()))?;
    let count = u32::try_from(readings.len()).map_err(|_| EncodeError::TooManyReadings(readings.len()))?;
    let mut out = Vec::with_capacity(frame_len(t.len(), readings.len()));
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&topic_len.to_be_bytes());
    out.extend_from_slice(t);
    out.extend_from_slice(&count.to_be_bytes());
    for r in readings {
        out.extend_from_slice(&r.timestamp.to_be_bytes());
        out.extend_from_slice(&r.value.to_be_bytes());
    }
    Ok(out)
}

fn take(buf: &[u8], at: usize, n: usize) -> Result<&[u8], DecodeError> {
    match buf.get(at..at + n) {
        Some(s) => Ok(s),
        None => fail(
            at,
            DecodeErrorKind::Truncated {
                needed: at + n - buf.len(),
            },
        ),
    }
}

/// Decodes the frame at the start of `buf` and returns it with its length.
pub fn decode_prefix(buf: &[u8]) -> Result<(Frame, usize), DecodeError> {
    let topic_len = header(buf)?;
    let topic_bytes = take(buf, TOPIC_OFFSET, topic_len)?;
    let topic = parse_topic(topic_bytes)?;
    let count_at = TOPIC_OFFSET + topic_len;
    let count = u32::from_be_bytes(take(buf, count_at, 4)?.try_into().expect("4 bytes"));
    if count == 0 {
        return fail(count_at, DecodeErrorKind::ZeroCount);
    }
    let payload_at = count_at + 4;
    let payload_len = (count as usize)
        .checked_mul(RECORD_LEN)
        .ok_or(DecodeError {
            offset: count_at,
            kind: DecodeErrorKind::CountTooLarge(count),
        })?;
    let payload = take(buf, payload_at, payload_len)?;
    let readings = payload
        .chunks_exact(RECORD_LEN)
        .map(|c| {
            SensorReading::new(
                i64::from_be_bytes(c[8..].try_into().expect("8 bytes")),
                u64::from_be_bytes(c[..8].try_into().expect("8 bytes")),
            )
        })
        .collect();
    Ok((Frame { topic, readings }, payload_at + payload_len))
}

/// Validates magic and version, returns the topic length.
fn header(buf: &[u8]) -> Result<usize, DecodeError> {
    let magic = take(buf, 0, 4)?;
    if magic != MAGIC {
        return fail(0, DecodeErrorKind::BadMagic);
    }
    let version = take(buf, 4, 1)?[0];
    if version != VERSION {
        return fail(4, DecodeErrorKind::BadVersion(version));
    }
    let len = u16::from_be_bytes(take(buf, 5, 2)?.try_into().expect("2 bytes"));
    Ok(len as usize)
}

fn parse_topic(bytes: &[u8]) -> Result<Topic, DecodeError> {
    let s = std::str::from_utf8(bytes).map_err(|e| DecodeError {
        offset: TOPIC_OFFSET,
        kind: DecodeErrorKind::BadTopic(e.to_string()),
    })?;
    Topic::new(s).map_err(|e| DecodeError {
        offset: TOPIC_OFFSET,
        kind: DecodeErrorKind::BadTopic(e.to_string()),
    })
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Reads one frame from a stream. `Ok(None)` means the stream ended cleanly
/// at a frame boundary.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<Frame>, ReadError> {
    let mut buf = vec![0u8; TOPIC_OFFSET];
    let mut got = 0;
    while got < TOPIC_OFFSET {
        match r.read(&mut buf[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => return Err(io::Error::from(io::ErrorKind::UnexpectedEof).into()),
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let topic_len = header(&buf)?;
    buf.resize(TOPIC_OFFSET + topic_len + 4, 0);
    r.read_exact(&mut buf[TOPIC_OFFSET..])?;
    let count_at = TOPIC_OFFSET + topic_len;
    let count = u32::from_be_bytes(buf[count_at..].try_into().expect("4 bytes"));
    if count > MAX_STREAM_READINGS {
        return Err(DecodeError {
            offset: count_at,
            kind: DecodeErrorKind::CountTooLarge(count),
        }
        .into());
    }
    let start = buf.len();
    buf.resize(start + count as usize * RECORD_LEN, 0);
    r.read_exact(&mut buf[start..])?;
    Ok(Some(Frame::decode(&buf)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_layout_of_a_single_reading() {
        let bytes = encode(&Topic::new("/a/b").unwrap(), &[SensorReading::new(2, 1)]).unwrap();
        assert_eq!(bytes.len(), 31);
        let mut want = b"ODA1".to_vec();
        want.push(1);
        want.extend([0, 4]);
        want.extend(b"/a/b");
        want.extend([0, 0, 0, 1]);
        want.extend([0, 0, 0, 0, 0, 0, 0, 1]);
        want.extend([0, 0, 0, 0, 0, 0, 0, 2]);
        assert_eq!(bytes, want);
        let f = Frame::decode(&bytes).unwrap();
        assert_eq!(f.readings, vec![SensorReading::new(2, 1)]);
    }

    #[test]
    fn empty_readings_are_rejected() {
        assert_eq!(encode(&Topic::new("/a").unwrap(), &[]), Err(EncodeError::Empty));
    }

    #[test]
    fn header_errors_carry_offsets() {
        let good = encode(&Topic::new("/a/b").unwrap(), &[SensorReading::new(-5, 9)]).unwrap();
        let mut b = good.clone();
        b[0] ^= 0xff;
        assert_eq!(Frame::decode(&b).unwrap_err().offset, 0);
        let mut b = good.clone();
        b[4] = 2;
        assert_eq!(Frame::decode(&b).unwrap_err().kind, DecodeErrorKind::BadVersion(2));
        let e = Frame::decode(&good[..good.len() - 3]).unwrap_err();
        assert_eq!((e.offset, e.kind), (15, DecodeErrorKind::Truncated { needed: 3 }));
        let mut b = good.clone();
        b.push(0);
        assert_eq!(Frame::decode(&b).unwrap_err().kind, DecodeErrorKind::TrailingBytes(1));
        let mut b = good.clone();
        b[7] = b'x';
        assert_eq!(Frame::decode(&b).unwrap_err().offset, 7);
        let mut b = good;
        b[11..15].copy_from_slice(&[0, 0, 0, 0]);
        assert_eq!(Frame::decode(&b[..15]).unwrap_err().kind, DecodeErrorKind::ZeroCount);
    }

    #[test]
    fn stream_reads_back_to_back_frames() {
        let t = Topic::new("/x").unwrap();
        let mut bytes = encode(&t, &[SensorReading::new(1, 1)]).unwrap();
        bytes.extend(encode(&t, &[SensorReading::new(2, 2), SensorReading::new(3, 3)]).unwrap());
        let mut cur = io::Cursor::new(bytes);
        assert_eq!(read_frame(&mut cur).unwrap().unwrap().readings.len(), 1);
        assert_eq!(read_frame(&mut cur).unwrap().unwrap().readings.len(), 2);
        assert!(read_frame(&mut cur).unwrap().is_none());
    }
}
