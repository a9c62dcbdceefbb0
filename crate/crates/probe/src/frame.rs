//! Probe frame, big-endian:
//!
//! | bytes | field                                   |
//! |-------|-----------------------------------------|
//! | 0..4  | magic `FRPB`                            |
//! | 4     | version, 1                              |
//! | 5     | flags, 0                                |
//! | 6..8  | reserved, 0                             |
//! | 8..12 | sequence number                         |
//! | 12..20| send timestamp, ns on the sender clock  |
//! | 20..  | zero padding up to the payload size     |
//!
//! Stream transports prefix each frame with its length as a big-endian u32.

use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"FRPB";
pub const VERSION: u8 = 1;
/// Bytes carrying fields; the rest of a frame is padding.
pub const FIELD_BYTES: usize = 20;
/// Smallest payload a probe accepts.
pub const MIN_PAYLOAD_BYTES: usize = 36;
pub const LENGTH_PREFIX_BYTES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frame {
    pub seq: u32,
    pub timestamp_ns: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrameError {
    #[error("frame of {0} bytes is shorter than {FIELD_BYTES}")]
    Short(usize),
    #[error("bad magic {0:02x?}")]
    Magic([u8; 4]),
    #[error("unsupported version {0}")]
    Version(u8),
}

impl Frame {
    /// Encodes into exactly `payload_bytes` bytes (at least the field bytes).
    pub fn encode(&self, payload_bytes: usize) -> Vec<u8> {
        let mut out = vec![0u8; payload_bytes.max(FIELD_BYTES)];
        out[0..4].copy_from_slice(&MAGIC);
        out[4] = VERSION;
        out[8..12].copy_from_slice(&self.seq.to_be_bytes());
        out[12..20].copy_from_slice(&self.timestamp_ns.to_be_bytes());
        out
    }

    /// Length-prefixed encoding for stream transports.
    pub fn encode_prefixed(&self, payload_bytes: usize) -> Vec<u8> {
        let body = self.encode(payload_bytes);
        let mut out = Vec::with_capacity(LENGTH_PREFIX_BYTES + body.len());
        out.extend_from_slice(&(body.len() as u32).to_be_bytes());
        out.extend_from_slice(&body);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Frame, FrameError> {
        if bytes.len() < FIELD_BYTES {
            return Err(FrameError::Short(bytes.len()));
        }
        let magic: [u8; 4] = bytes[0..4].try_into().expect("four bytes");
        if magic != MAGIC {
            return Err(FrameError::Magic(magic));
        }
        if bytes[4] != VERSION {
            return Err(FrameError::Version(bytes[4]));
        }
        Ok(Frame {
            seq: u32::from_be_bytes(bytes[8..12].try_into().expect("four bytes")),
            timestamp_ns: u64::from_be_bytes(bytes[12..20].try_into().expect("eight bytes")),
        })
    }
}

/// Splits complete length-prefixed frames off the front of `buf`.
pub fn take_prefixed(buf: &mut Vec<u8>) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    loop {
        if buf.len() < LENGTH_PREFIX_BYTES {
            return out;
        }
        let len =
            u32::from_be_bytes(buf[..LENGTH_PREFIX_BYTES].try_into().expect("four bytes")) as usize;
        if buf.len() < LENGTH_PREFIX_BYTES + len {
            return out;
        }
        out.push(buf[LENGTH_PREFIX_BYTES..LENGTH_PREFIX_BYTES + len].to_vec());
        buf.drain(..LENGTH_PREFIX_BYTES + len);
    }
}
