//! Binary frame format.
//!
//! ```text
//! u32 LE  length of everything after this field
//! u8      kind (STORE=1, RAND=2, QUERY=3, ANSWER=4)
//! u8      protocol version (1)
//! u32 LE  field modulus
//! u16 LE  node id (1-based)
//! u16 LE  round index (1-based; 0 for STORE and RAND)
//! u32 LE  element count
//! u32 LE  elements...
//! ```

use std::fmt;

use crate::error::{Error, Result};

pub const PROTOCOL_VERSION: u8 = 1;
/// Bytes between the length prefix and the first element.
pub const HEADER_LEN: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Kind {
    Store = 1,
    Rand = 2,
    Query = 3,
    Answer = 4,
}

impl Kind {
    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            1 => Ok(Kind::Store),
            2 => Ok(Kind::Rand),
            3 => Ok(Kind::Query),
            4 => Ok(Kind::Answer),
            other => Err(Error::UnknownKind(other)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Store => "STORE",
            Kind::Rand => "RAND",
            Kind::Query => "QUERY",
            Kind::Answer => "ANSWER",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Kind::Store, Kind::Rand, Kind::Query, Kind::Answer].into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WireMessage {
    pub kind: Kind,
    pub modulus: u32,
    pub node: u16,
    pub round: u16,
    pub payload: Vec<u32>,
}

pub fn encode_message(msg: &WireMessage) -> Result<Vec<u8>> {
    if let Some(&bad) = msg.payload.iter().find(|&&v| v >= msg.modulus) {
        return Err(Error::ElementOutOfRange { value: bad, modulus: msg.modulus });
    }
    let body = HEADER_LEN + 4 * msg.payload.len();
    let len = u32::try_from(body).map_err(|_| Error::MalformedFrame("payload too large".into()))?;
    let mut out = Vec::with_capacity(4 + body);
    out.extend_from_slice(&len.to_le_bytes());
    out.push(msg.kind as u8);
    out.push(PROTOCOL_VERSION);
    out.extend_from_slice(&msg.modulus.to_le_bytes());
    out.extend_from_slice(&msg.node.to_le_bytes());
    out.extend_from_slice(&msg.round.to_le_bytes());
    out.extend_from_slice(&(msg.payload.len() as u32).to_le_bytes());
    for v in &msg.payload {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

pub fn decode_message(bytes: &[u8]) -> Result<WireMessage> {
    if bytes.len() < 4 + HEADER_LEN {
        return Err(Error::MalformedFrame(format!("{} bytes is shorter than a header", bytes.len())));
    }
    let len = u32_at(bytes, 0) as usize;
    if bytes.len() - 4 != len {
        return Err(Error::MalformedFrame(format!("length field says {len} bytes, frame carries {}", bytes.len() - 4)));
    }
    let kind = Kind::from_tag(bytes[4])?;
    if bytes[5] != PROTOCOL_VERSION {
        return Err(Error::MalformedFrame(format!("unsupported version {}", bytes[5])));
    }
    let modulus = u32_at(bytes, 6);
    let node = u16_at(bytes, 10);
    let round = u16_at(bytes, 12);
    let count = u32_at(bytes, 14) as usize;
    if len != HEADER_LEN + 4 * count {
        return Err(Error::MalformedFrame(format!("{count} elements do not fit a {len}-byte frame")));
    }
    let payload = (0..count)
        .map(|i| {
            let v = u32_at(bytes, 4 + HEADER_LEN + 4 * i);
            if v >= modulus {
                Err(Error::ElementOutOfRange { value: v, modulus })
            } else {
                Ok(v)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WireMessage { kind, modulus, node, round, payload })
}

/// Kind tag of an encoded frame, if it has one.
pub fn peek_kind(frame: &[u8]) -> Option<Kind> {
    frame.get(4).and_then(|&t| Kind::from_tag(t).ok())
}

/// Element count of an encoded frame (0 for anything malformed).
pub fn peek_count(frame: &[u8]) -> usize {
    if frame.len() < 4 + HEADER_LEN {
        return 0;
    }
    u32_at(frame, 14) as usize
}
