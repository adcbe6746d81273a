//! `SSP1` request/response framing.
//!
//! All integers little-endian.
//!
//! ```text
//! request  := "SSP1" version:u16=1 type:u8=1 query:u8 H:u32 W:u32
//!             14 layers of H*W u8 (position, trajectory, obstacles, explored,
//!             semantic channels 0..=9), values 0/1
//! response := "SSP1" version:u16=1 type:u8=2 H:u32 W:u32
//!             10 layers of H*W f32 probabilities (channel order 0..=9)
//! ```
//!
//! Messages are self-delimiting: the header fixes the payload length.

use std::io::{Read, Write};

use thiserror::Error;

use crate::explore::ObservationFrame;
use crate::grid::{Cell, ClassId, SemanticGrid, NUM_CLASSES};

use super::PredictionResult;

pub const MAGIC: &[u8; 4] = b"SSP1";
pub const VERSION: u16 = 1;
pub const MSG_REQUEST: u8 = 1;
pub const MSG_RESPONSE: u8 = 2;
pub const REQUEST_HEADER_LEN: usize = 16;
pub const RESPONSE_HEADER_LEN: usize = 15;
pub const REQUEST_LAYERS: usize = 4 + NUM_CLASSES;

/// Largest grid a peer may declare.
pub const MAX_CELLS: usize = 1 << 24;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("bad magic")]
    BadMagic,
    #[error("protocol version mismatch: got {0}, expected {VERSION}")]
    VersionMismatch(u16),
    #[error("unexpected message type {got} (expected {expected})")]
    UnexpectedMessageType { got: u8, expected: u8 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("truncated message: need {need} bytes, got {got}")]
    Truncated { need: usize, got: usize },
    #[error("query {0} is not a room class")]
    BadQuery(u8),
    #[error("layer value {value} at channel {channel} is not 0/1")]
    BadLayerValue { channel: usize, value: u8 },
    #[error("probability {value} at channel {channel} is outside [0, 1]")]
    ProbabilityOutOfRange { channel: usize, value: f32 },
    #[error("transport: {0}")]
    Transport(#[from] std::io::Error),
}

/// Decoded request as a server sees it.
#[derive(Clone, Debug, PartialEq)]
pub struct Request {
    pub query: ClassId,
    pub height: usize,
    pub width: usize,
    /// `REQUEST_LAYERS` planes of `height * width` bytes.
    pub layers: Vec<Vec<u8>>,
}

fn frame_layers(frame: &ObservationFrame) -> Vec<Vec<u8>> {
    let as_bytes = |m: &crate::grid::BitMask| m.bits().iter().map(|b| *b as u8).collect::<Vec<u8>>();
    let mut layers = vec![
        as_bytes(&frame.position_mask()),
        as_bytes(&frame.trajectory),
        as_bytes(&frame.obstacles_seen),
        as_bytes(&frame.explored),
    ];
    for class in ClassId::all() {
        layers.push(
            frame
                .local_semantics
                .channel(class)
                .iter()
                .map(|v| (*v > 0.5) as u8)
                .collect(),
        );
    }
    layers
}

pub fn encode_request(frame: &ObservationFrame, q: ClassId) -> Vec<u8> {
    let (h, w) = (frame.height(), frame.width());
    let mut out = Vec::with_capacity(REQUEST_HEADER_LEN + REQUEST_LAYERS * h * w);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(MSG_REQUEST);
    out.push(q.id());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    out.extend_from_slice(&(w as u32).to_le_bytes());
    for layer in frame_layers(frame) {
        out.extend_from_slice(&layer);
    }
    out
}

fn check_prefix(bytes: &[u8], expected_type: u8) -> Result<(), ProtocolError> {
    if bytes.len() < 7 {
        return Err(ProtocolError::Truncated {
            need: 7,
            got: bytes.len(),
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(ProtocolError::BadMagic);
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(ProtocolError::VersionMismatch(version));
    }
    if bytes[6] != expected_type {
        return Err(ProtocolError::UnexpectedMessageType {
            got: bytes[6],
            expected: expected_type,
        });
    }
    Ok(())
}

fn dims_at(bytes: &[u8], at: usize) -> Result<(usize, usize), ProtocolError> {
    let h = u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes")) as usize;
    let w = u32::from_le_bytes(bytes[at + 4..at + 8].try_into().expect("4 bytes")) as usize;
    if h.checked_mul(w).is_none_or(|n| n > MAX_CELLS) {
        return Err(ProtocolError::ShapeMismatch(format!("declared grid {h}x{w} too large")));
    }
    Ok((h, w))
}

pub fn decode_request(bytes: &[u8]) -> Result<Request, ProtocolError> {
    check_prefix(bytes, MSG_REQUEST)?;
    if bytes.len() < REQUEST_HEADER_LEN {
        return Err(ProtocolError::Truncated {
            need: REQUEST_HEADER_LEN,
            got: bytes.len(),
        });
    }
    let query = ClassId::query(bytes[7]).map_err(|_| ProtocolError::BadQuery(bytes[7]))?;
    let (height, width) = dims_at(bytes, 8)?;
    let plane = height * width;
    let payload = &bytes[REQUEST_HEADER_LEN..];
    if payload.len() != REQUEST_LAYERS * plane {
        return Err(ProtocolError::ShapeMismatch(format!(
            "{} payload bytes for {REQUEST_LAYERS} layers of {height}x{width}",
            payload.len()
        )));
    }
    let layers: Vec<Vec<u8>> = payload.chunks_exact(plane.max(1)).map(<[u8]>::to_vec).collect();
    for (channel, layer) in layers.iter().enumerate() {
        if let Some(&value) = layer.iter().find(|v| **v > 1) {
            return Err(ProtocolError::BadLayerValue { channel, value });
        }
    }
    Ok(Request {
        query,
        height,
        width,
        layers,
    })
}

/// Serialises ten probability planes (e.g. a server's reply).
pub fn encode_response(probs: &SemanticGrid) -> Vec<u8> {
    let (h, w) = (probs.height(), probs.width());
    let mut out = Vec::with_capacity(RESPONSE_HEADER_LEN + NUM_CLASSES * h * w * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(MSG_RESPONSE);
    out.extend_from_slice(&(h as u32).to_le_bytes());
    out.extend_from_slice(&(w as u32).to_le_bytes());
    for class in ClassId::all() {
        for v in probs.channel(class) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Parses a reply; `area_prob` is channel `query` of the global map.
pub fn decode_response(bytes: &[u8], query: ClassId) -> Result<PredictionResult, ProtocolError> {
    check_prefix(bytes, MSG_RESPONSE)?;
    if bytes.len() < RESPONSE_HEADER_LEN {
        return Err(ProtocolError::Truncated {
            need: RESPONSE_HEADER_LEN,
            got: bytes.len(),
        });
    }
    let (h, w) = dims_at(bytes, 7)?;
    let plane = h * w;
    let payload = &bytes[RESPONSE_HEADER_LEN..];
    if payload.len() != NUM_CLASSES * plane * 4 {
        return Err(ProtocolError::ShapeMismatch(format!(
            "{} probability values for {NUM_CLASSES} channels of {h}x{w}",
            payload.len() / 4
        )));
    }
    let mut grid = SemanticGrid::zeros(h, w);
    for (channel, chunk) in payload.chunks_exact(plane.max(1) * 4).enumerate() {
        let class = ClassId::new(channel as u8).expect("ten channels");
        for (i, raw) in chunk.chunks_exact(4).enumerate() {
            let value = f32::from_le_bytes(raw.try_into().expect("4 bytes"));
            if !(0.0..=1.0).contains(&value) {
                return Err(ProtocolError::ProbabilityOutOfRange { channel, value });
            }
            grid.set(Cell::new(i / w, i % w), class, value);
        }
    }
    Ok(PredictionResult::select(grid, query))
}

/// Reads one self-delimited message of the given type from a stream.
pub fn read_message<R: Read>(src: &mut R, msg_type: u8) -> Result<Vec<u8>, ProtocolError> {
    let header_len = if msg_type == MSG_REQUEST {
        REQUEST_HEADER_LEN
    } else {
        RESPONSE_HEADER_LEN
    };
    let mut buf = vec![0u8; header_len];
    src.read_exact(&mut buf)?;
    check_prefix(&buf, msg_type)?;
    let dims_offset = header_len - 8;
    let (h, w) = dims_at(&buf, dims_offset)?;
    let payload = if msg_type == MSG_REQUEST {
        REQUEST_LAYERS * h * w
    } else {
        NUM_CLASSES * h * w * 4
    };
    buf.resize(header_len + payload, 0);
    src.read_exact(&mut buf[header_len..])?;
    Ok(buf)
}

pub fn write_message<W: Write>(dst: &mut W, bytes: &[u8]) -> Result<(), ProtocolError> {
    dst.write_all(bytes)?;
    dst.flush()?;
    Ok(())
}
