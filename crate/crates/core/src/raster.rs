//! `SEMGRIDv1` raster files.
//!
//! A file is one ASCII header line `SEMGRIDv1 <H> <W> <C>\n` followed by
//! exactly `H * W` bytes, row-major, each byte a class id below `C`.
//! `C` is always 10. Nothing may follow the payload.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::grid::{BitMask, ClassId, LabelGrid, NUM_CLASSES};

pub const MAGIC: &str = "SEMGRIDv1";

/// Upper bound on `H * W`; larger headers are rejected before allocating.
pub const MAX_CELLS: usize = 1 << 26;

const MAX_HEADER_LEN: usize = 64;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("bad magic: expected `{MAGIC}`")]
    BadMagic,
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported channel count {0} (v1 requires {NUM_CLASSES})")]
    ChannelCount(usize),
    #[error("dimension overflow: {height}x{width} exceeds {MAX_CELLS} cells")]
    DimensionOverflow { height: u64, width: u64 },
    #[error("label {value} out of range at byte {offset}")]
    LabelOutOfRange { offset: usize, value: u8 },
    #[error("truncated payload: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("{0} trailing bytes after payload")]
    TrailingData(usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn encode(labels: &LabelGrid) -> Vec<u8> {
    let header = format!("{MAGIC} {} {} {NUM_CLASSES}\n", labels.height(), labels.width());
    let mut out = Vec::with_capacity(header.len() + labels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend(labels.labels().iter().map(|c| c.id()));
    out
}

pub fn decode(bytes: &[u8]) -> Result<LabelGrid, RasterError> {
    if !bytes.starts_with(MAGIC.as_bytes()) {
        return Err(RasterError::BadMagic);
    }
    let newline = bytes
        .iter()
        .take(MAX_HEADER_LEN)
        .position(|b| *b == b'\n')
        .ok_or_else(|| RasterError::MalformedHeader("no newline within header".into()))?;
    let header = std::str::from_utf8(&bytes[..newline])
        .map_err(|_| RasterError::MalformedHeader("header is not ASCII".into()))?;
    let mut fields = header.split(' ');
    if fields.next() != Some(MAGIC) {
        return Err(RasterError::BadMagic);
    }
    let mut number = |name: &str| -> Result<u64, RasterError> {
        let field = fields
            .next()
            .ok_or_else(|| RasterError::MalformedHeader(format!("missing {name}")))?;
        if field.is_empty() || !field.bytes().all(|b| b.is_ascii_digit()) {
            return Err(RasterError::MalformedHeader(format!("{name} is not a decimal integer")));
        }
        field
            .parse::<u64>()
            .map_err(|_| RasterError::MalformedHeader(format!("{name} does not fit in 64 bits")))
    };
    let height = number("height")?;
    let width = number("width")?;
    let channels = number("channels")?;
    if fields.next().is_some() {
        return Err(RasterError::MalformedHeader("extra header fields".into()));
    }
    if channels != NUM_CLASSES as u64 {
        return Err(RasterError::ChannelCount(channels as usize));
    }
    let cells = height
        .checked_mul(width)
        .filter(|n| *n <= MAX_CELLS as u64)
        .ok_or(RasterError::DimensionOverflow { height, width })? as usize;

    let payload = &bytes[newline + 1..];
    if payload.len() < cells {
        return Err(RasterError::Truncated {
            expected: cells,
            got: payload.len(),
        });
    }
    if payload.len() > cells {
        return Err(RasterError::TrailingData(payload.len() - cells));
    }
    if let Some((offset, &value)) = payload
        .iter()
        .enumerate()
        .find(|(_, b)| **b as usize >= NUM_CLASSES)
    {
        return Err(RasterError::LabelOutOfRange { offset, value });
    }
    Ok(LabelGrid::from_raw(height as usize, width as usize, payload).expect("validated above"))
}

pub fn write_raster<W: Write>(labels: &LabelGrid, mut dst: W) -> Result<(), RasterError> {
    dst.write_all(&encode(labels))?;
    Ok(())
}

pub fn read_raster<R: Read>(mut src: R) -> Result<LabelGrid, RasterError> {
    let mut bytes = Vec::new();
    src.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn save(labels: &LabelGrid, path: &Path) -> Result<(), RasterError> {
    fs::write(path, encode(labels))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<LabelGrid, RasterError> {
    decode(&fs::read(path)?)
}

/// Masks travel as rasters with labels 0/1.
pub fn mask_to_labels(mask: &BitMask) -> LabelGrid {
    let raw: Vec<u8> = mask.bits().iter().map(|b| *b as u8).collect();
    LabelGrid::from_raw(mask.height(), mask.width(), &raw).expect("0/1 are valid labels")
}

/// Inverse of [`mask_to_labels`]; any label other than 0/1 is rejected.
pub fn labels_to_mask(labels: &LabelGrid) -> Result<BitMask, RasterError> {
    let mut bits = Vec::with_capacity(labels.len());
    for (offset, class) in labels.labels().iter().enumerate() {
        match class.id() {
            0 => bits.push(false),
            1 => bits.push(true),
            value => return Err(RasterError::LabelOutOfRange { offset, value }),
        }
    }
    Ok(BitMask::from_bits(labels.height(), labels.width(), bits).expect("length matches"))
}

/// Single-class helper used by one-channel layer dumps.
pub fn channel_to_labels(labels: &LabelGrid, class: ClassId, within: &BitMask) -> LabelGrid {
    mask_to_labels(&BitMask::from_fn(labels.height(), labels.width(), |c| {
        within.get(c) && labels.get(c) == class
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::tiny_two_room;

    #[test]
    fn fixture_round_trip() {
        let g = tiny_two_room();
        let bytes = encode(&g);
        assert!(bytes.starts_with(b"SEMGRIDv1 8 8 10\n"));
        assert_eq!(bytes.len(), 17 + 64);
        assert_eq!(decode(&bytes).unwrap(), g);
    }

    #[test]
    fn hand_built_header_parses() {
        let mut bytes = b"SEMGRIDv1 8 8 10\n".to_vec();
        bytes.extend(std::iter::repeat_n(7u8, 64));
        let g = decode(&bytes).unwrap();
        assert_eq!((g.height(), g.width()), (8, 8));
        assert!(g.labels().iter().all(|c| *c == ClassId::WALL));
    }

    #[test]
    fn error_categories() {
        let good = encode(&tiny_two_room());

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(RasterError::BadMagic)));

        let mut bad = good.clone();
        bad[20] = 10;
        assert!(matches!(
            decode(&bad),
            Err(RasterError::LabelOutOfRange { offset: 3, value: 10 })
        ));

        assert!(matches!(
            decode(&good[..good.len() - 1]),
            Err(RasterError::Truncated { expected: 64, got: 63 })
        ));

        let mut bad = good.clone();
        bad.push(0);
        assert!(matches!(decode(&bad), Err(RasterError::TrailingData(1))));

        let huge = b"SEMGRIDv1 99999999999 99999999999 10\n";
        assert!(matches!(decode(huge), Err(RasterError::DimensionOverflow { .. })));

        let wrong_c = b"SEMGRIDv1 1 1 11\n\x00";
        assert!(matches!(decode(wrong_c), Err(RasterError::ChannelCount(11))));

        let junk = b"SEMGRIDv1 a 1 10\n\x00";
        assert!(matches!(decode(junk), Err(RasterError::MalformedHeader(_))));
    }

    #[test]
    fn mask_layers_round_trip() {
        let m = BitMask::from_fn(3, 4, |c| (c.row + c.col) % 2 == 0);
        let back = labels_to_mask(&decode(&encode(&mask_to_labels(&m))).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
