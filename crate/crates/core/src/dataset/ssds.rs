//! `SSDS` binary dataset files.
//!
//! All integers are little-endian.
//!
//! ```text
//! file    := "SSDS" version:u16 record_count:u32 record*
//! record  := body_len:u32 body crc32(body):u32
//! body    := plan_id:u32 step:u32 query:u8 supervision:u8
//!            pose_row:u32 pose_col:u32 layer_count:u8 layer*
//! layer   := blob_len:u32 SEMGRIDv1-blob
//! ```
//!
//! Layers, in order: position, trajectory, obstacles, explored (0/1 masks),
//! ground-truth labels, query target mask, loss-weight mask. Local semantics
//! and the masked ground truth are the one-hot ground truth restricted to the
//! explored and supervised cells respectively, so they are not stored.

use std::fs;
use std::path::Path;

use crate::explore::ObservationFrame;
use crate::grid::{onehot_encode, restrict_to, Cell, ClassId, LabelGrid};
use crate::raster::{self, labels_to_mask, mask_to_labels};

use super::sample::{build_sample_with, Supervision};
use super::{DatasetError, TrainingSample};

pub const MAGIC: &[u8; 4] = b"SSDS";
pub const VERSION: u16 = 1;
pub const LAYER_COUNT: u8 = 7;
pub const LAYER_NAMES: [&str; LAYER_COUNT as usize] =
    ["position", "trajectory", "obstacles", "explored", "gt", "target", "loss_weight"];

const FILE_HEADER_LEN: usize = 10;
const BODY_KEY_LEN: usize = 4 + 4 + 1 + 1 + 4 + 4 + 1;

fn encode_body(sample: &TrainingSample) -> Vec<u8> {
    let frame = &sample.frame;
    let mut body = Vec::new();
    body.extend_from_slice(&sample.plan_id.to_le_bytes());
    body.extend_from_slice(&(frame.step as u32).to_le_bytes());
    body.push(sample.query.id());
    body.push(sample.supervision.code());
    body.extend_from_slice(&(frame.pose.row as u32).to_le_bytes());
    body.extend_from_slice(&(frame.pose.col as u32).to_le_bytes());
    body.push(LAYER_COUNT);
    let layers = [
        mask_to_labels(&frame.position_mask()),
        mask_to_labels(&frame.trajectory),
        mask_to_labels(&frame.obstacles_seen),
        mask_to_labels(&frame.explored),
        sample.gt.clone(),
        mask_to_labels(&sample.target_mask),
        mask_to_labels(&sample.loss_weight_mask),
    ];
    for layer in &layers {
        let blob = raster::encode(layer);
        body.extend_from_slice(&(blob.len() as u32).to_le_bytes());
        body.extend_from_slice(&blob);
    }
    body
}

pub fn encode_record(sample: &TrainingSample) -> Vec<u8> {
    let body = encode_body(sample);
    let mut out = Vec::with_capacity(body.len() + 8);
    out.extend_from_slice(&(body.len() as u32).to_le_bytes());
    out.extend_from_slice(&body);
    out.extend_from_slice(&crc32fast::hash(&body).to_le_bytes());
    out
}

pub fn encode_dataset(samples: &[TrainingSample]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(samples.len() as u32).to_le_bytes());
    for s in samples {
        out.extend_from_slice(&encode_record(s));
    }
    out
}

pub fn write_dataset(samples: &[TrainingSample], path: &Path) -> Result<(), DatasetError> {
    fs::write(path, encode_dataset(samples))?;
    Ok(())
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

/// Location and key of one record inside a dataset buffer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexEntry {
    pub plan_id: u32,
    pub step: u32,
    pub query: u8,
    /// Offset of the body (just past the length prefix).
    pub offset: usize,
    pub body_len: usize,
}

/// A dataset held in memory with a record index.
#[derive(Clone, Debug)]
pub struct Dataset {
    bytes: Vec<u8>,
    index: Vec<IndexEntry>,
}

impl Dataset {
    pub fn open(path: &Path) -> Result<Self, DatasetError> {
        Self::from_bytes(fs::read(path)?)
    }

    /// Parses the file header and indexes every record. Checksums are
    /// verified when records are decoded.
    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self, DatasetError> {
        if bytes.len() < FILE_HEADER_LEN || &bytes[..4] != MAGIC {
            return Err(DatasetError::BadMagic);
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(DatasetError::UnsupportedVersion(version));
        }
        let declared = u32_at(&bytes, 6) as usize;
        let mut index = Vec::with_capacity(declared);
        let mut at = FILE_HEADER_LEN;
        for record in 0..declared {
            if bytes.len() < at + 4 {
                return Err(DatasetError::CorruptRecordHeader {
                    record,
                    reason: "missing length prefix".into(),
                });
            }
            let body_len = u32_at(&bytes, at) as usize;
            let offset = at + 4;
            if body_len < BODY_KEY_LEN {
                return Err(DatasetError::CorruptRecordHeader {
                    record,
                    reason: format!("body length {body_len} shorter than the record key"),
                });
            }
            if bytes.len() < offset + body_len + 4 {
                // Payload or checksum cut short.
                return Err(DatasetError::ChecksumMismatch { record });
            }
            index.push(IndexEntry {
                plan_id: u32_at(&bytes, offset),
                step: u32_at(&bytes, offset + 4),
                query: bytes[offset + 8],
                offset,
                body_len,
            });
            at = offset + body_len + 4;
        }
        if at != bytes.len() {
            return Err(DatasetError::RecordCountMismatch {
                declared,
                trailing_bytes: bytes.len() - at,
            });
        }
        Ok(Dataset { bytes, index })
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn index(&self) -> &[IndexEntry] {
        &self.index
    }

    pub fn find(&self, plan_id: u32, step: u32, query: ClassId) -> Option<usize> {
        self.index
            .iter()
            .position(|e| (e.plan_id, e.step, e.query) == (plan_id, step, query.id()))
    }

    pub fn get(&self, plan_id: u32, step: u32, query: ClassId) -> Result<TrainingSample, DatasetError> {
        let i = self.find(plan_id, step, query).ok_or(DatasetError::NotFound {
            plan_id,
            step,
            query: query.id(),
        })?;
        self.record(i)
    }

    /// Decodes record `i`, verifying its checksum.
    pub fn record(&self, i: usize) -> Result<TrainingSample, DatasetError> {
        let e = self.index[i];
        let body = &self.bytes[e.offset..e.offset + e.body_len];
        let stored = u32_at(&self.bytes, e.offset + e.body_len);
        if crc32fast::hash(body) != stored {
            return Err(DatasetError::ChecksumMismatch { record: i });
        }
        decode_body(body, i)
    }

    pub fn iter(&self) -> impl Iterator<Item = Result<TrainingSample, DatasetError>> + '_ {
        (0..self.len()).map(|i| self.record(i))
    }

    pub fn samples(&self) -> Result<Vec<TrainingSample>, DatasetError> {
        self.iter().collect()
    }
}

pub fn read_dataset(path: &Path) -> Result<Vec<TrainingSample>, DatasetError> {
    Dataset::open(path)?.samples()
}

pub fn decode_dataset(bytes: &[u8]) -> Result<Vec<TrainingSample>, DatasetError> {
    Dataset::from_bytes(bytes.to_vec())?.samples()
}

fn decode_body(body: &[u8], record: usize) -> Result<TrainingSample, DatasetError> {
    let corrupt = |reason: String| DatasetError::CorruptRecord { record, reason };
    let plan_id = u32_at(body, 0);
    let step = u32_at(body, 4) as usize;
    let query = ClassId::query(body[8]).map_err(|_| corrupt(format!("query {} out of range", body[8])))?;
    let supervision = Supervision::from_code(body[9]).ok_or_else(|| corrupt(format!("supervision code {}", body[9])))?;
    let pose = Cell::new(u32_at(body, 10) as usize, u32_at(body, 14) as usize);
    if body[18] != LAYER_COUNT {
        return Err(corrupt(format!("{} layers, expected {LAYER_COUNT}", body[18])));
    }
    let mut at = BODY_KEY_LEN;
    let mut layers = Vec::with_capacity(LAYER_COUNT as usize);
    for name in LAYER_NAMES {
        if body.len() < at + 4 {
            return Err(corrupt(format!("layer `{name}` missing")));
        }
        let len = u32_at(body, at) as usize;
        at += 4;
        let blob = body
            .get(at..at + len)
            .ok_or_else(|| corrupt(format!("layer `{name}` overruns the record")))?;
        layers.push(raster::decode(blob).map_err(|source| DatasetError::Layer { record, source })?);
        at += len;
    }
    if at != body.len() {
        return Err(corrupt("trailing bytes after layers".into()));
    }
    let gt: LabelGrid = layers[4].clone();
    let dims = (gt.height(), gt.width());
    if layers.iter().any(|l| (l.height(), l.width()) != dims) {
        return Err(corrupt("layer dimensions disagree".into()));
    }
    let mask = |i: usize| labels_to_mask(&layers[i]).map_err(|source| DatasetError::Layer { record, source });
    let position = mask(0)?;
    if position.iter_set().collect::<Vec<_>>() != vec![pose] {
        return Err(corrupt("position layer does not match the pose".into()));
    }
    let explored = mask(3)?;
    let frame = ObservationFrame {
        pose,
        trajectory: mask(1)?,
        obstacles_seen: mask(2)?,
        local_semantics: restrict_to(&onehot_encode(&gt), &explored)?,
        explored,
        step,
    };
    let sample = build_sample_with(&frame, &gt, query, supervision)?.with_plan_id(plan_id);
    if sample.target_mask != mask(5)? || sample.loss_weight_mask != mask(6)? {
        return Err(corrupt("stored targets disagree with the ground truth".into()));
    }
    Ok(sample)
}
