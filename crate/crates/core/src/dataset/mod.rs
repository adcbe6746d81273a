//! Training samples with mask-constrained supervision, the reference loss,
//! and the on-disk dataset format.

mod loss;
mod sample;
pub mod split;
pub mod ssds;

use thiserror::Error;

pub use loss::{
    compute_class_weights, masked_bce_map, masked_weighted_bce, multitask_loss, sigmoid, weighted_bce,
    weighted_bce_grad, ClassWeights, LogitGrid, LossBreakdown, LossConfig, LOGIT_CLAMP, MAX_CLASS_WEIGHT,
    MIN_CLASS_WEIGHT,
};
pub use sample::{build_sample, build_sample_with, samples_for_frames, Supervision, TrainingSample};
pub use split::Split;
pub use ssds::{read_dataset, write_dataset, Dataset};

use crate::grid::GridError;
use crate::raster::RasterError;

/// Frames stored per exploration sequence.
pub const DEFAULT_STORE_FRAMES: usize = 20;
/// Leading frames of each sequence used for training.
pub const DEFAULT_TRAIN_FRAMES: usize = 10;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("query class {0} out of range (must be 0..=6)")]
    QueryOutOfRange(u8),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("no valid cells to average over")]
    NoValidCells,
    #[error("class census is empty")]
    EmptyCensus,
    #[error("invalid loss config: {0}")]
    InvalidLossConfig(String),
    #[error("bad magic: not an SSDS dataset")]
    BadMagic,
    #[error("unsupported SSDS version {0}")]
    UnsupportedVersion(u16),
    #[error("corrupt header in record {record}: {reason}")]
    CorruptRecordHeader { record: usize, reason: String },
    #[error("checksum mismatch in record {record}")]
    ChecksumMismatch { record: usize },
    #[error("corrupt record {record}: {reason}")]
    CorruptRecord { record: usize, reason: String },
    #[error("record {record}: {source}")]
    Layer { record: usize, source: RasterError },
    #[error("header declares {declared} records but {trailing_bytes} bytes follow them")]
    RecordCountMismatch { declared: usize, trailing_bytes: usize },
    #[error("no record for plan {plan_id}, step {step}, query {query}")]
    NotFound { plan_id: u32, step: u32, query: u8 },
    #[error("malformed split manifest line `{0}`")]
    BadSplitManifest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
