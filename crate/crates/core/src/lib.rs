//! Bird's-eye-view semantic map simulation and evaluation.
//!
//! The crate covers the whole offline pipeline: procedural floorplans,
//! frontier exploration with an occluding range sensor, mask-constrained
//! supervision targets and their reference loss, predictor backends (including
//! a wire client for external models), unexplored-region metrics and a
//! closed-loop navigation harness.

pub mod dataset;
pub mod explore;
pub mod floorgen;
pub mod grid;
pub mod metrics;
pub mod nav;
pub mod predict;
pub mod raster;
pub mod render;
pub mod search;

pub use floorgen::{generate_floorplan, validate_floorplan, Floorplan, FloorplanSpec};
pub use grid::{BitMask, Cell, ClassId, LabelGrid, Pose, SemanticGrid, NUM_CLASSES};
