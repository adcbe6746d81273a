//! Rewrites the frozen byte fixtures under tests/fixtures. Run from the
//! workspace root after an intentional format change.

use foresight_core::dataset::{samples_for_frames, ssds, Supervision};
use foresight_core::explore::*;
use foresight_core::floorgen::tiny_two_room_plan;
use foresight_core::predict::protocol;
use foresight_core::*;
fn main() {
    let dir = std::path::Path::new("crates/core/tests/fixtures");
    let plan = tiny_two_room_plan();
    std::fs::write(dir.join("tiny.semgrid"), raster::encode(&plan.labels)).unwrap();
    let frames = run_exploration(&plan, Cell::new(2, 2), &ExploreConfig { radius: 2, max_steps: 200, keep_first: 2 }).unwrap();
    let samples = samples_for_frames(0, &frames, &plan, Supervision::Unexplored).unwrap();
    std::fs::write(dir.join("tiny.ssds"), ssds::encode_dataset(&samples)).unwrap();
    std::fs::write(dir.join("tiny_request.ssp1"), protocol::encode_request(&frames[1], ClassId::BEDROOM)).unwrap();
    let mut probs = SemanticGrid::zeros(8, 8);
    for cell in plan.labels.cells() {
        for class in ClassId::all() {
            probs.set(cell, class, ((cell.row * 8 + cell.col + class.index()) % 64) as f32 / 64.0);
        }
    }
    std::fs::write(dir.join("tiny_response.ssp1"), protocol::encode_response(&probs)).unwrap();
}
