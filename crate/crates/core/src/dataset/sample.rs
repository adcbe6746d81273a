use crate::explore::ObservationFrame;
use crate::floorgen::Floorplan;
use crate::grid::{apply_unexplored_mask, check_shape, onehot_encode, restrict_to, BitMask, ClassId, LabelGrid, SemanticGrid};

use super::DatasetError;

/// Which cells carry supervision.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Supervision {
    /// Loss on unexplored cells only; explored cells get zero weight.
    #[default]
    Unexplored,
    /// Loss on explored cells only. Kept to reproduce the observed-only baseline.
    Explored,
}

impl Supervision {
    pub fn code(self) -> u8 {
        match self {
            Supervision::Unexplored => 0,
            Supervision::Explored => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Supervision::Unexplored),
            1 => Some(Supervision::Explored),
            _ => None,
        }
    }

    /// Cells that contribute to the loss for a given explored mask.
    pub fn valid_mask(self, explored: &BitMask) -> BitMask {
        match self {
            Supervision::Unexplored => explored.not(),
            Supervision::Explored => explored.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSample {
    pub plan_id: u32,
    pub frame: ObservationFrame,
    /// Full ground truth of the plan.
    pub gt: LabelGrid,
    /// Ground truth restricted to the supervised cells.
    pub masked_gt: SemanticGrid,
    pub query: ClassId,
    /// Query-class cells among the supervised cells.
    pub target_mask: BitMask,
    /// Cells that contribute to the loss.
    pub loss_weight_mask: BitMask,
    pub supervision: Supervision,
}

impl TrainingSample {
    pub fn with_plan_id(mut self, plan_id: u32) -> Self {
        self.plan_id = plan_id;
        self
    }

    pub fn key(&self) -> (u32, u32, u8) {
        (self.plan_id, self.frame.step as u32, self.query.id())
    }
}

/// Builds the mask-constrained sample for query `q`.
pub fn build_sample(frame: &ObservationFrame, plan: &Floorplan, q: ClassId) -> Result<TrainingSample, DatasetError> {
    build_sample_with(frame, &plan.labels, q, Supervision::Unexplored)
}

pub fn build_sample_with(
    frame: &ObservationFrame,
    gt: &LabelGrid,
    q: ClassId,
    supervision: Supervision,
) -> Result<TrainingSample, DatasetError> {
    if !q.is_query() {
        return Err(DatasetError::QueryOutOfRange(q.id()));
    }
    check_shape(gt.height(), gt.width(), &frame.explored)?;
    let explored = &frame.explored;
    let onehot = onehot_encode(gt);
    let masked_gt = match supervision {
        Supervision::Unexplored => apply_unexplored_mask(&onehot, explored)?,
        Supervision::Explored => restrict_to(&onehot, explored)?,
    };
    let loss_weight_mask = supervision.valid_mask(explored);
    let target_mask = BitMask::from_fn(gt.height(), gt.width(), |c| {
        loss_weight_mask.get(c) && gt.get(c) == q
    });
    Ok(TrainingSample {
        plan_id: 0,
        frame: frame.clone(),
        gt: gt.clone(),
        masked_gt,
        query: q,
        target_mask,
        loss_weight_mask,
        supervision,
    })
}

/// One sample per room query for every frame.
pub fn samples_for_frames(
    plan_id: u32,
    frames: &[ObservationFrame],
    plan: &Floorplan,
    supervision: Supervision,
) -> Result<Vec<TrainingSample>, DatasetError> {
    let mut out = Vec::with_capacity(frames.len() * crate::grid::NUM_QUERY_CLASSES);
    for frame in frames {
        for q in ClassId::query_classes() {
            out.push(build_sample_with(frame, &plan.labels, q, supervision)?.with_plan_id(plan_id));
        }
    }
    Ok(out)
}
