//! Frontier-based exploration with an occluding circular range sensor.
//!
//! Sensing casts supercover lines from the pose to every cell within the
//! radius. A ray passes through free cells and stops at the first wall or
//! outside cell, which is itself observed. The agent re-selects the nearest
//! frontier every step, moves one cell along a shortest path through explored
//! free space, and senses again.

use rand::SeedableRng;
use thiserror::Error;

use crate::floorgen::Floorplan;
use crate::grid::{BitMask, Cell, ClassId, Pose, SemanticGrid};
use crate::search::DistanceField;

pub const DEFAULT_RADIUS: usize = 8;
pub const DEFAULT_MAX_STEPS: usize = 200;
pub const DEFAULT_KEEP_FIRST: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExploreError {
    #[error("pose {0} is not a free cell")]
    PoseNotFree(Pose),
    #[error("pose {0} is isolated: no explored free neighbour and no reachable frontier")]
    PoseIsolated(Pose),
    #[error("max_steps must be at least 1")]
    ZeroSteps,
}

/// Cells crossed by the segment between two cell centres, endpoints
/// included. Where the segment passes exactly through a cell corner both
/// side cells are included.
pub fn supercover_line(from: Cell, to: Cell) -> Vec<Cell> {
    let (x0, y0) = (from.col as i64, from.row as i64);
    let dx = to.col as i64 - x0;
    let dy = to.row as i64 - y0;
    let (nx, ny) = (dx.abs(), dy.abs());
    let (sx, sy) = (dx.signum(), dy.signum());
    let (mut x, mut y) = (x0, y0);
    let (mut ix, mut iy) = (0, 0);
    let cell = |x: i64, y: i64| Cell::new(y as usize, x as usize);
    let mut out = Vec::with_capacity((nx + ny + 1) as usize);
    out.push(cell(x, y));
    while ix < nx || iy < ny {
        let decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx;
        if decision == 0 {
            out.push(cell(x + sx, y));
            out.push(cell(x, y + sy));
            x += sx;
            y += sy;
            ix += 1;
            iy += 1;
        } else if decision < 0 {
            x += sx;
            ix += 1;
        } else {
            y += sy;
            iy += 1;
        }
        out.push(cell(x, y));
    }
    out
}

/// True when an obstacle lies strictly between the two cell centres. A ray
/// through a cell corner squeezes past unless both side cells are obstacles.
pub fn sight_blocked(plan: &Floorplan, from: Cell, to: Cell) -> bool {
    let labels = &plan.labels;
    let (x0, y0) = (from.col as i64, from.row as i64);
    let dx = to.col as i64 - x0;
    let dy = to.row as i64 - y0;
    let (nx, ny) = (dx.abs(), dy.abs());
    let (sx, sy) = (dx.signum(), dy.signum());
    let (mut x, mut y) = (x0, y0);
    let (mut ix, mut iy) = (0, 0);
    let obstacle = |x: i64, y: i64| labels.get(Cell::new(y as usize, x as usize)).is_obstacle();
    while ix < nx || iy < ny {
        let decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx;
        if decision == 0 {
            if obstacle(x + sx, y) && obstacle(x, y + sy) {
                return true;
            }
            x += sx;
            y += sy;
            ix += 1;
            iy += 1;
        } else if decision < 0 {
            x += sx;
            ix += 1;
        } else {
            y += sy;
            iy += 1;
        }
        if (ix < nx || iy < ny) && obstacle(x, y) {
            return true;
        }
    }
    false
}

/// Cells within Euclidean distance `radius` of `pose` with an unobstructed
/// line of sight. Obstacle cells are visible but end the ray.
pub fn visible_cells(plan: &Floorplan, pose: Pose, radius: usize) -> Vec<Cell> {
    let (h, w) = (plan.height(), plan.width());
    let r2 = (radius * radius) as i64;
    let r0 = pose.row.saturating_sub(radius);
    let r1 = (pose.row + radius).min(h - 1);
    let c0 = pose.col.saturating_sub(radius);
    let c1 = (pose.col + radius).min(w - 1);
    let mut out = Vec::new();
    for row in r0..=r1 {
        for col in c0..=c1 {
            let dr = row as i64 - pose.row as i64;
            let dc = col as i64 - pose.col as i64;
            if dr * dr + dc * dc > r2 {
                continue;
            }
            let target = Cell::new(row, col);
            if !sight_blocked(plan, pose, target) {
                out.push(target);
            }
        }
    }
    out
}

/// Explored free cells 4-adjacent to at least one unexplored cell, sorted by
/// (row, col).
pub fn detect_frontiers(explored: &BitMask, is_free: impl Fn(Cell) -> bool) -> Vec<Cell> {
    let (h, w) = (explored.height(), explored.width());
    explored
        .iter_set()
        .filter(|c| is_free(*c) && c.neighbors4(h, w).any(|n| !explored.get(n)))
        .collect()
}

/// One frame of the observation sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationFrame {
    pub pose: Pose,
    /// Poses visited before the current step.
    pub trajectory: BitMask,
    pub explored: BitMask,
    pub obstacles_seen: BitMask,
    /// Ground-truth channels on explored cells, zero elsewhere.
    pub local_semantics: SemanticGrid,
    pub step: usize,
}

impl ObservationFrame {
    pub fn height(&self) -> usize {
        self.explored.height()
    }

    pub fn width(&self) -> usize {
        self.explored.width()
    }

    pub fn position_mask(&self) -> BitMask {
        BitMask::from_cells(self.height(), self.width(), [self.pose])
    }
}

#[derive(Clone, Debug)]
pub struct ExplorationState<'a> {
    pub plan: &'a Floorplan,
    pub pose: Pose,
    pub trajectory: BitMask,
    pub explored: BitMask,
    pub obstacles_seen: BitMask,
    pub local_semantics: SemanticGrid,
    pub step: usize,
    pub complete: bool,
}

/// Where the agent decided to go on one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Move {
    pub target: Cell,
    pub next: Cell,
    pub distance: u32,
}

impl<'a> ExplorationState<'a> {
    /// Initial state with sensing already applied at `start`.
    pub fn new(plan: &'a Floorplan, start: Pose, radius: usize) -> Result<Self, ExploreError> {
        if !plan.labels.contains(start) || !plan.is_free(start) {
            return Err(ExploreError::PoseNotFree(start));
        }
        let (h, w) = (plan.height(), plan.width());
        let mut state = ExplorationState {
            plan,
            pose: start,
            trajectory: BitMask::new(h, w),
            explored: BitMask::new(h, w),
            obstacles_seen: BitMask::new(h, w),
            local_semantics: SemanticGrid::zeros(h, w),
            step: 0,
            complete: false,
        };
        state.sense(radius);
        Ok(state)
    }

    pub fn sense(&mut self, radius: usize) {
        for cell in visible_cells(self.plan, self.pose, radius) {
            self.integrate(cell);
        }
    }

    fn integrate(&mut self, cell: Cell) {
        if self.explored.get(cell) {
            return;
        }
        let class = self.plan.labels.get(cell);
        self.explored.set(cell, true);
        if class.is_obstacle() {
            self.obstacles_seen.set(cell, true);
        }
        self.local_semantics.set(cell, class, 1.0);
    }

    pub fn frame(&self) -> ObservationFrame {
        ObservationFrame {
            pose: self.pose,
            trajectory: self.trajectory.clone(),
            explored: self.explored.clone(),
            obstacles_seen: self.obstacles_seen.clone(),
            local_semantics: self.local_semantics.clone(),
            step: self.step,
        }
    }

    pub fn frontiers(&self) -> Vec<Cell> {
        detect_frontiers(&self.explored, |c| self.plan.is_free(c))
    }

    /// BFS distances from the pose through explored free cells.
    pub fn explored_distances(&self) -> DistanceField {
        DistanceField::from(self.plan.height(), self.plan.width(), self.pose, |c| {
            self.explored.get(c) && self.plan.is_free(c)
        })
    }

    /// Moves one cell toward `next` (which must be adjacent or the pose),
    /// records the trajectory, senses, and advances the step counter.
    pub fn advance(&mut self, next: Cell, radius: usize) {
        self.trajectory.set(self.pose, true);
        self.pose = next;
        self.sense(radius);
        self.step += 1;
    }

    pub fn has_explored_free_neighbor(&self) -> bool {
        self.pose
            .neighbors4(self.plan.height(), self.plan.width())
            .any(|n| self.explored.get(n) && self.plan.is_free(n))
    }

    /// Cells of `class` already observed by the agent.
    pub fn observed_class(&self, class: ClassId) -> impl Iterator<Item = Cell> + '_ {
        self.explored
            .iter_set()
            .filter(move |c| self.plan.labels.get(*c) == class)
    }
}

/// Frontiers paired with their BFS distance from the pose; unreachable
/// frontiers are dropped.
pub fn reachable_frontiers(state: &ExplorationState<'_>, field: &DistanceField) -> Vec<(Cell, u32)> {
    state
        .frontiers()
        .into_iter()
        .filter_map(|f| field.get(f).map(|d| (f, d)))
        .collect()
}

/// Nearest frontier by BFS distance, ties to the smallest (row, col).
pub fn nearest_frontier(state: &ExplorationState<'_>) -> Result<Option<Move>, ExploreError> {
    let field = state.explored_distances();
    let candidates = reachable_frontiers(state, &field);
    if candidates.is_empty() {
        if !state.frontiers().is_empty() && !state.has_explored_free_neighbor() {
            return Err(ExploreError::PoseIsolated(state.pose));
        }
        return Ok(None);
    }
    let (target, distance) = candidates
        .into_iter()
        .min_by_key(|(c, d)| (*d, *c))
        .expect("non-empty");
    let next = field.first_step(target).expect("target is reachable");
    Ok(Some(Move { target, next, distance }))
}

/// One exploration step. A state with no reachable frontier comes back
/// flagged complete with its masks unchanged.
pub fn step_explore<'a>(state: &ExplorationState<'a>, radius: usize) -> Result<ExplorationState<'a>, ExploreError> {
    let mut next = state.clone();
    match nearest_frontier(state)? {
        Some(mv) => next.advance(mv.next, radius),
        None => next.complete = true,
    }
    Ok(next)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExploreConfig {
    pub radius: usize,
    pub max_steps: usize,
    pub keep_first: usize,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            radius: DEFAULT_RADIUS,
            max_steps: DEFAULT_MAX_STEPS,
            keep_first: DEFAULT_KEEP_FIRST,
        }
    }
}

/// Full exploration trace.
#[derive(Clone, Debug)]
pub struct ExplorationRun {
    /// Frame 0 is the initial sensing; frame k follows step k.
    pub frames: Vec<ObservationFrame>,
    pub complete: bool,
    pub steps: usize,
}

/// Runs exploration until completion or `max_steps`, keeping every frame.
pub fn explore_full(plan: &Floorplan, start: Pose, radius: usize, max_steps: usize) -> Result<ExplorationRun, ExploreError> {
    if max_steps == 0 {
        return Err(ExploreError::ZeroSteps);
    }
    let mut state = ExplorationState::new(plan, start, radius)?;
    let mut frames = vec![state.frame()];
    while state.step < max_steps {
        state = step_explore(&state, radius)?;
        if state.complete {
            break;
        }
        frames.push(state.frame());
    }
    if !state.complete {
        // A run that used its whole budget may still have nothing left to do.
        state.complete = nearest_frontier(&state)?.is_none();
    }
    Ok(ExplorationRun {
        frames,
        complete: state.complete,
        steps: state.step,
    })
}

/// The first `keep_first` frames of an exploration run.
pub fn run_exploration(plan: &Floorplan, start: Pose, cfg: &ExploreConfig) -> Result<Vec<ObservationFrame>, ExploreError> {
    let mut run = explore_full(plan, start, cfg.radius, cfg.max_steps)?;
    run.frames.truncate(cfg.keep_first);
    Ok(run.frames)
}

/// Free cells reachable from `start` through ground-truth free space.
pub fn reachable_free(plan: &Floorplan, start: Pose) -> BitMask {
    DistanceField::from(plan.height(), plan.width(), start, |c| plan.is_free(c)).reached()
}

/// Uniform draw over the plan's free cells.
pub fn random_start(plan: &Floorplan, seed: u64) -> Option<Pose> {
    use rand::seq::IteratorRandom;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    plan.free_cells().choose(&mut rng)
}
