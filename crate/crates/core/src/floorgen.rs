//! Procedural residential floorplans.
//!
//! Plans are built by recursive binary space partition of the interior with
//! one-cell walls. Every cut receives one doorway, so the room graph is a
//! tree and the whole plan is connected. The entrance sits on the outer wall
//! next to the living room.
//!
//! Randomness comes from `ChaCha8Rng` seeded with the 64-bit plan seed
//! (retry `k` uses `seed + k * 0x9E37_79B9_7F4A_7C15`). Both the generator
//! and the `rand` version are pinned so per-seed outputs stay frozen.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::{Cell, ClassId, LabelGrid};
use crate::search::{components, DistanceField};

/// Number of room classes a leaf can receive (bedroom..=storage).
pub const ROOM_KINDS: usize = 6;

pub const MAX_RETRIES: u64 = 32;

const RETRY_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FloorgenError {
    #[error("invalid floorplan spec: field `{field}`: {reason}")]
    InvalidSpec { field: &'static str, reason: String },
    #[error("floorplan generation failed for seed {seed} after {MAX_RETRIES} attempts")]
    GenerationFailed { seed: u64 },
    #[error("cannot rebuild floorplan: {0}")]
    Reconstruct(String),
}

/// Inclusive bounds on the number of rooms of each class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassQuota {
    pub bounds: [(u32, u32); ROOM_KINDS],
}

impl Default for ClassQuota {
    fn default() -> Self {
        ClassQuota {
            // bedroom, living_room, kitchen, bathroom, balcony, storage
            bounds: [(1, 3), (1, 1), (0, 1), (0, 2), (0, 1), (0, 1)],
        }
    }
}

impl ClassQuota {
    /// Quota allowing only the listed classes with exact counts.
    pub fn exact(counts: &[(ClassId, u32)]) -> Self {
        let mut bounds = [(0, 0); ROOM_KINDS];
        for (class, n) in counts {
            bounds[class.index()] = (*n, *n);
        }
        ClassQuota { bounds }
    }

    fn min_total(&self) -> u32 {
        self.bounds.iter().map(|b| b.0).sum()
    }

    fn max_total(&self) -> u32 {
        self.bounds.iter().map(|b| b.1).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FloorplanSpec {
    pub height: usize,
    pub width: usize,
    pub seed: u64,
    pub room_count_range: (u32, u32),
    pub min_room_side: usize,
    pub class_quota: ClassQuota,
}

impl Default for FloorplanSpec {
    fn default() -> Self {
        FloorplanSpec {
            height: 24,
            width: 24,
            seed: 0,
            room_count_range: (4, 8),
            min_room_side: 4,
            class_quota: ClassQuota::default(),
        }
    }
}

impl FloorplanSpec {
    pub fn with_seed(seed: u64) -> Self {
        FloorplanSpec {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), FloorgenError> {
        let invalid = |field, reason: &str| {
            Err(FloorgenError::InvalidSpec {
                field,
                reason: reason.to_string(),
            })
        };
        if self.height < 8 {
            return invalid("height", "must be at least 8");
        }
        if self.width < 8 {
            return invalid("width", "must be at least 8");
        }
        if self.min_room_side < 2 {
            return invalid("min_room_side", "must be at least 2");
        }
        if self.min_room_side + 4 > self.height.min(self.width) {
            return invalid("min_room_side", "no room of this side fits inside the outer walls");
        }
        let (lo, hi) = self.room_count_range;
        if lo == 0 || lo > hi {
            return invalid("room_count_range", "must satisfy 1 <= min <= max");
        }
        if self.class_quota.bounds.iter().any(|(a, b)| a > b) {
            return invalid("class_quota", "every class needs min <= max");
        }
        let (qlo, qhi) = (self.class_quota.min_total(), self.class_quota.max_total());
        if qlo > hi || qhi < lo {
            return invalid("class_quota", "quota totals do not intersect room_count_range");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Room {
    pub class: ClassId,
    pub cells: Vec<Cell>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Door {
    pub cell: Cell,
    /// Indices into [`Floorplan::rooms`], smaller first.
    pub rooms: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Floorplan {
    pub labels: LabelGrid,
    pub rooms: Vec<Room>,
    pub doors: Vec<Door>,
    pub entrance: Cell,
}

impl Floorplan {
    pub fn height(&self) -> usize {
        self.labels.height()
    }

    pub fn width(&self) -> usize {
        self.labels.width()
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        self.labels.get(cell).is_free()
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.labels.cells().filter(|c| self.is_free(*c))
    }

    pub fn room_of(&self, cell: Cell) -> Option<usize> {
        self.rooms.iter().position(|r| r.cells.binary_search(&cell).is_ok())
    }

    pub fn has_class(&self, class: ClassId) -> bool {
        self.labels.labels().contains(&class)
    }

    /// Rebuilds rooms, doors and the entrance from the label grid alone.
    /// Rooms are the 4-connected components of room-class cells.
    pub fn from_labels(labels: LabelGrid) -> Result<Floorplan, FloorgenError> {
        let (h, w) = (labels.height(), labels.width());
        let mut rooms = Vec::new();
        for class in ClassId::all().filter(|c| c.is_room()) {
            for cells in components(h, w, |c| labels.get(c) == class) {
                rooms.push(Room { class, cells });
            }
        }
        rooms.sort_by_key(|r| r.cells[0]);
        let room_at = room_index(&labels, &rooms);
        let mut doors = Vec::new();
        for cell in labels.cells().filter(|c| labels.get(*c) == ClassId::DOORWAY) {
            let adjacent = adjacent_rooms(&labels, &room_at, cell);
            if adjacent.len() != 2 {
                return Err(FloorgenError::Reconstruct(format!(
                    "doorway {cell} touches {} rooms",
                    adjacent.len()
                )));
            }
            doors.push(Door {
                cell,
                rooms: (adjacent[0], adjacent[1]),
            });
        }
        let entrances: Vec<Cell> = labels
            .cells()
            .filter(|c| labels.get(*c) == ClassId::ENTRANCE_DOOR)
            .collect();
        let [entrance] = entrances[..] else {
            return Err(FloorgenError::Reconstruct(format!(
                "expected exactly one entrance door, found {}",
                entrances.len()
            )));
        };
        Ok(Floorplan {
            labels,
            rooms,
            doors,
            entrance,
        })
    }
}

fn room_index(labels: &LabelGrid, rooms: &[Room]) -> Vec<Option<usize>> {
    let mut at = vec![None; labels.len()];
    for (i, room) in rooms.iter().enumerate() {
        for c in &room.cells {
            at[c.row * labels.width() + c.col] = Some(i);
        }
    }
    at
}

fn adjacent_rooms(labels: &LabelGrid, room_at: &[Option<usize>], cell: Cell) -> Vec<usize> {
    let set: BTreeSet<usize> = cell
        .neighbors4(labels.height(), labels.width())
        .filter_map(|n| room_at[n.row * labels.width() + n.col])
        .collect();
    set.into_iter().collect()
}

#[derive(Clone, Copy, Debug)]
struct Rect {
    row: usize,
    col: usize,
    height: usize,
    width: usize,
}

impl Rect {
    fn area(&self) -> usize {
        self.height * self.width
    }

    fn splittable(&self, min_side: usize) -> bool {
        self.height > 2 * min_side || self.width > 2 * min_side
    }
}

#[derive(Clone, Copy, Debug)]
enum Cut {
    /// Wall along row `at`, spanning columns `from..from + len`.
    Horizontal { at: usize, from: usize, len: usize },
    Vertical { at: usize, from: usize, len: usize },
}

impl Cut {
    fn cells(self) -> Vec<Cell> {
        match self {
            Cut::Horizontal { at, from, len } => (from..from + len).map(|c| Cell::new(at, c)).collect(),
            Cut::Vertical { at, from, len } => (from..from + len).map(|r| Cell::new(r, at)).collect(),
        }
    }

    /// The two cells on either side of a wall cell.
    fn sides(self, cell: Cell) -> (Cell, Cell) {
        match self {
            Cut::Horizontal { .. } => (Cell::new(cell.row - 1, cell.col), Cell::new(cell.row + 1, cell.col)),
            Cut::Vertical { .. } => (Cell::new(cell.row, cell.col - 1), Cell::new(cell.row, cell.col + 1)),
        }
    }
}

/// Generates a floorplan satisfying every structural invariant and the
/// spec's quotas. Pure function of `spec`.
pub fn generate_floorplan(spec: &FloorplanSpec) -> Result<Floorplan, FloorgenError> {
    spec.validate()?;
    for attempt in 0..MAX_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(attempt.wrapping_mul(RETRY_STRIDE)));
        if let Some(plan) = attempt_generate(spec, &mut rng) {
            if validate_against(&plan, spec).is_empty() {
                return Ok(plan);
            }
        }
    }
    Err(FloorgenError::GenerationFailed { seed: spec.seed })
}

fn attempt_generate(spec: &FloorplanSpec, rng: &mut ChaCha8Rng) -> Option<Floorplan> {
    let (h, w) = (spec.height, spec.width);
    let min_side = spec.min_room_side;
    let quota = &spec.class_quota;

    let lo = spec.room_count_range.0.max(quota.min_total());
    let hi = spec.room_count_range.1.min(quota.max_total());
    let target = rng.gen_range(lo..=hi) as usize;

    let mut leaves = vec![Rect {
        row: 2,
        col: 2,
        height: h - 4,
        width: w - 4,
    }];
    let mut cuts = Vec::new();
    while leaves.len() < target {
        let Some(idx) = leaves
            .iter()
            .enumerate()
            .filter(|(_, r)| r.splittable(min_side))
            .max_by_key(|(i, r)| (r.area(), std::cmp::Reverse(*i)))
            .map(|(i, _)| i)
        else {
            break;
        };
        let rect = leaves.swap_remove(idx);
        let can_h = rect.height > 2 * min_side;
        let can_v = rect.width > 2 * min_side;
        let horizontal = match (can_h, can_v) {
            (true, false) => true,
            (false, true) => false,
            _ if rect.height != rect.width => rect.height > rect.width,
            _ => rng.gen_bool(0.5),
        };
        if horizontal {
            let k = rng.gen_range(min_side..=rect.height - min_side - 1);
            cuts.push(Cut::Horizontal {
                at: rect.row + k,
                from: rect.col,
                len: rect.width,
            });
            leaves.push(Rect { height: k, ..rect });
            leaves.push(Rect {
                row: rect.row + k + 1,
                height: rect.height - k - 1,
                ..rect
            });
        } else {
            let k = rng.gen_range(min_side..=rect.width - min_side - 1);
            cuts.push(Cut::Vertical {
                at: rect.col + k,
                from: rect.row,
                len: rect.height,
            });
            leaves.push(Rect { width: k, ..rect });
            leaves.push(Rect {
                col: rect.col + k + 1,
                width: rect.width - k - 1,
                ..rect
            });
        }
    }
    let n = leaves.len();
    if n < lo as usize {
        return None;
    }

    let classes = assign_classes(n, quota, rng)?;
    // Living room goes to the largest leaf; the rest are shuffled.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|i| (std::cmp::Reverse(leaves[*i].area()), *i));
    let mut others: Vec<ClassId> = classes.into_iter().filter(|c| *c != ClassId::LIVING_ROOM).collect();
    others.shuffle(rng);
    let mut leaf_class = vec![ClassId::LIVING_ROOM; n];
    for (slot, class) in order.iter().skip(1).zip(others) {
        leaf_class[*slot] = class;
    }

    let mut labels = LabelGrid::filled(h, w, ClassId::WALL);
    for cell in labels.cells().collect::<Vec<_>>() {
        if labels.is_border(cell) {
            labels.set(cell, ClassId::OUTSIDE);
        }
    }
    for (rect, class) in leaves.iter().zip(&leaf_class) {
        for r in rect.row..rect.row + rect.height {
            for c in rect.col..rect.col + rect.width {
                labels.set(Cell::new(r, c), *class);
            }
        }
    }

    // Doorways: one per cut, at a position whose two sides are both room cells.
    for cut in &cuts {
        let candidates: Vec<Cell> = cut
            .cells()
            .into_iter()
            .filter(|cell| {
                let (a, b) = cut.sides(*cell);
                labels.get(a).is_room() && labels.get(b).is_room()
            })
            .collect();
        let cell = *candidates.choose(rng)?;
        labels.set(cell, ClassId::DOORWAY);
    }

    // Entrance: an outer-wall cell (not a corner) whose inward neighbour is living room.
    let living = leaf_class.iter().position(|c| *c == ClassId::LIVING_ROOM)?;
    let entrance_candidates: Vec<Cell> = outer_wall_cells(h, w)
        .into_iter()
        .filter(|cell| {
            cell.neighbors4(h, w).any(|n| {
                let r = leaves[living];
                n.row >= r.row && n.row < r.row + r.height && n.col >= r.col && n.col < r.col + r.width
            })
        })
        .collect();
    let entrance = *entrance_candidates.choose(rng)?;
    labels.set(entrance, ClassId::ENTRANCE_DOOR);

    Floorplan::from_labels(labels).ok()
}

fn outer_wall_cells(h: usize, w: usize) -> Vec<Cell> {
    let mut cells = Vec::new();
    for c in 2..w - 2 {
        cells.push(Cell::new(1, c));
        cells.push(Cell::new(h - 2, c));
    }
    for r in 2..h - 2 {
        cells.push(Cell::new(r, 1));
        cells.push(Cell::new(r, w - 2));
    }
    cells.sort();
    cells
}

/// Samples a class multiset of size `n` within the quota.
fn assign_classes(n: usize, quota: &ClassQuota, rng: &mut ChaCha8Rng) -> Option<Vec<ClassId>> {
    if (n as u32) < quota.min_total() || (n as u32) > quota.max_total() {
        return None;
    }
    let mut counts: Vec<u32> = quota.bounds.iter().map(|b| b.0).collect();
    let mut classes: Vec<ClassId> = Vec::with_capacity(n);
    for (i, &c) in counts.iter().enumerate() {
        classes.extend(std::iter::repeat_n(ClassId::new(i as u8).ok()?, c as usize));
    }
    while classes.len() < n {
        let open: Vec<usize> = (0..ROOM_KINDS).filter(|i| counts[*i] < quota.bounds[*i].1).collect();
        let i = *open.choose(rng)?;
        counts[i] += 1;
        classes.push(ClassId::new(i as u8).ok()?);
    }
    Some(classes)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    BorderNotOutside(Cell),
    RoomClassMismatch { room: usize },
    RoomsOverlap(Cell),
    RoomDisconnected { room: usize },
    UncoveredCell(Cell),
    RoomUnreachable { room: usize },
    EntranceNotEntranceDoor(Cell),
    DoorNotDoorway(Cell),
    DoorwayAdjacency { cell: Cell, rooms: usize },
    QuotaViolated { class: ClassId, count: u32 },
    RoomCountOutOfRange(usize),
    RoomTooSmall { room: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BorderNotOutside(c) => write!(f, "border cell {c} is not outside"),
            Violation::RoomClassMismatch { room } => write!(f, "room {room} has cells of another class"),
            Violation::RoomsOverlap(c) => write!(f, "cell {c} belongs to more than one room"),
            Violation::RoomDisconnected { room } => write!(f, "room {room} is not 4-connected"),
            Violation::UncoveredCell(c) => write!(f, "room-class cell {c} belongs to no room"),
            Violation::RoomUnreachable { room } => write!(f, "room {room} unreachable from entrance"),
            Violation::EntranceNotEntranceDoor(c) => write!(f, "entrance {c} is not an entrance door"),
            Violation::DoorNotDoorway(c) => write!(f, "door {c} is not labelled doorway"),
            Violation::DoorwayAdjacency { cell, rooms } => {
                write!(f, "doorway {cell} touches {rooms} rooms instead of 2")
            }
            Violation::QuotaViolated { class, count } => write!(f, "{count} {class} rooms violate the quota"),
            Violation::RoomCountOutOfRange(n) => write!(f, "{n} rooms outside the requested range"),
            Violation::RoomTooSmall { room } => write!(f, "room {room} is smaller than min_room_side"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, pred: impl Fn(&Violation) -> bool) -> bool {
        self.violations.iter().any(pred)
    }
}

/// Checks the structural invariants: outside border, disjoint connected
/// rooms covering every room-class cell, doorways joining exactly two rooms,
/// and reachability of every room from the entrance.
pub fn validate_floorplan(plan: &Floorplan) -> ValidationReport {
    let labels = &plan.labels;
    let (h, w) = (labels.height(), labels.width());
    let mut v = Vec::new();

    for cell in labels.cells() {
        if labels.is_border(cell) && labels.get(cell) != ClassId::OUTSIDE {
            v.push(Violation::BorderNotOutside(cell));
        }
    }

    let mut owner: Vec<Option<usize>> = vec![None; labels.len()];
    for (i, room) in plan.rooms.iter().enumerate() {
        if room.cells.iter().any(|c| !labels.contains(*c) || labels.get(*c) != room.class) {
            v.push(Violation::RoomClassMismatch { room: i });
            continue;
        }
        for c in &room.cells {
            let slot = &mut owner[c.row * w + c.col];
            if slot.is_some() {
                v.push(Violation::RoomsOverlap(*c));
            }
            *slot = Some(i);
        }
        let set: BTreeSet<Cell> = room.cells.iter().copied().collect();
        if components(h, w, |c| set.contains(&c)).len() != 1 {
            v.push(Violation::RoomDisconnected { room: i });
        }
    }
    for cell in labels.cells() {
        if labels.get(cell).is_room() && owner[cell.row * w + cell.col].is_none() {
            v.push(Violation::UncoveredCell(cell));
        }
    }

    for door in &plan.doors {
        if labels.get(door.cell) != ClassId::DOORWAY {
            v.push(Violation::DoorNotDoorway(door.cell));
        }
    }
    let room_at = room_index(labels, &plan.rooms);
    for cell in labels.cells().filter(|c| labels.get(*c) == ClassId::DOORWAY) {
        let n = adjacent_rooms(labels, &room_at, cell).len();
        if n != 2 {
            v.push(Violation::DoorwayAdjacency { cell, rooms: n });
        }
    }

    if !labels.contains(plan.entrance) || labels.get(plan.entrance) != ClassId::ENTRANCE_DOOR {
        v.push(Violation::EntranceNotEntranceDoor(plan.entrance));
    } else {
        let reach = DistanceField::from(h, w, plan.entrance, |c| labels.get(c).is_free());
        for (i, room) in plan.rooms.iter().enumerate() {
            if room.cells.iter().all(|c| reach.get(*c).is_none()) {
                v.push(Violation::RoomUnreachable { room: i });
            }
        }
    }

    ValidationReport { violations: v }
}

/// Structural validation plus the spec's quotas, room count, room size and
/// dimensions.
pub fn validate_against(plan: &Floorplan, spec: &FloorplanSpec) -> ValidationReport {
    let mut report = validate_floorplan(plan);
    let n = plan.rooms.len();
    if (n as u32) < spec.room_count_range.0 || (n as u32) > spec.room_count_range.1 {
        report.violations.push(Violation::RoomCountOutOfRange(n));
    }
    for class in ClassId::all().filter(|c| c.is_room()) {
        let count = plan.rooms.iter().filter(|r| r.class == class).count() as u32;
        let (lo, hi) = spec.class_quota.bounds[class.index()];
        if count < lo || count > hi {
            report.violations.push(Violation::QuotaViolated { class, count });
        }
    }
    for (i, room) in plan.rooms.iter().enumerate() {
        let rows = room.cells.iter().map(|c| c.row);
        let cols = room.cells.iter().map(|c| c.col);
        let span_r = rows.clone().max().unwrap_or(0) - rows.min().unwrap_or(0) + 1;
        let span_c = cols.clone().max().unwrap_or(0) - cols.min().unwrap_or(0) + 1;
        if span_r.min(span_c) < spec.min_room_side {
            report.violations.push(Violation::RoomTooSmall { room: i });
        }
    }
    report
}

/// The 8x8 two-room fixture as a full floorplan.
pub fn tiny_two_room_plan() -> Floorplan {
    Floorplan::from_labels(crate::grid::tiny_two_room()).expect("fixture is a valid plan")
}

/// Writes the textual `key=value` sidecar describing a plan.
pub fn sidecar(plan: &Floorplan, seed: u64) -> String {
    let mut out = String::new();
    out.push_str(&format!("seed={seed}\n"));
    out.push_str(&format!("height={}\nwidth={}\n", plan.height(), plan.width()));
    out.push_str(&format!("rooms={}\n", plan.rooms.len()));
    for (i, room) in plan.rooms.iter().enumerate() {
        let first = room.cells[0];
        out.push_str(&format!(
            "room.{i}={} cells={} anchor={},{}\n",
            room.class,
            room.cells.len(),
            first.row,
            first.col
        ));
    }
    out.push_str(&format!("doors={}\n", plan.doors.len()));
    for (i, door) in plan.doors.iter().enumerate() {
        out.push_str(&format!(
            "door.{i}={},{} joins={},{}\n",
            door.cell.row, door.cell.col, door.rooms.0, door.rooms.1
        ));
    }
    out.push_str(&format!("entrance={},{}\n", plan.entrance.row, plan.entrance.col));
    out
}

/// Reads the `seed` entry from a sidecar.
pub fn sidecar_seed(text: &str) -> Option<u64> {
    text.lines()
        .find_map(|l| l.strip_prefix("seed="))
        .and_then(|v| v.trim().parse().ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_is_valid() {
        let plan = tiny_two_room_plan();
        assert!(validate_floorplan(&plan).is_empty(), "{:?}", validate_floorplan(&plan));
        assert_eq!(plan.rooms.len(), 2);
        assert_eq!(plan.rooms[0].class, ClassId::BEDROOM);
        assert_eq!(plan.rooms[0].cells.len(), 8);
        assert_eq!(plan.rooms[1].class, ClassId::LIVING_ROOM);
        assert_eq!(plan.doors, vec![Door { cell: Cell::new(3, 4), rooms: (0, 1) }]);
        assert_eq!(plan.entrance, Cell::new(2, 6));
    }

    #[test]
    fn closing_the_doorway_strands_the_bedroom() {
        let mut plan = tiny_two_room_plan();
        plan.labels.set(Cell::new(3, 4), ClassId::WALL);
        let report = validate_floorplan(&plan);
        assert!(report.contains(|v| *v == Violation::RoomUnreachable { room: 0 }));
    }

    #[test]
    fn border_violation() {
        let mut plan = tiny_two_room_plan();
        plan.labels.set(Cell::new(0, 3), ClassId::WALL);
        assert!(validate_floorplan(&plan).contains(|v| *v == Violation::BorderNotOutside(Cell::new(0, 3))));
    }

    #[test]
    fn determinism() {
        let spec = FloorplanSpec::with_seed(42);
        let a = generate_floorplan(&spec).unwrap();
        let b = generate_floorplan(&spec).unwrap();
        assert_eq!(crate::raster::encode(&a.labels), crate::raster::encode(&b.labels));
    }

    #[test]
    fn two_room_quota() {
        let spec = FloorplanSpec {
            height: 16,
            width: 16,
            seed: 7,
            room_count_range: (2, 2),
            min_room_side: 3,
            class_quota: ClassQuota::exact(&[(ClassId::LIVING_ROOM, 1), (ClassId::BEDROOM, 1)]),
        };
        let plan = generate_floorplan(&spec).unwrap();
        assert!(validate_against(&plan, &spec).is_empty());
        let comps = |class| components(16, 16, |c| plan.labels.get(c) == class).len();
        assert_eq!(comps(ClassId::BEDROOM), 1);
        assert_eq!(comps(ClassId::LIVING_ROOM), 1);
        assert_eq!(plan.doors.len(), 1);
    }

    #[test]
    fn invalid_specs_name_the_field() {
        let spec = FloorplanSpec {
            min_room_side: 1,
            ..FloorplanSpec::default()
        };
        assert!(matches!(
            spec.validate(),
            Err(FloorgenError::InvalidSpec { field: "min_room_side", .. })
        ));
        let spec = FloorplanSpec {
            height: 7,
            ..FloorplanSpec::default()
        };
        assert!(matches!(spec.validate(), Err(FloorgenError::InvalidSpec { field: "height", .. })));
        let spec = FloorplanSpec {
            room_count_range: (12, 14),
            ..FloorplanSpec::default()
        };
        assert!(matches!(
            spec.validate(),
            Err(FloorgenError::InvalidSpec { field: "class_quota", .. })
        ));
    }

    #[test]
    fn impossible_layout_reports_seed() {
        // Eight rooms of side 4 cannot fit in a 10x10 plan.
        let spec = FloorplanSpec {
            height: 10,
            width: 10,
            seed: 99,
            room_count_range: (8, 8),
            ..FloorplanSpec::default()
        };
        assert_eq!(generate_floorplan(&spec), Err(FloorgenError::GenerationFailed { seed: 99 }));
    }

    #[test]
    fn sidecar_records_seed() {
        let text = sidecar(&tiny_two_room_plan(), 5);
        assert_eq!(sidecar_seed(&text), Some(5));
        assert!(text.contains("entrance=2,6"));
        assert!(text.contains("door.0=3,4 joins=0,1"));
    }
}
