//! Semantic grid data model: the ten-class taxonomy, categorical label grids,
//! per-channel semantic grids, bit masks and the mask algebra used to build
//! supervision targets.
//!
//! All grids are row-major. A [`SemanticGrid`] stores its values cell-major
//! (`(row * width + col) * channels + channel`).

use std::fmt;

use thiserror::Error;

/// Number of semantic channels.
pub const NUM_CLASSES: usize = 10;

/// Number of room classes that may be queried.
pub const NUM_QUERY_CLASSES: usize = 7;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("dimension mismatch: expected {expected_h}x{expected_w}, got {got_h}x{got_w}")]
    DimensionMismatch {
        expected_h: usize,
        expected_w: usize,
        got_h: usize,
        got_w: usize,
    },
    #[error("label {0} out of range (must be < {NUM_CLASSES})")]
    LabelOutOfRange(u8),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("class {0} is not a queryable room class")]
    NotAQueryClass(u8),
}

/// One of the ten semantic classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassId(u8);

impl ClassId {
    pub const BEDROOM: ClassId = ClassId(0);
    pub const LIVING_ROOM: ClassId = ClassId(1);
    pub const KITCHEN: ClassId = ClassId(2);
    pub const BATHROOM: ClassId = ClassId(3);
    pub const BALCONY: ClassId = ClassId(4);
    pub const STORAGE: ClassId = ClassId(5);
    pub const DOORWAY: ClassId = ClassId(6);
    pub const WALL: ClassId = ClassId(7);
    pub const ENTRANCE_DOOR: ClassId = ClassId(8);
    pub const OUTSIDE: ClassId = ClassId(9);

    pub const NAMES: [&'static str; NUM_CLASSES] = [
        "bedroom",
        "living_room",
        "kitchen",
        "bathroom",
        "balcony",
        "storage",
        "doorway",
        "wall",
        "entrance_door",
        "outside",
    ];

    pub fn new(id: u8) -> Result<Self, GridError> {
        if (id as usize) < NUM_CLASSES {
            Ok(ClassId(id))
        } else {
            Err(GridError::LabelOutOfRange(id))
        }
    }

    /// A class that can be the target of a query (ids 0..=6).
    pub fn query(id: u8) -> Result<Self, GridError> {
        let class = Self::new(id)?;
        if class.is_query() {
            Ok(class)
        } else {
            Err(GridError::NotAQueryClass(id))
        }
    }

    pub fn all() -> impl Iterator<Item = ClassId> {
        (0..NUM_CLASSES as u8).map(ClassId)
    }

    pub fn query_classes() -> impl Iterator<Item = ClassId> {
        (0..NUM_QUERY_CLASSES as u8).map(ClassId)
    }

    pub fn from_name(name: &str) -> Option<ClassId> {
        Self::NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| ClassId(i as u8))
    }

    #[inline]
    pub fn id(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn name(self) -> &'static str {
        Self::NAMES[self.index()]
    }

    /// Room classes 0..=6, doorway included.
    #[inline]
    pub fn is_query(self) -> bool {
        self.0 < NUM_QUERY_CLASSES as u8
    }

    /// Room classes that form room instances (doorway excluded).
    #[inline]
    pub fn is_room(self) -> bool {
        self.0 < ClassId::DOORWAY.0
    }

    /// Wall or outside: blocks motion and line of sight.
    #[inline]
    pub fn is_obstacle(self) -> bool {
        self == ClassId::WALL || self == ClassId::OUTSIDE
    }

    /// Traversable: rooms, doorways and the entrance door.
    #[inline]
    pub fn is_free(self) -> bool {
        !self.is_obstacle()
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A grid cell address. Ordering is row-major (row first, then column).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

/// Robot position on the grid.
pub type Pose = Cell;

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    /// 4-connected neighbours inside a `height x width` grid, in the order
    /// up, left, right, down.
    pub fn neighbors4(self, height: usize, width: usize) -> impl Iterator<Item = Cell> {
        let Cell { row, col } = self;
        let up = (row > 0).then(|| Cell::new(row - 1, col));
        let left = (col > 0).then(|| Cell::new(row, col - 1));
        let right = (col + 1 < width).then(|| Cell::new(row, col + 1));
        let down = (row + 1 < height).then(|| Cell::new(row + 1, col));
        [up, left, right, down].into_iter().flatten()
    }

    /// Cells at Chebyshev distance <= 1 (including `self`).
    pub fn neighbors8_inclusive(self, height: usize, width: usize) -> impl Iterator<Item = Cell> {
        let r0 = self.row.saturating_sub(1);
        let r1 = (self.row + 1).min(height - 1);
        let c0 = self.col.saturating_sub(1);
        let c1 = (self.col + 1).min(width - 1);
        (r0..=r1).flat_map(move |r| (c0..=c1).map(move |c| Cell::new(r, c)))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Categorical grid: exactly one class per cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabelGrid {
    height: usize,
    width: usize,
    labels: Vec<ClassId>,
}

impl LabelGrid {
    pub fn new(height: usize, width: usize, labels: Vec<ClassId>) -> Result<Self, GridError> {
        if labels.len() != height * width {
            return Err(GridError::LengthMismatch {
                expected: height * width,
                got: labels.len(),
            });
        }
        Ok(LabelGrid {
            height,
            width,
            labels,
        })
    }

    pub fn filled(height: usize, width: usize, class: ClassId) -> Self {
        LabelGrid {
            height,
            width,
            labels: vec![class; height * width],
        }
    }

    pub fn from_raw(height: usize, width: usize, raw: &[u8]) -> Result<Self, GridError> {
        let labels = raw
            .iter()
            .map(|&b| ClassId::new(b))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(height, width, labels)
    }

    /// Parses rows of single-digit class ids, e.g. `["999", "909", "999"]`.
    pub fn from_rows(rows: &[&str]) -> Result<Self, GridError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut raw = Vec::with_capacity(height * width);
        for row in rows {
            if row.len() != width {
                return Err(GridError::LengthMismatch {
                    expected: width,
                    got: row.len(),
                });
            }
            raw.extend(row.bytes().map(|b| b.wrapping_sub(b'0')));
        }
        Self::from_raw(height, width, &raw)
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn get(&self, cell: Cell) -> ClassId {
        self.labels[cell.row * self.width + cell.col]
    }

    #[inline]
    pub fn set(&mut self, cell: Cell, class: ClassId) {
        self.labels[cell.row * self.width + cell.col] = class;
    }

    pub fn labels(&self) -> &[ClassId] {
        &self.labels
    }

    pub fn to_raw(&self) -> Vec<u8> {
        self.labels.iter().map(|c| c.id()).collect()
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.row < self.height && cell.col < self.width
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let w = self.width;
        (0..self.labels.len()).map(move |i| Cell::new(i / w, i % w))
    }

    pub fn is_border(&self, cell: Cell) -> bool {
        cell.row == 0 || cell.col == 0 || cell.row + 1 == self.height || cell.col + 1 == self.width
    }

    /// Per-class cell counts.
    pub fn census(&self) -> [u64; NUM_CLASSES] {
        let mut counts = [0u64; NUM_CLASSES];
        for c in &self.labels {
            counts[c.index()] += 1;
        }
        counts
    }

    pub fn mask_of(&self, class: ClassId) -> BitMask {
        BitMask::from_fn(self.height, self.width, |cell| self.get(cell) == class)
    }

    pub fn free_mask(&self) -> BitMask {
        BitMask::from_fn(self.height, self.width, |cell| self.get(cell).is_free())
    }

    pub fn same_shape<T: Shaped>(&self, other: &T) -> Result<(), GridError> {
        check_shape(self.height, self.width, other)
    }
}

/// Anything with grid dimensions.
pub trait Shaped {
    fn dims(&self) -> (usize, usize);
}

impl Shaped for LabelGrid {
    fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }
}

impl Shaped for BitMask {
    fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }
}

impl Shaped for SemanticGrid {
    fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }
}

pub(crate) fn check_shape<T: Shaped>(h: usize, w: usize, other: &T) -> Result<(), GridError> {
    let (got_h, got_w) = other.dims();
    if (got_h, got_w) == (h, w) {
        Ok(())
    } else {
        Err(GridError::DimensionMismatch {
            expected_h: h,
            expected_w: w,
            got_h,
            got_w,
        })
    }
}

/// Per-channel semantic raster. One-hot grids hold exactly one 1.0 per cell;
/// probabilistic grids hold independent per-channel probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct SemanticGrid {
    height: usize,
    width: usize,
    values: Vec<f32>,
}

impl SemanticGrid {
    pub fn zeros(height: usize, width: usize) -> Self {
        SemanticGrid {
            height,
            width,
            values: vec![0.0; height * width * NUM_CLASSES],
        }
    }

    pub fn filled(height: usize, width: usize, value: f32) -> Self {
        SemanticGrid {
            height,
            width,
            values: vec![value; height * width * NUM_CLASSES],
        }
    }

    pub fn from_values(height: usize, width: usize, values: Vec<f32>) -> Result<Self, GridError> {
        let expected = height * width * NUM_CLASSES;
        if values.len() != expected {
            return Err(GridError::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(SemanticGrid {
            height,
            width,
            values,
        })
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, cell: Cell, class: ClassId) -> f32 {
        self.values[(cell.row * self.width + cell.col) * NUM_CLASSES + class.index()]
    }

    #[inline]
    pub fn set(&mut self, cell: Cell, class: ClassId, value: f32) {
        self.values[(cell.row * self.width + cell.col) * NUM_CLASSES + class.index()] = value;
    }

    /// Channel values of one cell.
    pub fn cell(&self, cell: Cell) -> &[f32] {
        let start = (cell.row * self.width + cell.col) * NUM_CLASSES;
        &self.values[start..start + NUM_CLASSES]
    }

    pub fn cell_mut(&mut self, cell: Cell) -> &mut [f32] {
        let start = (cell.row * self.width + cell.col) * NUM_CLASSES;
        &mut self.values[start..start + NUM_CLASSES]
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Copies one channel out as a row-major plane.
    pub fn channel(&self, class: ClassId) -> Vec<f32> {
        self.values
            .chunks_exact(NUM_CLASSES)
            .map(|c| c[class.index()])
            .collect()
    }

    /// Sum of one channel over all cells.
    pub fn channel_sum(&self, class: ClassId) -> f64 {
        self.values
            .chunks_exact(NUM_CLASSES)
            .map(|c| c[class.index()] as f64)
            .sum()
    }

    /// Per-cell argmax over channels; ties go to the lowest class id.
    pub fn argmax(&self) -> LabelGrid {
        let labels = self
            .values
            .chunks_exact(NUM_CLASSES)
            .map(|c| {
                let mut best = 0;
                for (i, v) in c.iter().enumerate().skip(1) {
                    if *v > c[best] {
                        best = i;
                    }
                }
                ClassId(best as u8)
            })
            .collect();
        LabelGrid {
            height: self.height,
            width: self.width,
            labels,
        }
    }

    /// Number of cells with at least one nonzero channel.
    pub fn nonzero_cells(&self) -> usize {
        self.values
            .chunks_exact(NUM_CLASSES)
            .filter(|c| c.iter().any(|v| *v != 0.0))
            .count()
    }

    pub fn is_all_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }
}

/// Expands a categorical grid into its one-hot form.
pub fn onehot_encode(labels: &LabelGrid) -> SemanticGrid {
    let mut grid = SemanticGrid::zeros(labels.height, labels.width);
    for (i, class) in labels.labels.iter().enumerate() {
        grid.values[i * NUM_CLASSES + class.index()] = 1.0;
    }
    grid
}

/// Zeroes every channel of explored cells; unexplored cells are untouched.
pub fn apply_unexplored_mask(gt: &SemanticGrid, explored: &BitMask) -> Result<SemanticGrid, GridError> {
    check_shape(gt.height, gt.width, explored)?;
    let mut out = gt.clone();
    for (i, chunk) in out.values.chunks_exact_mut(NUM_CLASSES).enumerate() {
        if explored.bits[i] {
            chunk.fill(0.0);
        }
    }
    Ok(out)
}

/// Keeps only cells where `keep` is set.
pub fn restrict_to(grid: &SemanticGrid, keep: &BitMask) -> Result<SemanticGrid, GridError> {
    apply_unexplored_mask(grid, &keep.not())
}

/// Boolean raster with the same dimensions as its companion grid.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BitMask {
    pub fn new(height: usize, width: usize) -> Self {
        BitMask {
            height,
            width,
            bits: vec![false; height * width],
        }
    }

    pub fn full(height: usize, width: usize) -> Self {
        BitMask {
            height,
            width,
            bits: vec![true; height * width],
        }
    }

    pub fn from_bits(height: usize, width: usize, bits: Vec<bool>) -> Result<Self, GridError> {
        if bits.len() != height * width {
            return Err(GridError::LengthMismatch {
                expected: height * width,
                got: bits.len(),
            });
        }
        Ok(BitMask {
            height,
            width,
            bits,
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(Cell) -> bool) -> Self {
        let bits = (0..height * width)
            .map(|i| f(Cell::new(i / width, i % width)))
            .collect();
        BitMask {
            height,
            width,
            bits,
        }
    }

    pub fn from_cells(height: usize, width: usize, cells: impl IntoIterator<Item = Cell>) -> Self {
        let mut mask = Self::new(height, width);
        for c in cells {
            mask.set(c, true);
        }
        mask
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, cell: Cell) -> bool {
        self.bits[cell.row * self.width + cell.col]
    }

    #[inline]
    pub fn set(&mut self, cell: Cell, value: bool) {
        self.bits[cell.row * self.width + cell.col] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn any(&self) -> bool {
        self.bits.iter().any(|b| *b)
    }

    pub fn iter_set(&self) -> impl Iterator<Item = Cell> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| Cell::new(i / w, i % w))
    }

    pub fn not(&self) -> BitMask {
        BitMask {
            height: self.height,
            width: self.width,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn or(&self, other: &BitMask) -> Result<BitMask, GridError> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn and(&self, other: &BitMask) -> Result<BitMask, GridError> {
        self.zip_with(other, |a, b| a && b)
    }

    /// True when every set bit of `other` is also set here.
    pub fn contains_all(&self, other: &BitMask) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(a, b)| *a || !*b)
    }

    pub fn union_with(&mut self, other: &BitMask) -> Result<(), GridError> {
        check_shape(self.height, self.width, other)?;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
        Ok(())
    }

    fn zip_with(&self, other: &BitMask, f: impl Fn(bool, bool) -> bool) -> Result<BitMask, GridError> {
        check_shape(self.height, self.width, other)?;
        Ok(BitMask {
            height: self.height,
            width: self.width,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| f(*a, *b)).collect(),
        })
    }
}

/// The 8x8 two-room reference plan used across tests and examples.
///
/// ```text
/// 99999999
/// 97777779
/// 97007189   entrance door at (2, 6)
/// 97006179   doorway at (3, 4)
/// 97007179
/// 97007179
/// 97777779
/// 99999999
/// ```
pub fn tiny_two_room() -> LabelGrid {
    LabelGrid::from_rows(&TINY_TWO_ROOM_ROWS).expect("fixture is well formed")
}

pub const TINY_TWO_ROOM_ROWS: [&str; 8] = [
    "99999999", "97777779", "97007189", "97006179", "97007179", "97007179", "97777779", "99999999",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_taxonomy() {
        assert_eq!(ClassId::all().count(), 10);
        assert!(ClassId::all().take(7).all(ClassId::is_query));
        assert!(!ClassId::WALL.is_query());
        assert_eq!(ClassId::from_name("entrance_door"), Some(ClassId::ENTRANCE_DOOR));
        assert!(ClassId::query(7).is_err());
        assert_eq!(ClassId::new(10), Err(GridError::LabelOutOfRange(10)));
        assert!(ClassId::ENTRANCE_DOOR.is_free());
        assert!(ClassId::DOORWAY.is_free() && !ClassId::DOORWAY.is_room());
    }

    #[test]
    fn onehot_single_class() {
        let g = LabelGrid::filled(2, 2, ClassId::WALL);
        let s = onehot_encode(&g);
        for class in ClassId::all() {
            let expected = if class == ClassId::WALL { 4.0 } else { 0.0 };
            assert_eq!(s.channel_sum(class), expected);
        }
    }

    #[test]
    fn onehot_fixture_channel_sums() {
        // Hand count of the fixture drawing.
        let expected = [8.0, 4.0, 0.0, 0.0, 0.0, 0.0, 1.0, 22.0, 1.0, 28.0];
        let s = onehot_encode(&tiny_two_room());
        for class in ClassId::all() {
            assert_eq!(s.channel_sum(class), expected[class.index()], "{class}");
        }
        assert_eq!(s.argmax(), tiny_two_room());
    }

    #[test]
    fn mask_extremes() {
        let gt = onehot_encode(&tiny_two_room());
        let all = apply_unexplored_mask(&gt, &BitMask::full(8, 8)).unwrap();
        assert!(all.is_all_zero());
        let none = apply_unexplored_mask(&gt, &BitMask::new(8, 8)).unwrap();
        assert_eq!(none, gt);
    }

    #[test]
    fn mask_left_half() {
        let gt = onehot_encode(&tiny_two_room());
        let left = BitMask::from_fn(8, 8, |c| c.col < 4);
        let out = apply_unexplored_mask(&gt, &left).unwrap();
        for cell in tiny_two_room().cells() {
            if cell.col < 4 {
                assert!(out.cell(cell).iter().all(|v| *v == 0.0));
            } else {
                assert_eq!(out.cell(cell), gt.cell(cell));
            }
        }
        assert_eq!(out.nonzero_cells(), 32);
    }

    #[test]
    fn mask_dimension_mismatch() {
        let gt = onehot_encode(&tiny_two_room());
        let err = apply_unexplored_mask(&gt, &BitMask::new(4, 8)).unwrap_err();
        assert!(matches!(err, GridError::DimensionMismatch { .. }));
    }

    #[test]
    fn argmax_ties_prefer_lowest_id() {
        let s = SemanticGrid::filled(1, 1, 0.5);
        assert_eq!(s.argmax().get(Cell::new(0, 0)), ClassId::BEDROOM);
    }

    #[test]
    fn neighbour_order_is_lexicographic() {
        let n: Vec<_> = Cell::new(1, 1).neighbors4(3, 3).collect();
        let mut sorted = n.clone();
        sorted.sort();
        assert_eq!(n, sorted);
        assert_eq!(Cell::new(0, 0).neighbors4(3, 3).count(), 2);
        assert_eq!(Cell::new(0, 0).neighbors8_inclusive(3, 3).count(), 4);
    }
}
