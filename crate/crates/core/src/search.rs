//! 4-connected breadth-first search and connected components.

use std::collections::VecDeque;

use crate::grid::{BitMask, Cell};

pub const UNREACHABLE: u32 = u32::MAX;

/// BFS distance field over cells where `passable` holds.
///
/// Parents follow the neighbour order of [`Cell::neighbors4`], so paths
/// recovered with [`first_step`] are deterministic.
#[derive(Clone, Debug)]
pub struct DistanceField {
    height: usize,
    width: usize,
    dist: Vec<u32>,
    parent: Vec<u32>,
}

impl DistanceField {
    pub fn from_sources(
        height: usize,
        width: usize,
        sources: impl IntoIterator<Item = Cell>,
        passable: impl Fn(Cell) -> bool,
    ) -> Self {
        let n = height * width;
        let mut dist = vec![UNREACHABLE; n];
        let mut parent = vec![u32::MAX; n];
        let mut queue = VecDeque::new();
        for s in sources {
            let i = s.row * width + s.col;
            if dist[i] == UNREACHABLE {
                dist[i] = 0;
                queue.push_back(s);
            }
        }
        while let Some(cell) = queue.pop_front() {
            let d = dist[cell.row * width + cell.col];
            for next in cell.neighbors4(height, width) {
                let j = next.row * width + next.col;
                if dist[j] == UNREACHABLE && passable(next) {
                    dist[j] = d + 1;
                    parent[j] = (cell.row * width + cell.col) as u32;
                    queue.push_back(next);
                }
            }
        }
        DistanceField {
            height,
            width,
            dist,
            parent,
        }
    }

    pub fn from(height: usize, width: usize, source: Cell, passable: impl Fn(Cell) -> bool) -> Self {
        Self::from_sources(height, width, [source], passable)
    }

    #[inline]
    pub fn get(&self, cell: Cell) -> Option<u32> {
        let d = self.dist[cell.row * self.width + cell.col];
        (d != UNREACHABLE).then_some(d)
    }

    pub fn reached(&self) -> BitMask {
        BitMask::from_bits(
            self.height,
            self.width,
            self.dist.iter().map(|d| *d != UNREACHABLE).collect(),
        )
        .expect("same shape")
    }

    /// Path from the source to `target`, both ends included.
    pub fn path_to(&self, target: Cell) -> Option<Vec<Cell>> {
        self.get(target)?;
        let mut path = vec![target];
        let mut i = target.row * self.width + target.col;
        while self.parent[i] != u32::MAX {
            i = self.parent[i] as usize;
            path.push(Cell::new(i / self.width, i % self.width));
        }
        path.reverse();
        Some(path)
    }

    /// The cell after the source on the path to `target`; the source itself
    /// when `target` is the source.
    pub fn first_step(&self, target: Cell) -> Option<Cell> {
        let path = self.path_to(target)?;
        Some(*path.get(1).unwrap_or(&path[0]))
    }
}

/// 4-connected components of the cells where `member` holds, in row-major
/// order of their first cell. Each component lists its cells in row-major order.
pub fn components(height: usize, width: usize, member: impl Fn(Cell) -> bool) -> Vec<Vec<Cell>> {
    let mut seen = vec![false; height * width];
    let mut out = Vec::new();
    for row in 0..height {
        for col in 0..width {
            let start = Cell::new(row, col);
            if seen[row * width + col] || !member(start) {
                continue;
            }
            seen[row * width + col] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(cell) = queue.pop_front() {
                for next in cell.neighbors4(height, width) {
                    let j = next.row * width + next.col;
                    if !seen[j] && member(next) {
                        seen[j] = true;
                        comp.push(next);
                        queue.push_back(next);
                    }
                }
            }
            comp.sort();
            out.push(comp);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corridor_distance() {
        let f = DistanceField::from(1, 6, Cell::new(0, 0), |_| true);
        assert_eq!(f.get(Cell::new(0, 5)), Some(5));
        assert_eq!(f.first_step(Cell::new(0, 5)), Some(Cell::new(0, 1)));
        assert_eq!(f.first_step(Cell::new(0, 0)), Some(Cell::new(0, 0)));
    }

    #[test]
    fn blocked_cells_are_unreachable() {
        let f = DistanceField::from(1, 5, Cell::new(0, 0), |c| c.col != 2);
        assert_eq!(f.get(Cell::new(0, 4)), None);
        assert_eq!(f.reached().count(), 2);
    }

    #[test]
    fn two_components() {
        let comps = components(3, 3, |c| c.col != 1);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].len(), 3);
    }
}
