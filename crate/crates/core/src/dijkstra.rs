//! 16-neighbor Dijkstra shortest distances on the cell graph.
//!
//! Independent reference for checking fast-marching output: moves go to the
//! 8 ring neighbors plus the 8 knight offsets, each costing its Euclidean
//! length, and a move is allowed only if every cell its segment crosses is
//! free. Kept separate from the eikonal module on purpose.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::grid::{Cell, GridSpec, Mask};

const MOVES: [(isize, isize); 16] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (2, 1),
    (2, -1),
    (-2, 1),
    (-2, -1),
    (1, 2),
    (1, -2),
    (-1, 2),
    (-1, -2),
];

struct Entry {
    dist: f64,
    idx: usize,
}
impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.dist == other.dist && self.idx == other.idx
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

/// Cells crossed by a knight/diagonal move, excluding the endpoints. A
/// diagonal through a shared corner requires both side cells free.
fn blocked(obstacles: &Mask, from: Cell, dx: isize, dy: isize) -> bool {
    let w = obstacles.width as isize;
    let h = obstacles.height as isize;
    let free = |x: isize, y: isize| -> bool {
        x >= 0 && y >= 0 && x < w && y < h && !obstacles.get((x as usize, y as usize))
    };
    let (x, y) = (from.0 as isize, from.1 as isize);
    match (dx.abs(), dy.abs()) {
        (1, 0) | (0, 1) => false,
        (1, 1) => !free(x + dx, y) || !free(x, y + dy),
        // Knight move: the segment crosses the two cells nearest its midpoint.
        (2, 1) => !free(x + dx / 2, y) || !free(x + dx / 2, y + dy),
        (1, 2) => !free(x, y + dy / 2) || !free(x + dx, y + dy / 2),
        _ => unreachable!(),
    }
}

/// Shortest distance from the sources to every cell; +inf where unreachable
/// or obstructed.
pub fn dijkstra16(grid: &GridSpec, obstacles: &Mask, sources: &[Cell]) -> Vec<f64> {
    let n = grid.cell_count();
    let h = grid.cell_size;
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    for &c in sources {
        if obstacles.get(c) {
            continue;
        }
        let i = grid.index(c);
        dist[i] = 0.0;
        heap.push(Entry { dist: 0.0, idx: i });
    }
    while let Some(Entry { dist: d, idx }) = heap.pop() {
        if d > dist[idx] {
            continue;
        }
        let cell = grid.cell_at(idx);
        for &(dx, dy) in &MOVES {
            let nx = cell.0 as isize + dx;
            let ny = cell.1 as isize + dy;
            if nx < 0 || ny < 0 || nx as usize >= grid.width || ny as usize >= grid.height {
                continue;
            }
            let nc = (nx as usize, ny as usize);
            if obstacles.get(nc) || blocked(obstacles, cell, dx, dy) {
                continue;
            }
            let step = ((dx * dx + dy * dy) as f64).sqrt() * h;
            let nd = d + step;
            let ni = grid.index(nc);
            if nd < dist[ni] {
                dist[ni] = nd;
                heap.push(Entry { dist: nd, idx: ni });
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_and_diagonal_distances() {
        let grid = GridSpec::new(11, 11, 1.0).unwrap();
        let obstacles = Mask::new(11, 11);
        let d = dijkstra16(&grid, &obstacles, &[(0, 0)]);
        assert_eq!(d[grid.index((5, 0))], 5.0);
        assert!((d[grid.index((4, 4))] - 4.0 * 2.0_f64.sqrt()).abs() < 1e-12);
        // Knight target reached in one move.
        assert!((d[grid.index((2, 1))] - 5.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn wall_forces_detour() {
        let grid = GridSpec::new(11, 11, 1.0).unwrap();
        let mut obstacles = Mask::new(11, 11);
        for iy in 0..10 {
            obstacles.set((5, iy), true);
        }
        let d = dijkstra16(&grid, &obstacles, &[(0, 0)]);
        let direct = 8.0;
        let idx = grid.index((8, 0));
        assert!(d[idx] > direct + 2.0, "detour length {} too short", d[idx]);
        assert!(d[idx].is_finite());
    }

    #[test]
    fn no_corner_cutting() {
        let grid = GridSpec::new(5, 5, 1.0).unwrap();
        let mut obstacles = Mask::new(5, 5);
        // Diagonal pinch at (1,0)/(0,1): moving (0,0)->(1,1) must be blocked.
        obstacles.set((1, 0), true);
        obstacles.set((0, 1), true);
        let d = dijkstra16(&grid, &obstacles, &[(0, 0)]);
        assert!(d[grid.index((1, 1))].is_infinite());
    }
}
