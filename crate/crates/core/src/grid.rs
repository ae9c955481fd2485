//! Grid geometry: world/cell coordinate maps and boolean cell masks.
//!
//! Cells are indexed `(ix, iy)` with `iy = 0` at the bottom; the linear
//! index is row-major, `iy * width + ix`. Cell `(ix, iy)` owns the square
//! `[origin + (ix, iy)*h, origin + (ix+1, iy+1)*h)` and its center sits at
//! `origin + (ix + 0.5, iy + 0.5)*h`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point or direction in world coordinates (domain-length units).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Unit vector; zero stays zero.
    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n == 0.0 {
            Vec2::ZERO
        } else {
            self / n
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Cell coordinates `(ix, iy)`.
pub type Cell = (usize, usize);

/// Uniform rectangular grid covering the game domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    /// Side length of one cell in domain-length units.
    pub cell_size: f64,
    /// World position of the lower-left corner of cell (0, 0).
    #[serde(default)]
    pub origin: Vec2,
}

impl GridSpec {
    pub fn new(width: usize, height: usize, cell_size: f64) -> Result<Self> {
        let g = GridSpec {
            width,
            height,
            cell_size,
            origin: Vec2::ZERO,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 3 || self.height < 3 {
            return Err(Error::Schema(format!(
                "grid must be at least 3x3, got {}x{}",
                self.width, self.height
            )));
        }
        if !(self.cell_size > 0.0) || !self.cell_size.is_finite() {
            return Err(Error::Schema(format!(
                "cell_size must be positive, got {}",
                self.cell_size
            )));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.1 * self.width + cell.0
    }

    pub fn cell_at(&self, idx: usize) -> Cell {
        (idx % self.width, idx / self.width)
    }

    /// World position of a cell center.
    pub fn center(&self, cell: Cell) -> Vec2 {
        Vec2::new(
            self.origin.x + (cell.0 as f64 + 0.5) * self.cell_size,
            self.origin.y + (cell.1 as f64 + 0.5) * self.cell_size,
        )
    }

    /// World extent of the domain rectangle.
    pub fn extent(&self) -> (Vec2, Vec2) {
        let max = Vec2::new(
            self.origin.x + self.width as f64 * self.cell_size,
            self.origin.y + self.height as f64 * self.cell_size,
        );
        (self.origin, max)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let (lo, hi) = self.extent();
        p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y
    }

    /// Cell containing `p`; points on the upper/right domain edge clamp to
    /// the last cell so the closed domain rectangle maps fully.
    pub fn cell_of(&self, p: Vec2) -> Option<Cell> {
        if !self.contains(p) {
            return None;
        }
        let fx = (p.x - self.origin.x) / self.cell_size;
        let fy = (p.y - self.origin.y) / self.cell_size;
        let ix = (fx.floor() as isize).clamp(0, self.width as isize - 1) as usize;
        let iy = (fy.floor() as isize).clamp(0, self.height as isize - 1) as usize;
        Some((ix, iy))
    }

    pub fn on_edge(&self, cell: Cell) -> bool {
        cell.0 == 0 || cell.1 == 0 || cell.0 == self.width - 1 || cell.1 == self.height - 1
    }
}

/// Boolean per-cell mask over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Mask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        Mask {
            width,
            height,
            bits: vec![value; width * height],
        }
    }

    pub fn get(&self, cell: Cell) -> bool {
        self.bits[cell.1 * self.width + cell.0]
    }

    pub fn set(&mut self, cell: Cell, value: bool) {
        self.bits[cell.1 * self.width + cell.0] = value;
    }

    pub fn get_idx(&self, idx: usize) -> bool {
        self.bits[idx]
    }

    pub fn set_idx(&mut self, idx: usize, value: bool) {
        self.bits[idx] = value;
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&b| !b)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Iterator over set cells in row-major order.
    pub fn iter_set(&self) -> impl Iterator<Item = Cell> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }

    pub fn union_with(&mut self, other: &Mask) {
        debug_assert_eq!(self.bits.len(), other.bits.len());
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Set every cell whose center lies within `radius` (world units) of the
    /// center of a currently set cell. Used for obstacle inflation.
    pub fn dilated(&self, radius: f64, cell_size: f64) -> Mask {
        if radius <= 0.0 {
            return self.clone();
        }
        let r_cells = (radius / cell_size).floor() as isize;
        let mut offsets = Vec::new();
        for dy in -r_cells..=r_cells {
            for dx in -r_cells..=r_cells {
                let d2 = ((dx * dx + dy * dy) as f64).sqrt() * cell_size;
                if d2 <= radius {
                    offsets.push((dx, dy));
                }
            }
        }
        let mut out = Mask::new(self.width, self.height);
        for (ix, iy) in self.iter_set() {
            for &(dx, dy) in &offsets {
                let nx = ix as isize + dx;
                let ny = iy as isize + dy;
                if nx >= 0 && ny >= 0 && (nx as usize) < self.width && (ny as usize) < self.height {
                    out.set((nx as usize, ny as usize), true);
                }
            }
        }
        out
    }
}

/// 4-connected flood fill from `start` over cells where `open` is true.
/// Returns the reached component as a mask; empty if `start` is not open.
pub fn flood_fill_4(
    width: usize,
    height: usize,
    open: impl Fn(Cell) -> bool,
    start: Cell,
) -> Mask {
    let mut out = Mask::new(width, height);
    if !open(start) {
        return out;
    }
    let mut stack = vec![start];
    out.set(start, true);
    while let Some((ix, iy)) = stack.pop() {
        for (dx, dy) in [(-1_isize, 0_isize), (1, 0), (0, -1), (0, 1)] {
            let nx = ix as isize + dx;
            let ny = iy as isize + dy;
            if nx < 0 || ny < 0 || nx as usize >= width || ny as usize >= height {
                continue;
            }
            let nc = (nx as usize, ny as usize);
            if open(nc) && !out.get(nc) {
                out.set(nc, true);
                stack.push(nc);
            }
        }
    }
    out
}

/// Cells crossed by the segment from `a` to `b` (supercover traversal).
/// Includes the cells containing both endpoints. Points outside the domain
/// are clamped to it.
pub fn supercover_cells(grid: &GridSpec, a: Vec2, b: Vec2) -> Vec<Cell> {
    let clamp = |p: Vec2| -> Vec2 {
        let (lo, hi) = grid.extent();
        let eps = grid.cell_size * 1e-9;
        Vec2::new(
            p.x.clamp(lo.x + eps, hi.x - eps),
            p.y.clamp(lo.y + eps, hi.y - eps),
        )
    };
    let a = clamp(a);
    let b = clamp(b);
    let h = grid.cell_size;
    let mut cells = Vec::new();
    let (mut ix, mut iy) = grid.cell_of(a).unwrap();
    let (ex, ey) = grid.cell_of(b).unwrap();
    cells.push((ix, iy));
    let d = b - a;
    let step_x: isize = if d.x > 0.0 { 1 } else { -1 };
    let step_y: isize = if d.y > 0.0 { 1 } else { -1 };
    // Parametric distance to the next vertical/horizontal cell border.
    let next_border = |i: usize, step: isize, o: f64| -> f64 {
        let edge = o + (i as f64 + if step > 0 { 1.0 } else { 0.0 }) * h;
        edge
    };
    let mut t_max_x = if d.x != 0.0 {
        (next_border(ix, step_x, grid.origin.x) - a.x) / d.x
    } else {
        f64::INFINITY
    };
    let mut t_max_y = if d.y != 0.0 {
        (next_border(iy, step_y, grid.origin.y) - a.y) / d.y
    } else {
        f64::INFINITY
    };
    let t_delta_x = if d.x != 0.0 { h / d.x.abs() } else { f64::INFINITY };
    let t_delta_y = if d.y != 0.0 { h / d.y.abs() } else { f64::INFINITY };
    let mut guard = 4 * (grid.width + grid.height);
    while (ix, iy) != (ex, ey) && guard > 0 {
        guard -= 1;
        if (t_max_x - t_max_y).abs() < 1e-12 {
            // Passing exactly through a cell corner: cover both adjacent cells.
            let nx = ix as isize + step_x;
            let ny = iy as isize + step_y;
            if nx >= 0 && (nx as usize) < grid.width {
                cells.push((nx as usize, iy));
            }
            if ny >= 0 && (ny as usize) < grid.height {
                cells.push((ix, ny as usize));
            }
            ix = (ix as isize + step_x).clamp(0, grid.width as isize - 1) as usize;
            iy = (iy as isize + step_y).clamp(0, grid.height as isize - 1) as usize;
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
        } else if t_max_x < t_max_y {
            t_max_x += t_delta_x;
            ix = (ix as isize + step_x).clamp(0, grid.width as isize - 1) as usize;
        } else {
            t_max_y += t_delta_y;
            iy = (iy as isize + step_y).clamp(0, grid.height as isize - 1) as usize;
        }
        cells.push((ix, iy));
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn world_grid_roundtrip() {
        let g = GridSpec::new(10, 7, 0.25).unwrap();
        for iy in 0..7 {
            for ix in 0..10 {
                assert_eq!(g.cell_of(g.center((ix, iy))), Some((ix, iy)));
            }
        }
        let p = Vec2::new(0.9, 0.4);
        let c = g.cell_of(p).unwrap();
        assert!(g.center(c).distance(p) <= g.cell_size);
    }

    #[test]
    fn grid_rejects_degenerate() {
        assert!(GridSpec::new(2, 10, 0.1).is_err());
        assert!(GridSpec::new(10, 10, 0.0).is_err());
        assert!(GridSpec::new(10, 10, -1.0).is_err());
    }

    #[test]
    fn supercover_straight_and_diagonal() {
        let g = GridSpec::new(8, 8, 1.0).unwrap();
        let cells = supercover_cells(&g, Vec2::new(0.5, 0.5), Vec2::new(4.5, 0.5));
        assert_eq!(cells, vec![(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)]);
        // Diagonal straight through corners covers both side cells.
        let cells = supercover_cells(&g, Vec2::new(0.5, 0.5), Vec2::new(2.5, 2.5));
        assert!(cells.contains(&(0, 0)) && cells.contains(&(2, 2)));
        assert!(cells.contains(&(1, 0)) || cells.contains(&(0, 1)));
    }

    #[test]
    fn mask_dilation_radius() {
        let mut m = Mask::new(9, 9);
        m.set((4, 4), true);
        let d = m.dilated(0.2, 0.1);
        assert!(d.get((4, 4)));
        assert!(d.get((6, 4)));
        assert!(d.get((5, 5))); // sqrt(2)*0.1 < 0.2
        assert!(!d.get((6, 6))); // 2*sqrt(2)*0.1 > 0.2
        assert!(!d.get((7, 4)));
    }
}
