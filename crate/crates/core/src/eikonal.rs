//! First-order fast marching solver for |grad u| = 1 on the masked grid,
//! plus field interpolation and steepest-descent path extraction.
//!
//! The update at a cell is the standard two-neighbor upwind quadratic taken
//! over the eight triangles of the 8-point stencil (each axis neighbor paired
//! with an adjacent diagonal neighbor). Fields are unit-speed: player speeds
//! enter only through `travel_time`, so one solve serves both players.
//! Obstacle cells are hard +inf, and a diagonal neighbor participates only
//! when both orthogonal cells between it and the center are free, so fronts
//! cannot leak through diagonal obstacle contacts.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::grid::{Cell, GridSpec, Mask, Vec2};
use crate::scenario::Scenario;

/// Grid-error slack, in cells, for single-field distance comparisons.
pub const DIST_SLACK_CELLS: f64 = 2.0;
/// Slack, in cells, for comparisons that compose two fields or a path.
pub const PATH_SLACK_CELLS: f64 = 4.0;

/// 2h for this grid.
pub fn dist_slack(grid: &GridSpec) -> f64 {
    DIST_SLACK_CELLS * grid.cell_size
}

/// 4h for this grid.
pub fn path_slack(grid: &GridSpec) -> f64 {
    PATH_SLACK_CELLS * grid.cell_size
}

/// Source specification for a solve.
#[derive(Debug, Clone)]
pub enum SourceRegion {
    /// Explicit cells; every cell must be free.
    Cells(Vec<Cell>),
    /// Disk rasterized to cell centers (the cell containing the center is
    /// always included), then intersected with free space.
    Disk { center: Vec2, radius: f64 },
    /// Arbitrary cell set, intersected with free space.
    Mask(Mask),
}

/// Arrival-distance field: one solved Eikonal problem.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub grid: GridSpec,
    /// Distance per cell; +inf on obstacles and unreached cells.
    pub values: Vec<f64>,
    /// Cells where the field is exactly zero.
    pub sources: Mask,
    /// Obstacle mask the field was solved on.
    pub obstacles: Mask,
}

/// Polyline in world coordinates with its total length.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPolyline {
    pub vertices: Vec<Vec2>,
    pub length: f64,
}

impl PathPolyline {
    pub fn from_vertices(vertices: Vec<Vec2>) -> Self {
        let length = vertices.windows(2).map(|w| w[0].distance(w[1])).sum();
        PathPolyline { vertices, length }
    }
}

/// Axis neighbor paired with each adjacent diagonal neighbor: the eight
/// stencil triangles.
const STENCIL_PAIRS: [((isize, isize), (isize, isize)); 8] = [
    ((1, 0), (1, 1)),
    ((1, 0), (1, -1)),
    ((-1, 0), (-1, 1)),
    ((-1, 0), (-1, -1)),
    ((0, 1), (1, 1)),
    ((0, 1), (-1, 1)),
    ((0, -1), (1, -1)),
    ((0, -1), (-1, -1)),
];

/// Two-neighbor upwind quadratic on one stencil triangle: axis vertex at
/// distance h with value `a`, diagonal vertex at distance h*sqrt(2) with
/// value `b`. Minimizes the arrival time of a front entering through the
/// opposite edge.
fn triangle_update(h: f64, a: f64, b: f64) -> f64 {
    if b.is_infinite() {
        return a + h; // also covers a = inf -> inf
    }
    if a.is_infinite() {
        return b + h * std::f64::consts::SQRT_2;
    }
    let s = a - b;
    if s <= 0.0 {
        a + h
    } else if s >= h * std::f64::consts::FRAC_1_SQRT_2 {
        b + h * std::f64::consts::SQRT_2
    } else {
        let lam = s / (h * h - s * s).sqrt();
        (1.0 - lam) * a + lam * b + h * (1.0 + lam * lam).sqrt()
    }
}

/// Minimum over all stencil triangles; `get` yields a usable neighbor value
/// or +inf (out of range, obstacle, corner-cutting diagonal, not accepted).
fn stencil_update(h: f64, get: impl Fn(isize, isize) -> f64) -> f64 {
    let mut best = f64::INFINITY;
    for ((ax, ay), (dx, dy)) in STENCIL_PAIRS {
        let u = triangle_update(h, get(ax, ay), get(dx, dy));
        if u < best {
            best = u;
        }
    }
    best
}

struct HeapEntry {
    value: f64,
    idx: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.idx == other.idx
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // Min-heap on value, then index for determinism.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .total_cmp(&self.value)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

fn rasterize_sources(
    grid: &GridSpec,
    obstacles: &Mask,
    sources: &SourceRegion,
) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    match sources {
        SourceRegion::Cells(cells) => {
            if cells.is_empty() {
                return Err(Error::EmptySource);
            }
            for &c in cells {
                if obstacles.get(c) {
                    let p = grid.center(c);
                    return Err(Error::PointInObstacle(p.x, p.y));
                }
                out.push(grid.index(c));
            }
        }
        SourceRegion::Disk { center, radius } => {
            if let Some(c) = grid.cell_of(*center) {
                if !obstacles.get(c) {
                    out.push(grid.index(c));
                }
            }
            let r = radius.max(0.0);
            let rc = (r / grid.cell_size).ceil() as isize + 1;
            let (cx, cy) = grid
                .cell_of(*center)
                .ok_or(Error::OutOfDomain(center.x, center.y))?;
            for dy in -rc..=rc {
                for dx in -rc..=rc {
                    let nx = cx as isize + dx;
                    let ny = cy as isize + dy;
                    if nx < 0 || ny < 0 || nx as usize >= grid.width || ny as usize >= grid.height
                    {
                        continue;
                    }
                    let cell = (nx as usize, ny as usize);
                    if !obstacles.get(cell) && grid.center(cell).distance(*center) <= r {
                        out.push(grid.index(cell));
                    }
                }
            }
            out.sort_unstable();
            out.dedup();
        }
        SourceRegion::Mask(mask) => {
            for cell in mask.iter_set() {
                if !obstacles.get(cell) {
                    out.push(grid.index(cell));
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptySource);
    }
    Ok(out)
}

/// Solve the Eikonal problem on a scenario's free space.
pub fn solve(scenario: &Scenario, sources: &SourceRegion) -> Result<DistanceField> {
    solve_on(&scenario.grid, &scenario.obstacles, sources)
}

/// Solve on an explicit obstacle mask (used for inflated-obstacle fields).
pub fn solve_on(grid: &GridSpec, obstacles: &Mask, sources: &SourceRegion) -> Result<DistanceField> {
    let n = grid.cell_count();
    let h = grid.cell_size;
    let w = grid.width as isize;
    let height = grid.height as isize;
    let source_idx = rasterize_sources(grid, obstacles, sources)?;

    let mut values = vec![f64::INFINITY; n];
    let mut accepted = vec![false; n];
    let mut source_mask = Mask::new(grid.width, grid.height);
    let mut heap = BinaryHeap::new();
    for &i in &source_idx {
        values[i] = 0.0;
        source_mask.set_idx(i, true);
        heap.push(HeapEntry { value: 0.0, idx: i });
    }

    let free = |x: isize, y: isize| -> bool {
        x >= 0 && y >= 0 && x < w && y < height && !obstacles.get_idx((y * w + x) as usize)
    };

    while let Some(HeapEntry { value, idx }) = heap.pop() {
        if accepted[idx] || value > values[idx] {
            continue;
        }
        accepted[idx] = true;
        let ix = (idx % grid.width) as isize;
        let iy = (idx / grid.width) as isize;
        // Re-solve every unaccepted free neighbor in the 8-ring.
        for dy in -1..=1_isize {
            for dx in -1..=1_isize {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let nx = ix + dx;
                let ny = iy + dy;
                if !free(nx, ny) {
                    continue;
                }
                let ni = (ny * w + nx) as usize;
                if accepted[ni] {
                    continue;
                }
                let get = |sx: isize, sy: isize| -> f64 {
                    let qx = nx + sx;
                    let qy = ny + sy;
                    if !free(qx, qy) {
                        return f64::INFINITY;
                    }
                    // Diagonal neighbors are usable only when both cells
                    // between them and the center are free.
                    if sx != 0 && sy != 0 && (!free(nx + sx, ny) || !free(nx, ny + sy)) {
                        return f64::INFINITY;
                    }
                    let qi = (qy * w + qx) as usize;
                    if accepted[qi] {
                        values[qi]
                    } else {
                        f64::INFINITY
                    }
                };
                let u = stencil_update(h, get);
                if u < values[ni] {
                    values[ni] = u;
                    heap.push(HeapEntry { value: u, idx: ni });
                }
            }
        }
    }

    Ok(DistanceField {
        grid: *grid,
        values,
        sources: source_mask,
        obstacles: obstacles.clone(),
    })
}

impl DistanceField {
    pub fn value_at_cell(&self, cell: Cell) -> f64 {
        self.values[self.grid.index(cell)]
    }

    /// Bilinear interpolation over cell centers. Infinite stencil values are
    /// dropped and the remaining weights renormalized; all-infinite stencils
    /// yield +inf. Returns None outside the domain.
    fn interp(&self, p: Vec2) -> Option<f64> {
        if !self.grid.contains(p) {
            return None;
        }
        let h = self.grid.cell_size;
        let fx = (p.x - self.grid.origin.x) / h - 0.5;
        let fy = (p.y - self.grid.origin.y) / h - 0.5;
        let clamp_axis = |f: f64, n: usize| -> (usize, f64) {
            if n == 1 {
                return (0, 0.0);
            }
            let i = f.floor();
            if i < 0.0 {
                (0, 0.0)
            } else if i as usize >= n - 1 {
                (n - 2, 1.0)
            } else {
                (i as usize, f - i)
            }
        };
        let (x0, tx) = clamp_axis(fx, self.grid.width);
        let (y0, ty) = clamp_axis(fy, self.grid.height);
        let mut acc = 0.0;
        let mut wsum = 0.0;
        for (dx, dy, wgt) in [
            (0, 0, (1.0 - tx) * (1.0 - ty)),
            (1, 0, tx * (1.0 - ty)),
            (0, 1, (1.0 - tx) * ty),
            (1, 1, tx * ty),
        ] {
            if wgt == 0.0 {
                continue;
            }
            let v = self.values[self.grid.index((x0 + dx, y0 + dy))];
            if v.is_finite() {
                acc += wgt * v;
                wsum += wgt;
            }
        }
        if wsum > 1e-12 {
            Some(acc / wsum)
        } else {
            Some(f64::INFINITY)
        }
    }

    /// Interpolated field value at a free-space point. +inf means the point
    /// is unreached from the sources.
    pub fn distance_to(&self, p: Vec2) -> Result<f64> {
        let cell = self.grid.cell_of(p).ok_or(Error::OutOfDomain(p.x, p.y))?;
        if self.obstacles.get(cell) {
            return Err(Error::PointInObstacle(p.x, p.y));
        }
        Ok(self.interp(p).unwrap_or(f64::INFINITY))
    }

    /// Interpolated value with +inf for out-of-domain points; no obstacle
    /// check.
    pub fn interp_or_inf(&self, p: Vec2) -> f64 {
        self.interp(p).unwrap_or(f64::INFINITY)
    }

    /// distance_to divided by the traversal speed.
    pub fn travel_time(&self, p: Vec2, speed: f64) -> Result<f64> {
        if !(speed > 0.0) {
            return Err(Error::BadConfig(format!("speed must be > 0, got {speed}")));
        }
        Ok(self.distance_to(p)? / speed)
    }

    fn is_free(&self, cell: Cell) -> bool {
        !self.obstacles.get(cell)
    }

    /// Best descending 8-neighbor of `cell`; diagonal steps require both
    /// orthogonal neighbors free so the path cannot cut obstacle corners.
    fn descend_cell(&self, cell: Cell) -> Option<Cell> {
        let (ix, iy) = (cell.0 as isize, cell.1 as isize);
        let w = self.grid.width as isize;
        let h = self.grid.height as isize;
        let mut best: Option<(f64, Cell)> = None;
        for dy in -1..=1_isize {
            for dx in -1..=1_isize {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let nx = ix + dx;
                let ny = iy + dy;
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let nc = (nx as usize, ny as usize);
                if !self.is_free(nc) {
                    continue;
                }
                if dx != 0 && dy != 0 {
                    let c1 = ((ix + dx) as usize, iy as usize);
                    let c2 = (ix as usize, (iy + dy) as usize);
                    if !self.is_free(c1) || !self.is_free(c2) {
                        continue;
                    }
                }
                let v = self.value_at_cell(nc);
                if v.is_finite() && best.map_or(true, |(bv, _)| v < bv) {
                    best = Some((v, nc));
                }
            }
        }
        let cur = self.value_at_cell(cell);
        best.and_then(|(v, c)| if v < cur { Some(c) } else { None })
    }

    fn gradient(&self, p: Vec2) -> Option<Vec2> {
        let e = self.grid.cell_size * 0.5;
        let c = self.interp(p).filter(|v| v.is_finite())?;
        let sample = |q: Vec2| self.interp(q).filter(|v| v.is_finite());
        let axis = |plus: Option<f64>, minus: Option<f64>| -> Option<f64> {
            match (plus, minus) {
                (Some(a), Some(b)) => Some((a - b) / (2.0 * e)),
                (Some(a), None) => Some((a - c) / e),
                (None, Some(b)) => Some((c - b) / e),
                (None, None) => None,
            }
        };
        let gx = axis(sample(p + Vec2::new(e, 0.0)), sample(p - Vec2::new(e, 0.0)))?;
        let gy = axis(sample(p + Vec2::new(0.0, e)), sample(p - Vec2::new(0.0, e)))?;
        Some(Vec2::new(gx, gy))
    }

    /// Unit direction of steepest descent at `p`, for steering toward the
    /// sources; falls back to the best descending neighbor cell when the
    /// interpolated gradient is unusable. None at sources and local minima.
    pub fn descent_direction(&self, p: Vec2) -> Option<Vec2> {
        if let Some(g) = self.gradient(p) {
            let dir = (-g).normalized();
            if dir.norm() > 0.5 {
                // Reject directions that immediately climb or hit a wall.
                let q = p + dir * (0.25 * self.grid.cell_size);
                let ok = self
                    .grid
                    .cell_of(q)
                    .map(|c| self.is_free(c))
                    .unwrap_or(false);
                if ok {
                    let here = self.interp_or_inf(p);
                    let there = self.interp_or_inf(q);
                    if there < here {
                        return Some(dir);
                    }
                }
            }
        }
        let cell = self.grid.cell_of(p)?;
        self.descend_cell(cell)
            .map(|nc| (self.grid.center(nc) - p).normalized())
            .filter(|d| d.norm() > 0.5)
    }

    /// Nearest source-cell center within a small window of `cell`.
    fn snap_to_source(&self, near: Vec2, cell: Cell) -> Option<Vec2> {
        let (ix, iy) = (cell.0 as isize, cell.1 as isize);
        let mut best: Option<(f64, Vec2)> = None;
        for dy in -2..=2_isize {
            for dx in -2..=2_isize {
                let nx = ix + dx;
                let ny = iy + dy;
                if nx < 0
                    || ny < 0
                    || nx as usize >= self.grid.width
                    || ny as usize >= self.grid.height
                {
                    continue;
                }
                let nc = (nx as usize, ny as usize);
                if self.sources.get(nc) {
                    let ctr = self.grid.center(nc);
                    let d = ctr.distance(near);
                    if best.map_or(true, |(bd, _)| d < bd) {
                        best = Some((d, ctr));
                    }
                }
            }
        }
        best.map(|(_, c)| c)
    }
}

/// Steepest-descent path from `from` down to a source cell. Descends the
/// interpolated field in steps of h/2, falling back to discrete 8-neighbor
/// descent wherever the continuous step stalls or would enter an obstacle.
pub fn extract_path(field: &DistanceField, from: Vec2) -> Result<PathPolyline> {
    let h = field.grid.cell_size;
    let start_val = field.distance_to(from)?;
    if start_val.is_infinite() {
        return Err(Error::Unreachable(from.x, from.y));
    }
    let mut vertices = vec![from];
    if start_val == 0.0 {
        return Ok(PathPolyline::from_vertices(vertices));
    }
    let mut p = from;
    let mut val = start_val;
    let step = 0.5 * h;
    let max_steps = (start_val / step) as usize * 8 + 8 * (field.grid.width + field.grid.height);
    for _ in 0..max_steps {
        let cell = field
            .grid
            .cell_of(p)
            .ok_or(Error::Unreachable(from.x, from.y))?;
        if val <= 0.75 * h {
            if let Some(src) = field.snap_to_source(p, cell) {
                if src.distance(p) > 1e-12 {
                    vertices.push(src);
                }
                return Ok(PathPolyline::from_vertices(vertices));
            }
        }
        // Continuous step.
        let mut moved = false;
        if let Some(g) = field.gradient(p) {
            let dir = (-g).normalized();
            if dir.norm() > 0.5 {
                let q = p + dir * step;
                if let Some(qc) = field.grid.cell_of(q) {
                    if field.is_free(qc) {
                        if let Some(qv) = field.interp(q).filter(|v| v.is_finite()) {
                            if qv < val - 1e-12 {
                                p = q;
                                val = qv;
                                vertices.push(p);
                                moved = true;
                            }
                        }
                    }
                }
            }
        }
        if !moved {
            // Discrete fallback: descend cell values.
            match field.descend_cell(cell) {
                Some(nc) => {
                    p = field.grid.center(nc);
                    val = field.value_at_cell(nc);
                    vertices.push(p);
                }
                None => {
                    // At a local minimum; only valid if it's a source.
                    if field.sources.get(cell) {
                        return Ok(PathPolyline::from_vertices(vertices));
                    }
                    return Err(Error::Unreachable(from.x, from.y));
                }
            }
        }
    }
    Err(Error::Unreachable(from.x, from.y))
}

/// Residual of the upwind update at every finite non-source cell; used by
/// tests to check monotone consistency of solved fields.
pub fn max_update_residual(field: &DistanceField) -> f64 {
    let g = &field.grid;
    let h = g.cell_size;
    let w = g.width as isize;
    let height = g.height as isize;
    let free = |x: isize, y: isize| -> bool {
        x >= 0
            && y >= 0
            && x < w
            && y < height
            && !field.obstacles.get_idx((y * w + x) as usize)
    };
    let mut worst = 0.0_f64;
    for iy in 0..height {
        for ix in 0..w {
            let i = (iy * w + ix) as usize;
            let v = field.values[i];
            if !v.is_finite() || field.sources.get_idx(i) {
                continue;
            }
            let get = |sx: isize, sy: isize| -> f64 {
                let qx = ix + sx;
                let qy = iy + sy;
                if !free(qx, qy) {
                    return f64::INFINITY;
                }
                if sx != 0 && sy != 0 && (!free(ix + sx, iy) || !free(ix, iy + sy)) {
                    return f64::INFINITY;
                }
                field.values[(qy * w + qx) as usize]
            };
            let u = stencil_update(h, get);
            worst = worst.max((u - v).abs());
        }
    }
    worst
}
