//! Conservative defender-winning regions from boundary-anchored defense
//! paths.
//!
//! A defense path is the shortest free-space path between two boundary
//! anchors. For a fixed attacker position the machinery here finds, per
//! path, the balanced first-entry point, the regions induced by its capture
//! disk, and the set of defender positions that can hold the path; the union
//! over a family of target-touching paths under-approximates the true
//! defender-winning slice. Everything reduces to 2D distance fields, so one
//! solve per anchor (plus one per entry point) is the whole cost.

use rayon::prelude::*;

use crate::eikonal::{self, extract_path, solve, DistanceField, PathPolyline, SourceRegion};
use crate::error::{Error, Result};
use crate::grid::{flood_fill_4, supercover_cells, Cell, Mask, Vec2};
use crate::scenario::Scenario;

/// "Path touches the target" tolerance, in cells. Grid paths rarely achieve
/// exact contact, so one-and-a-half cells of slack matches the field error.
pub const TOUCH_TOL_CELLS: f64 = 1.5;

/// Which anchor a level-set image is measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    A,
    B,
}

/// Shortest boundary-to-boundary path with its arc-length table.
#[derive(Debug, Clone)]
pub struct DefensePath {
    pub anchor_a: Vec2,
    pub anchor_b: Vec2,
    pub anchor_a_cell: Cell,
    pub anchor_b_cell: Cell,
    pub polyline: PathPolyline,
    /// Cumulative arc length from `anchor_a` per polyline vertex; strictly
    /// increasing, last entry equals the polyline length.
    pub arcs: Vec<f64>,
}

impl DefensePath {
    fn new(
        anchor_a_cell: Cell,
        anchor_b_cell: Cell,
        polyline: PathPolyline,
        scenario: &Scenario,
    ) -> Self {
        // Drop zero-length segments so the arc table is strictly increasing.
        let mut vertices: Vec<Vec2> = Vec::with_capacity(polyline.vertices.len());
        for v in polyline.vertices {
            if vertices.last().map_or(true, |p: &Vec2| p.distance(v) > 1e-12) {
                vertices.push(v);
            }
        }
        let polyline = PathPolyline::from_vertices(vertices);
        let mut arcs = Vec::with_capacity(polyline.vertices.len());
        let mut acc = 0.0;
        arcs.push(0.0);
        for w in polyline.vertices.windows(2) {
            acc += w[0].distance(w[1]);
            arcs.push(acc);
        }
        DefensePath {
            anchor_a: scenario.grid.center(anchor_a_cell),
            anchor_b: scenario.grid.center(anchor_b_cell),
            anchor_a_cell,
            anchor_b_cell,
            polyline,
            arcs,
        }
    }

    pub fn length(&self) -> f64 {
        self.polyline.length
    }

    /// Point at arc length `s` from anchor A; clamps to the endpoints.
    pub fn point_at_arc(&self, s: f64) -> Vec2 {
        let s = s.clamp(0.0, self.length());
        let i = self.arcs.partition_point(|&a| a < s);
        if i == 0 {
            return self.polyline.vertices[0];
        }
        if i >= self.arcs.len() {
            return *self.polyline.vertices.last().unwrap();
        }
        let (a0, a1) = (self.arcs[i - 1], self.arcs[i]);
        let t = if a1 > a0 { (s - a0) / (a1 - a0) } else { 0.0 };
        let (v0, v1) = (self.polyline.vertices[i - 1], self.polyline.vertices[i]);
        v0 + (v1 - v0) * t
    }

    /// Arc length of the polyline point nearest `p`, with the distance.
    pub fn project(&self, p: Vec2) -> (f64, f64) {
        if self.polyline.vertices.len() == 1 {
            return (0.0, p.distance(self.polyline.vertices[0]));
        }
        let mut best = (0.0, f64::INFINITY);
        for (i, w) in self.polyline.vertices.windows(2).enumerate() {
            let seg = w[1] - w[0];
            let len2 = seg.dot(seg);
            let t = if len2 > 0.0 {
                ((p - w[0]).dot(seg) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let q = w[0] + seg * t;
            let d = p.distance(q);
            if d < best.1 {
                best = (self.arcs[i] + seg.norm() * t, d);
            }
        }
        best
    }

    /// Cells the path passes through.
    pub fn raster_cells(&self, scenario: &Scenario) -> Mask {
        let mut mask = Mask::new(scenario.grid.width, scenario.grid.height);
        if self.polyline.vertices.len() == 1 {
            if let Some(c) = scenario.grid.cell_of(self.polyline.vertices[0]) {
                mask.set(c, true);
            }
        }
        for w in self.polyline.vertices.windows(2) {
            for c in supercover_cells(&scenario.grid, w[0], w[1]) {
                mask.set(c, true);
            }
        }
        mask
    }
}

/// A defense path together with the distance fields from its two anchors.
#[derive(Debug, Clone)]
pub struct AnchoredPath {
    pub path: DefensePath,
    pub field_a: DistanceField,
    pub field_b: DistanceField,
}

/// The two sides a path cuts the free space into.
#[derive(Debug, Clone)]
pub struct SidePartition {
    pub attacker_side: Mask,
    pub target_side: Mask,
    pub path_cells: Mask,
}

/// Per-scenario cache for path construction: boundary ordering, the
/// distance field from the target, and the field from the touch-tolerance
/// neighborhood of the target (used to pre-filter anchor candidates).
pub struct PdContext<'a> {
    pub scenario: &'a Scenario,
    pub boundary: Vec<Cell>,
    pub target_field: DistanceField,
    near_target_field: DistanceField,
    pub touch_tol: f64,
}

impl<'a> PdContext<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        let boundary = scenario.boundary_cells()?;
        let target_field = solve(scenario, &SourceRegion::Mask(scenario.target.clone()))?;
        let touch_tol = TOUCH_TOL_CELLS * scenario.grid.cell_size;
        let mut near = Mask::new(scenario.grid.width, scenario.grid.height);
        for i in 0..target_field.values.len() {
            if target_field.values[i] <= touch_tol {
                near.set_idx(i, true);
            }
        }
        let near_target_field = solve(scenario, &SourceRegion::Mask(near))?;
        Ok(PdContext {
            scenario,
            boundary,
            target_field,
            near_target_field,
            touch_tol,
        })
    }

    /// Boundary cells sampled every `stride` positions along the rim.
    pub fn anchors(&self, stride: usize) -> Vec<Cell> {
        self.boundary
            .iter()
            .copied()
            .step_by(stride.max(1))
            .collect()
    }

    /// Stride giving roughly 128 anchors on this boundary.
    pub fn default_stride(&self) -> usize {
        (self.boundary.len() / 128).max(1)
    }
}

/// Partition the free space by the rasterized path and flood-fill from the
/// attacker. None if the attacker's cell is on the path.
pub fn side_partition(
    scenario: &Scenario,
    path: &DefensePath,
    attacker_pos: Vec2,
) -> Result<Option<SidePartition>> {
    let path_cells = path.raster_cells(scenario);
    let attacker_cell = scenario.free_cell_of(attacker_pos)?;
    if path_cells.get(attacker_cell) {
        return Ok(None);
    }
    let grid = &scenario.grid;
    let attacker_side = flood_fill_4(
        grid.width,
        grid.height,
        |c| scenario.is_free(c) && !path_cells.get(c),
        attacker_cell,
    );
    let mut target_side = Mask::new(grid.width, grid.height);
    for iy in 0..grid.height {
        for ix in 0..grid.width {
            let c = (ix, iy);
            if scenario.is_free(c) && !path_cells.get(c) && !attacker_side.get(c) {
                target_side.set(c, true);
            }
        }
    }
    Ok(Some(SidePartition {
        attacker_side,
        target_side,
        path_cells,
    }))
}

fn path_touches_target(ctx: &PdContext, polyline: &PathPolyline) -> bool {
    polyline.vertices.iter().any(|&v| {
        ctx.target_field
            .distance_to(v)
            .map_or(false, |d| d <= ctx.touch_tol)
    })
}

/// Does the path leave the whole target on the non-attacker side?
fn target_separated(ctx: &PdContext, partition: &SidePartition) -> bool {
    ctx.scenario
        .target
        .iter_set()
        .all(|c| !partition.attacker_side.get(c))
}

/// Build the defense path anchored at `anchor_a`: sweep the remaining
/// boundary cells for the partner anchor whose shortest path touches the
/// target and separates it from the attacker, keeping the shortest such
/// path. None when no partner works for this anchor.
pub fn build_path(
    ctx: &PdContext,
    anchor_a: Cell,
    attacker_pos: Vec2,
) -> Result<Option<AnchoredPath>> {
    let scenario = ctx.scenario;
    if !ctx.boundary.contains(&anchor_a) {
        return Err(Error::NotBoundary(anchor_a.0, anchor_a.1));
    }
    // Target touching the boundary at the anchor itself: only a zero-length
    // chord could graze it, so no usable path starts here.
    if ctx.target_field.value_at_cell(anchor_a) <= ctx.touch_tol {
        return Ok(None);
    }
    let field_a = solve(scenario, &SourceRegion::Cells(vec![anchor_a]))?;
    let near_a = ctx.near_target_field.value_at_cell(anchor_a);
    let slack = eikonal::path_slack(&scenario.grid);

    let start = ctx.boundary.iter().position(|&c| c == anchor_a).unwrap();
    let mut best: Option<(f64, Cell, PathPolyline)> = None;
    for off in 1..ctx.boundary.len() {
        let cand = ctx.boundary[(start + off) % ctx.boundary.len()];
        let len = field_a.value_at_cell(cand);
        if !len.is_finite() {
            continue;
        }
        if ctx.target_field.value_at_cell(cand) <= ctx.touch_tol {
            continue;
        }
        // A touching path must pass through the target neighborhood, so its
        // length is at least the sum of both anchors' distances to it.
        let near_b = ctx.near_target_field.value_at_cell(cand);
        if !near_a.is_finite() || !near_b.is_finite() || near_a + near_b > len + slack {
            continue;
        }
        if let Some((best_len, _, _)) = best {
            if len >= best_len {
                continue;
            }
        }
        let raw = extract_path(&field_a, scenario.grid.center(cand))?;
        // extract_path runs downhill toward anchor_a; flip to run A -> B.
        let mut vertices = raw.vertices;
        vertices.reverse();
        let polyline = PathPolyline::from_vertices(vertices);
        if !path_touches_target(ctx, &polyline) {
            continue;
        }
        let path = DefensePath::new(anchor_a, cand, polyline, scenario);
        match side_partition(scenario, &path, attacker_pos)? {
            Some(p) if target_separated(ctx, &p) => {
                best = Some((path.length(), cand, path.polyline));
            }
            _ => {}
        }
    }
    let Some((_, anchor_b, polyline)) = best else {
        return Ok(None);
    };
    let field_b = solve(scenario, &SourceRegion::Cells(vec![anchor_b]))?;
    Ok(Some(AnchoredPath {
        path: DefensePath::new(anchor_a, anchor_b, polyline, scenario),
        field_a,
        field_b,
    }))
}

/// Rebuild a path from known anchors without the partner sweep.
pub fn rebuild_anchored(
    scenario: &Scenario,
    anchor_a: Cell,
    anchor_b: Cell,
) -> Result<AnchoredPath> {
    let field_a = solve(scenario, &SourceRegion::Cells(vec![anchor_a]))?;
    let raw = extract_path(&field_a, scenario.grid.center(anchor_b))?;
    let mut vertices = raw.vertices;
    vertices.reverse();
    let polyline = PathPolyline::from_vertices(vertices);
    let field_b = solve(scenario, &SourceRegion::Cells(vec![anchor_b]))?;
    Ok(AnchoredPath {
        path: DefensePath::new(anchor_a, anchor_b, polyline, scenario),
        field_a,
        field_b,
    })
}

/// A point on a path identified by arc length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub point: Vec2,
    pub arc: f64,
}

/// The unique point on the path at the same anchor distance as the attacker,
/// found by bisection on the arc table against the anchor's field.
pub fn attacker_image(
    anchored: &AnchoredPath,
    attacker_pos: Vec2,
    anchor: Anchor,
) -> Result<PathPoint> {
    let field = match anchor {
        Anchor::A => &anchored.field_a,
        Anchor::B => &anchored.field_b,
    };
    let d = field.distance_to(attacker_pos)?;
    if !d.is_finite() {
        return Err(Error::Unreachable(attacker_pos.x, attacker_pos.y));
    }
    let path = &anchored.path;
    let vals: Vec<f64> = path
        .polyline
        .vertices
        .iter()
        .map(|&v| field.distance_to(v).unwrap_or(f64::INFINITY))
        .collect();
    // Distance from an anchor is monotone along a shortest path: increasing
    // from anchor A, decreasing toward anchor B.
    let far = match anchor {
        Anchor::A => *vals.last().unwrap(),
        Anchor::B => vals[0],
    };
    let eps = 1e-9 * (1.0 + far.abs());
    if d > far + eps {
        return Err(Error::ImageBeyondPath);
    }
    let i = match anchor {
        Anchor::A => vals.partition_point(|&v| v < d),
        Anchor::B => vals.partition_point(|&v| v > d),
    };
    if i == 0 {
        return Ok(PathPoint {
            point: path.polyline.vertices[0],
            arc: 0.0,
        });
    }
    if i >= vals.len() {
        return Ok(PathPoint {
            point: *path.polyline.vertices.last().unwrap(),
            arc: path.length(),
        });
    }
    let (v0, v1) = (vals[i - 1], vals[i]);
    let t = if (v1 - v0).abs() > 1e-15 {
        ((d - v0) / (v1 - v0)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let arc = path.arcs[i - 1] + t * (path.arcs[i] - path.arcs[i - 1]);
    Ok(PathPoint {
        point: path.point_at_arc(arc),
        arc,
    })
}

/// Minimum field value over the capture disk around `p`: disk cells plus
/// interpolated samples along the disk's rim. The rim samples keep the
/// minimum continuous in `p`; cell centers alone quantize it in h-steps,
/// which is too coarse for the entry-point balance.
fn capture_disk_min(field: &DistanceField, scenario: &Scenario, p: Vec2) -> Result<f64> {
    let grid = &scenario.grid;
    let r = scenario.capture_radius;
    let center = scenario.free_cell_of(p)?;
    let mut min = field.interp_or_inf(p);
    let rc = (r / grid.cell_size).ceil() as isize + 1;
    for dy in -rc..=rc {
        for dx in -rc..=rc {
            let nx = center.0 as isize + dx;
            let ny = center.1 as isize + dy;
            if nx < 0 || ny < 0 || nx as usize >= grid.width || ny as usize >= grid.height {
                continue;
            }
            let c = (nx as usize, ny as usize);
            if !scenario.is_free(c) || grid.center(c).distance(p) > r {
                continue;
            }
            min = min.min(field.value_at_cell(c));
        }
    }
    if r > 0.0 {
        let samples = ((std::f64::consts::TAU * r / (0.5 * grid.cell_size)).ceil() as usize)
            .clamp(8, 256);
        for k in 0..samples {
            let theta = std::f64::consts::TAU * k as f64 / samples as f64;
            let q = p + Vec2::new(r * theta.cos(), r * theta.sin());
            if let Some(cell) = grid.cell_of(q) {
                if scenario.is_free(cell) {
                    min = min.min(field.interp_or_inf(q));
                }
            }
        }
    }
    Ok(min)
}

/// Regions of points at least as close to an anchor as the capture disk
/// around a path point is.
#[derive(Debug, Clone)]
pub struct InducedRegions {
    pub point: Vec2,
    pub threshold_a: f64,
    pub threshold_b: f64,
    pub region_a: Mask,
    pub region_b: Mask,
}

pub fn induced_regions(
    scenario: &Scenario,
    anchored: &AnchoredPath,
    p: Vec2,
) -> Result<InducedRegions> {
    let threshold_a = capture_disk_min(&anchored.field_a, scenario, p)?;
    let threshold_b = capture_disk_min(&anchored.field_b, scenario, p)?;
    let sublevel = |field: &DistanceField, thr: f64| {
        let mut m = Mask::new(scenario.grid.width, scenario.grid.height);
        for i in 0..field.values.len() {
            if field.values[i] <= thr {
                m.set_idx(i, true);
            }
        }
        m
    };
    Ok(InducedRegions {
        point: p,
        threshold_a,
        threshold_b,
        region_a: sublevel(&anchored.field_a, threshold_a),
        region_b: sublevel(&anchored.field_b, threshold_b),
    })
}

/// Balanced first-entry point on a path for a given attacker position.
#[derive(Debug, Clone, Copy)]
pub struct EntryPoint {
    pub point: Vec2,
    pub arc: f64,
    /// Attacker's geodesic distance to the union of the induced regions at
    /// this entry point, clamped at zero (distance units; divide by the
    /// attacker speed for time).
    pub clearance: f64,
    /// Imbalance of the two region arrival distances at the returned point,
    /// in distance units; small unless the root was clamped to an endpoint.
    pub residual: f64,
    pub clamped: bool,
}

/// Find the entry point where the attacker's distances to the two induced
/// regions balance, by bisection on arc length. The region distances use
/// the closed form `dist(x, anchor) - dist(disk(p), anchor)`. When the
/// balance function has no sign change, the nearer endpoint is returned and
/// flagged as clamped.
pub fn find_entry_point(
    scenario: &Scenario,
    anchored: &AnchoredPath,
    attacker_pos: Vec2,
) -> Result<EntryPoint> {
    let d_a = anchored.field_a.distance_to(attacker_pos)?;
    let d_b = anchored.field_b.distance_to(attacker_pos)?;
    if !d_a.is_finite() || !d_b.is_finite() {
        return Err(Error::Unreachable(attacker_pos.x, attacker_pos.y));
    }
    let len = anchored.path.length();
    let balance = |s: f64| -> Result<f64> {
        let p = anchored.path.point_at_arc(s);
        let c_a = capture_disk_min(&anchored.field_a, scenario, p)?;
        let c_b = capture_disk_min(&anchored.field_b, scenario, p)?;
        Ok((d_a - c_a) - (d_b - c_b))
    };
    let tol = scenario.grid.cell_size * 0.25;
    let (mut lo, mut hi) = (0.0, len);
    let g_lo = balance(lo)?;
    let g_hi = balance(hi)?;
    let (arc, residual, clamped) = if g_lo >= 0.0 && g_hi <= 0.0 {
        // Balance decreases along the path; bisect to the sign change.
        let mut mid = 0.5 * (lo + hi);
        let mut g_mid = balance(mid)?;
        while hi - lo > tol {
            if g_mid >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            mid = 0.5 * (lo + hi);
            g_mid = balance(mid)?;
        }
        (mid, g_mid, false)
    } else if g_lo.abs() <= g_hi.abs() {
        (0.0, g_lo, true)
    } else {
        (len, g_hi, true)
    };
    let point = anchored.path.point_at_arc(arc);
    let c_a = capture_disk_min(&anchored.field_a, scenario, point)?;
    let c_b = capture_disk_min(&anchored.field_b, scenario, point)?;
    let clearance = (d_a - c_a).min(d_b - c_b).max(0.0);
    Ok(EntryPoint {
        point,
        arc,
        clearance,
        residual,
        clamped,
    })
}

/// Can the defender at `defender_pos` hold this path against the attacker?
/// Sufficient for a slower attacker; exact for equal speeds with the
/// defender starting on the path.
pub fn strongly_defendable_from(
    scenario: &Scenario,
    anchored: &AnchoredPath,
    attacker_pos: Vec2,
    v_a: f64,
    defender_pos: Vec2,
    v_d: f64,
) -> Result<bool> {
    if v_a > v_d {
        return Err(Error::BadConfig(format!(
            "path defense requires attacker speed {v_a} <= defender speed {v_d}"
        )));
    }
    let entry = find_entry_point(scenario, anchored, attacker_pos)?;
    let entry_cell = scenario.free_cell_of(entry.point)?;
    let field_p = solve(scenario, &SourceRegion::Cells(vec![entry_cell]))?;
    let t_d = field_p.travel_time(defender_pos, v_d)?;
    Ok(t_d <= entry.clearance / v_a)
}

/// Defender positions from which one path is held against one attacker.
#[derive(Debug, Clone)]
pub struct WinningRegion {
    pub entry: EntryPoint,
    pub mask: Mask,
}

/// One field solve from the entry point; the mask is its sublevel set at
/// the attacker's clearance scaled by the speed ratio.
pub fn winning_region(
    scenario: &Scenario,
    anchored: &AnchoredPath,
    attacker_pos: Vec2,
    v_a: f64,
    v_d: f64,
) -> Result<WinningRegion> {
    let entry = find_entry_point(scenario, anchored, attacker_pos)?;
    let entry_cell = scenario.free_cell_of(entry.point)?;
    let field_p = solve(scenario, &SourceRegion::Cells(vec![entry_cell]))?;
    let radius = entry.clearance * v_d / v_a;
    let mut mask = Mask::new(scenario.grid.width, scenario.grid.height);
    for i in 0..field_p.values.len() {
        if field_p.values[i] <= radius {
            mask.set_idx(i, true);
        }
    }
    Ok(WinningRegion { entry, mask })
}

/// Speeds and anchor sampling for slice computation.
#[derive(Debug, Clone, Copy)]
pub struct SliceParams {
    pub v_a: f64,
    pub v_d: f64,
    /// Step through the boundary ordering; 1 = every boundary cell.
    pub anchor_stride: usize,
}

/// Metadata for one path that contributed to a slice union.
#[derive(Debug, Clone)]
pub struct SlicePath {
    pub anchor_a_cell: Cell,
    pub anchor_b_cell: Cell,
    pub entry: EntryPoint,
    pub path_length: f64,
}

/// Union of per-path winning regions for one attacker position.
#[derive(Debug, Clone)]
pub struct SliceUnion {
    pub mask: Mask,
    /// Per cell, the index into `paths` of the first path that claimed it;
    /// -1 where unclaimed.
    pub claimed_by: Vec<i32>,
    pub paths: Vec<SlicePath>,
}

/// Build paths for every sampled anchor and union their winning regions.
/// Anchors are processed in parallel; the reduction runs in anchor order so
/// the result (including provenance) is independent of scheduling.
pub fn slice_union(ctx: &PdContext, attacker_pos: Vec2, params: &SliceParams) -> Result<SliceUnion> {
    if params.anchor_stride == 0 {
        return Err(Error::BadConfig("anchor_stride must be >= 1".into()));
    }
    if params.v_a > params.v_d {
        return Err(Error::BadConfig(format!(
            "path defense requires attacker speed {} <= defender speed {}",
            params.v_a, params.v_d
        )));
    }
    let scenario = ctx.scenario;
    let anchors = ctx.anchors(params.anchor_stride);
    let per_anchor: Vec<Option<(SlicePath, Mask)>> = anchors
        .par_iter()
        .map(|&anchor| -> Result<Option<(SlicePath, Mask)>> {
            let Some(anchored) = build_path(ctx, anchor, attacker_pos)? else {
                return Ok(None);
            };
            let region = winning_region(scenario, &anchored, attacker_pos, params.v_a, params.v_d)?;
            Ok(Some((
                SlicePath {
                    anchor_a_cell: anchored.path.anchor_a_cell,
                    anchor_b_cell: anchored.path.anchor_b_cell,
                    entry: region.entry,
                    path_length: anchored.path.length(),
                },
                region.mask,
            )))
        })
        .collect::<Result<Vec<_>>>()?;

    let grid = &scenario.grid;
    let mut mask = Mask::new(grid.width, grid.height);
    let mut claimed_by = vec![-1_i32; grid.cell_count()];
    let mut paths = Vec::new();
    for (info, region) in per_anchor.into_iter().flatten() {
        let id = paths.len() as i32;
        for c in region.iter_set() {
            let idx = grid.index(c);
            if claimed_by[idx] < 0 {
                claimed_by[idx] = id;
            }
        }
        mask.union_with(&region);
        paths.push(info);
    }
    Ok(SliceUnion {
        mask,
        claimed_by,
        paths,
    })
}

/// Pairwise outcome by path defense: does the defender sit inside some
/// path's winning region for this attacker position? Conservative toward
/// the defender. Returns the first witnessing path when the answer is yes.
pub fn pairwise_outcome(
    ctx: &PdContext,
    attacker_pos: Vec2,
    v_a: f64,
    defender_pos: Vec2,
    v_d: f64,
    anchor_stride: usize,
) -> Result<(bool, Option<SlicePath>)> {
    if v_a > v_d {
        return Err(Error::BadConfig(format!(
            "path defense requires attacker speed {v_a} <= defender speed {v_d}"
        )));
    }
    let scenario = ctx.scenario;
    for anchor in ctx.anchors(anchor_stride) {
        let Some(anchored) = build_path(ctx, anchor, attacker_pos)? else {
            continue;
        };
        let entry = find_entry_point(scenario, &anchored, attacker_pos)?;
        let entry_cell = scenario.free_cell_of(entry.point)?;
        let field_p = solve(scenario, &SourceRegion::Cells(vec![entry_cell]))?;
        let t_d = field_p.travel_time(defender_pos, v_d)?;
        if t_d <= entry.clearance / v_a {
            return Ok((
                true,
                Some(SlicePath {
                    anchor_a_cell: anchored.path.anchor_a_cell,
                    anchor_b_cell: anchored.path.anchor_b_cell,
                    entry,
                    path_length: anchored.path.length(),
                }),
            ));
        }
    }
    Ok((false, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::scenario::PlayerState;

    /// 41x41 square, 5x5-cell target block at the center, attacker
    /// lower-left, defender upper-right.
    fn arena() -> Scenario {
        let n = 41;
        let grid = GridSpec::new(n, n, 0.025).unwrap();
        let mut target = Mask::new(n, n);
        for iy in 18..=22 {
            for ix in 18..=22 {
                target.set((ix, iy), true);
            }
        }
        Scenario {
            grid,
            obstacles: Mask::new(n, n),
            target,
            attackers: vec![PlayerState {
                position: grid.center((6, 6)),
                max_speed: 1.0,
            }],
            defenders: vec![PlayerState {
                position: grid.center((34, 34)),
                max_speed: 1.0,
            }],
            capture_radius: 0.05,
            required_reachers: 1,
        }
    }

    #[test]
    fn build_path_tangent_chord() {
        let s = arena();
        let ctx = PdContext::new(&s).unwrap();
        let anchor = (0, 20); // mid-left edge
        let attacker = s.attackers[0].position;
        let anchored = build_path(&ctx, anchor, attacker).unwrap().expect("path");
        let path = &anchored.path;
        // Touches the target within tolerance.
        let min_d = path
            .polyline
            .vertices
            .iter()
            .map(|&v| ctx.target_field.distance_to(v).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(min_d <= ctx.touch_tol, "min target distance {min_d}");
        // Separates target from the attacker.
        let part = side_partition(&s, path, attacker).unwrap().unwrap();
        assert!(target_separated(&ctx, &part));
        // Grazing chord from the left edge past the central block exits on
        // the far half of the rim.
        assert!(path.anchor_b_cell.0 > 20 || path.anchor_b_cell.1 > 20);
        // Arc table is strictly increasing and ends at the length.
        for w in path.arcs.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!((path.arcs.last().unwrap() - path.length()).abs() < 1e-9);
        // Endpoints within a cell of the anchors.
        assert!(path.polyline.vertices[0].distance(path.anchor_a) < s.grid.cell_size);
        assert!(
            path.polyline
                .vertices
                .last()
                .unwrap()
                .distance(path.anchor_b)
                < s.grid.cell_size
        );
    }

    #[test]
    fn build_path_none_in_pocket() {
        // Anchor inside a walled pocket whose mouth is filled by the target:
        // every escaping path crosses the target, so the target is never
        // strictly on one side.
        let mut s = arena();
        s.target = Mask::new(41, 41);
        for iy in 16..=24 {
            for ix in 13..=16 {
                s.target.set((ix, iy), true);
            }
        }
        for ix in 0..=12 {
            s.obstacles.set((ix, 15), true);
            s.obstacles.set((ix, 25), true);
        }
        s.attackers[0].position = s.grid.center((4, 20));
        let ctx = PdContext::new(&s).unwrap();
        let got = build_path(&ctx, (0, 20), s.attackers[0].position).unwrap();
        assert!(got.is_none());
    }

    #[test]
    fn build_path_degenerate_target_at_anchor() {
        let mut s = arena();
        // Target hugs the left boundary around the anchor.
        s.target = Mask::new(41, 41);
        for iy in 18..=22 {
            for ix in 0..=2 {
                s.target.set((ix, iy), true);
            }
        }
        let ctx = PdContext::new(&s).unwrap();
        let got = build_path(&ctx, (0, 20), s.attackers[0].position).unwrap();
        assert!(got.is_none());
    }

    #[test]
    fn image_fixed_points() {
        let s = arena();
        // Straight horizontal path across the middle.
        let anchored = rebuild_anchored(&s, (0, 20), (40, 20)).unwrap();
        let h = s.grid.cell_size;
        // Attacker exactly on the path maps to itself.
        let on_path = anchored.path.point_at_arc(0.4);
        let img = attacker_image(&anchored, on_path, Anchor::A).unwrap();
        assert!(img.point.distance(on_path) <= 2.0 * h, "{:?}", img.point);
        // Attacker at the anchor maps to arc zero.
        let img0 = attacker_image(&anchored, anchored.path.anchor_a, Anchor::A).unwrap();
        assert!(img0.arc <= 2.0 * h);
        // Off-path attacker at perpendicular offset d from arc s0 maps to
        // arc sqrt(s0^2 + d^2).
        let s0 = 0.5;
        let d = 0.3;
        let base = anchored.path.point_at_arc(s0);
        let off = Vec2::new(base.x, base.y + d);
        let img2 = attacker_image(&anchored, off, Anchor::A).unwrap();
        let expect = (s0 * s0 + d * d).sqrt();
        assert!(
            (img2.arc - expect).abs() <= eikonal::path_slack(&s.grid),
            "arc {} expected {expect}",
            img2.arc
        );
        // Image beyond the far endpoint errors out.
        let far_corner = s.grid.center((40, 40));
        let r = attacker_image(&anchored, far_corner, Anchor::A);
        assert!(matches!(r, Err(Error::ImageBeyondPath)));
    }

    #[test]
    fn induced_region_thresholds() {
        let mut s = arena();
        let anchored = rebuild_anchored(&s, (0, 20), (40, 20)).unwrap();
        let len = anchored.path.length();
        let h = s.grid.cell_size;

        // Point capture set: thresholds are the plain anchor distances.
        s.capture_radius = 0.0;
        let p = anchored.path.point_at_arc(0.3);
        let r = induced_regions(&s, &anchored, p).unwrap();
        assert!((r.threshold_a - 0.3).abs() <= 2.0 * h, "{}", r.threshold_a);
        assert!(
            (r.threshold_b - (len - 0.3)).abs() <= 2.0 * h,
            "{}",
            r.threshold_b
        );

        // Straight path in the open: thresholds shrink by the radius.
        s.capture_radius = 0.1;
        let r = induced_regions(&s, &anchored, p).unwrap();
        assert!((r.threshold_a - 0.2).abs() <= 2.0 * h, "{}", r.threshold_a);
        assert!(
            (r.threshold_b - (len - 0.4)).abs() <= 2.0 * h,
            "{}",
            r.threshold_b
        );
        assert!(r.threshold_a >= 0.0 && r.threshold_b >= 0.0);

        // Capture radius swallowing the whole path: thresholds collapse and
        // the regions shrink to the anchors.
        s.capture_radius = 2.0 * len;
        let r = induced_regions(&s, &anchored, p).unwrap();
        assert_eq!(r.threshold_a, 0.0);
        assert_eq!(r.threshold_b, 0.0);
        assert!(r.region_a.get(anchored.path.anchor_a_cell));
        assert!(r.region_a.count() <= 4);
    }

    #[test]
    fn entry_point_symmetry_and_shift() {
        let s = arena();
        let anchored = rebuild_anchored(&s, (0, 20), (40, 20)).unwrap();
        let len = anchored.path.length();
        let h = s.grid.cell_size;
        // Attacker on the perpendicular bisector: entry at the midpoint.
        let mid_x = 0.5 * (anchored.path.anchor_a.x + anchored.path.anchor_b.x);
        let attacker = Vec2::new(mid_x, s.grid.center((20, 30)).y);
        let ep = find_entry_point(&s, &anchored, attacker).unwrap();
        assert!(!ep.clamped);
        assert!((ep.arc - 0.5 * len).abs() <= 2.0 * h, "arc {}", ep.arc);
        assert!(ep.residual.abs() <= h);

        // Attacker near anchor A pulls the entry toward A.
        let near_a = Vec2::new(anchored.path.anchor_a.x + 4.0 * h, attacker.y);
        let ep_a = find_entry_point(&s, &anchored, near_a).unwrap();
        assert!(ep_a.arc < 0.5 * len);

        // Point-capture algebraic form on the straight path.
        let mut s0 = s.clone();
        s0.capture_radius = 0.0;
        let x = Vec2::new(mid_x - 0.2, attacker.y);
        let ep0 = find_entry_point(&s0, &anchored, x).unwrap();
        let da = x.distance(anchored.path.anchor_a);
        let db = x.distance(anchored.path.anchor_b);
        let expect = 0.5 * (len + da - db);
        assert!(
            (ep0.arc - expect).abs() <= eikonal::path_slack(&s.grid),
            "arc {} expected {expect}",
            ep0.arc
        );
    }

    #[test]
    fn defendability_threshold() {
        let s = arena();
        let anchored = rebuild_anchored(&s, (0, 20), (40, 20)).unwrap();
        let attacker = s.grid.center((20, 30));
        let ep = find_entry_point(&s, &anchored, attacker).unwrap();
        assert!(ep.clearance > 0.0);
        // Defender at the entry point wins.
        assert!(strongly_defendable_from(&s, &anchored, attacker, 1.0, ep.point, 1.0).unwrap());
        // Attacker already at an anchor: clearance zero, distant defender
        // loses against any positive travel time.
        let inside = anchored.path.anchor_a;
        let ep_in = find_entry_point(&s, &anchored, inside).unwrap();
        assert_eq!(ep_in.clearance, 0.0);
        assert!(!strongly_defendable_from(
            &s,
            &anchored,
            inside,
            1.0,
            s.grid.center((30, 5)),
            1.0
        )
        .unwrap());
        // Margin on either side of the time balance flips the outcome.
        let slack = eikonal::path_slack(&s.grid);
        let inside_pos = ep.point + Vec2::new(0.0, ep.clearance - slack);
        let outside_pos = ep.point + Vec2::new(0.0, ep.clearance + slack);
        assert!(
            strongly_defendable_from(&s, &anchored, attacker, 1.0, inside_pos, 1.0).unwrap()
        );
        assert!(
            !strongly_defendable_from(&s, &anchored, attacker, 1.0, outside_pos, 1.0).unwrap()
        );
        // Speed precondition.
        assert!(strongly_defendable_from(&s, &anchored, attacker, 2.0, ep.point, 1.0).is_err());
    }

    #[test]
    fn winning_region_is_a_disk_in_the_open() {
        let s = arena();
        let anchored = rebuild_anchored(&s, (0, 20), (40, 20)).unwrap();
        let attacker = s.grid.center((20, 32));
        let region = winning_region(&s, &anchored, attacker, 1.0, 1.0).unwrap();
        let ep = region.entry;
        let radius = ep.clearance; // equal speeds
        let slack = eikonal::dist_slack(&s.grid);
        for iy in 0..41 {
            for ix in 0..41 {
                let d = s.grid.center((ix, iy)).distance(ep.point);
                if d <= radius - slack {
                    assert!(region.mask.get((ix, iy)), "missing cell at distance {d}");
                }
                if d >= radius + slack {
                    assert!(!region.mask.get((ix, iy)), "extra cell at distance {d}");
                }
            }
        }
        // Entry point's own cell is always in the region.
        assert!(region.mask.get(s.grid.cell_of(ep.point).unwrap()));
    }

    #[test]
    fn zero_clearance_region_is_entry_cell() {
        let s = arena();
        let anchored = rebuild_anchored(&s, (0, 20), (40, 20)).unwrap();
        // Attacker at anchor A: clearance clamps to zero.
        let inside = anchored.path.anchor_a;
        let region = winning_region(&s, &anchored, inside, 1.0, 1.0).unwrap();
        assert_eq!(region.entry.clearance, 0.0);
        let cells: Vec<Cell> = region.mask.iter_set().collect();
        assert_eq!(cells, vec![s.grid.cell_of(region.entry.point).unwrap()]);
    }

    #[test]
    fn slice_union_monotone_in_anchor_count() {
        let s = arena();
        let ctx = PdContext::new(&s).unwrap();
        let attacker = s.attackers[0].position;
        let coarse = slice_union(
            &ctx,
            attacker,
            &SliceParams {
                v_a: 1.0,
                v_d: 1.0,
                anchor_stride: 16,
            },
        )
        .unwrap();
        let fine = slice_union(
            &ctx,
            attacker,
            &SliceParams {
                v_a: 1.0,
                v_d: 1.0,
                anchor_stride: 8,
            },
        )
        .unwrap();
        assert!(coarse.paths.len() <= fine.paths.len());
        assert!(coarse.mask.is_subset_of(&fine.mask));
        assert!(!fine.mask.is_empty());
        // Provenance indexes are valid and cover exactly the mask.
        for (i, &c) in fine.claimed_by.iter().enumerate() {
            assert_eq!(c >= 0, fine.mask.get_idx(i));
            assert!(c < fine.paths.len() as i32);
        }
    }

    #[test]
    fn pairwise_matches_union_membership() {
        let s = arena();
        let ctx = PdContext::new(&s).unwrap();
        let attacker = s.attackers[0].position;
        let union = slice_union(
            &ctx,
            attacker,
            &SliceParams {
                v_a: 1.0,
                v_d: 1.0,
                anchor_stride: 8,
            },
        )
        .unwrap();
        let inside = union
            .mask
            .iter_set()
            .next()
            .map(|c| s.grid.center(c))
            .expect("nonempty union");
        let (wins, witness) = pairwise_outcome(&ctx, attacker, 1.0, inside, 1.0, 8).unwrap();
        assert!(wins);
        assert!(witness.is_some());
        // A far-corner defender with the attacker adjacent to the target
        // cannot be covered by any path.
        let hard_attacker = s.grid.center((17, 17));
        let (wins, _) =
            pairwise_outcome(&ctx, hard_attacker, 1.0, s.grid.center((1, 39)), 1.0, 8).unwrap();
        assert!(!wins);
    }

    #[test]
    fn slower_attacker_never_shrinks_region() {
        let s = arena();
        let anchored = rebuild_anchored(&s, (0, 20), (40, 20)).unwrap();
        let attacker = s.grid.center((20, 31));
        let fast = winning_region(&s, &anchored, attacker, 1.0, 1.0).unwrap();
        let slow = winning_region(&s, &anchored, attacker, 0.5, 1.0).unwrap();
        assert!(fast.mask.is_subset_of(&slow.mask));
    }
}
