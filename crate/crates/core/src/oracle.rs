//! Ground-truth pairwise outcomes by backward induction on a coarsened
//! joint state space.
//!
//! The two-player game is discretized: each player occupies a coarse cell,
//! one step lasts `k*h / max(v_a, v_d)`, and per step the attacker commits
//! a move before the defender responds. The defender-moves-second rule
//! biases outcomes toward the defender, so an attacker-win here is robust
//! and the path-defense soundness check (its winning claims must land
//! inside this table's defender-winning set) cannot false-alarm.
//!
//! A joint state is attacker-winning when some attacker move forces a win
//! against every defender response; the attacker-winning set grows
//! monotonically under Jacobi sweeps until a fixed point. States never
//! reached by that set are defender wins: indefinite delay counts for the
//! defender. Tie rule: simultaneous capture and target arrival is a capture.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Mask, Vec2};
use crate::scenario::Scenario;

/// Joint-state cap used when choosing the coarsening automatically.
pub const AUTO_STATE_TARGET: usize = 4_000_000;
/// Default hard budget on joint states (3 bytes per state live at once).
pub const DEFAULT_STATE_BUDGET: usize = 16_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    AttackerWin,
    DefenderWin,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleParams {
    /// Coarsening factor; 0 picks the smallest factor fitting the budget.
    pub coarsen: usize,
    /// Sweep cap; 0 picks a diameter-based default.
    pub horizon: usize,
    pub state_budget: usize,
    /// Attacker speed; 0.0 uses the scenario's fastest attacker.
    pub v_a: f64,
    /// Defender speed; 0.0 uses the scenario's slowest defender.
    pub v_d: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            coarsen: 0,
            horizon: 0,
            state_budget: DEFAULT_STATE_BUDGET,
            v_a: 0.0,
            v_d: 0.0,
        }
    }
}

const STATUS_UNKNOWN: u8 = 0;
const STATUS_ATTACKER: u8 = 1;
const STATUS_DEFENDER: u8 = 2;

/// Solved outcome table for one (v_a, v_d) pair.
#[derive(Debug, Clone)]
pub struct ValueTable {
    pub fine_grid: GridSpec,
    pub k: usize,
    pub coarse_w: usize,
    pub coarse_h: usize,
    pub v_a: f64,
    pub v_d: f64,
    pub capture_radius: f64,
    pub scenario_hash: u64,
    pub sweeps: usize,
    /// False when the sweep cap was hit before the fixed point; pending
    /// states were then resolved as defender wins.
    pub converged: bool,
    /// True when the requested horizon was below the diameter-based bound.
    pub horizon_warning: bool,
    /// Coarse free cells in row-major order.
    free_cells: Vec<u32>,
    /// Coarse cell index -> ordinal in `free_cells`, or -1.
    free_index: Vec<i32>,
    /// Outcome per joint state, indexed attacker_ordinal * n + defender.
    status: Vec<u8>,
}

struct CoarseGrid {
    w: usize,
    h: usize,
    k: usize,
    free: Mask,
    centers: Vec<Vec2>,
}

fn coarsen(scenario: &Scenario, k: usize) -> CoarseGrid {
    let fine = &scenario.grid;
    let w = fine.width.div_ceil(k);
    let h = fine.height.div_ceil(k);
    let mut free = Mask::new(w, h);
    let mut centers = Vec::with_capacity(w * h);
    for cy in 0..h {
        for cx in 0..w {
            // Conservative inflation: coarse cell free only if every fine
            // cell inside it is free (partial rim cells count as blocked).
            let mut all_free = true;
            for fy in cy * k..((cy + 1) * k) {
                for fx in cx * k..((cx + 1) * k) {
                    if fx >= fine.width || fy >= fine.height || scenario.obstacles.get((fx, fy)) {
                        all_free = false;
                    }
                }
            }
            free.set((cx, cy), all_free);
            centers.push(Vec2::new(
                fine.origin.x + (cx as f64 + 0.5) * k as f64 * fine.cell_size,
                fine.origin.y + (cy as f64 + 0.5) * k as f64 * fine.cell_size,
            ));
        }
    }
    CoarseGrid {
        w,
        h,
        k,
        free,
        centers,
    }
}

/// A coarse cell is target when it overlaps any fine target cell.
fn coarse_target(scenario: &Scenario, cg: &CoarseGrid) -> Mask {
    let mut t = Mask::new(cg.w, cg.h);
    for (fx, fy) in scenario.target.iter_set() {
        t.set((fx / cg.k, fy / cg.k), true);
    }
    t
}

/// Per-step cell offsets for a player: stay plus the eight directions with
/// the step length scaled by the speed ratio and rounded per component.
fn move_offsets(v: f64, v_max: f64) -> Vec<(isize, isize)> {
    let step = v / v_max;
    let mut out = vec![(0_isize, 0_isize)];
    let f = std::f64::consts::FRAC_1_SQRT_2;
    for (ux, uy) in [
        (1.0, 0.0),
        (-1.0, 0.0),
        (0.0, 1.0),
        (0.0, -1.0),
        (f, f),
        (f, -f),
        (-f, f),
        (-f, -f),
    ] {
        let dx = (step * ux).round() as isize;
        let dy = (step * uy).round() as isize;
        if (dx, dy) != (0, 0) && !out.contains(&(dx, dy)) {
            out.push((dx, dy));
        }
    }
    out
}

/// Valid destination ordinals (into the free-cell list) from each free cell.
fn move_table(cg: &CoarseGrid, free_index: &[i32], offsets: &[(isize, isize)]) -> Vec<Vec<u32>> {
    let n = free_index.iter().filter(|&&i| i >= 0).count();
    let mut table = vec![Vec::new(); n];
    for cy in 0..cg.h {
        for cx in 0..cg.w {
            let from = free_index[cy * cg.w + cx];
            if from < 0 {
                continue;
            }
            let moves = &mut table[from as usize];
            for &(dx, dy) in offsets {
                let nx = cx as isize + dx;
                let ny = cy as isize + dy;
                if nx < 0 || ny < 0 || nx as usize >= cg.w || ny as usize >= cg.h {
                    continue;
                }
                let nc = (nx as usize, ny as usize);
                if !cg.free.get(nc) {
                    continue;
                }
                // No cutting between diagonally-touching obstacles.
                if dx != 0 && dy != 0 {
                    let side_a = ((cx as isize + dx) as usize, cy);
                    let side_b = (cx, (cy as isize + dy) as usize);
                    if !cg.free.get(side_a) || !cg.free.get(side_b) {
                        continue;
                    }
                }
                let to = free_index[nc.1 * cg.w + nc.0];
                debug_assert!(to >= 0);
                moves.push(to as u32);
            }
        }
    }
    table
}

/// Solve the discretized two-player game for the whole joint state space.
pub fn solve_joint_game(scenario: &Scenario, params: &OracleParams) -> Result<ValueTable> {
    let v_a = if params.v_a > 0.0 {
        params.v_a
    } else {
        scenario
            .attackers
            .iter()
            .map(|p| p.max_speed)
            .fold(0.0, f64::max)
    };
    let v_d = if params.v_d > 0.0 {
        params.v_d
    } else {
        scenario
            .defenders
            .iter()
            .map(|p| p.max_speed)
            .fold(f64::INFINITY, f64::min)
    };
    if !(v_a > 0.0 && v_d > 0.0 && v_d.is_finite()) {
        return Err(Error::BadConfig("oracle needs positive speeds".into()));
    }

    let budget = params.state_budget;
    let auto_cap = AUTO_STATE_TARGET.min(budget);
    let mut k = params.coarsen;
    if k == 0 {
        k = 1;
        loop {
            let cg = coarsen(scenario, k);
            let free = cg.free.count();
            if free * free <= auto_cap || k > scenario.grid.width.max(scenario.grid.height) {
                break;
            }
            k += 1;
        }
    }
    let cg = coarsen(scenario, k);
    let n_free = cg.free.count();
    if n_free == 0 {
        return Err(Error::EmptySource);
    }
    let states = n_free * n_free;
    if states > budget {
        return Err(Error::BudgetExceeded {
            needed: states,
            budget,
        });
    }

    let mut free_index = vec![-1_i32; cg.w * cg.h];
    let mut free_cells = Vec::with_capacity(n_free);
    for cy in 0..cg.h {
        for cx in 0..cg.w {
            if cg.free.get((cx, cy)) {
                free_index[cy * cg.w + cx] = free_cells.len() as i32;
                free_cells.push((cy * cg.w + cx) as u32);
            }
        }
    }

    let v_max = v_a.max(v_d);
    let attacker_moves = move_table(&cg, &free_index, &move_offsets(v_a, v_max));
    let defender_moves = move_table(&cg, &free_index, &move_offsets(v_d, v_max));
    let target = coarse_target(scenario, &cg);

    // Terminal classes; capture is checked first so it wins ties.
    let mut terminal = vec![STATUS_UNKNOWN; states];
    for (ai, &ac) in free_cells.iter().enumerate() {
        let a_center = cg.centers[ac as usize];
        let a_target = target.get_idx(ac as usize);
        for (di, &dc) in free_cells.iter().enumerate() {
            let idx = ai * n_free + di;
            if a_center.distance(cg.centers[dc as usize]) <= scenario.capture_radius {
                terminal[idx] = STATUS_DEFENDER;
            } else if a_target {
                terminal[idx] = STATUS_ATTACKER;
            }
        }
    }

    let horizon = if params.horizon > 0 {
        params.horizon
    } else {
        4 * (cg.w + cg.h)
    };
    let horizon_warning = horizon < 2 * (cg.w + cg.h);

    let mut prev: Vec<u8> = terminal;
    let mut next = vec![0_u8; states];
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < horizon {
        sweeps += 1;
        let prev_ref = &prev;
        let attacker_moves = &attacker_moves;
        let defender_moves = &defender_moves;
        let changed: usize = next
            .par_chunks_mut(n_free)
            .enumerate()
            .map(|(ai, row)| {
                let mut changes = 0;
                for (di, slot) in row.iter_mut().enumerate() {
                    let idx = ai * n_free + di;
                    let cur = prev_ref[idx];
                    if cur != STATUS_UNKNOWN {
                        *slot = cur;
                        continue;
                    }
                    // Attacker commits; defender answers knowing the move.
                    let mut win = false;
                    'outer: for &a2 in &attacker_moves[ai] {
                        let base = a2 as usize * n_free;
                        for &d2 in &defender_moves[di] {
                            if prev_ref[base + d2 as usize] != STATUS_ATTACKER {
                                continue 'outer;
                            }
                        }
                        win = true;
                        break;
                    }
                    if win {
                        *slot = STATUS_ATTACKER;
                        changes += 1;
                    } else {
                        *slot = STATUS_UNKNOWN;
                    }
                }
                changes
            })
            .sum();
        std::mem::swap(&mut prev, &mut next);
        if changed == 0 {
            converged = true;
            break;
        }
    }
    // Never-winning states are defender wins (indefinite delay).
    for s in prev.iter_mut() {
        if *s == STATUS_UNKNOWN {
            *s = STATUS_DEFENDER;
        }
    }

    Ok(ValueTable {
        fine_grid: scenario.grid,
        k,
        coarse_w: cg.w,
        coarse_h: cg.h,
        v_a,
        v_d,
        capture_radius: scenario.capture_radius,
        scenario_hash: scenario.content_hash(),
        sweeps,
        converged,
        horizon_warning,
        free_cells,
        free_index,
        status: prev,
    })
}

impl ValueTable {
    pub fn joint_states(&self) -> usize {
        self.status.len()
    }

    pub fn free_cell_count(&self) -> usize {
        self.free_cells.len()
    }

    fn ordinal_of(&self, p: Vec2) -> Result<usize> {
        let fine = self
            .fine_grid
            .cell_of(p)
            .ok_or(Error::OutOfDomain(p.x, p.y))?;
        let coarse = (fine.0 / self.k, fine.1 / self.k);
        let idx = self.free_index[coarse.1 * self.coarse_w + coarse.0];
        if idx < 0 {
            return Err(Error::PointInObstacle(p.x, p.y));
        }
        Ok(idx as usize)
    }

    /// Outcome of the joint state containing the two positions.
    pub fn query(&self, attacker: Vec2, defender: Vec2) -> Result<Outcome> {
        let ai = self.ordinal_of(attacker)?;
        let di = self.ordinal_of(defender)?;
        Ok(match self.status[ai * self.free_cell_count() + di] {
            STATUS_ATTACKER => Outcome::AttackerWin,
            _ => Outcome::DefenderWin,
        })
    }

    /// Defender-winning mask over coarse cells at a fixed attacker position.
    pub fn slice(&self, attacker: Vec2) -> Result<Mask> {
        let ai = self.ordinal_of(attacker)?;
        let n = self.free_cell_count();
        let mut mask = Mask::new(self.coarse_w, self.coarse_h);
        for (di, &dc) in self.free_cells.iter().enumerate() {
            if self.status[ai * n + di] == STATUS_DEFENDER {
                mask.set_idx(dc as usize, true);
            }
        }
        Ok(mask)
    }

    /// Defender-winning mask upsampled to the fine grid. Fine cells whose
    /// coarse cell was inflated away stay false.
    pub fn slice_fine(&self, attacker: Vec2) -> Result<Mask> {
        let coarse = self.slice(attacker)?;
        let mut mask = Mask::new(self.fine_grid.width, self.fine_grid.height);
        for fy in 0..self.fine_grid.height {
            for fx in 0..self.fine_grid.width {
                if coarse.get((fx / self.k, fy / self.k)) {
                    mask.set((fx, fy), true);
                }
            }
        }
        Ok(mask)
    }

    /// Is the coarse cell containing `p` inside the table's domain?
    pub fn covers(&self, p: Vec2) -> bool {
        self.ordinal_of(p).is_ok()
    }

    /// (attacker-winning, defender-winning) joint state counts.
    pub fn counts(&self) -> (usize, usize) {
        let a = self
            .status
            .iter()
            .filter(|&&s| s == STATUS_ATTACKER)
            .count();
        (a, self.status.len() - a)
    }

    /// Re-applies one backward-induction sweep and reports whether anything
    /// would change. True at a genuine fixed point.
    pub fn is_fixed_point(&self, scenario: &Scenario) -> bool {
        let cg = coarsen(scenario, self.k);
        let v_max = self.v_a.max(self.v_d);
        let attacker_moves = move_table(&cg, &self.free_index, &move_offsets(self.v_a, v_max));
        let defender_moves = move_table(&cg, &self.free_index, &move_offsets(self.v_d, v_max));
        let target = coarse_target(scenario, &cg);
        let n = self.free_cell_count();
        for (ai, &ac) in self.free_cells.iter().enumerate() {
            let a_center = cg.centers[ac as usize];
            let a_target = target.get_idx(ac as usize);
            for (di, &dc) in self.free_cells.iter().enumerate() {
                let idx = ai * n + di;
                let expect = if a_center.distance(cg.centers[dc as usize]) <= self.capture_radius
                {
                    STATUS_DEFENDER
                } else if a_target {
                    STATUS_ATTACKER
                } else {
                    let mut win = false;
                    'outer: for &a2 in &attacker_moves[ai] {
                        let base = a2 as usize * n;
                        for &d2 in &defender_moves[di] {
                            if self.status[base + d2 as usize] != STATUS_ATTACKER {
                                continue 'outer;
                            }
                        }
                        win = true;
                        break;
                    }
                    if win {
                        STATUS_ATTACKER
                    } else {
                        self.status[idx]
                    }
                };
                if self.status[idx] != expect {
                    return false;
                }
            }
        }
        true
    }

    // Binary format, little endian: magic "RAOT", version, dims, tie-rule
    // byte, speeds, scenario hash, free-cell list, status bytes.

    pub fn write_binary<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"RAOT")?;
        w.write_all(&1_u32.to_le_bytes())?;
        for v in [
            self.k as u32,
            self.fine_grid.width as u32,
            self.fine_grid.height as u32,
            self.coarse_w as u32,
            self.coarse_h as u32,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        // Tie rule 1: capture beats simultaneous target arrival.
        w.write_all(&[1_u8, self.converged as u8])?;
        for v in [
            self.fine_grid.cell_size,
            self.fine_grid.origin.x,
            self.fine_grid.origin.y,
            self.v_a,
            self.v_d,
            self.capture_radius,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.scenario_hash.to_le_bytes())?;
        w.write_all(&(self.sweeps as u32).to_le_bytes())?;
        w.write_all(&(self.free_cells.len() as u32).to_le_bytes())?;
        for &c in &self.free_cells {
            w.write_all(&c.to_le_bytes())?;
        }
        w.write_all(&self.status)?;
        Ok(())
    }

    pub fn read_binary<R: std::io::Read>(mut r: R) -> Result<ValueTable> {
        fn read_u32<R: std::io::Read>(r: &mut R) -> Result<u32> {
            let mut b = [0_u8; 4];
            r.read_exact(&mut b)?;
            Ok(u32::from_le_bytes(b))
        }
        fn read_f64<R: std::io::Read>(r: &mut R) -> Result<f64> {
            let mut b = [0_u8; 8];
            r.read_exact(&mut b)?;
            Ok(f64::from_le_bytes(b))
        }
        let mut magic = [0_u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"RAOT" {
            return Err(Error::BadConfig("not an oracle table file".into()));
        }
        let version = read_u32(&mut r)?;
        if version != 1 {
            return Err(Error::BadConfig(format!(
                "unsupported oracle table version {version}"
            )));
        }
        let k = read_u32(&mut r)? as usize;
        let fw = read_u32(&mut r)? as usize;
        let fh = read_u32(&mut r)? as usize;
        let cw = read_u32(&mut r)? as usize;
        let ch = read_u32(&mut r)? as usize;
        let mut two = [0_u8; 2];
        r.read_exact(&mut two)?;
        if two[0] != 1 {
            return Err(Error::BadConfig(format!("unknown tie rule {}", two[0])));
        }
        let cell_size = read_f64(&mut r)?;
        let ox = read_f64(&mut r)?;
        let oy = read_f64(&mut r)?;
        let v_a = read_f64(&mut r)?;
        let v_d = read_f64(&mut r)?;
        let capture_radius = read_f64(&mut r)?;
        let mut u64buf = [0_u8; 8];
        r.read_exact(&mut u64buf)?;
        let scenario_hash = u64::from_le_bytes(u64buf);
        let sweeps = read_u32(&mut r)? as usize;
        let n_free = read_u32(&mut r)? as usize;
        let mut free_cells = Vec::with_capacity(n_free);
        for _ in 0..n_free {
            free_cells.push(read_u32(&mut r)?);
        }
        let mut status = vec![0_u8; n_free * n_free];
        r.read_exact(&mut status)?;
        let mut free_index = vec![-1_i32; cw * ch];
        for (i, &c) in free_cells.iter().enumerate() {
            free_index[c as usize] = i as i32;
        }
        let fine_grid = GridSpec {
            width: fw,
            height: fh,
            cell_size,
            origin: Vec2::new(ox, oy),
        };
        Ok(ValueTable {
            fine_grid,
            k,
            coarse_w: cw,
            coarse_h: ch,
            v_a,
            v_d,
            capture_radius,
            scenario_hash,
            sweeps,
            converged: two[1] != 0,
            horizon_warning: false,
            free_cells,
            free_index,
            status,
        })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::scenario::PlayerState;

    /// Corridor: one free row, target at the right end, capture only on the
    /// same cell.
    pub(crate) fn corridor(width: usize) -> Scenario {
        let grid = GridSpec::new(width, 3, 0.1).unwrap();
        let mut obstacles = Mask::new(width, 3);
        for ix in 0..width {
            obstacles.set((ix, 0), true);
            obstacles.set((ix, 2), true);
        }
        let mut target = Mask::new(width, 3);
        target.set((width - 1, 1), true);
        Scenario {
            grid,
            obstacles,
            target,
            attackers: vec![PlayerState {
                position: grid.center((0, 1)),
                max_speed: 1.0,
            }],
            defenders: vec![PlayerState {
                position: grid.center((width - 2, 1)),
                max_speed: 1.0,
            }],
            capture_radius: 0.01,
            required_reachers: 1,
        }
    }

    fn empty_square(n: usize) -> Scenario {
        let grid = GridSpec::new(n, n, 0.1).unwrap();
        let mut target = Mask::new(n, n);
        target.set((n / 2, n / 2), true);
        Scenario {
            grid,
            obstacles: Mask::new(n, n),
            target,
            attackers: vec![PlayerState {
                position: grid.center((1, 1)),
                max_speed: 1.0,
            }],
            defenders: vec![PlayerState {
                position: grid.center((n - 2, n - 2)),
                max_speed: 1.0,
            }],
            capture_radius: 0.05,
            required_reachers: 1,
        }
    }

    #[test]
    fn corridor_matches_hand_solution() {
        let s = corridor(12);
        let table = solve_joint_game(&s, &OracleParams::default()).unwrap();
        assert!(table.converged);
        assert!(table.is_fixed_point(&s));
        // Defender wins exactly when it stands between the attacker and the
        // target (or on the attacker).
        for a in 0..12 {
            for d in 0..12 {
                let got = table
                    .query(s.grid.center((a, 1)), s.grid.center((d, 1)))
                    .unwrap();
                let expect = if d >= a {
                    Outcome::DefenderWin
                } else {
                    Outcome::AttackerWin
                };
                assert_eq!(got, expect, "a={a} d={d}");
            }
        }
    }

    #[test]
    fn terminal_rules() {
        let s = empty_square(9);
        let table = solve_joint_game(&s, &OracleParams::default()).unwrap();
        let target_pos = s.grid.center((4, 4));
        // Attacker starting inside the target wins outright...
        assert_eq!(
            table.query(target_pos, s.grid.center((0, 0))).unwrap(),
            Outcome::AttackerWin
        );
        // ...unless simultaneously captured (capture wins ties).
        assert_eq!(
            table.query(target_pos, target_pos).unwrap(),
            Outcome::DefenderWin
        );
        // Defender within the capture radius wins immediately.
        assert_eq!(
            table
                .query(s.grid.center((1, 1)), s.grid.center((1, 1)))
                .unwrap(),
            Outcome::DefenderWin
        );
    }

    #[test]
    fn slice_contains_capture_disk() {
        let mut s = empty_square(9);
        s.capture_radius = 0.15;
        let table = solve_joint_game(&s, &OracleParams::default()).unwrap();
        let attacker = s.grid.center((2, 2));
        let mask = table.slice(attacker).unwrap();
        for (dx, dy) in [(0_isize, 0_isize), (1, 0), (-1, 0), (0, 1), (0, -1)] {
            let cell = ((2 + dx) as usize, (2 + dy) as usize);
            if s.grid.center(cell).distance(attacker) <= s.capture_radius {
                assert!(mask.get(cell), "cell {cell:?} missing from slice");
            }
        }
    }

    #[test]
    fn defender_speed_monotonicity() {
        let s = empty_square(9);
        let slow = solve_joint_game(
            &s,
            &OracleParams {
                v_d: 1.0,
                ..Default::default()
            },
        )
        .unwrap();
        for v_d in [2.0, 3.0] {
            let fast = solve_joint_game(
                &s,
                &OracleParams {
                    v_d,
                    ..Default::default()
                },
            )
            .unwrap();
            for a in 0..9 {
                for d in 0..9 {
                    let pa = s.grid.center((a, 4));
                    let pd = s.grid.center((d, 6));
                    if slow.query(pa, pd).unwrap() == Outcome::DefenderWin {
                        assert_eq!(
                            fast.query(pa, pd).unwrap(),
                            Outcome::DefenderWin,
                            "v_d={v_d} a={a} d={d}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn capture_radius_monotonicity() {
        let mut s = empty_square(9);
        s.capture_radius = 0.05;
        let small = solve_joint_game(&s, &OracleParams::default()).unwrap();
        s.capture_radius = 0.25;
        let large = solve_joint_game(&s, &OracleParams::default()).unwrap();
        let n = small.free_cell_count();
        assert_eq!(n, large.free_cell_count());
        for idx in 0..n * n {
            if small.status[idx] == STATUS_DEFENDER {
                assert_eq!(large.status[idx], STATUS_DEFENDER);
            }
        }
    }

    #[test]
    fn mirror_symmetry() {
        let s = empty_square(9);
        let table = solve_joint_game(&s, &OracleParams::default()).unwrap();
        for ay in 0..9 {
            for ax in 0..9 {
                for dy in 0..9 {
                    for dx in 0..9 {
                        let orig = table
                            .query(s.grid.center((ax, ay)), s.grid.center((dx, dy)))
                            .unwrap();
                        let mirrored = table
                            .query(s.grid.center((8 - ax, ay)), s.grid.center((8 - dx, dy)))
                            .unwrap();
                        assert_eq!(orig, mirrored, "a=({ax},{ay}) d=({dx},{dy})");
                    }
                }
            }
        }
    }

    #[test]
    fn budget_rejection() {
        let s = empty_square(9);
        let r = solve_joint_game(
            &s,
            &OracleParams {
                coarsen: 1,
                state_budget: 100,
                ..Default::default()
            },
        );
        assert!(matches!(r, Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn binary_roundtrip() {
        let s = corridor(8);
        let table = solve_joint_game(&s, &OracleParams::default()).unwrap();
        let mut buf = Vec::new();
        table.write_binary(&mut buf).unwrap();
        let back = ValueTable::read_binary(&buf[..]).unwrap();
        assert_eq!(back.k, table.k);
        assert_eq!(back.status, table.status);
        assert_eq!(back.free_cells, table.free_cells);
        assert_eq!(back.scenario_hash, table.scenario_hash);
        assert_eq!(back.v_a, table.v_a);
        assert_eq!(back.converged, table.converged);
    }
}
