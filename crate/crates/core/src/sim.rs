//! Time-stepped multiplayer game execution with periodic re-matching.
//!
//! Every rematch interval the pairwise outcome matrix is refreshed, a
//! maximum matching assigns defenders to attackers, and players integrate
//! forward under their policies: attackers descend the distance-to-target
//! field (with an obstacle standoff margin), matched defenders play the
//! strategy their pairwise outcome came from, unmatched defenders chase the
//! nearest attacker. Captured attackers count as permanently blocked, and a
//! matched pair keeps its edge while the assignment persists (a defender
//! executing its winning strategy stays winning), so the reported matching
//! size never decreases under winning play.
//!
//! Everything is deterministic: no randomness, fixed iteration orders, and
//! worker-count-independent reductions.

use std::collections::HashMap;

use crate::eikonal::{solve, solve_on, DistanceField, SourceRegion};
use crate::error::{Error, Result};
use crate::grid::{Mask, Vec2};
use crate::matching::{build_graph, max_matching, OutcomeMatrix, Provenance};
use crate::oracle::{solve_joint_game, OracleParams, Outcome, ValueTable};
use crate::path_defense::{
    attacker_image, rebuild_anchored, slice_union, Anchor, AnchoredPath,
    EntryPoint, PdContext, SliceParams, SlicePath,
};
use crate::scenario::{capture_test, Scenario};

/// Strategy a defender's pairwise outcomes (and play) are based on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefenderStrategy {
    /// Travel to the entry point, intercept the nearer level-set image,
    /// then track it.
    PdSemiOpenLoop,
    /// Straight pursuit; pairwise outcomes from the joint-game table.
    OracleGreedy,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Rematch interval.
    pub rematch_interval: f64,
    /// Integration step; 0.0 picks min(rematch_interval, h / (2 v_max)).
    pub dt: f64,
    pub t_max: f64,
    /// Obstacle standoff for the attacker policy, in world units.
    pub attacker_margin: f64,
    /// Per defender; a single entry broadcasts to the whole team.
    pub strategies: Vec<DefenderStrategy>,
    /// Refresh path-defense edges every this many rematches (they are much
    /// more expensive than table lookups).
    pub pd_refresh_period: usize,
    /// Anchor stride for path-defense slices; 0 = default.
    pub anchor_stride: usize,
    pub oracle: OracleParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            rematch_interval: 0.005,
            dt: 0.0,
            t_max: 3.0,
            attacker_margin: 0.125,
            strategies: vec![DefenderStrategy::OracleGreedy],
            pd_refresh_period: 10,
            anchor_stride: 0,
            oracle: OracleParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimEvent {
    Capture {
        t: f64,
        attacker: usize,
        defender: usize,
    },
    Arrival {
        t: f64,
        attacker: usize,
    },
}

#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub t: f64,
    pub attackers: Vec<Vec2>,
    pub defenders: Vec<Vec2>,
}

#[derive(Debug, Clone)]
pub struct MatchSample {
    pub t: f64,
    /// Matching size over live attackers plus attackers already captured.
    pub effective_size: usize,
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub events: Vec<SimEvent>,
    pub matching_series: Vec<MatchSample>,
}

#[derive(Debug, Clone, Copy)]
pub struct SimAudit {
    pub reached: usize,
    pub captured: usize,
    /// Effective matching size at t = 0.
    pub initial_matching: usize,
    /// N_A minus the initial matching size.
    pub bound_reaching: usize,
    pub matching_nondecreasing: bool,
    /// True when the audit bound held: reached <= bound_reaching.
    pub bound_respected: bool,
}

/// Distance-to-target guidance with an obstacle standoff. The margin field
/// is dropped per query wherever inflation disconnects the attacker.
pub struct AttackerPolicy {
    margin_field: Option<DistanceField>,
    raw_field: DistanceField,
    target: Mask,
}

impl AttackerPolicy {
    pub fn new(scenario: &Scenario, margin: f64) -> Result<AttackerPolicy> {
        if margin < 0.0 {
            return Err(Error::BadConfig("attacker margin must be >= 0".into()));
        }
        let raw_field = solve(scenario, &SourceRegion::Mask(scenario.target.clone()))?;
        let margin_field = if margin > 0.0 {
            let inflated = scenario.obstacles.dilated(margin, scenario.grid.cell_size);
            let mut sources = Mask::new(scenario.grid.width, scenario.grid.height);
            for c in scenario.target.iter_set() {
                if !inflated.get(c) {
                    sources.set(c, true);
                }
            }
            if sources.is_empty() {
                None
            } else {
                solve_on(&scenario.grid, &inflated, &SourceRegion::Mask(sources)).ok()
            }
        } else {
            None
        };
        Ok(AttackerPolicy {
            margin_field,
            raw_field,
            target: scenario.target.clone(),
        })
    }

    /// Unit direction toward the target; the flag is true when the point is
    /// disconnected from the target even without the margin.
    pub fn direction(&self, p: Vec2) -> (Vec2, bool) {
        if let Some(cell) = self.raw_field.grid.cell_of(p) {
            if self.target.get(cell) {
                return (Vec2::ZERO, false);
            }
        }
        if let Some(f) = &self.margin_field {
            if f.distance_to(p).map_or(false, |d| d.is_finite()) {
                if let Some(dir) = f.descent_direction(p) {
                    return (dir, false);
                }
            }
        }
        if self.raw_field.distance_to(p).map_or(false, |d| d.is_finite()) {
            if let Some(dir) = self.raw_field.descent_direction(p) {
                return (dir, false);
            }
            return (Vec2::ZERO, false); // standing on the target rim
        }
        (Vec2::ZERO, true)
    }
}

/// Semi-open-loop controller phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdPhase {
    GotoEntry,
    Intercept,
    Track(Anchor),
}

/// A defender's committed path-defense strategy against one attacker.
pub struct PdCommitment {
    pub anchored: AnchoredPath,
    pub entry: EntryPoint,
    pub entry_field: DistanceField,
    pub phase: PdPhase,
}

impl PdCommitment {
    fn commit(scenario: &Scenario, witness: &SlicePath) -> Result<PdCommitment> {
        let anchored = rebuild_anchored(scenario, witness.anchor_a_cell, witness.anchor_b_cell)?;
        // The entry point is recomputed against the attacker position the
        // witness was made for; the stored witness entry keeps provenance
        // reports stable, the commitment uses the fresh fields.
        let entry = witness.entry;
        let entry_cell = scenario.free_cell_of(entry.point)?;
        let entry_field = solve(scenario, &SourceRegion::Cells(vec![entry_cell]))?;
        Ok(PdCommitment {
            anchored,
            entry,
            entry_field,
            phase: PdPhase::GotoEntry,
        })
    }

    /// Image arc for an anchor, clamping beyond-endpoint cases to the ends.
    fn image_arc(&self, attacker: Vec2, anchor: Anchor) -> (f64, Vec2) {
        match attacker_image(&self.anchored, attacker, anchor) {
            Ok(img) => (img.arc, img.point),
            Err(_) => {
                let path = &self.anchored.path;
                match anchor {
                    Anchor::A => (path.length(), path.anchor_b),
                    Anchor::B => (0.0, path.anchor_a),
                }
            }
        }
    }

    /// One control decision. Advances the phase state machine.
    pub fn direction(
        &mut self,
        scenario: &Scenario,
        defender_pos: Vec2,
        attacker_pos: Vec2,
        v_d: f64,
        dt: f64,
    ) -> Vec2 {
        let h = scenario.grid.cell_size;
        let r_c = scenario.capture_radius;
        if self.phase == PdPhase::GotoEntry {
            if defender_pos.distance(self.entry.point) <= h {
                self.phase = PdPhase::Intercept;
            } else {
                return self
                    .entry_field
                    .descent_direction(defender_pos)
                    .unwrap_or(Vec2::ZERO);
            }
        }
        let path = &self.anchored.path;
        let (arc_d, _) = path.project(defender_pos);
        if self.phase == PdPhase::Intercept {
            let (arc_a, point_a) = self.image_arc(attacker_pos, Anchor::A);
            let (arc_b, point_b) = self.image_arc(attacker_pos, Anchor::B);
            let (anchor, arc_img, point_img) =
                if (arc_a - arc_d).abs() <= (arc_b - arc_d).abs() {
                    (Anchor::A, arc_a, point_a)
                } else {
                    (Anchor::B, arc_b, point_b)
                };
            if point_img.distance(defender_pos) <= r_c {
                self.phase = PdPhase::Track(anchor);
            } else {
                let step = (arc_img - arc_d).clamp(-v_d * dt, v_d * dt);
                let goal = path.point_at_arc(arc_d + step);
                return (goal - defender_pos).normalized();
            }
        }
        if let PdPhase::Track(anchor) = self.phase {
            let (arc_img, _) = self.image_arc(attacker_pos, anchor);
            let step = (arc_img - arc_d).clamp(-v_d * dt, v_d * dt);
            let goal = path.point_at_arc(arc_d + step);
            let delta = goal - defender_pos;
            if delta.norm() <= 1e-12 {
                return Vec2::ZERO;
            }
            // Cap the correction so the speed bound holds.
            if delta.norm() >= v_d * dt {
                return delta.normalized();
            }
            return delta * (1.0 / (v_d * dt));
        }
        Vec2::ZERO
    }
}

/// One explicit-Euler step with wall sliding: blocked axis components are
/// dropped so motion continues tangentially along obstacle faces.
pub fn step_position(scenario: &Scenario, p: Vec2, dir: Vec2, speed: f64, dt: f64) -> Vec2 {
    let d = dir * (speed * dt);
    let free_at = |q: Vec2| -> bool {
        scenario
            .grid
            .cell_of(q)
            .map(|c| scenario.is_free(c))
            .unwrap_or(false)
    };
    let full = p + d;
    if free_at(full) {
        return full;
    }
    let x_only = Vec2::new(p.x + d.x, p.y);
    let base = if free_at(x_only) { x_only } else { p };
    let y_step = Vec2::new(base.x, base.y + d.y);
    if free_at(y_step) {
        y_step
    } else {
        base
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Resolution {
    Live,
    Captured,
    Reached,
}

struct DefenderState {
    strategy: DefenderStrategy,
    assigned: Option<usize>,
    commitment: Option<PdCommitment>,
}

fn speed_key(v: f64) -> u64 {
    v.to_bits()
}

/// Run the full multiplayer game.
pub fn run(scenario: &Scenario, config: &SimConfig) -> Result<(Trajectory, SimAudit)> {
    let n_a = scenario.attackers.len();
    let n_d = scenario.defenders.len();
    let delta = config.rematch_interval;
    if !(delta > 0.0) || !(config.t_max >= delta) {
        return Err(Error::BadConfig(
            "need 0 < rematch_interval <= t_max".into(),
        ));
    }
    let v_max = scenario
        .attackers
        .iter()
        .chain(&scenario.defenders)
        .map(|p| p.max_speed)
        .fold(0.0, f64::max);
    let auto_dt = (scenario.grid.cell_size / (2.0 * v_max)).min(delta);
    let dt_req = if config.dt > 0.0 { config.dt } else { auto_dt };
    if dt_req > delta {
        return Err(Error::BadConfig("need dt <= rematch_interval".into()));
    }
    // Integer substeps per rematch keep the schedule exact.
    let substeps = (delta / dt_req).ceil().max(1.0) as usize;
    let dt = delta / substeps as f64;

    let strategies: Vec<DefenderStrategy> = match config.strategies.len() {
        0 => vec![DefenderStrategy::OracleGreedy; n_d],
        1 => vec![config.strategies[0]; n_d],
        n if n == n_d => config.strategies.clone(),
        n => {
            return Err(Error::BadConfig(format!(
                "{n} strategies for {n_d} defenders"
            )))
        }
    };

    let attacker_policy = AttackerPolicy::new(scenario, config.attacker_margin)?;
    let pd_ctx = PdContext::new(scenario)?;
    let stride = if config.anchor_stride > 0 {
        config.anchor_stride
    } else {
        pd_ctx.default_stride()
    };

    // One joint-game table per (v_a, v_d) pair that oracle-strategy edges
    // need; uniform-speed teams share a single table.
    let mut tables: HashMap<(u64, u64), ValueTable> = HashMap::new();
    for (i, d) in scenario.defenders.iter().enumerate() {
        if strategies[i] != DefenderStrategy::OracleGreedy {
            continue;
        }
        for a in &scenario.attackers {
            let key = (speed_key(a.max_speed), speed_key(d.max_speed));
            if !tables.contains_key(&key) {
                let params = OracleParams {
                    v_a: a.max_speed,
                    v_d: d.max_speed,
                    ..config.oracle
                };
                tables.insert(key, solve_joint_game(scenario, &params)?);
            }
        }
    }

    let mut attackers: Vec<Vec2> = scenario.attackers.iter().map(|p| p.position).collect();
    let mut defenders: Vec<Vec2> = scenario.defenders.iter().map(|p| p.position).collect();
    let mut resolution = vec![Resolution::Live; n_a];
    let mut dstate: Vec<DefenderState> = strategies
        .iter()
        .map(|&strategy| DefenderState {
            strategy,
            assigned: None,
            commitment: None,
        })
        .collect();
    // Cached path-defense edges, refreshed every pd_refresh_period epochs.
    let mut pd_edges: Vec<Vec<(bool, Option<SlicePath>)>> = vec![vec![(false, None); n_a]; n_d];

    let mut trajectory = Trajectory {
        samples: Vec::new(),
        events: Vec::new(),
        matching_series: Vec::new(),
    };
    trajectory.samples.push(TrajectorySample {
        t: 0.0,
        attackers: attackers.clone(),
        defenders: defenders.clone(),
    });

    // Initial-state resolutions (captures win ties with arrivals).
    let resolve_terminal =
        |t: f64,
         attackers: &[Vec2],
         defenders: &[Vec2],
         resolution: &mut Vec<Resolution>,
         events: &mut Vec<SimEvent>| {
            for j in 0..n_a {
                if resolution[j] != Resolution::Live {
                    continue;
                }
                let mut captured = None;
                for (i, dpos) in defenders.iter().enumerate() {
                    if capture_test(attackers[j], *dpos, scenario.capture_radius) {
                        captured = Some(i);
                        break;
                    }
                }
                if let Some(i) = captured {
                    resolution[j] = Resolution::Captured;
                    events.push(SimEvent::Capture {
                        t,
                        attacker: j,
                        defender: i,
                    });
                    continue;
                }
                if let Some(cell) = scenario.grid.cell_of(attackers[j]) {
                    if scenario.target.get(cell) {
                        resolution[j] = Resolution::Reached;
                        events.push(SimEvent::Arrival { t, attacker: j });
                    }
                }
            }
        };
    resolve_terminal(
        0.0,
        &attackers,
        &defenders,
        &mut resolution,
        &mut trajectory.events,
    );

    let epochs = (config.t_max / delta).round() as usize;
    for epoch in 0..epochs {
        let t = epoch as f64 * delta;

        // Refresh path-defense edges on schedule. One slice per live
        // attacker per defender speed covers the whole team.
        let any_pd = strategies
            .iter()
            .any(|&s| s == DefenderStrategy::PdSemiOpenLoop);
        if any_pd && epoch % config.pd_refresh_period.max(1) == 0 {
            let mut speed_groups: Vec<u64> = Vec::new();
            for (i, d) in scenario.defenders.iter().enumerate() {
                if strategies[i] == DefenderStrategy::PdSemiOpenLoop
                    && !speed_groups.contains(&speed_key(d.max_speed))
                {
                    speed_groups.push(speed_key(d.max_speed));
                }
            }
            for j in 0..n_a {
                if resolution[j] != Resolution::Live {
                    for i in 0..n_d {
                        pd_edges[i][j] = (false, None);
                    }
                    continue;
                }
                for &vd_bits in &speed_groups {
                    let v_d = f64::from_bits(vd_bits);
                    let union = slice_union(
                        &pd_ctx,
                        attackers[j],
                        &SliceParams {
                            v_a: scenario.attackers[j].max_speed,
                            v_d,
                            anchor_stride: stride,
                        },
                    )?;
                    for i in 0..n_d {
                        if strategies[i] != DefenderStrategy::PdSemiOpenLoop
                            || speed_key(scenario.defenders[i].max_speed) != vd_bits
                        {
                            continue;
                        }
                        let cell = scenario.grid.cell_of(defenders[i]);
                        let edge = cell
                            .filter(|&c| union.mask.get(c))
                            .map(|c| union.claimed_by[scenario.grid.index(c)])
                            .filter(|&id| id >= 0)
                            .map(|id| union.paths[id as usize].clone());
                        pd_edges[i][j] = (edge.is_some(), edge);
                    }
                }
            }
        }

        // Outcome matrix over live attackers.
        let mut matrix = OutcomeMatrix::new(n_d, n_a, scenario.content_hash());
        for i in 0..n_d {
            for j in 0..n_a {
                if resolution[j] != Resolution::Live {
                    continue;
                }
                // A matched defender playing its winning strategy keeps its
                // claim until the attacker is resolved.
                let sticky = dstate[i].assigned == Some(j);
                match dstate[i].strategy {
                    DefenderStrategy::OracleGreedy => {
                        let key = (
                            speed_key(scenario.attackers[j].max_speed),
                            speed_key(scenario.defenders[i].max_speed),
                        );
                        let table = &tables[&key];
                        let wins = sticky
                            || matches!(
                                table.query(attackers[j], defenders[i]),
                                Ok(Outcome::DefenderWin)
                            );
                        matrix.set(i, j, wins, Provenance::Oracle);
                    }
                    DefenderStrategy::PdSemiOpenLoop => {
                        let wins = sticky || pd_edges[i][j].0;
                        matrix.set(i, j, wins, Provenance::PathDefense);
                    }
                }
            }
        }

        let matching = max_matching(&build_graph(&matrix));
        let captured_count = resolution
            .iter()
            .filter(|&&r| r == Resolution::Captured)
            .count();
        trajectory.matching_series.push(MatchSample {
            t,
            effective_size: matching.size + captured_count,
            pairs: matching.pairs.clone(),
        });

        // Update assignments; keep commitments whose pair is unchanged.
        let mut new_assignment = vec![None; n_d];
        for &(i, j) in &matching.pairs {
            new_assignment[i] = Some(j);
        }
        for i in 0..n_d {
            if dstate[i].assigned != new_assignment[i] {
                dstate[i].assigned = new_assignment[i];
                dstate[i].commitment = None;
                if let (Some(j), DefenderStrategy::PdSemiOpenLoop) =
                    (new_assignment[i], dstate[i].strategy)
                {
                    if let (_, Some(witness)) = &pd_edges[i][j] {
                        dstate[i].commitment =
                            Some(PdCommitment::commit(scenario, witness)?);
                    }
                }
            }
        }

        // Integrate over the rematch interval.
        for sub in 0..substeps {
            let t_now = t + sub as f64 * dt;
            let mut a_dirs = vec![Vec2::ZERO; n_a];
            for j in 0..n_a {
                if resolution[j] == Resolution::Live {
                    a_dirs[j] = attacker_policy.direction(attackers[j]).0;
                }
            }
            let mut d_dirs = vec![Vec2::ZERO; n_d];
            for i in 0..n_d {
                let v_d = scenario.defenders[i].max_speed;
                let target_j = dstate[i].assigned.filter(|&j| resolution[j] == Resolution::Live);
                match (target_j, &mut dstate[i].commitment) {
                    (Some(j), Some(c)) => {
                        d_dirs[i] = c.direction(scenario, defenders[i], attackers[j], v_d, dt);
                    }
                    (Some(j), None) => {
                        d_dirs[i] = (attackers[j] - defenders[i]).normalized();
                    }
                    (None, _) => {
                        // Chase the nearest live attacker.
                        let nearest = (0..n_a)
                            .filter(|&j| resolution[j] == Resolution::Live)
                            .min_by(|&a, &b| {
                                defenders[i]
                                    .distance(attackers[a])
                                    .total_cmp(&defenders[i].distance(attackers[b]))
                            });
                        if let Some(j) = nearest {
                            d_dirs[i] = (attackers[j] - defenders[i]).normalized();
                        }
                    }
                }
            }
            for j in 0..n_a {
                if resolution[j] == Resolution::Live {
                    attackers[j] = step_position(
                        scenario,
                        attackers[j],
                        a_dirs[j],
                        scenario.attackers[j].max_speed,
                        dt,
                    );
                }
            }
            for i in 0..n_d {
                defenders[i] = step_position(
                    scenario,
                    defenders[i],
                    d_dirs[i],
                    scenario.defenders[i].max_speed,
                    dt,
                );
            }
            let t_next = t_now + dt;
            resolve_terminal(
                t_next,
                &attackers,
                &defenders,
                &mut resolution,
                &mut trajectory.events,
            );
            trajectory.samples.push(TrajectorySample {
                t: t_next,
                attackers: attackers.clone(),
                defenders: defenders.clone(),
            });
        }

        if resolution.iter().all(|&r| r != Resolution::Live) {
            break;
        }
    }

    let reached = resolution
        .iter()
        .filter(|&&r| r == Resolution::Reached)
        .count();
    let captured = resolution
        .iter()
        .filter(|&&r| r == Resolution::Captured)
        .count();
    let initial_matching = trajectory
        .matching_series
        .first()
        .map(|m| m.effective_size)
        .unwrap_or(0);
    let matching_nondecreasing = trajectory
        .matching_series
        .windows(2)
        .all(|w| w[1].effective_size >= w[0].effective_size);
    let bound_reaching = n_a.saturating_sub(initial_matching);
    let audit = SimAudit {
        reached,
        captured,
        initial_matching,
        bound_reaching,
        matching_nondecreasing,
        bound_respected: reached <= bound_reaching,
    };
    Ok((trajectory, audit))
}
