//! Game arena and players: scenario schema, validation, derived geometry.
//!
//! Scenario files are TOML with a mandatory `schema = 1` field. Obstacles and
//! the target are rasterized to cell masks when loaded; regions may be given
//! as world-coordinate rectangles or as per-row cell runs. See FORMATS.md at
//! the repository root for the full schema.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, GridSpec, Mask, Vec2};

/// One attacker or defender: position and speed bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlayerState {
    pub position: Vec2,
    pub max_speed: f64,
}

/// Positions of every player at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub attackers: Vec<Vec2>,
    pub defenders: Vec<Vec2>,
    pub time: f64,
}

/// Immutable game description: grid, masks, players, capture radius, and the
/// number of attackers `m` that must reach the target for the attacking team
/// to win.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub grid: GridSpec,
    /// true = obstacle cell.
    pub obstacles: Mask,
    /// true = target cell.
    pub target: Mask,
    pub attackers: Vec<PlayerState>,
    pub defenders: Vec<PlayerState>,
    pub capture_radius: f64,
    pub required_reachers: usize,
}

/// Load-time validation switches.
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Skip the "no attacker faster than any defender" check. The joint-game
    /// solver has no speed-ordering requirement; the path-defense machinery
    /// does.
    pub allow_fast_attackers: bool,
}

// ---------------------------------------------------------------------------
// Document schema (serde side of the TOML file)

#[derive(Debug, Serialize, Deserialize)]
struct ScenarioDoc {
    schema: u32,
    grid: GridDoc,
    capture_radius: f64,
    m: usize,
    #[serde(default)]
    obstacles: Vec<RegionDoc>,
    target: Vec<RegionDoc>,
    attackers: Vec<PlayerDoc>,
    defenders: Vec<PlayerDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GridDoc {
    width: usize,
    height: usize,
    cell_size: f64,
    #[serde(default)]
    origin: [f64; 2],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RegionDoc {
    /// World-coordinate rectangle [x0, y0, x1, y1]; cells whose center falls
    /// inside the closed rectangle are set.
    Rect { rect: [f64; 4] },
    /// One grid row with inclusive column runs.
    Rows { row: usize, runs: Vec<[usize; 2]> },
}

#[derive(Debug, Serialize, Deserialize)]
struct PlayerDoc {
    x: f64,
    y: f64,
    speed: f64,
}

fn rasterize(grid: &GridSpec, regions: &[RegionDoc], what: &str) -> Result<Mask> {
    let mut mask = Mask::new(grid.width, grid.height);
    for r in regions {
        match r {
            RegionDoc::Rect { rect } => {
                let [x0, y0, x1, y1] = *rect;
                if x1 < x0 || y1 < y0 {
                    return Err(Error::Schema(format!(
                        "{what} rect has negative extent: {rect:?}"
                    )));
                }
                for iy in 0..grid.height {
                    for ix in 0..grid.width {
                        let c = grid.center((ix, iy));
                        if c.x >= x0 && c.x <= x1 && c.y >= y0 && c.y <= y1 {
                            mask.set((ix, iy), true);
                        }
                    }
                }
            }
            RegionDoc::Rows { row, runs } => {
                if *row >= grid.height {
                    return Err(Error::Schema(format!("{what} row {row} out of range")));
                }
                for &[c0, c1] in runs {
                    if c1 < c0 || c1 >= grid.width {
                        return Err(Error::Schema(format!(
                            "{what} run [{c0}, {c1}] out of range"
                        )));
                    }
                    for ix in c0..=c1 {
                        mask.set((ix, *row), true);
                    }
                }
            }
        }
    }
    Ok(mask)
}

fn mask_to_rows(mask: &Mask) -> Vec<RegionDoc> {
    let mut out = Vec::new();
    for iy in 0..mask.height {
        let mut runs: Vec<[usize; 2]> = Vec::new();
        let mut start: Option<usize> = None;
        for ix in 0..=mask.width {
            let set = ix < mask.width && mask.get((ix, iy));
            match (set, start) {
                (true, None) => start = Some(ix),
                (false, Some(s)) => {
                    runs.push([s, ix - 1]);
                    start = None;
                }
                _ => {}
            }
        }
        if !runs.is_empty() {
            out.push(RegionDoc::Rows { row: iy, runs });
        }
    }
    out
}

impl Scenario {
    /// Parse and validate a scenario document.
    pub fn from_toml_str(text: &str, opts: &LoadOptions) -> Result<Scenario> {
        let doc: ScenarioDoc =
            toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if doc.schema != 1 {
            return Err(Error::Schema(format!(
                "unsupported schema version {}, expected 1",
                doc.schema
            )));
        }
        let grid = GridSpec {
            width: doc.grid.width,
            height: doc.grid.height,
            cell_size: doc.grid.cell_size,
            origin: Vec2::new(doc.grid.origin[0], doc.grid.origin[1]),
        };
        grid.validate()?;
        let obstacles = rasterize(&grid, &doc.obstacles, "obstacle")?;
        let target = rasterize(&grid, &doc.target, "target")?;
        let to_players = |docs: &[PlayerDoc]| -> Vec<PlayerState> {
            docs.iter()
                .map(|p| PlayerState {
                    position: Vec2::new(p.x, p.y),
                    max_speed: p.speed,
                })
                .collect()
        };
        let scenario = Scenario {
            grid,
            obstacles,
            target,
            attackers: to_players(&doc.attackers),
            defenders: to_players(&doc.defenders),
            capture_radius: doc.capture_radius,
            required_reachers: doc.m,
        };
        scenario.validate(opts)?;
        Ok(scenario)
    }

    pub fn load(path: &std::path::Path, opts: &LoadOptions) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)?;
        Scenario::from_toml_str(&text, opts)
    }

    /// Canonical document form; `from_toml_str` of the output reproduces an
    /// equal scenario. Masks are written as row runs.
    pub fn to_toml_string(&self) -> String {
        let doc = ScenarioDoc {
            schema: 1,
            grid: GridDoc {
                width: self.grid.width,
                height: self.grid.height,
                cell_size: self.grid.cell_size,
                origin: [self.grid.origin.x, self.grid.origin.y],
            },
            capture_radius: self.capture_radius,
            m: self.required_reachers,
            obstacles: mask_to_rows(&self.obstacles),
            target: mask_to_rows(&self.target),
            attackers: self
                .attackers
                .iter()
                .map(|p| PlayerDoc {
                    x: p.position.x,
                    y: p.position.y,
                    speed: p.max_speed,
                })
                .collect(),
            defenders: self
                .defenders
                .iter()
                .map(|p| PlayerDoc {
                    x: p.position.x,
                    y: p.position.y,
                    speed: p.max_speed,
                })
                .collect(),
        };
        toml::to_string(&doc).expect("scenario serialization cannot fail")
    }

    /// Stable 64-bit FNV-1a hash of the canonical document, used to tag
    /// outcome matrices, manifests, and oracle table files.
    pub fn content_hash(&self) -> u64 {
        const OFFSET: u64 = 0xcbf29ce484222325;
        const PRIME: u64 = 0x100000001b3;
        let mut h = OFFSET;
        for b in self.to_toml_string().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(PRIME);
        }
        h
    }

    pub fn validate(&self, opts: &LoadOptions) -> Result<()> {
        self.grid.validate()?;
        if !(self.capture_radius >= 0.0) {
            return Err(Error::Schema("capture_radius must be >= 0".into()));
        }
        if self.attackers.is_empty() || self.defenders.is_empty() {
            return Err(Error::Schema("need at least one attacker and one defender".into()));
        }
        if self.required_reachers == 0 || self.required_reachers > self.attackers.len() {
            return Err(Error::Schema(format!(
                "m = {} must satisfy 0 < m <= {}",
                self.required_reachers,
                self.attackers.len()
            )));
        }
        // Target nonempty and inside free space.
        if self.target.is_empty() {
            return Err(Error::BadTarget);
        }
        for cell in self.target.iter_set() {
            if self.obstacles.get(cell) {
                return Err(Error::BadTarget);
            }
        }
        // Players in free space with positive speed.
        let check = |players: &[PlayerState], kind: &str| -> Result<()> {
            for (i, p) in players.iter().enumerate() {
                if !(p.max_speed > 0.0) {
                    return Err(Error::Schema(format!("{kind} {i} speed must be > 0")));
                }
                let cell = self
                    .grid
                    .cell_of(p.position)
                    .ok_or(Error::OutOfDomain(p.position.x, p.position.y))?;
                if self.obstacles.get(cell) {
                    return Err(Error::PlayerInObstacle(format!("{kind} {i}")));
                }
            }
            Ok(())
        };
        check(&self.attackers, "attacker")?;
        check(&self.defenders, "defender")?;
        if !opts.allow_fast_attackers {
            for (i, a) in self.attackers.iter().enumerate() {
                for (j, d) in self.defenders.iter().enumerate() {
                    if a.max_speed > d.max_speed {
                        return Err(Error::AttackerTooFast {
                            attacker: i,
                            va: a.max_speed,
                            defender: j,
                            vd: d.max_speed,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        !self.obstacles.get(cell)
    }

    /// Free cell containing `p`, or an error naming what went wrong.
    pub fn free_cell_of(&self, p: Vec2) -> Result<Cell> {
        let cell = self.grid.cell_of(p).ok_or(Error::OutOfDomain(p.x, p.y))?;
        if self.obstacles.get(cell) {
            return Err(Error::PointInObstacle(p.x, p.y));
        }
        Ok(cell)
    }

    pub fn initial_state(&self) -> JointState {
        JointState {
            attackers: self.attackers.iter().map(|p| p.position).collect(),
            defenders: self.defenders.iter().map(|p| p.position).collect(),
            time: 0.0,
        }
    }

    /// Free cells on the outer rim of the domain, in counterclockwise order
    /// starting from the lower-left corner: bottom row left-to-right, right
    /// column upward, top row right-to-left, left column downward.
    pub fn boundary_cells(&self) -> Result<Vec<Cell>> {
        let w = self.grid.width;
        let h = self.grid.height;
        let mut ring: Vec<Cell> = Vec::with_capacity(2 * (w + h));
        for ix in 0..w {
            ring.push((ix, 0));
        }
        for iy in 1..h {
            ring.push((w - 1, iy));
        }
        for ix in (0..w - 1).rev() {
            ring.push((ix, h - 1));
        }
        for iy in (1..h - 1).rev() {
            ring.push((0, iy));
        }
        let free: Vec<Cell> = ring.into_iter().filter(|&c| self.is_free(c)).collect();
        if free.is_empty() {
            return Err(Error::NoFreeBoundary);
        }
        Ok(free)
    }
}

/// Euclidean capture test: true iff the two positions are within `r_c`.
pub fn capture_test(a: Vec2, d: Vec2, r_c: f64) -> bool {
    a.distance(d) <= r_c
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn empty_square(n: usize, cell_size: f64) -> Scenario {
        let grid = GridSpec::new(n, n, cell_size).unwrap();
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
            capture_radius: 0.1,
            required_reachers: 1,
        }
    }

    const MINIMAL: &str = r#"
schema = 1
capture_radius = 0.1
m = 1

[grid]
width = 10
height = 10
cell_size = 0.1

[[target]]
rect = [0.4, 0.4, 0.6, 0.6]

[[attackers]]
x = 0.25
y = 0.25
speed = 1.0

[[defenders]]
x = 0.85
y = 0.85
speed = 1.0
"#;

    #[test]
    fn loads_minimal_scenario() {
        let s = Scenario::from_toml_str(MINIMAL, &LoadOptions::default()).unwrap();
        assert_eq!(s.grid.width, 10);
        assert_eq!(s.target.count(), 4);
        assert_eq!(s.attackers.len(), 1);
    }

    #[test]
    fn rejects_player_in_obstacle() {
        let text = MINIMAL.replace(
            "[[target]]",
            "[[obstacles]]\nrect = [0.2, 0.2, 0.3, 0.3]\n\n[[target]]",
        );
        let err = Scenario::from_toml_str(&text, &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::PlayerInObstacle(_)));
    }

    #[test]
    fn rejects_target_in_obstacle() {
        let text = MINIMAL.replace(
            "[[target]]",
            "[[obstacles]]\nrect = [0.35, 0.35, 0.65, 0.65]\n\n[[target]]",
        );
        let err = Scenario::from_toml_str(&text, &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::BadTarget));
    }

    #[test]
    fn rejects_fast_attacker_unless_allowed() {
        let text = MINIMAL.replace("speed = 1.0\n\n[[defenders]]", "speed = 1.5\n\n[[defenders]]");
        let err = Scenario::from_toml_str(&text, &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::AttackerTooFast { .. }));
        let opts = LoadOptions {
            allow_fast_attackers: true,
        };
        assert!(Scenario::from_toml_str(&text, &opts).is_ok());
    }

    #[test]
    fn rejects_missing_schema_field() {
        let text = MINIMAL.replace("schema = 1", "");
        assert!(matches!(
            Scenario::from_toml_str(&text, &LoadOptions::default()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn serialization_roundtrip() {
        let s = Scenario::from_toml_str(MINIMAL, &LoadOptions::default()).unwrap();
        let text = s.to_toml_string();
        let s2 = Scenario::from_toml_str(&text, &LoadOptions::default()).unwrap();
        assert_eq!(s, s2);
        assert_eq!(s.content_hash(), s2.content_hash());
    }

    #[test]
    fn boundary_cells_empty_square() {
        let s = empty_square(10, 0.1);
        let cells = s.boundary_cells().unwrap();
        assert_eq!(cells.len(), 36);
        assert_eq!(cells[0], (0, 0));
        assert_eq!(cells[9], (9, 0));
        // Closed 8-neighbor cycle.
        for i in 0..cells.len() {
            let a = cells[i];
            let b = cells[(i + 1) % cells.len()];
            let dx = (a.0 as isize - b.0 as isize).abs();
            let dy = (a.1 as isize - b.1 as isize).abs();
            assert!(dx <= 1 && dy <= 1, "{a:?} -> {b:?} not adjacent");
        }
    }

    #[test]
    fn boundary_cells_l_shape() {
        // 6x6 grid; obstacle block fills the upper-right quadrant including
        // its rim, leaving an L of free space.
        let mut s = empty_square(6, 0.1);
        for iy in 3..6 {
            for ix in 3..6 {
                s.obstacles.set((ix, iy), true);
            }
        }
        s.defenders[0].position = s.grid.center((1, 4));
        let cells = s.boundary_cells().unwrap();
        // Hand enumeration: bottom row 6, right column rows 1..2 (1 cell at
        // (5,1), (5,2)), top row cells (2,5)..(0,5), left column (0,4)..(0,1).
        let expected: Vec<Cell> = vec![
            (0, 0),
            (1, 0),
            (2, 0),
            (3, 0),
            (4, 0),
            (5, 0),
            (5, 1),
            (5, 2),
            (2, 5),
            (1, 5),
            (0, 5),
            (0, 4),
            (0, 3),
            (0, 2),
            (0, 1),
        ];
        assert_eq!(cells, expected);
    }

    #[test]
    fn boundary_error_when_rim_blocked() {
        let mut s = empty_square(10, 0.1);
        for ix in 0..10 {
            for iy in 0..10 {
                if s.grid.on_edge((ix, iy)) {
                    s.obstacles.set((ix, iy), true);
                }
            }
        }
        assert!(matches!(s.boundary_cells(), Err(Error::NoFreeBoundary)));
    }

    #[test]
    fn capture_test_cases() {
        assert!(capture_test(Vec2::new(0.0, 0.0), Vec2::new(0.0, 0.1), 0.1));
        assert!(!capture_test(Vec2::new(0.0, 0.0), Vec2::new(0.0, 0.1001), 0.1));
        // dist = sqrt(0.05^2 + 0.08^2) ~= 0.0943
        assert!(capture_test(Vec2::new(1.0, 1.0), Vec2::new(1.05, 1.08), 0.1));
    }
}
