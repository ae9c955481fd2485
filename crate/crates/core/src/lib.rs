//! Solver library for multiplayer reach-avoid pursuit-evasion games on 2D
//! gridded domains with obstacles.
//!
//! The pieces, bottom up:
//!
//! - [`scenario`]: arena description, validation, derived geometry.
//! - [`eikonal`]: fast-marching distance fields and shortest paths.
//! - [`dijkstra`]: independent 16-neighbor reference distances.
//! - [`path_defense`]: conservative defender-winning regions built from
//!   boundary-anchored defense paths.
//! - [`oracle`]: exact outcomes of the discretized two-player game by
//!   backward induction on the joint state space.
//! - [`compare`]: slice-vs-oracle containment and area reports.
//! - [`matching`]: pairwise-outcome matrices, maximum matching, and the
//!   team defense guarantee.
//! - [`sim`]: time-stepped multiplayer execution with re-matching.
//! - [`raster`]: CSV/PGM export of masks and fields.

pub mod compare;
pub mod dijkstra;
pub mod eikonal;
pub mod error;
pub mod grid;
pub mod matching;
pub mod oracle;
pub mod path_defense;
pub mod raster;
pub mod scenario;
pub mod sim;

pub use eikonal::{DistanceField, PathPolyline, SourceRegion};
pub use error::{Error, Result};
pub use grid::{Cell, GridSpec, Mask, Vec2};
pub use matching::{
    build_graph, defense_guarantee, max_matching, BipartiteGraph, DefenseGuarantee, Matching,
    OutcomeMatrix, Provenance,
};
pub use oracle::{solve_joint_game, OracleParams, Outcome, ValueTable};
pub use path_defense::{
    build_path, find_entry_point, pairwise_outcome, slice_union, Anchor, AnchoredPath,
    DefensePath, EntryPoint, PdContext, SliceParams, SlicePath, SliceUnion,
};
pub use scenario::{capture_test, JointState, LoadOptions, PlayerState, Scenario};
pub use sim::{
    AttackerPolicy, DefenderStrategy, SimAudit, SimConfig, SimEvent, Trajectory,
};

/// Configure the global worker pool; `jobs = 0` keeps the default. Call once
/// before heavy solves. Output never depends on the worker count.
pub fn init_thread_pool(jobs: usize) {
    if jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
}
