//! Side-by-side comparison of path-defense slices against the joint-game
//! oracle's defender-winning set.

use crate::grid::{GridSpec, Mask};

/// Per-cell diff codes for the comparison raster.
pub const DIFF_NEITHER: u8 = 0;
pub const DIFF_BOTH: u8 = 1;
/// Path defense claims the cell, the oracle does not.
pub const DIFF_PD_ONLY: u8 = 2;
pub const DIFF_ORACLE_ONLY: u8 = 3;

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub pd_area_cells: usize,
    pub oracle_area_cells: usize,
    /// pd area / oracle area; infinite when the oracle set is empty but the
    /// path-defense set is not.
    pub area_ratio: f64,
    /// Path-defense cells farther than `band` from any oracle-winning cell.
    pub interior_violations: usize,
    pub band: f64,
    /// Row-major diff codes.
    pub diff: Vec<u8>,
}

/// Compare a fine-grid path-defense mask with the oracle's fine-grid mask.
/// A claimed cell counts as a violation only when the oracle disagrees and
/// no oracle-winning cell lies within `band` (world units), so boundary
/// rasterization differences are forgiven.
pub fn compare_slices(pd: &Mask, oracle: &Mask, grid: &GridSpec, band: f64) -> CompareReport {
    assert_eq!(pd.len(), oracle.len());
    let dilated = oracle.dilated(band, grid.cell_size);
    let mut diff = vec![DIFF_NEITHER; pd.len()];
    let mut violations = 0;
    for i in 0..pd.len() {
        diff[i] = match (pd.get_idx(i), oracle.get_idx(i)) {
            (true, true) => DIFF_BOTH,
            (true, false) => {
                if !dilated.get_idx(i) {
                    violations += 1;
                }
                DIFF_PD_ONLY
            }
            (false, true) => DIFF_ORACLE_ONLY,
            (false, false) => DIFF_NEITHER,
        };
    }
    let pd_area = pd.count();
    let oracle_area = oracle.count();
    let area_ratio = if oracle_area > 0 {
        pd_area as f64 / oracle_area as f64
    } else if pd_area == 0 {
        0.0
    } else {
        f64::INFINITY
    };
    CompareReport {
        pd_area_cells: pd_area,
        oracle_area_cells: oracle_area,
        area_ratio,
        interior_violations: violations,
        band,
        diff,
    }
}
