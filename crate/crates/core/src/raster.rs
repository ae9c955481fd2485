//! Raster export: CSV and 16-bit PGM for masks and distance fields.
//!
//! Rasters are row-major with the origin at the bottom-left: CSV rows run
//! bottom row first. PGM stores rows top-to-bottom by definition, so rows
//! are flipped on write; +inf maps to the maximum sample value.

use std::io::Write;

use crate::eikonal::DistanceField;
use crate::error::Result;
use crate::grid::Mask;

/// Fixed 9-significant-digit rendering used by every CSV the tools emit,
/// so identical runs produce byte-identical files.
pub fn fmt_sig9(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v.is_nan() {
        return "nan".into();
    }
    format!("{v:.8e}")
}

pub fn write_mask_csv<W: Write>(mut w: W, mask: &Mask) -> Result<()> {
    for iy in 0..mask.height {
        let row: Vec<&str> = (0..mask.width)
            .map(|ix| if mask.get((ix, iy)) { "1" } else { "0" })
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_field_csv<W: Write>(mut w: W, field: &DistanceField) -> Result<()> {
    let g = &field.grid;
    for iy in 0..g.height {
        let row: Vec<String> = (0..g.width)
            .map(|ix| fmt_sig9(field.values[iy * g.width + ix]))
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

const PGM_MAX: u16 = u16::MAX;

fn write_pgm_samples<W: Write>(
    mut w: W,
    width: usize,
    height: usize,
    sample: impl Fn(usize, usize) -> u16,
) -> Result<()> {
    writeln!(w, "P5")?;
    writeln!(w, "{width} {height}")?;
    writeln!(w, "{PGM_MAX}")?;
    let mut buf = Vec::with_capacity(width * height * 2);
    for iy in (0..height).rev() {
        for ix in 0..width {
            buf.extend_from_slice(&sample(ix, iy).to_be_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn write_mask_pgm<W: Write>(w: W, mask: &Mask) -> Result<()> {
    write_pgm_samples(w, mask.width, mask.height, |ix, iy| {
        if mask.get((ix, iy)) {
            PGM_MAX
        } else {
            0
        }
    })
}

/// Finite values scale linearly onto 0..=65534; +inf becomes 65535.
pub fn write_field_pgm<W: Write>(w: W, field: &DistanceField) -> Result<()> {
    let finite_max = field
        .values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0_f64, f64::max);
    let scale = if finite_max > 0.0 {
        (PGM_MAX - 1) as f64 / finite_max
    } else {
        0.0
    };
    let g = field.grid;
    write_pgm_samples(w, g.width, g.height, |ix, iy| {
        let v = field.values[iy * g.width + ix];
        if v.is_finite() {
            (v * scale).round() as u16
        } else {
            PGM_MAX
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eikonal::{solve, SourceRegion};
    use crate::grid::GridSpec;
    use crate::scenario::{PlayerState, Scenario};
    use crate::grid::Vec2;

    #[test]
    fn sig9_formatting() {
        assert_eq!(fmt_sig9(1.0), "1.00000000e0");
        assert_eq!(fmt_sig9(f64::INFINITY), "inf");
        assert_eq!(fmt_sig9(0.125), "1.25000000e-1");
    }

    #[test]
    fn mask_csv_layout() {
        let mut m = Mask::new(3, 3);
        m.set((0, 0), true);
        m.set((2, 2), true);
        let mut buf = Vec::new();
        write_mask_csv(&mut buf, &m).unwrap();
        let text = String::from_utf8(buf).unwrap();
        // Bottom row first.
        assert_eq!(text.lines().next().unwrap(), "1,0,0");
        assert_eq!(text.lines().nth(2).unwrap(), "0,0,1");
    }

    #[test]
    fn pgm_header_and_flip() {
        let grid = GridSpec::new(3, 3, 1.0).unwrap();
        let mut target = Mask::new(3, 3);
        target.set((1, 1), true);
        let s = Scenario {
            grid,
            obstacles: Mask::new(3, 3),
            target,
            attackers: vec![PlayerState {
                position: Vec2::new(0.5, 0.5),
                max_speed: 1.0,
            }],
            defenders: vec![PlayerState {
                position: Vec2::new(2.5, 2.5),
                max_speed: 1.0,
            }],
            capture_radius: 0.1,
            required_reachers: 1,
        };
        let field = solve(&s, &SourceRegion::Cells(vec![(0, 0)])).unwrap();
        let mut buf = Vec::new();
        write_field_pgm(&mut buf, &field).unwrap();
        assert!(buf.starts_with(b"P5\n3 3\n65535\n"));
        let data = &buf[b"P5\n3 3\n65535\n".len()..];
        assert_eq!(data.len(), 18);
        // First written sample is the top-left cell (0, 2); the source cell
        // (0, 0) lands in the last row with value 0.
        let last_row_first = u16::from_be_bytes([data[12], data[13]]);
        assert_eq!(last_row_first, 0);
    }
}
