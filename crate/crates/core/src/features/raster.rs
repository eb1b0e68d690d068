//! Anti-aliased splatting of normalized trajectories onto the 96×96 grid.
//!
//! A normalized coordinate `u ∈ [0, 48]` maps to raster position
//! `CONTENT_OFFSET + u`. Mass is deposited bilinearly over the two
//! nearest pixel centers per axis (centers at integer positions), with
//! target indices clamped into the content region `[24, 71]` so that a
//! stroke touching the closed upper boundary 48.0 stays inside the
//! centered 48×48 area. Segments deposit mass proportional to their
//! length via midpoint subsampling, so pixel mass is testable against a
//! dense-sampling oracle.

use crate::strokes::Point;

use super::tensor::{CONTENT, CONTENT_OFFSET, GRID};

/// Subsample spacing along segments, in pixels.
const STEP: f64 = 0.25;

const LO: usize = CONTENT_OFFSET;
const HI: usize = CONTENT_OFFSET + CONTENT - 1;

/// Tolerance for the normalized-domain check: coordinates must lie in
/// `[-EPS, 48 + EPS]`.
pub const DOMAIN_EPS: f64 = 1e-9;

pub fn in_normalized_domain(p: &Point) -> bool {
    let hi = CONTENT as f64 + DOMAIN_EPS;
    p.is_finite() && p.x >= -DOMAIN_EPS && p.x <= hi && p.y >= -DOMAIN_EPS && p.y <= hi
}

/// Deposits `mass` at normalized coordinates `(x, y)` bilinearly.
pub fn splat(channel: &mut [f32], x: f64, y: f64, mass: f64) {
    let px = x + CONTENT_OFFSET as f64;
    let py = y + CONTENT_OFFSET as f64;
    let ix = px.floor();
    let iy = py.floor();
    let fx = px - ix;
    let fy = py - iy;
    let x0 = (ix as isize).clamp(LO as isize, HI as isize) as usize;
    let x1 = (ix as isize + 1).clamp(LO as isize, HI as isize) as usize;
    let y0 = (iy as isize).clamp(LO as isize, HI as isize) as usize;
    let y1 = (iy as isize + 1).clamp(LO as isize, HI as isize) as usize;
    channel[y0 * GRID + x0] += ((1.0 - fx) * (1.0 - fy) * mass) as f32;
    channel[y0 * GRID + x1] += (fx * (1.0 - fy) * mass) as f32;
    channel[y1 * GRID + x0] += ((1.0 - fx) * fy * mass) as f32;
    channel[y1 * GRID + x1] += (fx * fy * mass) as f32;
}

/// Rasterizes segment `a -> b`, depositing `total_mass` spread uniformly
/// along its length. A zero-length segment deposits the full mass at `a`.
pub fn draw_segment(channel: &mut [f32], a: &Point, b: &Point, total_mass: f64) {
    let len = a.distance(b);
    if len == 0.0 {
        splat(channel, a.x, a.y, total_mass);
        return;
    }
    let n = (len / STEP).ceil() as usize;
    let per = total_mass / n as f64;
    for i in 0..n {
        let t = (i as f64 + 0.5) / n as f64;
        splat(channel, a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), per);
    }
}

/// Clamps every value into `[0, 1]`.
pub fn clamp_unit(channel: &mut [f32]) {
    for v in channel.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_at_integer_coordinate_hits_single_pixel() {
        let mut ch = vec![0.0f32; GRID * GRID];
        splat(&mut ch, 24.0, 24.0, 1.0);
        assert_eq!(ch[48 * GRID + 48], 1.0);
        assert_eq!(ch.iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn splat_conserves_mass() {
        let mut ch = vec![0.0f32; GRID * GRID];
        splat(&mut ch, 10.3, 41.8, 2.0);
        let total: f64 = ch.iter().map(|&v| v as f64).sum();
        assert!((total - 2.0).abs() < 1e-6);
    }

    #[test]
    fn boundary_coordinate_stays_in_content_region() {
        let mut ch = vec![0.0f32; GRID * GRID];
        splat(&mut ch, 48.0, 48.0, 1.0);
        splat(&mut ch, 0.0, 0.0, 1.0);
        for (i, &v) in ch.iter().enumerate() {
            if v != 0.0 {
                let (y, x) = (i / GRID, i % GRID);
                assert!((LO..=HI).contains(&y) && (LO..=HI).contains(&x), "pixel ({y},{x}) outside content");
            }
        }
    }

    #[test]
    fn segment_mass_equals_requested_total() {
        let mut ch = vec![0.0f32; GRID * GRID];
        draw_segment(&mut ch, &Point::new(3.0, 4.5), &Point::new(40.0, 31.5), 7.25);
        let total: f64 = ch.iter().map(|&v| v as f64).sum();
        assert!((total - 7.25).abs() < 1e-4);
    }
}
