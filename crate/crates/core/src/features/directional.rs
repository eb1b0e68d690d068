//! 8-directional feature maps.
//!
//! Every trajectory segment's tangent is decomposed onto the two
//! adjacent of 8 directions at 45° spacing (parallelogram rule, weights
//! nonnegative and summing to the segment length), and each weight is
//! deposited along the rasterized segment into that direction's channel.

use crate::strokes::{Point, StrokeSample};

use super::raster::draw_segment;
use super::signature::check_normalized;
use super::tensor::FeatureTensor;
use super::FeatureError;

pub const DIRECTIONS: usize = 8;

/// Renders the 8 direction channels. Pen-up (imaginary) segments are
/// excluded unless `include_imaginary` is set.
pub fn directional_maps_with(s: &StrokeSample, include_imaginary: bool) -> Result<FeatureTensor, FeatureError> {
    check_normalized(s)?;
    let mut tensor = FeatureTensor::zeros(DIRECTIONS);
    for stroke in &s.strokes {
        for pair in stroke.points.windows(2) {
            deposit(&mut tensor, &pair[0], &pair[1]);
        }
    }
    if include_imaginary {
        for pair in s.strokes.windows(2) {
            deposit(&mut tensor, pair[0].last(), pair[1].first());
        }
    }
    Ok(tensor)
}

/// [`directional_maps_with`] excluding imaginary segments.
pub fn directional_maps(s: &StrokeSample) -> Result<FeatureTensor, FeatureError> {
    directional_maps_with(s, false)
}

fn deposit(tensor: &mut FeatureTensor, a: &Point, b: &Point) {
    let len = a.distance(b);
    if len == 0.0 {
        return;
    }
    let (w0, d0, w1, d1) = decompose(b.x - a.x, b.y - a.y);
    if w0 > 0.0 {
        draw_segment(tensor.channel_mut(d0), a, b, w0);
    }
    if w1 > 0.0 {
        draw_segment(tensor.channel_mut(d1), a, b, w1);
    }
}

/// Splits vector `v` between its two adjacent 45°-spaced directions.
/// Returns `(weight, channel)` pairs with weights summing to `|v|`.
fn decompose(vx: f64, vy: f64) -> (f64, usize, f64, usize) {
    let len = vx.hypot(vy);
    let mut theta = vy.atan2(vx);
    if theta < 0.0 {
        theta += std::f64::consts::TAU;
    }
    let sector_width = std::f64::consts::FRAC_PI_4;
    let sector = ((theta / sector_width) as usize).min(DIRECTIONS - 1);
    let next = (sector + 1) % DIRECTIONS;
    let (ux, uy) = (vx / len, vy / len);
    let (e0x, e0y) = direction(sector);
    let (e1x, e1y) = direction(next);
    // Solve u = a·e0 + b·e1 via cross products; cross(e0, e1) = sin 45°.
    let denom = e0x * e1y - e0y * e1x;
    let a = (ux * e1y - uy * e1x) / denom;
    let b = (e0x * uy - e0y * ux) / denom;
    let (a, b) = (a.max(0.0), b.max(0.0));
    let scale = len / (a + b);
    (a * scale, sector, b * scale, next)
}

fn direction(d: usize) -> (f64, f64) {
    let angle = d as f64 * std::f64::consts::FRAC_PI_4;
    (angle.cos(), angle.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strokes::Stroke;

    fn segment_sample(a: (f64, f64), b: (f64, f64)) -> StrokeSample {
        StrokeSample::new(0, 0, vec![Stroke::new(vec![Point::new(a.0, a.1), Point::new(b.0, b.1)])])
    }

    #[test]
    fn axis_aligned_segment_uses_single_channel() {
        let t = directional_maps(&segment_sample((4.0, 24.0), (34.0, 24.0))).unwrap();
        assert!(t.channel_mass(0) > 0.0);
        for c in 1..DIRECTIONS {
            assert_eq!(t.channel_mass(c), 0.0, "channel {c} should be empty");
        }
    }

    #[test]
    fn midpoint_direction_splits_equally() {
        let angle = std::f64::consts::FRAC_PI_8; // 22.5°
        let (dx, dy) = (30.0 * angle.cos(), 30.0 * angle.sin());
        let t = directional_maps(&segment_sample((4.0, 4.0), (4.0 + dx, 4.0 + dy))).unwrap();
        let m0 = t.channel_mass(0);
        let m1 = t.channel_mass(1);
        assert!(m0 > 0.0 && m1 > 0.0);
        assert!((m0 - m1).abs() / m0 < 1e-9, "m0={m0} m1={m1}");
        for c in 2..DIRECTIONS {
            assert_eq!(t.channel_mass(c), 0.0);
        }
    }

    #[test]
    fn total_mass_matches_trajectory_length() {
        let pts = vec![
            Point::new(2.0, 3.0),
            Point::new(20.0, 7.5),
            Point::new(25.0, 40.0),
            Point::new(44.0, 30.0),
        ];
        let length: f64 = pts.windows(2).map(|w| w[0].distance(&w[1])).sum();
        let s = StrokeSample::new(0, 0, vec![Stroke::new(pts)]);
        let t = directional_maps(&s).unwrap();
        let mass: f64 = (0..DIRECTIONS).map(|c| t.channel_mass(c)).sum();
        assert!((mass - length).abs() / length < 0.02, "mass={mass} length={length}");
    }

    #[test]
    fn imaginary_segments_only_when_requested() {
        let s = StrokeSample::new(
            0,
            0,
            vec![
                Stroke::new(vec![Point::new(4.0, 24.0), Point::new(14.0, 24.0)]),
                Stroke::new(vec![Point::new(30.0, 24.0), Point::new(40.0, 24.0)]),
            ],
        );
        let without = directional_maps(&s).unwrap();
        let with = directional_maps_with(&s, true).unwrap();
        let mass = |t: &FeatureTensor| (0..DIRECTIONS).map(|c| t.channel_mass(c)).sum::<f64>();
        assert!((mass(&without) - 20.0).abs() < 0.5);
        assert!((mass(&with) - 36.0).abs() < 0.5);
    }
}
