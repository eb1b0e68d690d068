//! Truncated path signatures of planar trajectories.
//!
//! The signature of a path is its sequence of iterated integrals. For a
//! straight segment with displacement `d` the truncation at order 3 has
//! the closed form `(d, d⊗d/2, d⊗d⊗d/6)`; signatures of concatenated
//! paths combine via the truncated tensor product (Chen's identity).
//! Tensor levels are stored flat: level 2 as `[xx, xy, yx, yy]`, level 3
//! as `[ijk]` with `i` the slowest index.

use crate::strokes::StrokeSample;

use super::raster::{clamp_unit, in_normalized_domain, splat};
use super::tensor::FeatureTensor;
use super::FeatureError;

/// Truncation order of signature features. Orders 1–3 produce 3, 7, and
/// 15 channels (the order-0 visit map plus 2, 4, and 8 tensor entries
/// per level, cumulatively).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SignatureTruncation {
    order: usize,
}

impl SignatureTruncation {
    pub fn new(order: usize) -> Result<Self, FeatureError> {
        if (1..=3).contains(&order) {
            Ok(SignatureTruncation { order })
        } else {
            Err(FeatureError::InvalidOrder(order))
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Channel count including the order-0 map: 3, 7, or 15.
    pub fn channels(&self) -> usize {
        match self.order {
            1 => 3,
            2 => 7,
            _ => 15,
        }
    }
}

/// A truncated signature: levels 1..=order, higher levels zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Signature {
    order: usize,
    pub level1: [f64; 2],
    pub level2: [f64; 4],
    pub level3: [f64; 8],
}

impl Signature {
    /// The signature of the empty path (identity under concatenation).
    pub fn identity(trunc: SignatureTruncation) -> Self {
        Signature { order: trunc.order, level1: [0.0; 2], level2: [0.0; 4], level3: [0.0; 8] }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Closed-form truncated signature of a straight segment with
    /// displacement `(dx, dy)`: level-1 `d`, level-2 `d⊗d/2`, level-3
    /// `d⊗d⊗d/6`.
    pub fn segment(dx: f64, dy: f64, trunc: SignatureTruncation) -> Self {
        let d = [dx, dy];
        let mut sig = Signature::identity(trunc);
        sig.level1 = d;
        if trunc.order >= 2 {
            for i in 0..2 {
                for j in 0..2 {
                    sig.level2[i * 2 + j] = d[i] * d[j] / 2.0;
                }
            }
        }
        if trunc.order >= 3 {
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        sig.level3[i * 4 + j * 2 + k] = d[i] * d[j] * d[k] / 6.0;
                    }
                }
            }
        }
        sig
    }

    /// Chen concatenation: level-n of the result is
    /// `Σ_{a+b=n} level-a(self) ⊗ level-b(other)` with level-0 ≡ 1.
    pub fn concatenate(&self, other: &Signature) -> Result<Signature, FeatureError> {
        if self.order != other.order {
            return Err(FeatureError::OrderMismatch { left: self.order, right: other.order });
        }
        let mut out = *self;
        let (a1, b1) = (self.level1, other.level1);
        for i in 0..2 {
            out.level1[i] = a1[i] + b1[i];
        }
        if self.order >= 2 {
            for i in 0..2 {
                for j in 0..2 {
                    out.level2[i * 2 + j] = self.level2[i * 2 + j] + a1[i] * b1[j] + other.level2[i * 2 + j];
                }
            }
        }
        if self.order >= 3 {
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        out.level3[i * 4 + j * 2 + k] = self.level3[i * 4 + j * 2 + k]
                            + self.level2[i * 2 + j] * b1[k]
                            + a1[i] * other.level2[j * 2 + k]
                            + other.level3[i * 4 + j * 2 + k];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Tensor entries of levels 1..=order, in channel order.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(14);
        out.extend_from_slice(&self.level1);
        if self.order >= 2 {
            out.extend_from_slice(&self.level2);
        }
        if self.order >= 3 {
            out.extend_from_slice(&self.level3);
        }
        out
    }
}

/// Renders per-point sliding-window signatures as feature maps.
///
/// For every trajectory point, the truncated signature of the trailing
/// window of `window` consecutive points (within its stroke) is computed
/// by concatenating segment signatures, and each coefficient is splatted
/// additively into its channel at the point's position. Channel 0 is the
/// order-0 visit map (1 per visited pixel, clamped to `[0, 1]`).
pub fn signature_maps(
    s: &StrokeSample,
    trunc: SignatureTruncation,
    window: usize,
) -> Result<FeatureTensor, FeatureError> {
    if window < 2 {
        return Err(FeatureError::WindowTooSmall(window));
    }
    check_normalized(s)?;

    let mut tensor = FeatureTensor::zeros(trunc.channels());
    for stroke in &s.strokes {
        let pts = &stroke.points;
        for i in 0..pts.len() {
            let start = (i + 1).saturating_sub(window);
            let mut sig = Signature::identity(trunc);
            for w in start..i {
                let seg = Signature::segment(pts[w + 1].x - pts[w].x, pts[w + 1].y - pts[w].y, trunc);
                sig = sig.concatenate(&seg)?;
            }
            splat(tensor.channel_mut(0), pts[i].x, pts[i].y, 1.0);
            for (c, value) in sig.coefficients().into_iter().enumerate() {
                splat(tensor.channel_mut(c + 1), pts[i].x, pts[i].y, value);
            }
        }
    }
    clamp_unit(tensor.channel_mut(0));
    Ok(tensor)
}

pub(super) fn check_normalized(s: &StrokeSample) -> Result<(), FeatureError> {
    for p in s.points() {
        if !in_normalized_domain(p) {
            return Err(FeatureError::Unnormalized { id: s.id, x: p.x, y: p.y });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strokes::{Point, Stroke};

    fn trunc(order: usize) -> SignatureTruncation {
        SignatureTruncation::new(order).unwrap()
    }

    #[test]
    fn unit_x_segment_order2() {
        let sig = Signature::segment(1.0, 0.0, trunc(2));
        assert_eq!(sig.level1, [1.0, 0.0]);
        assert_eq!(sig.level2, [0.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_segment_is_identity() {
        let sig = Signature::segment(0.0, 0.0, trunc(3));
        assert_eq!(sig, Signature::identity(trunc(3)));
    }

    #[test]
    fn pure_y_segment_order3() {
        let sig = Signature::segment(0.0, 2.0, trunc(3));
        // (y,y,y) entry is 2^3/6; every entry touching x vanishes.
        assert!((sig.level3[7] - 8.0 / 6.0).abs() < 1e-15);
        for idx in 0..7 {
            assert_eq!(sig.level3[idx], 0.0);
        }
    }

    #[test]
    fn concatenating_collinear_segments_matches_single_segment() {
        let a = Signature::segment(1.0, 0.0, trunc(2));
        let joined = a.concatenate(&a).unwrap();
        let direct = Signature::segment(2.0, 0.0, trunc(2));
        for (l, r) in joined.coefficients().iter().zip(direct.coefficients()) {
            assert!((l - r).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_is_neutral_element() {
        let sig = Signature::segment(0.3, -1.2, trunc(3));
        let id = Signature::identity(trunc(3));
        assert_eq!(sig.concatenate(&id).unwrap(), sig);
        assert_eq!(id.concatenate(&sig).unwrap(), sig);
    }

    #[test]
    fn l_shaped_path_has_half_unit_area() {
        let sig = Signature::segment(1.0, 0.0, trunc(2))
            .concatenate(&Signature::segment(0.0, 1.0, trunc(2)))
            .unwrap();
        let xy = sig.level2[1];
        let yx = sig.level2[2];
        assert!((xy - 1.0).abs() < 1e-15);
        assert!(yx.abs() < 1e-15);
        assert!(((xy - yx) / 2.0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn order_mismatch_is_rejected() {
        let a = Signature::segment(1.0, 0.0, trunc(2));
        let b = Signature::segment(1.0, 0.0, trunc(3));
        assert!(matches!(a.concatenate(&b), Err(FeatureError::OrderMismatch { left: 2, right: 3 })));
    }

    fn straight_sample() -> StrokeSample {
        let pts = (0..9).map(|i| Point::new(6.0 * i as f64, 24.0)).collect();
        StrokeSample::new(0, 0, vec![Stroke::new(pts)])
    }

    #[test]
    fn straight_stroke_has_no_level1_y_response() {
        let t = signature_maps(&straight_sample(), trunc(1), 4).unwrap();
        assert_eq!(t.channels(), 3);
        assert!(t.channel_mass(1) > 0.0);
        assert_eq!(t.channel_mass(2), 0.0);
    }

    #[test]
    fn straight_stroke_level2_is_symmetric() {
        let t = signature_maps(&straight_sample(), trunc(2), 4).unwrap();
        assert_eq!(t.channels(), 7);
        // Channels 4 and 5 hold the xy and yx entries.
        for (a, b) in t.channel(4).iter().zip(t.channel(5)) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn window_below_two_is_rejected() {
        let err = signature_maps(&straight_sample(), trunc(2), 1).unwrap_err();
        assert!(matches!(err, FeatureError::WindowTooSmall(1)));
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let s = StrokeSample::new(3, 0, vec![Stroke::new(vec![Point::new(-5.0, 0.0), Point::new(4.0, 4.0)])]);
        let err = signature_maps(&s, trunc(2), 4).unwrap_err();
        assert!(matches!(err, FeatureError::Unnormalized { id: 3, .. }));
    }
}
