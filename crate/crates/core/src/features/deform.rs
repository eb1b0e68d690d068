//! Deformation transformation: a global affine map plus a smooth local
//! shrink/stretch, used to synthesize handwriting-style variation.
//!
//! The local map is `(x, y) → (x + a·sin(2πf·y/48 + φx), y + a·sin(2πf·x/48 + φy))`
//! with phases drawn from the seed. Each displacement depends only on
//! the orthogonal coordinate, so the Jacobian is `[[1, ±ac], [±ac, 1]]`
//! with `|c| = 2πf/48`; requiring `a·f < 1` keeps the determinant
//! positive with a wide margin, so the map stays a bijection.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::strokes::{normalize_sample, Point, Stroke, StrokeSample, NORM_EXTENT};

use super::FeatureError;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DeformationParams {
    pub scale_x: f64,
    pub scale_y: f64,
    /// Rotation in radians about the center of the normalized square.
    pub rotation: f64,
    pub translate_x: f64,
    pub translate_y: f64,
    pub local_amplitude: f64,
    pub local_frequency: f64,
    pub seed: u64,
}

impl DeformationParams {
    pub fn identity(seed: u64) -> Self {
        DeformationParams {
            scale_x: 1.0,
            scale_y: 1.0,
            rotation: 0.0,
            translate_x: 0.0,
            translate_y: 0.0,
            local_amplitude: 0.0,
            local_frequency: 1.0,
            seed,
        }
    }

    fn validate(&self) -> Result<(), FeatureError> {
        let bad = |msg: String| Err(FeatureError::Deformation(msg));
        if !(self.scale_x > 0.0 && self.scale_y > 0.0) {
            return bad(format!("scales must be positive (got {}, {})", self.scale_x, self.scale_y));
        }
        if self.local_amplitude < 0.0 || self.local_frequency <= 0.0 {
            return bad("local amplitude must be >= 0 and frequency > 0".into());
        }
        if self.local_amplitude * self.local_frequency >= 1.0 {
            return bad(format!(
                "amplitude*frequency must stay below 1 for bijectivity (got {})",
                self.local_amplitude * self.local_frequency
            ));
        }
        Ok(())
    }
}

/// Applies the deformation and re-normalizes. The input is normalized
/// first so the local map's spatial period refers to the `[0, 48]` span.
pub fn deform(s: &StrokeSample, p: &DeformationParams) -> Result<StrokeSample, FeatureError> {
    p.validate()?;
    let normalized = normalize_sample(s)?;

    let mut rng = ChaCha12Rng::seed_from_u64(p.seed);
    let phase_x: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let phase_y: f64 = rng.random_range(0.0..std::f64::consts::TAU);

    let center = NORM_EXTENT / 2.0;
    let (sin_r, cos_r) = p.rotation.sin_cos();
    let omega = std::f64::consts::TAU * p.local_frequency / NORM_EXTENT;

    let map = |pt: &Point| {
        // Affine about the center: scale, rotate, translate.
        let cx = (pt.x - center) * p.scale_x;
        let cy = (pt.y - center) * p.scale_y;
        let x = cx * cos_r - cy * sin_r + center + p.translate_x;
        let y = cx * sin_r + cy * cos_r + center + p.translate_y;
        // Smooth local displacement, each axis driven by the other.
        Point::new(
            x + p.local_amplitude * (omega * y + phase_x).sin(),
            y + p.local_amplitude * (omega * x + phase_y).sin(),
        )
    };

    let strokes: Vec<Stroke> = normalized
        .strokes
        .iter()
        .map(|st| Stroke::new(st.points.iter().map(&map).collect()))
        .collect();
    Ok(normalize_sample(&StrokeSample::new(s.id, s.label, strokes))?)
}
