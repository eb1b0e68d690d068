//! The domain-knowledge layer: trajectory → multi-channel 96×96 tensors.
//!
//! Channel groups, in the fixed stacking order used by
//! [`build_feature_stack`]:
//!
//! 1. `bitmap` — anti-aliased rendering of the real strokes;
//! 2. `imaginary` — the pen-up connector segments, when selected;
//! 3. `sig*` — sliding-window path-signature maps (3/7/15 channels for
//!    truncation orders 1/2/3, including the order-0 visit map);
//! 4. `dir0..dir7` — 8-directional decomposition maps.
//!
//! Deformation augmentation acts upstream on trajectories and
//! contributes no channels of its own.

use thiserror::Error;

use crate::strokes::{GeometryError, StrokeSample};

mod deform;
mod directional;
mod raster;
mod signature;
mod tensor;

pub use deform::{deform, DeformationParams};
pub use directional::{directional_maps, directional_maps_with, DIRECTIONS};
pub use signature::{signature_maps, Signature, SignatureTruncation};
pub use tensor::{FeatureTensor, CONTENT, CONTENT_OFFSET, GRID};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("sample {id} is not normalized: coordinate ({x}, {y}) outside [0, 48]")]
    Unnormalized { id: u64, x: f64, y: f64 },
    #[error("signature order must be 1, 2, or 3 (got {0})")]
    InvalidOrder(usize),
    #[error("signature truncation orders differ: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("signature window must span at least 2 points (got {0})")]
    WindowTooSmall(usize),
    #[error("deformation parameters invalid: {0}")]
    Deformation(String),
    #[error("feature selection must include the bitmap channel")]
    EmptySelection,
    #[error("feature tensor: {0}")]
    TensorFormat(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Selection of channel groups for [`build_feature_stack`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FeatureConfig {
    /// Real-stroke bitmap channel; must be selected.
    pub bitmap: bool,
    /// Pen-up connector channel.
    pub imaginary: bool,
    /// Path-signature maps at the given truncation, if any.
    pub signature: Option<SignatureTruncation>,
    /// Points per signature sliding window.
    pub signature_window: usize,
    /// 8-directional maps.
    pub directional: bool,
    /// Feed pen-up segments into the directional maps too.
    pub directional_imaginary: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            bitmap: true,
            imaginary: false,
            signature: None,
            signature_window: 8,
            directional: false,
            directional_imaginary: false,
        }
    }
}

impl FeatureConfig {
    /// Bitmap + Sign.2 + 8Dir + IS, the full fusion stack (17 channels).
    pub fn fusion() -> Self {
        FeatureConfig {
            bitmap: true,
            imaginary: true,
            signature: Some(SignatureTruncation::new(2).expect("order 2 is valid")),
            signature_window: 8,
            directional: true,
            directional_imaginary: false,
        }
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        if !self.bitmap {
            return Err(FeatureError::EmptySelection);
        }
        if self.signature.is_some() && self.signature_window < 2 {
            return Err(FeatureError::WindowTooSmall(self.signature_window));
        }
        Ok(())
    }

    /// Total channel count `M` of the stack.
    pub fn channel_count(&self) -> usize {
        let mut m = usize::from(self.bitmap) + usize::from(self.imaginary);
        if let Some(t) = self.signature {
            m += t.channels();
        }
        if self.directional {
            m += DIRECTIONS;
        }
        m
    }

    /// Channel names in stacking order, for the tensor sidecar.
    pub fn channel_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.channel_count());
        if self.bitmap {
            names.push("bitmap".into());
        }
        if self.imaginary {
            names.push("imaginary".into());
        }
        if let Some(t) = self.signature {
            names.push("sig_visit".into());
            names.push("sig_x".into());
            names.push("sig_y".into());
            if t.order() >= 2 {
                for e in ["xx", "xy", "yx", "yy"] {
                    names.push(format!("sig_{e}"));
                }
            }
            if t.order() >= 3 {
                for i in ["x", "y"] {
                    for j in ["x", "y"] {
                        for k in ["x", "y"] {
                            names.push(format!("sig_{i}{j}{k}"));
                        }
                    }
                }
            }
        }
        if self.directional {
            for d in 0..DIRECTIONS {
                names.push(format!("dir{d}"));
            }
        }
        names
    }
}

/// Rasterizes the real strokes into channel 0 (and, when requested, the
/// imaginary pen-up segments into channel 1), anti-aliased, values
/// clamped to `[0, 1]`. The sample must be normalized to `[0, 48]²`.
pub fn render_bitmap(s: &StrokeSample, include_imaginary: bool) -> Result<FeatureTensor, FeatureError> {
    signature::check_normalized(s)?;
    let channels = if include_imaginary { 2 } else { 1 };
    let mut tensor = FeatureTensor::zeros(channels);

    for stroke in &s.strokes {
        if stroke.points.len() == 1 {
            let p = stroke.first();
            raster::splat(tensor.channel_mut(0), p.x, p.y, 1.0);
            continue;
        }
        for pair in stroke.points.windows(2) {
            let len = pair[0].distance(&pair[1]);
            raster::draw_segment(tensor.channel_mut(0), &pair[0], &pair[1], len);
        }
    }
    if include_imaginary {
        for pair in s.strokes.windows(2) {
            let (a, b) = (pair[0].last(), pair[1].first());
            let len = a.distance(b);
            if len > 0.0 {
                raster::draw_segment(tensor.channel_mut(1), a, b, len);
            }
        }
    }
    raster::clamp_unit(tensor.channel_mut(0));
    if include_imaginary {
        raster::clamp_unit(tensor.channel_mut(1));
    }
    Ok(tensor)
}

/// Extracts the selected channel groups and stacks them in the
/// documented fixed order. The sample must be normalized.
pub fn build_feature_stack(s: &StrokeSample, config: &FeatureConfig) -> Result<FeatureTensor, FeatureError> {
    config.validate()?;
    let mut parts = Vec::with_capacity(3);
    parts.push(render_bitmap(s, config.imaginary)?);
    if let Some(trunc) = config.signature {
        parts.push(signature_maps(s, trunc, config.signature_window)?);
    }
    if config.directional {
        parts.push(directional_maps_with(s, config.directional_imaginary)?);
    }
    Ok(FeatureTensor::stack(&parts))
}
