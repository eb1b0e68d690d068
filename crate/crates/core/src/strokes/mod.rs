//! Data model for online pen trajectories.
//!
//! A [`StrokeSample`] is an ordered list of pen-down strokes, each an
//! ordered point sequence, plus a class label. Coordinates are unitless;
//! nothing is resampled at ingestion. [`normalize_sample`] maps a sample
//! into the `[0, 48]²` square (aspect preserved) ahead of rasterization.

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod io;
mod synthetic;

pub use io::{load_dataset, write_dataset, DatasetFormat};
pub use synthetic::{generate_synthetic, generate_synthetic_split};

/// Side length of the normalized coordinate square. Normalized samples
/// span exactly this extent along their longer axis.
pub const NORM_EXTENT: f64 = 48.0;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("record {record}: label {label} out of range for {k} classes")]
    LabelOutOfRange { record: u64, label: usize, k: usize },
    #[error("duplicate sample id {id}")]
    DuplicateId { id: u64 },
    #[error("dataset {path} contains no records")]
    Empty { path: String },
    #[error("record {record}: {msg}")]
    InvalidRecord { record: u64, msg: String },
    #[error("noise mask length {mask} does not match sample count {samples}")]
    MaskLength { mask: usize, samples: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("sample {id}: all points identical, bounding box is degenerate")]
    Degenerate { id: u64 },
    #[error("sample {id}: non-finite coordinate")]
    NonFinite { id: u64 },
}

/// A single trajectory point. Coordinates must be finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One pen-down stroke: a non-empty ordered point sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stroke {
    pub points: Vec<Point>,
}

impl Stroke {
    pub fn new(points: Vec<Point>) -> Self {
        Stroke { points }
    }

    pub fn first(&self) -> &Point {
        &self.points[0]
    }

    pub fn last(&self) -> &Point {
        self.points.last().expect("stroke is non-empty")
    }
}

/// A labeled trajectory: the training pair of one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeSample {
    pub id: u64,
    pub label: usize,
    pub strokes: Vec<Stroke>,
}

impl StrokeSample {
    pub fn new(id: u64, label: usize, strokes: Vec<Stroke>) -> Self {
        StrokeSample { id, label, strokes }
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.strokes.iter().flat_map(|s| s.points.iter())
    }

    /// (min_x, min_y, max_x, max_y) over all points.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let mut bb = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in self.points() {
            bb.0 = bb.0.min(p.x);
            bb.1 = bb.1.min(p.y);
            bb.2 = bb.2.max(p.x);
            bb.3 = bb.3.max(p.y);
        }
        bb
    }
}

/// A labeled training set. `noise_mask`, when present, flags samples
/// whose labels were deliberately flipped at generation time (synthetic
/// data only); it is carried so audits can measure how well low quotas
/// line up with the injected mislabels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<StrokeSample>,
    pub k: usize,
    pub noise_mask: Option<Vec<bool>>,
}

impl Dataset {
    pub fn new(samples: Vec<StrokeSample>, k: usize, noise_mask: Option<Vec<bool>>) -> Result<Self, DatasetError> {
        let d = Dataset { samples, k, noise_mask };
        d.validate()?;
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    /// Checks every structural invariant: unique ids, labels `< k`,
    /// non-empty strokes, finite coordinates, mask length.
    pub fn validate(&self) -> Result<(), DatasetError> {
        let mut seen = std::collections::HashSet::with_capacity(self.samples.len());
        for s in &self.samples {
            if !seen.insert(s.id) {
                return Err(DatasetError::DuplicateId { id: s.id });
            }
            if s.label >= self.k {
                return Err(DatasetError::LabelOutOfRange { record: s.id, label: s.label, k: self.k });
            }
            if s.strokes.is_empty() {
                return Err(DatasetError::InvalidRecord { record: s.id, msg: "empty stroke list".into() });
            }
            for (si, stroke) in s.strokes.iter().enumerate() {
                if stroke.points.is_empty() {
                    return Err(DatasetError::InvalidRecord {
                        record: s.id,
                        msg: format!("stroke {si} has no points"),
                    });
                }
                if stroke.points.iter().any(|p| !p.is_finite()) {
                    return Err(DatasetError::InvalidRecord {
                        record: s.id,
                        msg: format!("stroke {si} contains a non-finite coordinate"),
                    });
                }
            }
        }
        if let Some(mask) = &self.noise_mask {
            if mask.len() != self.samples.len() {
                return Err(DatasetError::MaskLength { mask: mask.len(), samples: self.samples.len() });
            }
        }
        Ok(())
    }

    /// Re-interprets the dataset under an explicit class count,
    /// rejecting any label outside `[0, k)`.
    pub fn with_class_count(mut self, k: usize) -> Result<Self, DatasetError> {
        self.k = k;
        self.validate()?;
        Ok(self)
    }
}

/// Scales a sample uniformly (aspect preserved) and translates it so the
/// bounding box sits centered in `[0, 48]²`; an axis with zero extent is
/// centered at 24. Idempotent to floating tolerance.
pub fn normalize_sample(s: &StrokeSample) -> Result<StrokeSample, GeometryError> {
    for p in s.points() {
        if !p.is_finite() {
            return Err(GeometryError::NonFinite { id: s.id });
        }
    }
    let (min_x, min_y, max_x, max_y) = s.bounding_box();
    let (w, h) = (max_x - min_x, max_y - min_y);
    if w <= 0.0 && h <= 0.0 {
        return Err(GeometryError::Degenerate { id: s.id });
    }
    let scale = NORM_EXTENT / w.max(h);
    let off_x = (NORM_EXTENT - w * scale) / 2.0;
    let off_y = (NORM_EXTENT - h * scale) / 2.0;
    let map = |p: &Point| {
        let x = if w > 0.0 { (p.x - min_x) * scale + off_x } else { NORM_EXTENT / 2.0 };
        let y = if h > 0.0 { (p.y - min_y) * scale + off_y } else { NORM_EXTENT / 2.0 };
        Point::new(x, y)
    };
    let strokes = s
        .strokes
        .iter()
        .map(|st| Stroke::new(st.points.iter().map(&map).collect()))
        .collect();
    Ok(StrokeSample::new(s.id, s.label, strokes))
}
