//! Synthetic stroke datasets with controllable label noise.
//!
//! Classes come in families of three: each family has a base glyph (1–4
//! strokes, each a short random polyline walk inside a 100×100 box) and
//! every class in the family perturbs the base's points by a fixed
//! per-class offset. Same-family classes are therefore confusable the
//! way similar characters are, which keeps the task from collapsing to
//! trivially separable clusters. A sample is its class prototype plus
//! additive per-point jitter drawn from `(seed, class, instance)`, so
//! datasets are bit-reproducible and prototypes are shared across calls
//! with the same seed. The glyph shapes themselves are an implementation
//! choice, not a contract.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::{Dataset, DatasetError, Point, Stroke, StrokeSample};
use crate::rng::mix_seed;

const GLYPH_BOX: f64 = 100.0;
/// Classes per confusable family.
const FAMILY_SIZE: usize = 4;
/// Per-point amplitude distinguishing same-family classes. Kept near
/// the typical sampling-jitter scale so families genuinely overlap.
const VARIANT_AMPLITUDE: f64 = 5.0;
/// Strokes and points per glyph are fixed so no class is structurally
/// easier than another.
const GLYPH_STROKES: usize = 3;
const GLYPH_POINTS: usize = 5;

const TAG_PROTO: u64 = 0x70726f746f; // "proto"
const TAG_VARIANT: u64 = 0x76617269616e74; // "variant"
const TAG_SAMPLE: u64 = 0x73616d706c65; // "sample"
const TAG_NOISE: u64 = 0x6e6f697365; // "noise"

/// Generates `k × per_class` labeled samples with exactly
/// `floor(mislabel_fraction · k · per_class)` uniformly chosen samples
/// given a wrong label and `noise_mask = true`.
pub fn generate_synthetic(
    k: usize,
    per_class: usize,
    seed: u64,
    mislabel_fraction: f64,
    jitter: f64,
) -> Result<Dataset, DatasetError> {
    let (train, _) = generate_synthetic_split(k, per_class, 0, seed, mislabel_fraction, jitter)?;
    Ok(train)
}

/// Like [`generate_synthetic`], but also emits a disjoint holdout set of
/// `holdout_per_class` extra samples per class. Both sets share the same
/// class prototypes; mislabels are injected only into the training part,
/// and the holdout mask is all false.
pub fn generate_synthetic_split(
    k: usize,
    per_class: usize,
    holdout_per_class: usize,
    seed: u64,
    mislabel_fraction: f64,
    jitter: f64,
) -> Result<(Dataset, Dataset), DatasetError> {
    if k < 2 {
        return Err(DatasetError::InvalidParam(format!("class count must be at least 2 (got {k})")));
    }
    if per_class < 1 {
        return Err(DatasetError::InvalidParam("per-class count must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&mislabel_fraction) {
        return Err(DatasetError::InvalidParam(format!(
            "mislabel fraction must lie in [0, 1) (got {mislabel_fraction})"
        )));
    }
    if !jitter.is_finite() || jitter < 0.0 {
        return Err(DatasetError::InvalidParam(format!("jitter must be finite and >= 0 (got {jitter})")));
    }

    let prototypes: Vec<Vec<Stroke>> = (0..k).map(|c| class_prototype(seed, c)).collect();

    let train_total = k * per_class;
    let mut train = Vec::with_capacity(train_total);
    for class in 0..k {
        for instance in 0..per_class {
            let id = (class * per_class + instance) as u64;
            train.push(make_sample(id, class, instance, &prototypes[class], seed, jitter));
        }
    }

    // Mislabel a uniformly random subset of the training part.
    let mut mask = vec![false; train_total];
    let n_flip = (mislabel_fraction * train_total as f64).floor() as usize;
    if n_flip > 0 {
        let mut rng = ChaCha12Rng::seed_from_u64(mix_seed(seed, TAG_NOISE));
        let chosen = rand::seq::index::sample(&mut rng, train_total, n_flip);
        for idx in chosen.iter() {
            let true_label = train[idx].label;
            let mut wrong = rng.random_range(0..k - 1);
            if wrong >= true_label {
                wrong += 1;
            }
            train[idx].label = wrong;
            mask[idx] = true;
        }
    }

    let mut holdout = Vec::with_capacity(k * holdout_per_class);
    for class in 0..k {
        for j in 0..holdout_per_class {
            let id = (train_total + class * holdout_per_class + j) as u64;
            holdout.push(make_sample(id, class, per_class + j, &prototypes[class], seed, jitter));
        }
    }
    let holdout_mask = vec![false; holdout.len()];

    let train = Dataset::new(train, k, Some(mask))?;
    let holdout = if holdout.is_empty() {
        Dataset { samples: Vec::new(), k, noise_mask: Some(holdout_mask) }
    } else {
        Dataset::new(holdout, k, Some(holdout_mask))?
    };
    Ok((train, holdout))
}

fn make_sample(id: u64, class: usize, instance: usize, prototype: &[Stroke], seed: u64, jitter: f64) -> StrokeSample {
    let strokes = if jitter == 0.0 {
        prototype.to_vec()
    } else {
        let key = mix_seed(mix_seed(seed, TAG_SAMPLE), mix_seed(class as u64, instance as u64));
        let mut rng = ChaCha12Rng::seed_from_u64(key);
        let amp = jitter * GLYPH_BOX;
        prototype
            .iter()
            .map(|st| {
                Stroke::new(
                    st.points
                        .iter()
                        .map(|p| {
                            Point::new(
                                p.x + rng.random_range(-amp..=amp),
                                p.y + rng.random_range(-amp..=amp),
                            )
                        })
                        .collect(),
                )
            })
            .collect()
    };
    StrokeSample::new(id, class, strokes)
}

/// Fixed polyline glyph for one class: the family's base walk plus a
/// deterministic per-class point perturbation.
fn class_prototype(seed: u64, class: usize) -> Vec<Stroke> {
    let family = (class / FAMILY_SIZE) as u64;
    let mut base_rng = ChaCha12Rng::seed_from_u64(mix_seed(mix_seed(seed, TAG_PROTO), family));
    let mut variant_rng = ChaCha12Rng::seed_from_u64(mix_seed(mix_seed(seed, TAG_VARIANT), class as u64));

    (0..GLYPH_STROKES)
        .map(|_| {
            let mut x: f64 = base_rng.random_range(15.0..85.0);
            let mut y: f64 = base_rng.random_range(15.0..85.0);
            let mut points = Vec::with_capacity(GLYPH_POINTS);
            for i in 0..GLYPH_POINTS {
                if i > 0 {
                    x = (x + base_rng.random_range(-32.0..=32.0)).clamp(0.0, GLYPH_BOX);
                    y = (y + base_rng.random_range(-32.0..=32.0)).clamp(0.0, GLYPH_BOX);
                }
                points.push(Point::new(
                    x + variant_rng.random_range(-VARIANT_AMPLITUDE..=VARIANT_AMPLITUDE),
                    y + variant_rng.random_range(-VARIANT_AMPLITUDE..=VARIANT_AMPLITUDE),
                ));
            }
            Stroke::new(points)
        })
        .collect()
}
