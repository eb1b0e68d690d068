//! The repository-pinned desk-scale benchmark.
//!
//! A fixed synthetic workload — 20 classes, 200 samples per class, 5%
//! injected mislabels — trained for 20k iterations with the
//! hierarchical (ds2) rule, 25% warm-up, and true-label confidence so
//! mislabels land in the noisy group. The exact hyperparameters below
//! were tuned once against the acceptance targets and then frozen;
//! treat them as part of the benchmark's identity.

use crate::classifier::ConfidenceSource;
use crate::features::FeatureConfig;
use crate::sampler::{GroupThresholds, UpdateRule};
use crate::strokes::{generate_synthetic_split, Dataset, DatasetError};

use super::{LearningRate, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    pub classes: usize,
    pub per_class: usize,
    pub holdout_per_class: usize,
    pub data_seed: u64,
    pub mislabel_fraction: f64,
    pub jitter: f64,
    pub config: TrainConfig,
}

impl BenchmarkSpec {
    pub fn generate(&self) -> Result<(Dataset, Dataset), DatasetError> {
        generate_synthetic_split(
            self.classes,
            self.per_class,
            self.holdout_per_class,
            self.data_seed,
            self.mislabel_fraction,
            self.jitter,
        )
    }
}

/// The pinned benchmark: dataset seed, schedule and sampler settings
/// are all frozen so the run is reproducible byte-for-byte.
pub fn desk_benchmark() -> BenchmarkSpec {
    let thresholds = GroupThresholds::for_classes(20);
    BenchmarkSpec {
        classes: 20,
        per_class: 200,
        holdout_per_class: 50,
        data_seed: 20250811,
        mislabel_fraction: 0.05,
        jitter: 0.035,
        config: TrainConfig {
            iterations: 20_000,
            batch: 96,
            lr: LearningRate { initial: 0.2, decay: 0.7, interval: 2500 },
            lambda: 3e-4,
            hidden: None,
            sampler: Some(UpdateRule::ds2(&thresholds)),
            t1: None,
            t2: 0.99,
            warmup_fraction: 0.25,
            q_min: 1e-6,
            confidence: ConfidenceSource::TrueLabel,
            features: FeatureConfig::default(),
            augment: None,
            seed: 97,
            eval_interval: 250,
        },
    }
}
