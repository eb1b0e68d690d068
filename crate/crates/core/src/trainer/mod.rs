//! The training loop: quota-weighted mini-batch SGD with adaptive
//! sample selection, metric logging, paired with/without-sampler
//! comparison, and the mislabel audit.
//!
//! One iteration does, in order: draw a mini-batch from the normalized
//! quota distribution (uniformly when the sampler is off), forward pass,
//! gradient, parameter update, then quota updates for exactly the drawn
//! samples using their pre-update confidences. Everything is
//! deterministic given the config seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::classifier::{
    argmax, BatchItem, ConfidenceSource, FeatureVector, LossConfig, ModelError, SoftmaxModel,
};
use crate::features::{build_feature_stack, deform, DeformationParams, FeatureConfig, FeatureError};
use crate::rng::mix_seed;
use crate::sampler::{GroupThresholds, QuotaTable, SamplerError, UpdateRule};
use crate::strokes::{normalize_sample, Dataset, GeometryError};

mod benchmark;
mod log;

pub use benchmark::{desk_benchmark, BenchmarkSpec};
pub use log::{TrainLog, TrainRecord, CSV_HEADER};

/// Quota below which a sample counts as dropped in audits.
pub const LOW_QUOTA: f64 = 0.1;

const TAG_DRAW: u64 = 0x64726177; // "draw"
const TAG_MODEL: u64 = 0x6d6f64656c; // "model"
const TAG_AUGMENT: u64 = 0x617567; // "aug"

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training diverged at iteration {iteration}: loss = {loss}")]
    Diverged { iteration: u64, loss: f64 },
    #[error("train and test sets disagree on class count ({train_k} vs {test_k})")]
    ClassMismatch { train_k: usize, test_k: usize },
    #[error("train and test sets overlap on sample id {id}")]
    Overlap { id: u64 },
    #[error("dataset carries no noise mask")]
    MissingNoiseMask,
    #[error("training log carries no final quotas (was the sampler off?)")]
    MissingQuotas,
    #[error("comparison requires an active sampler variant")]
    SamplerRequired,
    #[error("invalid config: {0}")]
    Config(String),
    #[error("train log {path}: {msg}")]
    LogSchema { path: String, msg: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Step-decay schedule: `α(t) = initial · decay^⌊(t−1)/interval⌋`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LearningRate {
    pub initial: f64,
    pub decay: f64,
    pub interval: u64,
}

impl LearningRate {
    pub fn constant(alpha: f64) -> Self {
        LearningRate { initial: alpha, decay: 1.0, interval: 1 }
    }

    pub fn at(&self, t: u64) -> f64 {
        self.initial * self.decay.powi(((t - 1) / self.interval) as i32)
    }
}

/// Deformation-augmentation ranges. When set, each drawn sample is
/// re-deformed with parameters derived from `(sample id, iteration)`
/// before feature extraction, instead of using the cached features.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DeformAugment {
    pub scale_jitter: f64,
    pub max_rotation: f64,
    pub max_translate: f64,
    pub local_amplitude: f64,
    pub local_frequency: f64,
}

impl DeformAugment {
    fn params(&self, base_seed: u64, sample_id: u64, iteration: u64) -> DeformationParams {
        let key = mix_seed(mix_seed(base_seed, TAG_AUGMENT), mix_seed(sample_id, iteration));
        let mut rng = ChaCha12Rng::seed_from_u64(key);
        DeformationParams {
            scale_x: 1.0 + rng.random_range(-self.scale_jitter..=self.scale_jitter),
            scale_y: 1.0 + rng.random_range(-self.scale_jitter..=self.scale_jitter),
            rotation: rng.random_range(-self.max_rotation..=self.max_rotation),
            translate_x: rng.random_range(-self.max_translate..=self.max_translate),
            translate_y: rng.random_range(-self.max_translate..=self.max_translate),
            local_amplitude: self.local_amplitude,
            local_frequency: self.local_frequency,
            seed: key,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub iterations: u64,
    pub batch: usize,
    pub lr: LearningRate,
    pub lambda: f64,
    /// Hidden-layer width; `None` trains the plain linear softmax.
    pub hidden: Option<usize>,
    /// Quota-update rule; `None` disables the sampler entirely.
    pub sampler: Option<UpdateRule>,
    /// Noisy threshold T1; defaults to `1/k` when unset.
    pub t1: Option<f64>,
    /// Well-recognized threshold T2.
    pub t2: f64,
    /// Fraction of the iteration budget during which noisy-group
    /// down-weighting is suppressed.
    pub warmup_fraction: f64,
    pub q_min: f64,
    pub confidence: ConfidenceSource,
    pub features: FeatureConfig,
    pub augment: Option<DeformAugment>,
    pub seed: u64,
    pub eval_interval: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 1000,
            batch: 96,
            lr: LearningRate::constant(0.1),
            lambda: 0.0,
            hidden: None,
            sampler: None,
            t1: None,
            t2: 0.99,
            warmup_fraction: 0.25,
            q_min: crate::sampler::DEFAULT_Q_MIN,
            confidence: ConfidenceSource::PredictedClass,
            features: FeatureConfig::default(),
            augment: None,
            seed: 0,
            eval_interval: 100,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |msg: String| Err(TrainError::Config(msg));
        if self.iterations < 1 {
            return bad("iterations must be at least 1".into());
        }
        if self.batch < 1 {
            return bad("batch size must be at least 1".into());
        }
        if !(self.lr.initial > 0.0 && self.lr.initial.is_finite()) {
            return bad(format!("learning rate must be positive (got {})", self.lr.initial));
        }
        if !(self.lr.decay > 0.0 && self.lr.decay <= 1.0) {
            return bad(format!("learning-rate decay must lie in (0, 1] (got {})", self.lr.decay));
        }
        if self.lr.interval < 1 {
            return bad("decay interval must be at least 1".into());
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be finite and >= 0 (got {})", self.lambda));
        }
        if !(0.0..=1.0).contains(&self.warmup_fraction) {
            return bad(format!("warm-up fraction must lie in [0, 1] (got {})", self.warmup_fraction));
        }
        if self.eval_interval < 1 {
            return bad("eval interval must be at least 1".into());
        }
        self.features.validate().map_err(TrainError::Feature)?;
        if let Some(a) = &self.augment {
            if a.local_amplitude * a.local_frequency >= 1.0 {
                return bad("augmentation amplitude*frequency must stay below 1".into());
            }
        }
        Ok(())
    }

    fn thresholds(&self, k: usize) -> Result<GroupThresholds, SamplerError> {
        GroupThresholds::new(self.t1.unwrap_or(1.0 / k as f64), self.t2)
    }

    fn warmup_iterations(&self) -> u64 {
        (self.warmup_fraction * self.iterations as f64).floor() as u64
    }
}

/// The RNG stream that drives mini-batch draws for a given seed. Shared
/// with reference implementations for draw-for-draw comparison.
pub fn training_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(mix_seed(seed, TAG_DRAW))
}

/// Normalizes every sample and extracts its feature stack.
pub fn extract_features(dataset: &Dataset, config: &FeatureConfig) -> Result<Vec<FeatureVector>, TrainError> {
    dataset
        .samples
        .iter()
        .map(|s| {
            let normalized = normalize_sample(s)?;
            let tensor = build_feature_stack(&normalized, config)?;
            Ok(FeatureVector::from_tensor(&tensor)?)
        })
        .collect()
}

fn evaluate_cached(model: &SoftmaxModel, features: &[FeatureVector], labels: &[usize]) -> Result<f64, ModelError> {
    let mut wrong = 0usize;
    for (x, y) in features.iter().zip(labels) {
        if argmax(&model.predict(x)?) != *y {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / labels.len() as f64)
}

/// Error rate of the model on a dataset: fraction of samples whose
/// predicted arg-max (ties to the lowest class index) differs from the
/// label.
pub fn evaluate(model: &SoftmaxModel, dataset: &Dataset, config: &FeatureConfig) -> Result<f64, TrainError> {
    let features = extract_features(dataset, config)?;
    Ok(evaluate_cached(model, &features, &dataset.labels())?)
}

/// Runs the full training loop. Returns the trained model and the
/// per-eval-point log.
pub fn train(train_set: &Dataset, test_set: &Dataset, cfg: &TrainConfig) -> Result<(SoftmaxModel, TrainLog), TrainError> {
    cfg.validate()?;
    if train_set.k != test_set.k {
        return Err(TrainError::ClassMismatch { train_k: train_set.k, test_k: test_set.k });
    }
    let train_ids: std::collections::HashSet<u64> = train_set.samples.iter().map(|s| s.id).collect();
    if let Some(shared) = test_set.samples.iter().find(|s| train_ids.contains(&s.id)) {
        return Err(TrainError::Overlap { id: shared.id });
    }

    let k = train_set.k;
    let m = train_set.len();
    let thresholds = cfg.thresholds(k)?;
    if let Some(rule) = &cfg.sampler {
        rule.validate(&thresholds)?;
    }

    let train_features = extract_features(train_set, &cfg.features)?;
    let test_features = extract_features(test_set, &cfg.features)?;
    let train_labels = train_set.labels();
    let test_labels = test_set.labels();
    let n = train_features.first().map(|f| f.dim()).ok_or_else(|| TrainError::Config("empty training set".into()))?;

    let mut model = match cfg.hidden {
        None => SoftmaxModel::linear(k, n),
        Some(h) => SoftmaxModel::with_hidden(k, n, h, mix_seed(cfg.seed, TAG_MODEL)),
    };
    let mut quota_table = match &cfg.sampler {
        Some(_) => Some(QuotaTable::new(m, cfg.warmup_iterations(), cfg.q_min)?),
        None => None,
    };
    let mut rng = training_rng(cfg.seed);
    let loss_cfg = LossConfig { lambda: cfg.lambda };
    let mask = train_set.noise_mask.as_deref();

    let mut records = Vec::new();
    for t in 1..=cfg.iterations {
        let indices: Vec<usize> = match &mut quota_table {
            Some(qt) => {
                qt.advance_iteration();
                qt.draw_minibatch(cfg.batch, &mut rng)
            }
            None => (0..cfg.batch).map(|_| rng.random_range(0..m)).collect(),
        };

        // Augmented draws re-extract features; otherwise use the cache.
        let augmented: Vec<FeatureVector> = match &cfg.augment {
            None => Vec::new(),
            Some(aug) => indices
                .iter()
                .map(|&i| {
                    let sample = &train_set.samples[i];
                    let params = aug.params(cfg.seed, sample.id, t);
                    let deformed = deform(sample, &params)?;
                    let tensor = build_feature_stack(&deformed, &cfg.features)?;
                    Ok(FeatureVector::from_tensor(&tensor)?)
                })
                .collect::<Result<_, TrainError>>()?,
        };
        let batch: Vec<BatchItem> = indices
            .iter()
            .enumerate()
            .map(|(pos, &i)| {
                let fv = if cfg.augment.is_some() { &augmented[pos] } else { &train_features[i] };
                (fv, train_labels[i])
            })
            .collect();

        let (loss, grad, probs) = model.loss_and_gradient(&batch, &loss_cfg)?;
        if !loss.is_finite() {
            return Err(TrainError::Diverged { iteration: t, loss });
        }

        let logging = t % cfg.eval_interval == 0 || t == cfg.iterations;
        // Batch diagnostics refer to the pre-update parameters.
        let pre_step = if logging {
            let lambda_free_norm = grad
                .iter()
                .zip(model.params())
                .map(|(g, p)| {
                    let v = g - cfg.lambda * p;
                    v * v
                })
                .sum::<f64>()
                .sqrt();
            let decomposition = model.decompose_error_with_source(&batch, &thresholds, cfg.confidence)?;
            Some((lambda_free_norm, decomposition))
        } else {
            None
        };

        model.sgd_step(&grad, cfg.lr.at(t));

        if let (Some(qt), Some(rule)) = (&mut quota_table, &cfg.sampler) {
            for (pos, &i) in indices.iter().enumerate() {
                let p = cfg.confidence.confidence(&probs[pos], train_labels[i]);
                qt.apply_update(i, p, rule, &thresholds)?;
            }
        }

        if let Some((grad_norm, decomposition)) = pre_step {
            let test_error = evaluate_cached(&model, &test_features, &test_labels)?;
            let equivalent_set_size = quota_table.as_ref().map(|qt| qt.equivalent_set_size()).unwrap_or(m as f64);
            let masked_low_quota_frac = match (&quota_table, mask) {
                (Some(qt), Some(mask)) => {
                    let masked: Vec<f64> = qt
                        .quotas()
                        .iter()
                        .zip(mask)
                        .filter(|(_, &is_noise)| is_noise)
                        .map(|(&q, _)| q)
                        .collect();
                    if masked.is_empty() {
                        None
                    } else {
                        Some(masked.iter().filter(|&&q| q < LOW_QUOTA).count() as f64 / masked.len() as f64)
                    }
                }
                _ => None,
            };
            records.push(TrainRecord {
                iteration: t,
                train_loss: loss,
                test_error,
                equivalent_set_size,
                grad_norm,
                e1_norm: decomposition.e1_norm,
                e2_norm: decomposition.e2_norm,
                e3_norm: decomposition.e3_norm,
                group_counts: decomposition.group_counts,
                masked_low_quota_frac,
            });
        }
    }

    let final_quotas = quota_table.map(|qt| qt.quotas().to_vec());
    Ok((model, TrainLog { records, final_quotas }))
}

/// Result of the paired with/without-sampler experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub final_accuracy_with: f64,
    pub final_accuracy_without: f64,
    /// Best accuracy the sampler-off run reached; the shared target.
    pub target_accuracy: f64,
    /// First iteration at which the sampler-off run hit the target.
    pub iterations_without: u64,
    /// First iteration at which the sampler-on run hit the target, if
    /// it ever did.
    pub iterations_with: Option<u64>,
    /// `1 − with/without`, when the target was reached.
    pub savings: Option<f64>,
    pub with_log: TrainLog,
    pub without_log: TrainLog,
}

/// Runs training twice on identical data, seed and schedule — once with
/// the configured sampler, once without — and measures the
/// iterations-to-target saving.
pub fn compare_dropsample(train_set: &Dataset, test_set: &Dataset, cfg: &TrainConfig) -> Result<ComparisonReport, TrainError> {
    if cfg.sampler.is_none() {
        return Err(TrainError::SamplerRequired);
    }
    let (_, with_log) = train(train_set, test_set, cfg)?;
    let mut off_cfg = cfg.clone();
    off_cfg.sampler = None;
    let (_, without_log) = train(train_set, test_set, &off_cfg)?;

    let last = |log: &TrainLog| log.records.last().map(|r| r.accuracy()).unwrap_or(0.0);
    let final_accuracy_with = last(&with_log);
    let final_accuracy_without = last(&without_log);

    let target_accuracy = without_log.records.iter().map(|r| r.accuracy()).fold(0.0, f64::max);
    let iterations_without = without_log
        .records
        .iter()
        .find(|r| r.accuracy() >= target_accuracy)
        .map(|r| r.iteration)
        .unwrap_or(cfg.iterations);
    let iterations_with = with_log.records.iter().find(|r| r.accuracy() >= target_accuracy).map(|r| r.iteration);
    let savings = iterations_with.map(|iw| 1.0 - iw as f64 / iterations_without as f64);

    Ok(ComparisonReport {
        final_accuracy_with,
        final_accuracy_without,
        target_accuracy,
        iterations_without,
        iterations_with,
        savings,
        with_log,
        without_log,
    })
}

/// How well low quotas line up with injected mislabels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseAudit {
    /// Fraction of masked samples with final quota below 0.1; `None`
    /// when no samples are masked.
    pub recall: Option<f64>,
    /// Fraction of clean samples with final quota below 0.1; `None`
    /// when every sample is masked.
    pub false_drop: Option<f64>,
    pub masked_total: usize,
    pub masked_low: usize,
    pub clean_total: usize,
    pub clean_low: usize,
}

pub fn noise_audit_from_quotas(quotas: &[f64], mask: &[bool]) -> Result<NoiseAudit, TrainError> {
    if quotas.len() != mask.len() {
        return Err(TrainError::Config(format!(
            "quota count {} does not match mask length {}",
            quotas.len(),
            mask.len()
        )));
    }
    let mut audit = NoiseAudit {
        recall: None,
        false_drop: None,
        masked_total: 0,
        masked_low: 0,
        clean_total: 0,
        clean_low: 0,
    };
    for (&q, &is_noise) in quotas.iter().zip(mask) {
        let low = q < LOW_QUOTA;
        if is_noise {
            audit.masked_total += 1;
            audit.masked_low += usize::from(low);
        } else {
            audit.clean_total += 1;
            audit.clean_low += usize::from(low);
        }
    }
    if audit.masked_total > 0 {
        audit.recall = Some(audit.masked_low as f64 / audit.masked_total as f64);
    }
    if audit.clean_total > 0 {
        audit.false_drop = Some(audit.clean_low as f64 / audit.clean_total as f64);
    }
    Ok(audit)
}

/// Audits a finished run: requires the dataset's noise mask and the
/// log's final quotas.
pub fn noise_audit(log: &TrainLog, dataset: &Dataset) -> Result<NoiseAudit, TrainError> {
    let mask = dataset.noise_mask.as_ref().ok_or(TrainError::MissingNoiseMask)?;
    let quotas = log.final_quotas.as_ref().ok_or(TrainError::MissingQuotas)?;
    noise_audit_from_quotas(quotas, mask)
}
