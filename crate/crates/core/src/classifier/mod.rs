//! A small k-way softmax classifier with an optional ReLU hidden layer.
//!
//! The model realizes `h_j(x) = exp(θ_j·x̃)/Σ_l exp(θ_l·x̃)` with the
//! bias folded in as a constant-1 input component (`x̃ = [x, 1]`), the
//! cross-entropy loss `−(1/b)Σ log p(y_i|x_i) + (λ/2)Σθ²`, its exact
//! gradient, and the three-group decomposition of the gradient by
//! classification confidence. Inputs are sparse feature vectors —
//! rasterized trajectories are mostly zeros, and skipping exact zeros is
//! bit-identical to the dense computation.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::features::FeatureTensor;
use crate::sampler::{classify_group, GroupThresholds, SampleGroup};

mod ensemble;

pub use ensemble::{ensemble_combine, EnsembleMode};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("feature vector has dimension {got}, model expects {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("non-finite value in input features")]
    NonFiniteInput,
    #[error("label {label} out of range for {k} classes")]
    LabelOutOfRange { label: usize, k: usize },
    #[error("batch is empty")]
    EmptyBatch,
    #[error("ensemble requires at least one model output")]
    EmptyEnsemble,
    #[error("ensemble outputs disagree on class count")]
    EnsembleShape,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which softmax probability drives group classification and quota
/// updates: the probability of the arg-max class, or of the true label.
///
/// `PredictedClass` is the default. Note that the predicted-class
/// probability is always ≥ 1/k (the maximum of a distribution is at
/// least its mean), so with the default noisy threshold T1 = 1/k the
/// noisy group is reachable only under `TrueLabel`, which is what
/// mislabel-elimination runs should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfidenceSource {
    #[default]
    #[serde(rename = "predicted")]
    PredictedClass,
    #[serde(rename = "true")]
    TrueLabel,
}

impl ConfidenceSource {
    pub fn confidence(&self, probs: &[f64], label: usize) -> f64 {
        match self {
            ConfidenceSource::PredictedClass => probs[argmax(probs)],
            ConfidenceSource::TrueLabel => probs[label],
        }
    }
}

/// A feature vector stored sparsely: `(index, value)` pairs of the
/// nonzero entries plus the nominal dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    dim: usize,
    nz: Vec<(u32, f64)>,
}

impl FeatureVector {
    pub fn from_dense(x: &[f64]) -> Result<Self, ModelError> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteInput);
        }
        let nz = x
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i as u32, *v))
            .collect();
        Ok(FeatureVector { dim: x.len(), nz })
    }

    pub fn from_tensor(t: &FeatureTensor) -> Result<Self, ModelError> {
        if !t.is_finite() {
            return Err(ModelError::NonFiniteInput);
        }
        let data = t.data();
        let nz = data
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i as u32, *v as f64))
            .collect();
        Ok(FeatureVector { dim: data.len(), nz })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nonzeros(&self) -> &[(u32, f64)] {
        &self.nz
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.nz {
            out[i as usize] = v;
        }
        out
    }
}

/// A batch item: features plus label.
pub type BatchItem<'a> = (&'a FeatureVector, usize);

#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct LossConfig {
    pub lambda: f64,
}

/// Gradient-contribution norms of the well-recognized (M1), confusing
/// (M2) and noisy (M3) groups, computed with λ = 0. `combined_norm` is
/// the norm of E1+E2+E3, which reconstructs the full λ=0 gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorDecomposition {
    pub e1_norm: f64,
    pub e2_norm: f64,
    pub e3_norm: f64,
    pub combined_norm: f64,
    pub group_counts: [usize; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxModel {
    k: usize,
    n: usize,
    hidden: usize,
    params: Vec<f64>,
}

struct Forward {
    probs: Vec<f64>,
    log_denom: f64,
    shifted: Vec<f64>,
    hidden_pre: Vec<f64>,
    hidden_act: Vec<f64>,
}

impl Forward {
    /// `log p(label)` via log-sum-exp (no underflow for saturated
    /// logits).
    fn log_prob_of(&self, label: usize) -> f64 {
        self.shifted[label] - self.log_denom
    }
}

impl SoftmaxModel {
    /// Linear model, zero-initialized (deterministic).
    pub fn linear(k: usize, n: usize) -> Self {
        SoftmaxModel { k, n, hidden: 0, params: vec![0.0; k * (n + 1)] }
    }

    /// One ReLU hidden layer of width `h`, weights drawn uniformly from
    /// `±1/√fan_in` with the given seed.
    pub fn with_hidden(k: usize, n: usize, h: usize, seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut params = vec![0.0; h * (n + 1) + k * (h + 1)];
        let b1 = 1.0 / ((n + 1) as f64).sqrt();
        for p in params.iter_mut().take(h * (n + 1)) {
            *p = rng.random_range(-b1..=b1);
        }
        let b2 = 1.0 / ((h + 1) as f64).sqrt();
        for p in params.iter_mut().skip(h * (n + 1)) {
            *p = rng.random_range(-b2..=b2);
        }
        SoftmaxModel { k, n, hidden: h, params }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn feature_dim(&self) -> usize {
        self.n
    }

    pub fn hidden_width(&self) -> usize {
        self.hidden
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn check_input(&self, x: &FeatureVector) -> Result<(), ModelError> {
        if x.dim != self.n {
            return Err(ModelError::DimensionMismatch { got: x.dim, want: self.n });
        }
        Ok(())
    }

    fn check_batch(&self, batch: &[BatchItem]) -> Result<(), ModelError> {
        if batch.is_empty() {
            return Err(ModelError::EmptyBatch);
        }
        for (x, y) in batch {
            self.check_input(x)?;
            if *y >= self.k {
                return Err(ModelError::LabelOutOfRange { label: *y, k: self.k });
            }
        }
        Ok(())
    }

    fn forward(&self, x: &FeatureVector) -> Forward {
        let (logits, hidden_pre, hidden_act) = if self.hidden == 0 {
            let row = self.n + 1;
            let mut logits = vec![0.0; self.k];
            for (j, l) in logits.iter_mut().enumerate() {
                let w = &self.params[j * row..j * row + row];
                let mut acc = w[self.n]; // bias
                for &(i, v) in &x.nz {
                    acc += w[i as usize] * v;
                }
                *l = acc;
            }
            (logits, Vec::new(), Vec::new())
        } else {
            let row1 = self.n + 1;
            let h = self.hidden;
            let mut pre = vec![0.0; h];
            for (u, z) in pre.iter_mut().enumerate() {
                let w = &self.params[u * row1..u * row1 + row1];
                let mut acc = w[self.n];
                for &(i, v) in &x.nz {
                    acc += w[i as usize] * v;
                }
                *z = acc;
            }
            let act: Vec<f64> = pre.iter().map(|z| z.max(0.0)).collect();
            let w2 = &self.params[h * row1..];
            let row2 = h + 1;
            let mut logits = vec![0.0; self.k];
            for (j, l) in logits.iter_mut().enumerate() {
                let w = &w2[j * row2..j * row2 + row2];
                let mut acc = w[h];
                for (u, a) in act.iter().enumerate() {
                    acc += w[u] * a;
                }
                *l = acc;
            }
            (logits, pre, act)
        };

        // Max-subtracted softmax plus log-sum-exp denominator.
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shifted: Vec<f64> = logits.iter().map(|l| l - max).collect();
        let sum: f64 = shifted.iter().map(|s| s.exp()).sum();
        let probs: Vec<f64> = shifted.iter().map(|s| s.exp() / sum).collect();
        Forward { probs, log_denom: sum.ln(), shifted, hidden_pre, hidden_act }
    }

    /// Softmax output for one input; sums to 1 within 1e-9.
    pub fn predict(&self, x: &FeatureVector) -> Result<Vec<f64>, ModelError> {
        self.check_input(x)?;
        Ok(self.forward(x).probs)
    }

    /// Convenience wrapper taking a dense vector; rejects non-finite
    /// inputs.
    pub fn predict_dense(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.predict(&FeatureVector::from_dense(x)?)
    }

    /// Mean cross-entropy over the batch plus `λ/2 · Σθ²`.
    pub fn loss(&self, batch: &[BatchItem], cfg: &LossConfig) -> Result<f64, ModelError> {
        self.check_batch(batch)?;
        let b = batch.len() as f64;
        let mut nll = 0.0;
        for (x, y) in batch {
            let fwd = self.forward(x);
            nll -= fwd.log_prob_of(*y);
        }
        Ok(nll / b + 0.5 * cfg.lambda * self.params.iter().map(|p| p * p).sum::<f64>())
    }

    /// Adds one sample's λ-free gradient contribution, scaled by
    /// `scale`, into `out` (length `param_count`).
    fn accumulate_sample_gradient(&self, x: &FeatureVector, y: usize, probs: &[f64], scale: f64, out: &mut [f64]) {
        if self.hidden == 0 {
            let row = self.n + 1;
            for j in 0..self.k {
                let coeff = scale * (probs[j] - f64::from(j == y));
                if coeff == 0.0 {
                    continue;
                }
                let g = &mut out[j * row..j * row + row];
                for &(i, v) in &x.nz {
                    g[i as usize] += coeff * v;
                }
                g[self.n] += coeff;
            }
        } else {
            let fwd = self.forward(x); // recompute to fetch activations
            let h = self.hidden;
            let row1 = self.n + 1;
            let row2 = h + 1;
            let w2_off = h * row1;
            let mut d_act = vec![0.0; h];
            for j in 0..self.k {
                let coeff = scale * (probs[j] - f64::from(j == y));
                let g2 = &mut out[w2_off + j * row2..w2_off + j * row2 + row2];
                for u in 0..h {
                    g2[u] += coeff * fwd.hidden_act[u];
                }
                g2[h] += coeff;
                let w = &self.params[w2_off + j * row2..w2_off + j * row2 + row2];
                for u in 0..h {
                    d_act[u] += coeff * w[u];
                }
            }
            for u in 0..h {
                // ReLU gate: zero gradient at and below the kink.
                if fwd.hidden_pre[u] <= 0.0 {
                    continue;
                }
                let dz = d_act[u];
                if dz == 0.0 {
                    continue;
                }
                let g1 = &mut out[u * row1..u * row1 + row1];
                for &(i, v) in &x.nz {
                    g1[i as usize] += dz * v;
                }
                g1[self.n] += dz;
            }
        }
    }

    /// Exact gradient of [`Self::loss`], flattened in parameter order.
    pub fn gradient(&self, batch: &[BatchItem], cfg: &LossConfig) -> Result<Vec<f64>, ModelError> {
        Ok(self.loss_and_gradient(batch, cfg)?.1)
    }

    /// One fused forward/backward pass: returns the loss, the gradient,
    /// and each sample's softmax output (in batch order).
    #[allow(clippy::type_complexity)]
    pub fn loss_and_gradient(
        &self,
        batch: &[BatchItem],
        cfg: &LossConfig,
    ) -> Result<(f64, Vec<f64>, Vec<Vec<f64>>), ModelError> {
        self.check_batch(batch)?;
        let b = batch.len() as f64;
        let scale = 1.0 / b;
        let mut grad: Vec<f64> = self.params.iter().map(|p| cfg.lambda * p).collect();
        let mut nll = 0.0;
        let mut all_probs = Vec::with_capacity(batch.len());
        for (x, y) in batch {
            let fwd = self.forward(x);
            nll -= fwd.log_prob_of(*y);
            self.accumulate_sample_gradient(x, *y, &fwd.probs, scale, &mut grad);
            all_probs.push(fwd.probs);
        }
        let loss = nll / b + 0.5 * cfg.lambda * self.params.iter().map(|p| p * p).sum::<f64>();
        Ok((loss, grad, all_probs))
    }

    /// `θ ← θ − α·g`.
    pub fn sgd_step(&mut self, gradient: &[f64], alpha: f64) {
        debug_assert_eq!(gradient.len(), self.params.len());
        for (p, g) in self.params.iter_mut().zip(gradient) {
            *p -= alpha * g;
        }
    }

    /// The λ-free batch gradient split into the per-group contribution
    /// vectors E1 (well-recognized), E2 (confusing), E3 (noisy), with
    /// each sample classified by `source` confidence. The three vectors
    /// sum to the λ-free gradient exactly (it is a partition).
    pub fn error_group_gradients(
        &self,
        batch: &[BatchItem],
        th: &GroupThresholds,
        source: ConfidenceSource,
    ) -> Result<([Vec<f64>; 3], [usize; 3]), ModelError> {
        self.check_batch(batch)?;
        let scale = 1.0 / batch.len() as f64;
        let mut parts = [
            vec![0.0; self.params.len()],
            vec![0.0; self.params.len()],
            vec![0.0; self.params.len()],
        ];
        let mut counts = [0usize; 3];
        for (x, y) in batch {
            let probs = self.forward(x).probs;
            let p = source.confidence(&probs, *y);
            let slot = match classify_group(p, th) {
                SampleGroup::WellRecognized => 0,
                SampleGroup::Confusing => 1,
                SampleGroup::Noisy => 2,
            };
            counts[slot] += 1;
            self.accumulate_sample_gradient(x, *y, &probs, scale, &mut parts[slot]);
        }
        Ok((parts, counts))
    }

    /// Splits the λ-free batch gradient into the per-group
    /// contributions and returns their norms.
    pub fn decompose_error_with_source(
        &self,
        batch: &[BatchItem],
        th: &GroupThresholds,
        source: ConfidenceSource,
    ) -> Result<ErrorDecomposition, ModelError> {
        let (parts, counts) = self.error_group_gradients(batch, th, source)?;
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let combined: f64 = (0..self.params.len())
            .map(|i| {
                let s = parts[0][i] + parts[1][i] + parts[2][i];
                s * s
            })
            .sum::<f64>()
            .sqrt();
        Ok(ErrorDecomposition {
            e1_norm: norm(&parts[0]),
            e2_norm: norm(&parts[1]),
            e3_norm: norm(&parts[2]),
            combined_norm: combined,
            group_counts: counts,
        })
    }

    /// [`Self::decompose_error_with_source`] on the predicted-class
    /// probability.
    pub fn decompose_error(&self, batch: &[BatchItem], th: &GroupThresholds) -> Result<ErrorDecomposition, ModelError> {
        self.decompose_error_with_source(batch, th, ConfidenceSource::PredictedClass)
    }

    /// Checkpoint layout: u64 k, u64 n, u64 h (little-endian), then the
    /// flat parameter vector as little-endian f64.
    pub fn write_checkpoint(&self, path: &Path) -> Result<(), ModelError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&(self.k as u64).to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.hidden as u64).to_le_bytes())?;
        for p in &self.params {
            w.write_all(&p.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_checkpoint(path: &Path) -> Result<Self, ModelError> {
        let mut r = BufReader::new(File::open(path)?);
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        let k = u64::from_le_bytes(buf) as usize;
        r.read_exact(&mut buf)?;
        let n = u64::from_le_bytes(buf) as usize;
        r.read_exact(&mut buf)?;
        let hidden = u64::from_le_bytes(buf) as usize;
        if k == 0 {
            return Err(ModelError::Checkpoint("class count is zero".into()));
        }
        let count = if hidden == 0 { k * (n + 1) } else { hidden * (n + 1) + k * (hidden + 1) };
        let mut params = vec![0.0f64; count];
        for p in &mut params {
            r.read_exact(&mut buf)?;
            *p = f64::from_le_bytes(buf);
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(ModelError::Checkpoint("non-finite parameter".into()));
        }
        Ok(SoftmaxModel { k, n, hidden, params })
    }
}

/// Index of the largest entry; ties break to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
