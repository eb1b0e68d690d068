//! Adaptive per-sample quotas and weighted mini-batch sampling.
//!
//! Every sample `i` carries a quota `q_i ∈ [q_min, 1]`, initialized to 1.
//! Mini-batches are drawn with replacement from the categorical
//! distribution `P = q / Σq`. After a sample appears in a batch, its
//! quota is multiplied by an update factor computed from the
//! classifier's confidence `p` on it:
//!
//! - confidences are split at thresholds `T1` (default `1/k`, the random
//!   guess probability) and `T2` (default 0.99) into noisy (`p < T1`),
//!   confusing (`T1 ≤ p ≤ T2`, closed on both ends) and well-recognized
//!   (`p > T2`) groups;
//! - the confusing branch resets the quota to exactly 1;
//! - the noisy and well-recognized branches shrink it, either by the
//!   exponential rule [`update_factor_ds1`] or the multi-level
//!   hierarchical rule [`update_factor_ds2`];
//! - during the first `W` iterations (warm-up) the noisy branch is
//!   suppressed and treated as confusing, so early, unreliable judgments
//!   never eliminate a sample.
//!
//! The quota floor `q_min > 0` keeps every sample reachable. The sum of
//! all quotas — the equivalent set size — measures how much of the
//! dataset is still actively sampled.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use thiserror::Error;

mod fenwick;

pub use fenwick::FenwickTree;

/// Default quota floor.
pub const DEFAULT_Q_MIN: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("thresholds must satisfy 0 < T1 < T2 < 1 (got T1={t1}, T2={t2})")]
    Thresholds { t1: f64, t2: f64 },
    #[error("sample index {index} out of range for table of {len}")]
    UnknownSample { index: usize, len: usize },
    #[error("quota floor must lie in (0, 1] (got {0})")]
    QuotaFloor(f64),
    #[error("update-rule boundaries must increase strictly within each tail")]
    RuleBoundaries,
    #[error("quota table needs at least one sample")]
    Empty,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Confidence partition: well-recognized (M1), confusing (M2), noisy (M3).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleGroup {
    WellRecognized,
    Confusing,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GroupThresholds {
    pub t1: f64,
    pub t2: f64,
}

impl GroupThresholds {
    pub fn new(t1: f64, t2: f64) -> Result<Self, SamplerError> {
        if 0.0 < t1 && t1 < t2 && t2 < 1.0 {
            Ok(GroupThresholds { t1, t2 })
        } else {
            Err(SamplerError::Thresholds { t1, t2 })
        }
    }

    /// `T1 = 1/k` (random-guess probability), `T2 = 0.99`.
    pub fn for_classes(k: usize) -> Self {
        GroupThresholds { t1: 1.0 / k as f64, t2: 0.99 }
    }
}

/// Partitions `[0, 1]`: the confusing interval is closed at both
/// thresholds, so `p = T1` and `p = T2` are both confusing.
pub fn classify_group(p: f64, th: &GroupThresholds) -> SampleGroup {
    debug_assert!((0.0..=1.0).contains(&p), "confidence {p} outside [0, 1]");
    if p > th.t2 {
        SampleGroup::WellRecognized
    } else if p < th.t1 {
        SampleGroup::Noisy
    } else {
        SampleGroup::Confusing
    }
}

/// Quota-updating rule.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum UpdateRule {
    /// Exponential rule: noisy `1 − e^{−γp}`, well-recognized
    /// `1 − e^{−β(1−p)}`, confusing `1/q_prev`.
    Ds1 { beta: f64, gamma: f64 },
    /// Multi-level hierarchical rule: three factor levels per tail.
    /// The noisy tail splits at `low_cuts` (half-open sub-intervals from
    /// 0 up to T1), the well-recognized tail at `high_cuts` (from T2 up
    /// to 1); `factors[h]` applies to the h-th sub-interval counting
    /// outward from 0 on the low tail and from T2 on the high tail.
    Ds2 { factors: [f64; 3], low_cuts: [f64; 2], high_cuts: [f64; 2] },
}

impl UpdateRule {
    /// Published exponential-rule parameters: β = 400, γ = 600.
    pub fn ds1() -> Self {
        UpdateRule::Ds1 { beta: 400.0, gamma: 600.0 }
    }

    /// Published hierarchical-rule parameters: factors 0.9/0.5/0.1 on
    /// both tails, low-tail cuts at T1/4 and T1/2, high-tail cuts at
    /// 0.999 and 0.9999.
    pub fn ds2(th: &GroupThresholds) -> Self {
        UpdateRule::Ds2 {
            factors: [0.9, 0.5, 0.1],
            low_cuts: [th.t1 / 4.0, th.t1 / 2.0],
            high_cuts: [0.999, 0.9999],
        }
    }

    pub fn validate(&self, th: &GroupThresholds) -> Result<(), SamplerError> {
        match self {
            UpdateRule::Ds1 { beta, gamma } => {
                if *beta > 0.0 && *gamma > 0.0 {
                    Ok(())
                } else {
                    Err(SamplerError::RuleBoundaries)
                }
            }
            UpdateRule::Ds2 { factors, low_cuts, high_cuts } => {
                let low_ok = 0.0 < low_cuts[0] && low_cuts[0] < low_cuts[1] && low_cuts[1] < th.t1;
                let high_ok = th.t2 < high_cuts[0] && high_cuts[0] < high_cuts[1] && high_cuts[1] < 1.0;
                let factors_ok = factors.iter().all(|f| *f > 0.0 && *f <= 1.0);
                if low_ok && high_ok && factors_ok {
                    Ok(())
                } else {
                    Err(SamplerError::RuleBoundaries)
                }
            }
        }
    }

    /// The multiplicative quota factor for confidence `p` under this
    /// rule (no warm-up handling; see [`QuotaTable::apply_update`]).
    pub fn factor(&self, p: f64, q_prev: f64, th: &GroupThresholds) -> f64 {
        match self {
            UpdateRule::Ds1 { beta, gamma } => update_factor_ds1(p, q_prev, *beta, *gamma, th),
            UpdateRule::Ds2 { factors, low_cuts, high_cuts } => {
                update_factor_ds2(p, q_prev, factors, low_cuts, high_cuts, th)
            }
        }
    }
}

/// Exponential quota factor. `-exp_m1` keeps full precision where
/// `1 − e^{−x}` would cancel.
pub fn update_factor_ds1(p: f64, q_prev: f64, beta: f64, gamma: f64, th: &GroupThresholds) -> f64 {
    match classify_group(p, th) {
        SampleGroup::Noisy => -(-gamma * p).exp_m1(),
        SampleGroup::WellRecognized => -(-beta * (1.0 - p)).exp_m1(),
        SampleGroup::Confusing => 1.0 / q_prev,
    }
}

/// Multi-level hierarchical quota factor. Sub-intervals are half-open:
/// on the noisy tail `[0, low_cuts[0])`, `[low_cuts[0], low_cuts[1])`,
/// `[low_cuts[1], T1)`; on the well-recognized tail `(T2, high_cuts[0])`,
/// `[high_cuts[0], high_cuts[1])`, `[high_cuts[1], 1]`.
pub fn update_factor_ds2(
    p: f64,
    q_prev: f64,
    factors: &[f64; 3],
    low_cuts: &[f64; 2],
    high_cuts: &[f64; 2],
    th: &GroupThresholds,
) -> f64 {
    match classify_group(p, th) {
        SampleGroup::Noisy => {
            if p < low_cuts[0] {
                factors[0]
            } else if p < low_cuts[1] {
                factors[1]
            } else {
                factors[2]
            }
        }
        SampleGroup::WellRecognized => {
            if p < high_cuts[0] {
                factors[0]
            } else if p < high_cuts[1] {
                factors[1]
            } else {
                factors[2]
            }
        }
        SampleGroup::Confusing => 1.0 / q_prev,
    }
}

/// Sampler identity recorded in checkpoints and manifests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerVariant {
    Off = 0,
    Ds1 = 1,
    Ds2 = 2,
}

impl SamplerVariant {
    fn from_u32(v: u32) -> Result<Self, SamplerError> {
        match v {
            0 => Ok(SamplerVariant::Off),
            1 => Ok(SamplerVariant::Ds1),
            2 => Ok(SamplerVariant::Ds2),
            other => Err(SamplerError::Checkpoint(format!("unknown sampler variant {other}"))),
        }
    }
}

/// Per-sample quota state plus the cumulative-weight index.
#[derive(Debug, Clone)]
pub struct QuotaTable {
    quotas: Vec<f64>,
    index: FenwickTree,
    t: u64,
    warmup: u64,
    q_min: f64,
}

impl QuotaTable {
    /// A fresh table of `m` quotas, all 1.
    pub fn new(m: usize, warmup: u64, q_min: f64) -> Result<Self, SamplerError> {
        Self::with_quotas(vec![1.0; m], warmup, q_min)
    }

    /// Resumes from explicit quota values, each in `[q_min, 1]`.
    pub fn with_quotas(quotas: Vec<f64>, warmup: u64, q_min: f64) -> Result<Self, SamplerError> {
        if quotas.is_empty() {
            return Err(SamplerError::Empty);
        }
        if !(q_min > 0.0 && q_min <= 1.0) {
            return Err(SamplerError::QuotaFloor(q_min));
        }
        if let Some(bad) = quotas.iter().find(|q| !q.is_finite() || **q < q_min || **q > 1.0) {
            return Err(SamplerError::Checkpoint(format!("quota {bad} outside [{q_min}, 1]")));
        }
        let index = FenwickTree::from_weights(&quotas);
        Ok(QuotaTable { quotas, index, t: 0, warmup, q_min })
    }

    pub fn len(&self) -> usize {
        self.quotas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotas.is_empty()
    }

    pub fn quotas(&self) -> &[f64] {
        &self.quotas
    }

    pub fn quota(&self, index: usize) -> Result<f64, SamplerError> {
        self.quotas
            .get(index)
            .copied()
            .ok_or(SamplerError::UnknownSample { index, len: self.quotas.len() })
    }

    pub fn iteration(&self) -> u64 {
        self.t
    }

    pub fn warmup(&self) -> u64 {
        self.warmup
    }

    pub fn q_min(&self) -> f64 {
        self.q_min
    }

    /// Advances the iteration counter; call once per mini-batch.
    pub fn advance_iteration(&mut self) -> u64 {
        self.t += 1;
        self.t
    }

    /// Multiplies sample `index`'s quota by the rule's factor for
    /// confidence `p`, clamped into `[q_min, 1]`. The confusing branch
    /// (and, during warm-up, the noisy branch) sets the quota to exactly
    /// 1. Returns the new quota.
    pub fn apply_update(
        &mut self,
        index: usize,
        p: f64,
        rule: &UpdateRule,
        th: &GroupThresholds,
    ) -> Result<f64, SamplerError> {
        let prev = self.quota(index)?;
        let group = classify_group(p, th);
        // Warm-up covers the first W iterations inclusive.
        let warm = self.t <= self.warmup;
        let new_q = match group {
            SampleGroup::Confusing => 1.0,
            SampleGroup::Noisy if warm => 1.0,
            _ => (prev * rule.factor(p, prev, th)).clamp(self.q_min, 1.0),
        };
        self.quotas[index] = new_q;
        self.index.add(index, new_q - prev);
        Ok(new_q)
    }

    /// Sum of all quotas, from the index (O(log m)).
    pub fn equivalent_set_size(&self) -> f64 {
        self.index.total()
    }

    /// Maps a uniform draw `u ∈ [0, Σq)` to a sample index. Pure; the
    /// categorical distribution is `q / Σq`.
    pub fn select(&self, u: f64) -> usize {
        self.index.select(u)
    }

    /// Draws `batch` indices with replacement from `q / Σq`.
    pub fn draw_minibatch<R: Rng>(&self, batch: usize, rng: &mut R) -> Vec<usize> {
        let total = self.equivalent_set_size();
        (0..batch).map(|_| self.select(rng.random_range(0.0..total))).collect()
    }

    /// Checkpoint layout: u64 m, u64 t, u64 W, u32 variant (all
    /// little-endian), then m little-endian f64 quotas.
    pub fn write_checkpoint(&self, path: &Path, variant: SamplerVariant) -> Result<(), SamplerError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&(self.quotas.len() as u64).to_le_bytes())?;
        w.write_all(&self.t.to_le_bytes())?;
        w.write_all(&self.warmup.to_le_bytes())?;
        w.write_all(&(variant as u32).to_le_bytes())?;
        for q in &self.quotas {
            w.write_all(&q.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_checkpoint(path: &Path) -> Result<(Self, SamplerVariant), SamplerError> {
        let mut r = BufReader::new(File::open(path)?);
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        let m = u64::from_le_bytes(u64buf) as usize;
        r.read_exact(&mut u64buf)?;
        let t = u64::from_le_bytes(u64buf);
        r.read_exact(&mut u64buf)?;
        let warmup = u64::from_le_bytes(u64buf);
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        let variant = SamplerVariant::from_u32(u32::from_le_bytes(u32buf))?;
        if m == 0 {
            return Err(SamplerError::Empty);
        }
        let mut quotas = vec![0.0f64; m];
        for q in &mut quotas {
            r.read_exact(&mut u64buf)?;
            *q = f64::from_le_bytes(u64buf);
        }
        if quotas.iter().any(|q| !q.is_finite() || *q <= 0.0 || *q > 1.0) {
            return Err(SamplerError::Checkpoint("quota outside (0, 1]".into()));
        }
        let index = FenwickTree::from_weights(&quotas);
        let q_min = quotas.iter().copied().fold(f64::INFINITY, f64::min).min(DEFAULT_Q_MIN);
        Ok((QuotaTable { quotas, index, t, warmup, q_min }, variant))
    }
}
