//! Adaptive quota-based sample selection for stochastic training.
//!
//! The crate bundles three things that together make a small, fully
//! inspectable training toolkit for online-handwriting data:
//!
//! - [`sampler`] — the core mechanism: every training sample carries a
//!   quota in `[q_min, 1]` that is multiplied by a confidence-driven
//!   update factor after each mini-batch it appears in. Mini-batches are
//!   drawn from the normalized quota distribution in `O(log m)` per draw
//!   via a Fenwick tree. Two update rules are provided: an exponential
//!   one (`ds1`) and a multi-level hierarchical one (`ds2`).
//! - [`features`] — a domain-knowledge feature bank turning pen
//!   trajectories into multi-channel 96×96 tensors: anti-aliased bitmap
//!   and imaginary-stroke maps, truncated path-signature maps (orders
//!   0–3), 8-directional maps, and a deformation family for
//!   augmentation.
//! - [`classifier`] + [`trainer`] — a k-way softmax model (optionally
//!   one ReLU hidden layer) with loss/gradient/error-decomposition
//!   operations, and a deterministic training loop that ties the sampler
//!   to the model, logs per-iteration metrics, and runs paired
//!   with/without-sampler comparisons.
//!
//! Everything is deterministic given a seed; all artifacts (datasets,
//! tensors, checkpoints, logs) have documented binary or text layouts so
//! runs can be reproduced byte-for-byte.

pub mod classifier;
pub mod features;
pub mod sampler;
pub mod strokes;
pub mod trainer;

mod rng;

pub use rng::mix_seed;
