//! Combining the softmax outputs of several models into one decision.

use super::{argmax, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleMode {
    /// Arg-max of the elementwise mean of the outputs.
    Average,
    /// Majority vote over per-model arg-maxes; ties break to the class
    /// with the highest averaged probability.
    Voting,
    /// Arg-max of the elementwise maximum.
    Max,
}

/// Combines one probability vector per model into a class index.
pub fn ensemble_combine(outputs: &[Vec<f64>], mode: EnsembleMode) -> Result<usize, ModelError> {
    let first = outputs.first().ok_or(ModelError::EmptyEnsemble)?;
    let k = first.len();
    if k == 0 || outputs.iter().any(|o| o.len() != k) {
        return Err(ModelError::EnsembleShape);
    }
    let mean: Vec<f64> =
        (0..k).map(|j| outputs.iter().map(|o| o[j]).sum::<f64>() / outputs.len() as f64).collect();
    let choice = match mode {
        EnsembleMode::Average => argmax(&mean),
        EnsembleMode::Max => {
            let maxed: Vec<f64> = (0..k).map(|j| outputs.iter().map(|o| o[j]).fold(f64::NEG_INFINITY, f64::max)).collect();
            argmax(&maxed)
        }
        EnsembleMode::Voting => {
            let mut votes = vec![0usize; k];
            for o in outputs {
                votes[argmax(o)] += 1;
            }
            let top = *votes.iter().max().expect("k > 0");
            // Among the tied top-vote classes, pick the best mean.
            let mut best = None;
            for j in 0..k {
                if votes[j] == top {
                    best = match best {
                        None => Some(j),
                        Some(b) if mean[j] > mean[b] => Some(j),
                        keep => keep,
                    };
                }
            }
            best.expect("at least one class holds the top vote")
        }
    };
    Ok(choice)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_model_reduces_to_argmax() {
        let out = vec![vec![0.1, 0.7, 0.2]];
        for mode in [EnsembleMode::Average, EnsembleMode::Voting, EnsembleMode::Max] {
            assert_eq!(ensemble_combine(&out, mode).unwrap(), 1);
        }
    }

    #[test]
    fn average_of_two_models() {
        let out = vec![vec![0.6, 0.4], vec![0.1, 0.9]];
        // Mean (0.35, 0.65) → class 1.
        assert_eq!(ensemble_combine(&out, EnsembleMode::Average).unwrap(), 1);
    }

    #[test]
    fn majority_vote_wins() {
        let out = vec![vec![0.9, 0.1], vec![0.6, 0.4], vec![0.2, 0.8]];
        assert_eq!(ensemble_combine(&out, EnsembleMode::Voting).unwrap(), 0);
    }

    #[test]
    fn vote_tie_breaks_by_mean_probability() {
        let out = vec![vec![0.9, 0.1], vec![0.2, 0.8]];
        // One vote each; means are (0.55, 0.45) → class 0.
        assert_eq!(ensemble_combine(&out, EnsembleMode::Voting).unwrap(), 0);
    }

    #[test]
    fn max_pools_elementwise() {
        let out = vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.2, 0.8]];
        assert_eq!(ensemble_combine(&out, EnsembleMode::Max).unwrap(), 2);
    }

    #[test]
    fn empty_and_ragged_inputs_are_rejected() {
        assert!(matches!(ensemble_combine(&[], EnsembleMode::Average), Err(ModelError::EmptyEnsemble)));
        let ragged = vec![vec![0.5, 0.5], vec![1.0]];
        assert!(matches!(ensemble_combine(&ragged, EnsembleMode::Average), Err(ModelError::EnsembleShape)));
    }
}
