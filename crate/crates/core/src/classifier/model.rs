//! Linear softmax model over hashed features.

use std::collections::HashMap;

use super::features::{featurize, FeatureConfig, FeatureVector};
use super::{softmax, ClassifierError, Prediction};
use crate::ingest::SentencePair;
use crate::taxonomy::{TalkMoveLabel, NUM_LABELS};

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub dim: usize,
    /// Row-major `NUM_LABELS x dim`: `weights[label * dim + feature]`.
    pub weights: Vec<f64>,
    pub bias: [f64; NUM_LABELS],
    pub features: FeatureConfig,
}

/// A featurized pair with its gold label and loss weight.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub features: FeatureVector,
    pub label: TalkMoveLabel,
    pub weight: f64,
}

/// Gradient restricted to the feature columns a batch touched.
#[derive(Debug, Clone, Default)]
pub(crate) struct SparseGradient {
    pub columns: Vec<(usize, [f64; NUM_LABELS])>,
    pub bias: [f64; NUM_LABELS],
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGradient {
    pub weights: Vec<f64>,
    pub bias: [f64; NUM_LABELS],
}

impl ModelParams {
    pub fn zeros(dim: usize, features: FeatureConfig) -> Result<Self, ClassifierError> {
        check_dim(dim)?;
        Ok(ModelParams {
            dim,
            weights: vec![0.0; NUM_LABELS * dim],
            bias: [0.0; NUM_LABELS],
            features,
        })
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        check_dim(self.dim)?;
        if self.weights.len() != NUM_LABELS * self.dim {
            return Err(ClassifierError::InvalidConfig(format!(
                "weight matrix has {} entries, expected {}",
                self.weights.len(),
                NUM_LABELS * self.dim
            )));
        }
        if !self.is_finite() {
            return Err(ClassifierError::InvalidConfig("non-finite parameter".into()));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|w| w.is_finite())
    }

    pub fn weight(&self, label: usize, feature: usize) -> f64 {
        self.weights[label * self.dim + feature]
    }

    pub fn featurize(&self, pair: &SentencePair) -> FeatureVector {
        featurize(pair, &self.features, self.dim)
    }

    pub fn logits(&self, fv: &FeatureVector) -> [f64; NUM_LABELS] {
        let mut z = self.bias;
        for &(id, value) in &fv.entries {
            let j = id as usize;
            for (k, zk) in z.iter_mut().enumerate() {
                *zk += self.weights[k * self.dim + j] * value;
            }
        }
        z
    }

    pub fn predict_features(&self, fv: &FeatureVector) -> Prediction {
        Prediction::from_probs(softmax(&self.logits(fv)))
    }

    pub fn predict(&self, pair: &SentencePair) -> Prediction {
        self.predict_features(&self.featurize(pair))
    }

    /// `-log p(label)` via log-sum-exp.
    fn example_loss(&self, ex: &TrainingExample) -> f64 {
        let z = self.logits(&ex.features);
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + z.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
        lse - z[ex.label.code()]
    }

    /// Mean weighted cross-entropy plus `l2 / 2 * ||W||^2` (bias unpenalized).
    pub fn objective(&self, examples: &[TrainingExample], l2: f64) -> f64 {
        if examples.is_empty() {
            return 0.0;
        }
        let data: f64 = examples.iter().map(|ex| ex.weight * self.example_loss(ex)).sum();
        let penalty = if l2 > 0.0 {
            0.5 * l2 * self.weights.iter().map(|w| w * w).sum::<f64>()
        } else {
            0.0
        };
        data / examples.len() as f64 + penalty
    }

    /// Gradient of the data term only, touching the batch's columns.
    pub(crate) fn data_gradient(&self, batch: &[TrainingExample]) -> SparseGradient {
        let mut grad = SparseGradient::default();
        if batch.is_empty() {
            return grad;
        }
        let scale = 1.0 / batch.len() as f64;
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for ex in batch {
            let mut residual = softmax(&self.logits(&ex.features));
            residual[ex.label.code()] -= 1.0;
            for r in &mut residual {
                *r *= ex.weight * scale;
            }
            for (b, r) in grad.bias.iter_mut().zip(&residual) {
                *b += r;
            }
            for &(id, value) in &ex.features.entries {
                let j = id as usize;
                let next = grad.columns.len();
                let s = *slot.entry(j).or_insert(next);
                if s == next {
                    grad.columns.push((j, [0.0; NUM_LABELS]));
                }
                for (g, r) in grad.columns[s].1.iter_mut().zip(&residual) {
                    *g += r * value;
                }
            }
        }
        grad
    }

    /// Full analytic gradient of [`ModelParams::objective`].
    pub fn gradient(&self, examples: &[TrainingExample], l2: f64) -> DenseGradient {
        let sparse = self.data_gradient(examples);
        let mut weights: Vec<f64> = self.weights.iter().map(|w| l2 * w).collect();
        for (j, column) in &sparse.columns {
            for (k, g) in column.iter().enumerate() {
                weights[k * self.dim + j] += g;
            }
        }
        DenseGradient {
            weights,
            bias: sparse.bias,
        }
    }

    /// One gradient-descent step on a batch.
    pub(crate) fn step(&mut self, batch: &[TrainingExample], learning_rate: f64, l2: f64) {
        let grad = self.data_gradient(batch);
        if l2 > 0.0 {
            let decay = 1.0 - learning_rate * l2;
            for w in &mut self.weights {
                *w *= decay;
            }
        }
        for (j, column) in &grad.columns {
            for (k, g) in column.iter().enumerate() {
                self.weights[k * self.dim + j] -= learning_rate * g;
            }
        }
        for (b, g) in self.bias.iter_mut().zip(&grad.bias) {
            *b -= learning_rate * g;
        }
    }
}

fn check_dim(dim: usize) -> Result<(), ClassifierError> {
    if dim == 0 || !dim.is_power_of_two() || dim > u32::MAX as usize {
        return Err(ClassifierError::InvalidConfig(format!(
            "hash dimension {dim} is not a power of two in u32 range"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_model_is_uniform() {
        let m = ModelParams::zeros(64, FeatureConfig::default()).unwrap();
        let p = m.predict(&SentencePair::new("add two here", "add two here"));
        assert_eq!(p.probs, [1.0 / 7.0; NUM_LABELS]);
        assert_eq!(p.label, TalkMoveLabel::None);
    }

    #[test]
    fn dimension_must_be_power_of_two() {
        assert!(ModelParams::zeros(100, FeatureConfig::default()).is_err());
        assert!(ModelParams::zeros(0, FeatureConfig::default()).is_err());
    }

    #[test]
    fn bias_drives_prediction() {
        let mut m = ModelParams::zeros(16, FeatureConfig::default()).unwrap();
        m.bias[TalkMoveLabel::Revoicing.code()] = 5.0;
        assert_eq!(m.predict(&SentencePair::new("-", "ok")).label, TalkMoveLabel::Revoicing);
    }

    #[test]
    fn step_on_l2_only_decays() {
        let mut m = ModelParams::zeros(16, FeatureConfig::default()).unwrap();
        m.weights[3] = 2.0;
        m.step(&[], 0.5, 0.1);
        assert!((m.weights[3] - 1.9).abs() < 1e-12);
    }
}
