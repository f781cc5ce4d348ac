//! Mini-batch gradient descent for the softmax model.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::FeatureConfig;
use super::model::{ModelParams, TrainingExample};
use super::ClassifierError;
use crate::corpus::{class_weights, distribution, ClassWeights, Dataset};
use crate::metrics::{confusion, macro_f1_ex_none};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub hash_dimension: usize,
    pub use_class_weights: bool,
    pub l2: f64,
    pub features: FeatureConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.5,
            epochs: 10,
            batch_size: 16,
            seed: 0,
            hash_dimension: 1 << 16,
            use_class_weights: false,
            l2: 0.0,
            features: FeatureConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        let bad = |msg: &str| Err(ClassifierError::InvalidConfig(msg.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be a positive finite number");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return bad("l2 must be a non-negative finite number");
        }
        if self.hash_dimension == 0 || !self.hash_dimension.is_power_of_two() || self.hash_dimension > u32::MAX as usize {
            return bad("hash_dimension must be a power of two");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Full training objective after the epoch.
    pub train_loss: f64,
    /// Validation macro-F1 (talk moves only); absent without a validation set.
    pub val_macro_f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: ModelParams,
    pub history: Vec<EpochRecord>,
}

pub(crate) fn examples(model: &ModelParams, d: &Dataset, weights: &ClassWeights) -> Vec<TrainingExample> {
    d.items
        .iter()
        .map(|item| TrainingExample {
            features: model.featurize(&item.pair),
            label: item.label,
            weight: weights.get(item.label),
        })
        .collect()
}

pub(crate) fn validation_macro_f1(model: &ModelParams, val: &Dataset) -> Option<f64> {
    if val.is_empty() {
        return None;
    }
    let preds: Vec<_> = val.items.iter().map(|i| model.predict(&i.pair).label).collect();
    confusion(&val.labels(), &preds).ok().map(|m| macro_f1_ex_none(&m))
}

/// Trains from zero weights. Shuffling uses one ChaCha8 stream seeded with
/// `cfg.seed`, so the same data and config give bit-identical parameters.
pub fn train(train: &Dataset, val: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome, ClassifierError> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    let mut model = ModelParams::zeros(cfg.hash_dimension, cfg.features)?;
    let weights = if cfg.use_class_weights {
        class_weights(&distribution(train)).map_err(|_| ClassifierError::EmptyDataset)?
    } else {
        ClassWeights::uniform()
    };
    let data = examples(&model, train, &weights);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut batch: Vec<TrainingExample> = Vec::with_capacity(cfg.batch_size);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| data[i].clone()));
            model.step(&batch, cfg.learning_rate, cfg.l2);
            if !model.is_finite() {
                return Err(ClassifierError::Divergence {
                    epoch,
                    detail: "parameters became non-finite".into(),
                });
            }
        }
        let train_loss = model.objective(&data, cfg.l2);
        if !train_loss.is_finite() {
            return Err(ClassifierError::Divergence {
                epoch,
                detail: format!("training loss is {train_loss}"),
            });
        }
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_macro_f1: validation_macro_f1(&model, val),
        });
    }
    Ok(TrainOutcome { model, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LabeledPair;
    use crate::taxonomy::TalkMoveLabel;

    fn tiny() -> Dataset {
        Dataset::new(vec![
            LabeledPair::new("-", "why is that", TalkMoveLabel::PressForReasoning, "L"),
            LabeledPair::new("-", "good morning", TalkMoveLabel::None, "L"),
            LabeledPair::new("-", "what is the slope", TalkMoveLabel::PressForAccuracy, "L"),
        ])
    }

    #[test]
    fn config_validation() {
        let base = TrainConfig::default();
        for cfg in [
            TrainConfig { learning_rate: 0.0, ..base },
            TrainConfig { epochs: 0, ..base },
            TrainConfig { batch_size: 0, ..base },
            TrainConfig { hash_dimension: 1000, ..base },
            TrainConfig { l2: -1.0, ..base },
        ] {
            assert!(matches!(train(&tiny(), &Dataset::default(), &cfg), Err(ClassifierError::InvalidConfig(_))));
        }
    }

    #[test]
    fn empty_training_set() {
        assert_eq!(
            train(&Dataset::default(), &Dataset::default(), &TrainConfig::default()),
            Err(ClassifierError::EmptyDataset)
        );
    }

    #[test]
    fn huge_learning_rate_diverges() {
        let cfg = TrainConfig {
            learning_rate: 1e308,
            epochs: 5,
            batch_size: 1,
            hash_dimension: 64,
            ..TrainConfig::default()
        };
        assert!(matches!(
            train(&tiny(), &Dataset::default(), &cfg),
            Err(ClassifierError::Divergence { .. })
        ));
    }

    #[test]
    fn memorizes_a_tiny_set() {
        let cfg = TrainConfig { epochs: 50, hash_dimension: 256, batch_size: 1, ..TrainConfig::default() };
        let out = train(&tiny(), &tiny(), &cfg).unwrap();
        for item in &tiny().items {
            assert_eq!(out.model.predict(&item.pair).label, item.label);
        }
        assert_eq!(out.history.len(), 50);
        assert!(out.history.last().unwrap().train_loss < out.history[0].train_loss);
    }
}
