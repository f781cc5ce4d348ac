//! Seven-way talk-move classification.
//!
//! Three engines produce the same [`Prediction`] shape: the keyword and
//! overlap rules in [`rules`], the hashed n-gram softmax model trained by
//! [`train()`], and an external inference service reached through
//! [`adapter`].

pub mod adapter;
mod codec;
mod features;
mod grid;
mod model;
pub mod rules;
pub mod synth;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taxonomy::{TalkMoveLabel, NUM_LABELS};

pub use adapter::{external_classify, AdapterConfig, InferenceTransport, TransportError};
pub use codec::{load_model, save_model, MODEL_MAGIC, MODEL_VERSION};
pub use features::{featurize, fnv1a64, FeatureConfig, FeatureVector};
pub use grid::{grid_search, GridOutcome, GridResult, LeaderboardRow, ParamGrid};
pub use model::{DenseGradient, ModelParams, TrainingExample};
pub use rules::{rule_classify, RuleSet};
pub use train::{train, EpochRecord, TrainConfig, TrainOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("training diverged at epoch {epoch}: {detail}")]
    Divergence { epoch: usize, detail: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported model file: {0}")]
    VersionMismatch(String),
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error("adapter unreachable: {0}")]
    AdapterUnreachable(String),
    #[error("bad adapter response: {0}")]
    BadResponse(String),
}

/// A probability distribution over the seven labels and its argmax.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub probs: [f64; NUM_LABELS],
    pub label: TalkMoveLabel,
}

impl Prediction {
    /// Wraps an already normalized distribution.
    pub fn from_probs(probs: [f64; NUM_LABELS]) -> Self {
        Prediction {
            label: argmax(&probs),
            probs,
        }
    }

    pub fn one_hot(label: TalkMoveLabel) -> Self {
        let mut probs = [0.0; NUM_LABELS];
        probs[label.code()] = 1.0;
        Prediction { probs, label }
    }

    pub fn prob(&self, label: TalkMoveLabel) -> f64 {
        self.probs[label.code()]
    }
}

/// Index of the largest value; ties go to the smallest label code.
pub fn argmax(values: &[f64; NUM_LABELS]) -> TalkMoveLabel {
    let mut best = 0;
    for k in 1..NUM_LABELS {
        if values[k] > values[best] {
            best = k;
        }
    }
    TalkMoveLabel::ALL[best]
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64; NUM_LABELS]) -> [f64; NUM_LABELS] {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = logits.map(|z| (z - max).exp());
    let sum: f64 = out.iter().sum();
    for p in &mut out {
        *p /= sum;
    }
    out
}
