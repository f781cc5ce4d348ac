use serde::Serialize;

use super::confusion::{confusion, per_class_prf};
use super::MetricsError;
use crate::classifier::Prediction;
use crate::ingest::SentencePair;
use crate::taxonomy::{TalkMoveLabel, NUM_LABELS};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Misclassified {
    pub pair: SentencePair,
    pub predicted: TalkMoveLabel,
    pub probs: [f64; NUM_LABELS],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassErrors {
    pub label: TalkMoveLabel,
    pub f1: f64,
    /// Number of items with this gold label.
    pub count: usize,
    /// Items with this gold label predicted otherwise, first `max_examples` in input order.
    pub misclassified: Vec<Misclassified>,
}

/// Per gold label, worst F1 first (ties by label code).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorAnalysis {
    pub classes: Vec<ClassErrors>,
}

pub fn error_analysis(
    golds: &[TalkMoveLabel],
    preds: &[Prediction],
    pairs: &[SentencePair],
    max_examples: usize,
) -> Result<ErrorAnalysis, MetricsError> {
    if golds.len() != preds.len() {
        return Err(MetricsError::LengthMismatch { left: golds.len(), right: preds.len() });
    }
    if golds.len() != pairs.len() {
        return Err(MetricsError::LengthMismatch { left: golds.len(), right: pairs.len() });
    }
    let labels: Vec<_> = preds.iter().map(|p| p.label).collect();
    let report = match confusion(golds, &labels) {
        Ok(m) => per_class_prf(&m),
        Err(MetricsError::Empty) => Default::default(),
        Err(e) => return Err(e),
    };
    let mut classes: Vec<ClassErrors> = TalkMoveLabel::ALL
        .iter()
        .map(|&label| ClassErrors {
            label,
            f1: report.get(label).f1,
            count: golds.iter().filter(|&&g| g == label).count(),
            misclassified: Vec::new(),
        })
        .collect();
    for ((&gold, pred), pair) in golds.iter().zip(preds).zip(pairs) {
        let bucket = &mut classes[gold.code()];
        if pred.label != gold && bucket.misclassified.len() < max_examples {
            bucket.misclassified.push(Misclassified {
                pair: pair.clone(),
                predicted: pred.label,
                probs: pred.probs,
            });
        }
    }
    classes.sort_by(|a, b| a.f1.total_cmp(&b.f1).then(a.label.cmp(&b.label)));
    Ok(ErrorAnalysis { classes })
}
