//! Evaluation measures: confusion matrix, per-class precision/recall/F1,
//! macro-F1 over the talk moves, multiclass MCC and Cohen's kappa.

mod agreement;
mod analysis;
mod confusion;
mod report;

use thiserror::Error;

pub use agreement::{cohens_kappa, per_label_kappa, AgreementReport};
pub use analysis::{error_analysis, ClassErrors, ErrorAnalysis, Misclassified};
pub use confusion::{
    accuracy, confusion, f1_of, macro_f1_ex_none, mcc_multiclass, micro_f1_ex_none, per_class_prf,
    weighted_f1_ex_none, ClassReport, ClassScore, ConfusionMatrix,
};
pub use report::{evaluate, EvalReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("no items to evaluate")]
    Empty,
}
