use serde::{Deserialize, Serialize};

use super::confusion::*;
use super::MetricsError;
use crate::taxonomy::{TalkMoveLabel, NUM_LABELS};

/// Number of talk moves listed in `worst_classes`.
pub const WORST_CLASSES: usize = 3;

/// The evaluation report written by the `eval` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub confusion: [[u64; NUM_LABELS]; NUM_LABELS],
    pub per_class: ClassReport,
    pub macro_f1_ex_none: f64,
    pub mcc: f64,
    pub accuracy: f64,
    /// The lowest-F1 talk moves, worst first.
    pub worst_classes: Vec<TalkMoveLabel>,
    pub weighted_f1_ex_none: f64,
    pub micro_f1_ex_none: f64,
}

pub fn evaluate(golds: &[TalkMoveLabel], preds: &[TalkMoveLabel]) -> Result<EvalReport, MetricsError> {
    let m = confusion(golds, preds)?;
    let per_class = per_class_prf(&m);
    let mut moves = TalkMoveLabel::TALK_MOVES.to_vec();
    moves.sort_by(|a, b| per_class.get(*a).f1.total_cmp(&per_class.get(*b).f1).then(a.cmp(b)));
    moves.truncate(WORST_CLASSES);
    Ok(EvalReport {
        confusion: m.cells,
        per_class,
        macro_f1_ex_none: macro_f1_ex_none(&m),
        mcc: mcc_multiclass(&m)?,
        accuracy: accuracy(&m)?,
        worst_classes: moves,
        weighted_f1_ex_none: weighted_f1_ex_none(&m),
        micro_f1_ex_none: micro_f1_ex_none(&m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use TalkMoveLabel::*;

    #[test]
    fn report_json_shape() {
        let golds = [Restating, None, Revoicing, PressForReasoning];
        let preds = [Restating, None, Restating, PressForReasoning];
        let r = evaluate(&golds, &preds).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["confusion", "per_class", "macro_f1_ex_none", "mcc", "accuracy", "worst_classes"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["per_class"]["restating"]["p"], 0.5);
        assert_eq!(v["confusion"][Revoicing.code()][Restating.code()], 1);
        assert_eq!(r.worst_classes.len(), WORST_CLASSES);
        assert_eq!(r.worst_classes[0], KeepingEveryoneTogether);
        let back: EvalReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
