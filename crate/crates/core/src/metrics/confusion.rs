use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::taxonomy::{TalkMoveLabel, NUM_LABELS};

/// `cells[gold][pred]` counts over the seven labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub cells: [[u64; NUM_LABELS]; NUM_LABELS],
    pub total: u64,
}

impl ConfusionMatrix {
    pub fn from_cells(cells: [[u64; NUM_LABELS]; NUM_LABELS]) -> Self {
        let total = cells.iter().flatten().sum();
        ConfusionMatrix { cells, total }
    }

    pub fn add(&mut self, gold: TalkMoveLabel, pred: TalkMoveLabel) {
        self.cells[gold.code()][pred.code()] += 1;
        self.total += 1;
    }

    pub fn get(&self, gold: TalkMoveLabel, pred: TalkMoveLabel) -> u64 {
        self.cells[gold.code()][pred.code()]
    }

    pub fn true_positives(&self, label: TalkMoveLabel) -> u64 {
        self.cells[label.code()][label.code()]
    }

    /// Row sum: items whose gold label is `label`.
    pub fn gold_count(&self, label: TalkMoveLabel) -> u64 {
        self.cells[label.code()].iter().sum()
    }

    /// Column sum: items predicted as `label`.
    pub fn predicted_count(&self, label: TalkMoveLabel) -> u64 {
        self.cells.iter().map(|row| row[label.code()]).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..NUM_LABELS).map(|k| self.cells[k][k]).sum()
    }
}

pub fn confusion(golds: &[TalkMoveLabel], preds: &[TalkMoveLabel]) -> Result<ConfusionMatrix, MetricsError> {
    if golds.len() != preds.len() {
        return Err(MetricsError::LengthMismatch {
            left: golds.len(),
            right: preds.len(),
        });
    }
    if golds.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut m = ConfusionMatrix::default();
    for (&g, &p) in golds.iter().zip(preds) {
        m.add(g, p);
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassScore {
    #[serde(rename = "p")]
    pub precision: f64,
    #[serde(rename = "r")]
    pub recall: f64,
    pub f1: f64,
}

impl ClassScore {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        ClassScore {
            precision,
            recall,
            f1: f1_of(precision, recall),
        }
    }
}

pub fn f1_of(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Per-label scores indexed by label code.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassReport(pub [ClassScore; NUM_LABELS]);

impl ClassReport {
    pub fn get(&self, label: TalkMoveLabel) -> ClassScore {
        self.0[label.code()]
    }
}

impl Serialize for ClassReport {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(NUM_LABELS))?;
        for label in TalkMoveLabel::ALL {
            map.serialize_entry(label.as_str(), &self.0[label.code()])?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for ClassReport {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let map = std::collections::BTreeMap::<TalkMoveLabel, ClassScore>::deserialize(deserializer)?;
        let mut report = ClassReport::default();
        for (label, score) in map {
            report.0[label.code()] = score;
        }
        Ok(report)
    }
}

pub fn per_class_prf(m: &ConfusionMatrix) -> ClassReport {
    let mut out = ClassReport::default();
    for label in TalkMoveLabel::ALL {
        let tp = m.true_positives(label);
        let fp = m.predicted_count(label) - tp;
        let fn_ = m.gold_count(label) - tp;
        out.0[label.code()] = ClassScore::from_counts(tp, fp, fn_);
    }
    out
}

/// Unweighted mean F1 over the six talk moves.
pub fn macro_f1_ex_none(m: &ConfusionMatrix) -> f64 {
    let report = per_class_prf(m);
    TalkMoveLabel::TALK_MOVES
        .iter()
        .map(|&l| report.get(l).f1)
        .sum::<f64>()
        / TalkMoveLabel::TALK_MOVES.len() as f64
}

/// Support-weighted mean F1 over the six talk moves; 0 when none has support.
pub fn weighted_f1_ex_none(m: &ConfusionMatrix) -> f64 {
    let report = per_class_prf(m);
    let support: u64 = TalkMoveLabel::TALK_MOVES.iter().map(|&l| m.gold_count(l)).sum();
    if support == 0 {
        return 0.0;
    }
    TalkMoveLabel::TALK_MOVES
        .iter()
        .map(|&l| report.get(l).f1 * m.gold_count(l) as f64)
        .sum::<f64>()
        / support as f64
}

/// F1 from pooled TP/FP/FN over the six talk moves.
pub fn micro_f1_ex_none(m: &ConfusionMatrix) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for label in TalkMoveLabel::TALK_MOVES {
        let t = m.true_positives(label);
        tp += t;
        fp += m.predicted_count(label) - t;
        fn_ += m.gold_count(label) - t;
    }
    ClassScore::from_counts(tp, fp, fn_).f1
}

pub fn accuracy(m: &ConfusionMatrix) -> Result<f64, MetricsError> {
    if m.total == 0 {
        return Err(MetricsError::Empty);
    }
    Ok(m.trace() as f64 / m.total as f64)
}

/// Multiclass Matthews correlation (Gorodkin's R_K) over all seven labels.
///
/// `(c*s - sum p_k t_k) / sqrt((s^2 - sum p_k^2)(s^2 - sum t_k^2))`, with
/// 0 when either factor of the denominator is 0. The numerator and both
/// factors are evaluated in exact integer arithmetic.
pub fn mcc_multiclass(m: &ConfusionMatrix) -> Result<f64, MetricsError> {
    if m.total == 0 {
        return Err(MetricsError::Empty);
    }
    let s = m.total as i128;
    let c = m.trace() as i128;
    let mut pt = 0i128;
    let mut pp = 0i128;
    let mut tt = 0i128;
    for label in TalkMoveLabel::ALL {
        let p = m.predicted_count(label) as i128;
        let t = m.gold_count(label) as i128;
        pt += p * t;
        pp += p * p;
        tt += t * t;
    }
    let num = c * s - pt;
    let d_pred = s * s - pp;
    let d_gold = s * s - tt;
    if d_pred == 0 || d_gold == 0 {
        return Ok(0.0);
    }
    let value = if d_pred == d_gold {
        num as f64 / d_pred as f64
    } else {
        num as f64 / ((d_pred as f64) * (d_gold as f64)).sqrt()
    };
    Ok(value.clamp(-1.0, 1.0))
}
