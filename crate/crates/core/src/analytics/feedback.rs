use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::stats::*;
use super::AnalyticsError;
use crate::ingest::{segment_transcript, Speaker, Transcript};
use crate::taxonomy::{TalkCategory, TalkMoveLabel};

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyticsConfig {
    /// Word cloud size.
    pub top_n: usize,
    pub stopwords: BTreeSet<String>,
}

impl Default for AnalyticsConfig {
    fn default() -> Self {
        AnalyticsConfig {
            top_n: 50,
            stopwords: parse_stopwords(DEFAULT_STOPWORDS),
        }
    }
}

/// One word per line, `#` starts a comment line. Words are normalized.
pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(crate::ingest::normalize)
        .filter(|w| !w.is_empty())
        .collect()
}

/// The per-lesson feedback document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LessonFeedback {
    pub lesson_id: String,
    pub talk_move_counts: BTreeMap<TalkMoveLabel, usize>,
    pub total_talk_moves: usize,
    pub teacher_talk_pct: Option<f64>,
    pub student_talk_pct: Option<f64>,
    pub category_pcts: BTreeMap<TalkCategory, f64>,
    pub quarters: [CategoryCounts; 4],
    pub top_words: Vec<(String, usize)>,
    pub one_word_response_pct: Option<f64>,
    pub wait_time_pct: Option<f64>,
    /// ISO-8601 timestamp supplied by the caller.
    pub created_at: String,
}

impl LessonFeedback {
    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("feedback serializes");
        out.push(b'\n');
        out
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }

    /// Talk moves per category summed over the four quarters.
    pub fn quarter_totals(&self) -> CategoryCounts {
        let mut out = CategoryCounts::new();
        for q in &self.quarters {
            for (&c, &n) in q {
                *out.entry(c).or_default() += n;
            }
        }
        out
    }
}

/// Computes every statistic for one lesson. `predictions` hold one label per
/// teacher sentence in lesson order.
pub fn compute_feedback(
    transcript: &Transcript,
    predictions: &[TalkMoveLabel],
    config: &AnalyticsConfig,
    created_at: &str,
) -> Result<LessonFeedback, AnalyticsError> {
    let sentences = segment_transcript(transcript);
    let teacher = sentences.iter().filter(|s| s.speaker == Speaker::Teacher).count();
    if teacher != predictions.len() {
        return Err(AnalyticsError::Alignment {
            teacher_sentences: teacher,
            predictions: predictions.len(),
        });
    }
    let (counts, total) = talk_move_counts(predictions);
    let ratio = talk_ratio(&sentences);
    Ok(LessonFeedback {
        lesson_id: transcript.lesson_id.clone(),
        talk_move_counts: counts,
        total_talk_moves: total,
        teacher_talk_pct: ratio.map(|r| r.0),
        student_talk_pct: ratio.map(|r| r.1),
        category_pcts: category_pcts(predictions),
        quarters: quarter_breakdown(&sentences, predictions),
        top_words: word_cloud(&sentences, &config.stopwords, config.top_n),
        one_word_response_pct: one_word_pct(&sentences),
        wait_time_pct: wait_time_pct(transcript, &sentences),
        created_at: created_at.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Utterance;

    fn lesson() -> Transcript {
        Transcript::new(
            "demo",
            vec![
                Utterance::timed(Speaker::Teacher, 0, 1000, "What is the slope?"),
                Utterance::timed(Speaker::Student, 4000, 5000, "Three."),
                Utterance::timed(Speaker::Teacher, 5500, 6000, "Why?"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn misaligned_predictions_rejected() {
        let err = compute_feedback(&lesson(), &[TalkMoveLabel::None], &AnalyticsConfig::default(), "t");
        assert_eq!(
            err,
            Err(AnalyticsError::Alignment { teacher_sentences: 2, predictions: 1 })
        );
    }

    #[test]
    fn all_none_lesson() {
        let f = compute_feedback(&lesson(), &[TalkMoveLabel::None; 2], &AnalyticsConfig::default(), "t").unwrap();
        assert_eq!(f.total_talk_moves, 0);
        assert!(f.category_pcts.is_empty());
        assert_eq!(f.wait_time_pct, Some(0.5));
    }

    #[test]
    fn json_round_trip_and_determinism() {
        let preds = [TalkMoveLabel::PressForAccuracy, TalkMoveLabel::PressForReasoning];
        let cfg = AnalyticsConfig::default();
        let f = compute_feedback(&lesson(), &preds, &cfg, "2024-01-01T00:00:00Z").unwrap();
        let json = f.to_json();
        assert_eq!(LessonFeedback::from_json(&json).unwrap(), f);
        let again = compute_feedback(&lesson(), &preds, &cfg, "2024-01-01T00:00:00Z").unwrap();
        assert_eq!(again.to_json(), json);
        let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(v["quarters"].as_array().unwrap().len(), 4);
        assert_eq!(v["talk_move_counts"]["press_for_accuracy"], 1);
        assert!(v["top_words"][0].is_array());
    }

    #[test]
    fn stopword_file_parses() {
        let s = parse_stopwords("# c\nThe\n\n and \n");
        assert_eq!(s.into_iter().collect::<Vec<_>>(), vec!["and", "the"]);
        assert!(AnalyticsConfig::default().stopwords.contains("the"));
    }
}
