//! The individual lesson statistics. Each function is pure and works on the
//! sentence list of one lesson plus, where needed, the predicted labels of its
//! teacher sentences in order.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::ingest::{Sentence, Speaker, Transcript};
use crate::taxonomy::{TalkCategory, TalkMoveLabel};

/// Minimum silence after a teacher sentence, in milliseconds.
pub const WAIT_TIME_MS: u64 = 3000;

pub type CategoryCounts = BTreeMap<TalkCategory, usize>;

/// Counts per talk move (all six present, None excluded) and their total.
pub fn talk_move_counts(predictions: &[TalkMoveLabel]) -> (BTreeMap<TalkMoveLabel, usize>, usize) {
    let mut counts: BTreeMap<_, _> = TalkMoveLabel::TALK_MOVES.iter().map(|&l| (l, 0)).collect();
    for &p in predictions {
        if let Some(c) = counts.get_mut(&p) {
            *c += 1;
        }
    }
    let total = counts.values().sum();
    (counts, total)
}

/// Teacher and student share of words. `None` when neither said anything.
pub fn talk_ratio(sentences: &[Sentence]) -> Option<(f64, f64)> {
    let (mut teacher, mut student) = (0usize, 0usize);
    for s in sentences {
        match s.speaker {
            Speaker::Teacher => teacher += s.word_count(),
            Speaker::Student => student += s.word_count(),
            Speaker::Other => {}
        }
    }
    let total = teacher + student;
    if total == 0 {
        return None;
    }
    let t = teacher as f64 / total as f64;
    Some((t, student as f64 / total as f64))
}

fn empty_categories() -> CategoryCounts {
    TalkCategory::ALL.iter().map(|&c| (c, 0)).collect()
}

fn category_counts(predictions: &[TalkMoveLabel]) -> CategoryCounts {
    let mut counts = empty_categories();
    for c in predictions.iter().filter_map(|l| l.category()) {
        *counts.entry(c).or_default() += 1;
    }
    counts
}

/// Share of talk moves in each category. Empty when there are no talk moves.
pub fn category_pcts(predictions: &[TalkMoveLabel]) -> BTreeMap<TalkCategory, f64> {
    let counts = category_counts(predictions);
    let total: usize = counts.values().sum();
    if total == 0 {
        return BTreeMap::new();
    }
    counts
        .into_iter()
        .map(|(c, n)| (c, n as f64 / total as f64))
        .collect()
}

/// Talk moves per category in each quarter of the lesson.
///
/// `predictions` follow the teacher sentences of `sentences` in order. When
/// every teacher sentence is timed the lesson runs from the earliest start to
/// the latest end and a move falls in quarter `floor(4 (start - t0) / span)`,
/// capped at the last quarter. Otherwise sentence positions are used.
pub fn quarter_breakdown(sentences: &[Sentence], predictions: &[TalkMoveLabel]) -> [CategoryCounts; 4] {
    let mut quarters: [CategoryCounts; 4] = std::array::from_fn(|_| empty_categories());
    let teacher: Vec<&Sentence> = sentences.iter().filter(|s| s.speaker == Speaker::Teacher).collect();
    let timed = !teacher.is_empty() && teacher.iter().all(|s| s.start_ms.is_some());
    let t0 = sentences.iter().filter_map(|s| s.start_ms).min().unwrap_or(0);
    let t1 = sentences
        .iter()
        .filter_map(|s| s.end_ms.or(s.start_ms))
        .max()
        .unwrap_or(0);
    let span = t1.saturating_sub(t0);
    let n = sentences.len().max(1) as u128;

    for (s, label) in teacher.iter().zip(predictions) {
        let Some(category) = label.category() else { continue };
        let q = if timed {
            if span == 0 {
                0
            } else {
                let offset = s.start_ms.unwrap_or(t0).saturating_sub(t0) as u128;
                (4 * offset / span as u128) as usize
            }
        } else {
            (4 * s.index as u128 / n) as usize
        };
        *quarters[q.min(3)].entry(category).or_default() += 1;
    }
    quarters
}

/// Most frequent words of teacher and student sentences, count descending
/// then alphabetical, at most `top_n` entries.
pub fn word_cloud(sentences: &[Sentence], stopwords: &BTreeSet<String>, top_n: usize) -> Vec<(String, usize)> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for s in sentences.iter().filter(|s| s.speaker != Speaker::Other) {
        for tok in s.tokens() {
            if !stopwords.contains(tok) {
                *counts.entry(tok).or_default() += 1;
            }
        }
    }
    let mut words: Vec<(String, usize)> = counts.into_iter().map(|(w, c)| (w.to_string(), c)).collect();
    words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    words.truncate(top_n);
    words
}

/// Fraction of student sentences that are a single word.
pub fn one_word_pct(sentences: &[Sentence]) -> Option<f64> {
    let student: Vec<_> = sentences.iter().filter(|s| s.speaker == Speaker::Student).collect();
    if student.is_empty() {
        return None;
    }
    let one = student.iter().filter(|s| s.word_count() == 1).count();
    Some(one as f64 / student.len() as f64)
}

/// Fraction of teacher sentences followed by at least [`WAIT_TIME_MS`] of
/// silence before the next utterance. Only the last sentence of an utterance
/// can qualify. `None` unless every utterance is timed. `sentences` must
/// come from `segment_transcript(transcript)`.
pub fn wait_time_pct(transcript: &Transcript, sentences: &[Sentence]) -> Option<f64> {
    if !transcript.fully_timed() {
        return None;
    }
    let teacher: Vec<_> = sentences.iter().filter(|s| s.speaker == Speaker::Teacher).collect();
    if teacher.is_empty() {
        return None;
    }
    let utts = &transcript.utterances;
    let waits = teacher
        .iter()
        .filter(|s| {
            let ends_utterance = sentences
                .get(s.index + 1)
                .is_none_or(|next| next.utterance_index != s.utterance_index);
            if !ends_utterance {
                return false;
            }
            let (Some(end), Some(next)) = (
                utts[s.utterance_index].end_ms,
                utts.get(s.utterance_index + 1).and_then(|u| u.start_ms),
            ) else {
                return false;
            };
            next.saturating_sub(end) >= WAIT_TIME_MS
        })
        .count();
    Some(waits as f64 / teacher.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{segment_transcript, Utterance};
    use TalkMoveLabel::*;

    fn lesson(utts: Vec<Utterance>) -> (Transcript, Vec<Sentence>) {
        let t = Transcript::new("l", utts).unwrap();
        let s = segment_transcript(&t);
        (t, s)
    }

    #[test]
    fn counts_and_total() {
        let (counts, total) = talk_move_counts(&[PressForAccuracy, PressForAccuracy, PressForAccuracy, Revoicing, None]);
        assert_eq!(total, 4);
        assert_eq!(counts[&PressForAccuracy], 3);
        assert_eq!(counts.len(), 6);
        assert_eq!(talk_move_counts(&[None, None]).1, 0);
    }

    #[test]
    fn ratio_by_words() {
        let (_, s) = lesson(vec![
            Utterance::new(Speaker::Teacher, "one two three"),
            Utterance::new(Speaker::Student, "four"),
            Utterance::new(Speaker::Other, "five six seven eight"),
        ]);
        assert_eq!(talk_ratio(&s), Some((0.75, 0.25)));
        let (_, s) = lesson(vec![Utterance::new(Speaker::Teacher, "hello class")]);
        assert_eq!(talk_ratio(&s), Some((1.0, 0.0)));
    }

    #[test]
    fn category_shares() {
        let p = category_pcts(&[Restating, Revoicing, KeepingEveryoneTogether, PressForReasoning]);
        assert_eq!(p[&TalkCategory::LearningCommunity], 0.5);
        assert_eq!(p[&TalkCategory::ContentKnowledge], 0.0);
        assert_eq!(p[&TalkCategory::RigorousThinking], 0.5);
        assert_eq!(category_pcts(&[PressForAccuracy])[&TalkCategory::ContentKnowledge], 1.0);
        assert!(category_pcts(&[None]).is_empty());
    }

    #[test]
    fn even_moves_fill_quarters() {
        let utts = (0..8)
            .map(|i| Utterance::timed(Speaker::Teacher, i * 1000, i * 1000 + 500, "why"))
            .collect();
        let (_, s) = lesson(utts);
        let q = quarter_breakdown(&s, &[PressForReasoning; 8]);
        for quarter in &q {
            assert_eq!(quarter[&TalkCategory::RigorousThinking], 2);
        }
    }

    #[test]
    fn early_moves_land_in_first_quarter() {
        let mut utts: Vec<_> = (0..3)
            .map(|i| Utterance::timed(Speaker::Teacher, i * 100, i * 100 + 50, "why"))
            .collect();
        utts.push(Utterance::timed(Speaker::Teacher, 9000, 10000, "ok"));
        let (_, s) = lesson(utts);
        let q = quarter_breakdown(&s, &[Revoicing, Revoicing, Revoicing, None]);
        assert_eq!(q[0][&TalkCategory::RigorousThinking], 3);
        assert_eq!(q[1..].iter().map(|m| m.values().sum::<usize>()).sum::<usize>(), 0);
    }

    #[test]
    fn untimed_quarters_use_positions() {
        let utts = (0..4).map(|_| Utterance::new(Speaker::Teacher, "why")).collect();
        let (_, s) = lesson(utts);
        let q = quarter_breakdown(&s, &[Restating; 4]);
        for quarter in &q {
            assert_eq!(quarter[&TalkCategory::LearningCommunity], 1);
        }
    }

    #[test]
    fn cloud_order_and_stopwords() {
        let (_, s) = lesson(vec![Utterance::new(Speaker::Teacher, "add two add")]);
        assert_eq!(
            word_cloud(&s, &BTreeSet::new(), 10),
            vec![("add".to_string(), 2), ("two".to_string(), 1)]
        );
        let all: BTreeSet<String> = ["add", "two"].iter().map(|w| w.to_string()).collect();
        assert!(word_cloud(&s, &all, 10).is_empty());
        assert_eq!(word_cloud(&s, &BTreeSet::new(), 1).len(), 1);
    }

    #[test]
    fn one_word_share() {
        let (_, s) = lesson(vec![
            Utterance::new(Speaker::Student, "Eight."),
            Utterance::new(Speaker::Student, "Then you get eight."),
            Utterance::new(Speaker::Student, "Yes."),
        ]);
        assert_eq!(one_word_pct(&s), Some(2.0 / 3.0));
        let (_, s) = lesson(vec![Utterance::new(Speaker::Teacher, "hi")]);
        assert_eq!(one_word_pct(&s), Option::None);
    }

    #[test]
    fn wait_time_boundary() {
        let (t, s) = lesson(vec![
            Utterance::timed(Speaker::Teacher, 0, 10000, "What is it? Think."),
            Utterance::timed(Speaker::Student, 13500, 14000, "eight"),
            Utterance::timed(Speaker::Teacher, 15000, 16000, "Good."),
            Utterance::timed(Speaker::Student, 18999, 19500, "nine"),
            Utterance::timed(Speaker::Teacher, 20000, 21000, "Why?"),
            Utterance::timed(Speaker::Student, 24000, 24500, "because"),
        ]);
        // "think" waits 3500, "good" 2999, "why" exactly 3000.
        assert_eq!(wait_time_pct(&t, &s), Some(2.0 / 4.0));
        let (t, s) = lesson(vec![Utterance::new(Speaker::Teacher, "hi")]);
        assert_eq!(wait_time_pct(&t, &s), Option::None);
    }
}
