//! Sentence segmentation, text normalization and student/teacher pairing.

use serde::{Deserialize, Serialize};

use super::transcript::{Speaker, Transcript, Utterance};

/// Placeholder context for a teacher sentence with no fresh student sentence before it.
pub const NO_CONTEXT: &str = "-";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    /// Position in the lesson, dense from 0.
    pub index: usize,
    /// Index of the source utterance in the transcript.
    pub utterance_index: usize,
    pub speaker: Speaker,
    pub raw: String,
    pub normalized: String,
    pub start_ms: Option<u64>,
    pub end_ms: Option<u64>,
}

impl Sentence {
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.normalized.split(' ').filter(|t| !t.is_empty())
    }

    pub fn word_count(&self) -> usize {
        self.tokens().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SentencePair {
    pub student_context: String,
    pub teacher_sentence: String,
    pub teacher_sentence_index: usize,
}

impl SentencePair {
    pub fn new(student_context: impl Into<String>, teacher_sentence: impl Into<String>) -> Self {
        SentencePair {
            student_context: student_context.into(),
            teacher_sentence: teacher_sentence.into(),
            teacher_sentence_index: 0,
        }
    }

    pub fn has_context(&self) -> bool {
        self.student_context != NO_CONTEXT && !self.student_context.is_empty()
    }
}

/// Lowercases, drops everything but letters, digits, whitespace and `/`,
/// and collapses whitespace.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars().flat_map(char::to_lowercase) {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else if c.is_alphanumeric() || c == '/' {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    out
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '?' | '!')
}

/// Splits raw text into sentence fragments.
///
/// A fragment ends at `.`, `?` or `!` when followed by whitespace or the
/// end of text, and at every newline. `3.5` and `7/2` stay whole.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        let end = if c == '\n' {
            Some((i, i + 1))
        } else if is_terminal(c) {
            match chars.peek() {
                None => Some((i + 1, i + 1)),
                Some(&(_, next)) if next.is_whitespace() => Some((i + 1, i + 1)),
                _ => None,
            }
        } else {
            None
        };
        if let Some((frag_end, next_start)) = end {
            out.push(&text[start..frag_end]);
            start = next_start;
        }
    }
    if start < text.len() {
        out.push(&text[start..]);
    }
    out.into_iter()
        .map(str::trim)
        .filter(|f| !normalize(f).is_empty())
        .collect()
}

/// Segments one utterance. Sentence indices start at 0 and the caller
/// renumbers them when assembling a lesson.
pub fn segment(utterance: &Utterance) -> Vec<Sentence> {
    segment_at(utterance, 0, 0)
}

fn segment_at(utterance: &Utterance, utterance_index: usize, first_index: usize) -> Vec<Sentence> {
    split_sentences(&utterance.text)
        .into_iter()
        .enumerate()
        .map(|(k, raw)| Sentence {
            index: first_index + k,
            utterance_index,
            speaker: utterance.speaker,
            raw: raw.to_string(),
            normalized: normalize(raw),
            start_ms: utterance.start_ms,
            end_ms: utterance.end_ms,
        })
        .collect()
}

/// Segments every utterance of a lesson with dense sentence indices.
pub fn segment_transcript(transcript: &Transcript) -> Vec<Sentence> {
    let mut out = Vec::new();
    for (ui, u) in transcript.utterances.iter().enumerate() {
        let next = out.len();
        out.extend(segment_at(u, ui, next));
    }
    out
}

/// One pair per teacher sentence. The most recent student sentence is the
/// context of the first teacher sentence after it only; later teacher
/// sentences in the same run get [`NO_CONTEXT`].
pub fn build_pairs(sentences: &[Sentence]) -> Vec<SentencePair> {
    let mut pending: Option<&str> = None;
    let mut pairs = Vec::new();
    for s in sentences {
        match s.speaker {
            Speaker::Student => pending = Some(&s.normalized),
            Speaker::Teacher => pairs.push(SentencePair {
                student_context: pending.take().unwrap_or(NO_CONTEXT).to_string(),
                teacher_sentence: s.normalized.clone(),
                teacher_sentence_index: s.index,
            }),
            Speaker::Other => {}
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence(index: usize, speaker: Speaker, text: &str) -> Sentence {
        Sentence {
            index,
            utterance_index: index,
            speaker,
            raw: text.into(),
            normalized: normalize(text),
            start_ms: None,
            end_ms: None,
        }
    }

    #[test]
    fn splits_on_terminal_punctuation() {
        let u = Utterance::new(Speaker::Student, "So you put the eight on the box. Then you get eight.");
        let s = segment(&u);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].raw, "So you put the eight on the box.");
        assert_eq!(s[1].normalized, "then you get eight");
        assert_eq!(s[1].index, 1);
        assert_eq!(segment(&Utterance::new(Speaker::Teacher, "Why?")).len(), 1);
        assert_eq!(segment(&Utterance::new(Speaker::Teacher, "3.5 equals 7/2")).len(), 1);
    }

    #[test]
    fn newlines_split_and_punctuation_only_vanishes() {
        let u = Utterance::new(Speaker::Teacher, "okay\nlook here");
        assert_eq!(split_sentences(&u.text), vec!["okay", "look here"]);
        assert!(segment(&Utterance::new(Speaker::Teacher, "?! ...")).is_empty());
        assert_eq!(split_sentences("What?! No way."), vec!["What?!", "No way."]);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(
            normalize("What did Eliza just say her equation was?"),
            "what did eliza just say her equation was"
        );
        assert_eq!(
            normalize("Do you agree with Juan that the answer is 7/10?"),
            "do you agree with juan that the answer is 7/10"
        );
        assert_eq!(normalize(""), "");
        assert_eq!(normalize("  Don't   stop,\tnow!  "), "dont stop now");
    }

    #[test]
    fn pairs_follow_the_turn_example() {
        let sentences = vec![
            sentence(0, Speaker::Student, "so you put the eight on the box"),
            sentence(1, Speaker::Student, "then you get eight"),
            sentence(2, Speaker::Teacher, "oh so you were using this side to help you get that side"),
            sentence(3, Speaker::Teacher, "let me see if i can figure out what you said"),
        ];
        let pairs = build_pairs(&sentences);
        assert_eq!(
            pairs,
            vec![
                SentencePair {
                    student_context: "then you get eight".into(),
                    teacher_sentence: "oh so you were using this side to help you get that side".into(),
                    teacher_sentence_index: 2,
                },
                SentencePair {
                    student_context: "-".into(),
                    teacher_sentence: "let me see if i can figure out what you said".into(),
                    teacher_sentence_index: 3,
                },
            ]
        );
    }

    #[test]
    fn opening_teacher_sentence_has_placeholder() {
        let pairs = build_pairs(&[
            sentence(0, Speaker::Teacher, "good morning"),
            sentence(1, Speaker::Other, "announcement"),
            sentence(2, Speaker::Student, "then another line going straight down"),
            sentence(3, Speaker::Other, "door opens"),
            sentence(4, Speaker::Teacher, "can you go ahead and explain what you did"),
        ]);
        assert_eq!(pairs[0].student_context, NO_CONTEXT);
        assert_eq!(pairs[1].student_context, "then another line going straight down");
        assert_eq!(pairs[1].teacher_sentence_index, 4);
        assert!(build_pairs(&[sentence(0, Speaker::Student, "hi")]).is_empty());
    }

    #[test]
    fn transcript_indices_are_dense() {
        let t = Transcript::new(
            "L",
            vec![
                Utterance::new(Speaker::Teacher, "One. Two."),
                Utterance::new(Speaker::Student, "Three"),
            ],
        )
        .unwrap();
        let s = segment_transcript(&t);
        assert_eq!(s.iter().map(|x| x.index).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(s.iter().map(|x| x.utterance_index).collect::<Vec<_>>(), vec![0, 0, 1]);
    }
}
