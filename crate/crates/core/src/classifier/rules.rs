//! Deterministic rule baseline.
//!
//! Rules are tried in a fixed order and the first match wins:
//!
//! 1. teacher tokens are a subset of the student's (context present): restating
//! 2. shared tokens cover at least half of the student's and the teacher adds
//!    a new content word: revoicing
//! 3. `agree` / `disagree`: getting students to relate
//! 4. `why`, `explain`, `how do you know`: press for reasoning
//! 5. `say`, `said`, `repeat`, `listen`, `everyone`: keeping everyone together
//! 6. a math-lexicon term: press for accuracy
//!
//! Anything else is `None`.

use std::collections::HashSet;

use super::Prediction;
use crate::ingest::SentencePair;
use crate::taxonomy::TalkMoveLabel;

pub const DEFAULT_MATH_LEXICON: &[&str] = &[
    "add", "angle", "area", "decimal", "denominator", "difference", "divide", "equal", "equals",
    "equation", "estimate", "fraction", "fractions", "graph", "multiply", "number", "numbers",
    "numerator", "ordered pair", "percent", "perimeter", "plus", "minus", "product", "quotient",
    "ratio", "slope", "subtract", "sum", "times", "variable",
];

const RELATE_TERMS: &[&str] = &["agree", "disagree"];
const REASONING_TERMS: &[&str] = &["why", "explain", "how do you know"];
const TOGETHER_TERMS: &[&str] = &["say", "said", "repeat", "listen", "everyone"];

/// Words that do not count as new content when testing for revoicing.
const FUNCTION_WORDS: &[&str] = &[
    "a", "an", "and", "are", "at", "be", "but", "did", "do", "does", "for", "he", "her", "his", "i",
    "in", "is", "it", "its", "just", "me", "my", "of", "oh", "ok", "okay", "on", "or", "our", "she",
    "so", "that", "the", "them", "they", "this", "to", "uh", "um", "us", "was", "we", "well",
    "were", "you", "your",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    /// Single words or space-separated phrases that signal press for accuracy.
    pub math_lexicon: Vec<String>,
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet {
            math_lexicon: DEFAULT_MATH_LEXICON.iter().map(|s| s.to_string()).collect(),
        }
    }
}

fn contains_term(tokens: &[&str], term: &str) -> bool {
    let phrase: Vec<&str> = term.split_whitespace().collect();
    match phrase.len() {
        0 => false,
        1 => tokens.contains(&phrase[0]),
        n => tokens.windows(n).any(|w| w == phrase.as_slice()),
    }
}

fn contains_any<S: AsRef<str>>(tokens: &[&str], terms: &[S]) -> bool {
    terms.iter().any(|t| contains_term(tokens, t.as_ref()))
}

impl RuleSet {
    pub fn label(&self, pair: &SentencePair) -> TalkMoveLabel {
        let teacher: Vec<&str> = pair.teacher_sentence.split_whitespace().collect();
        if pair.has_context() && !teacher.is_empty() {
            let student: HashSet<&str> = pair.student_context.split_whitespace().collect();
            let teacher_set: HashSet<&str> = teacher.iter().copied().collect();
            if teacher_set.is_subset(&student) {
                return TalkMoveLabel::Restating;
            }
            let shared = teacher_set.intersection(&student).count();
            let adds_content = teacher_set
                .iter()
                .any(|t| !student.contains(t) && !FUNCTION_WORDS.contains(t));
            if !student.is_empty() && 2 * shared >= student.len() && adds_content {
                return TalkMoveLabel::Revoicing;
            }
        }
        if contains_any(&teacher, RELATE_TERMS) {
            TalkMoveLabel::GettingStudentsToRelate
        } else if contains_any(&teacher, REASONING_TERMS) {
            TalkMoveLabel::PressForReasoning
        } else if contains_any(&teacher, TOGETHER_TERMS) {
            TalkMoveLabel::KeepingEveryoneTogether
        } else if contains_any(&teacher, &self.math_lexicon) {
            TalkMoveLabel::PressForAccuracy
        } else {
            TalkMoveLabel::None
        }
    }

    pub fn classify(&self, pair: &SentencePair) -> Prediction {
        Prediction::one_hot(self.label(pair))
    }
}

/// Classifies with the default rule set.
pub fn rule_classify(pair: &SentencePair) -> Prediction {
    RuleSet::default().classify(pair)
}
