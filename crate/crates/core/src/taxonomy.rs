//! The closed talk-move label set and its category mapping.
//!
//! Integer codes are part of the on-disk contract (confusion matrices,
//! model files): `None` is 0 and the talk moves follow in a fixed order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Number of labels, including `None`.
pub const NUM_LABELS: usize = 7;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown label {0:?}")]
pub struct UnknownLabel(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TalkMoveLabel {
    None = 0,
    KeepingEveryoneTogether = 1,
    GettingStudentsToRelate = 2,
    Restating = 3,
    PressForAccuracy = 4,
    Revoicing = 5,
    PressForReasoning = 6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TalkCategory {
    LearningCommunity,
    ContentKnowledge,
    RigorousThinking,
}

impl TalkMoveLabel {
    /// All labels in code order.
    pub const ALL: [TalkMoveLabel; NUM_LABELS] = [
        TalkMoveLabel::None,
        TalkMoveLabel::KeepingEveryoneTogether,
        TalkMoveLabel::GettingStudentsToRelate,
        TalkMoveLabel::Restating,
        TalkMoveLabel::PressForAccuracy,
        TalkMoveLabel::Revoicing,
        TalkMoveLabel::PressForReasoning,
    ];

    /// The six talk moves, `None` excluded.
    pub const TALK_MOVES: [TalkMoveLabel; 6] = [
        TalkMoveLabel::KeepingEveryoneTogether,
        TalkMoveLabel::GettingStudentsToRelate,
        TalkMoveLabel::Restating,
        TalkMoveLabel::PressForAccuracy,
        TalkMoveLabel::Revoicing,
        TalkMoveLabel::PressForReasoning,
    ];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Self> {
        Self::ALL.get(code).copied()
    }

    pub fn is_talk_move(self) -> bool {
        self != TalkMoveLabel::None
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TalkMoveLabel::None => "none",
            TalkMoveLabel::KeepingEveryoneTogether => "keeping_everyone_together",
            TalkMoveLabel::GettingStudentsToRelate => "getting_students_to_relate",
            TalkMoveLabel::Restating => "restating",
            TalkMoveLabel::PressForAccuracy => "press_for_accuracy",
            TalkMoveLabel::Revoicing => "revoicing",
            TalkMoveLabel::PressForReasoning => "press_for_reasoning",
        }
    }

    /// Human readable name for reports.
    pub fn display_name(self) -> &'static str {
        match self {
            TalkMoveLabel::None => "None",
            TalkMoveLabel::KeepingEveryoneTogether => "Keeping everyone together",
            TalkMoveLabel::GettingStudentsToRelate => "Getting students to relate",
            TalkMoveLabel::Restating => "Restating",
            TalkMoveLabel::PressForAccuracy => "Press for accuracy",
            TalkMoveLabel::Revoicing => "Revoicing",
            TalkMoveLabel::PressForReasoning => "Press for reasoning",
        }
    }

    pub fn category(self) -> Option<TalkCategory> {
        category_of(self)
    }
}

pub fn category_of(label: TalkMoveLabel) -> Option<TalkCategory> {
    use TalkMoveLabel::*;
    match label {
        None => Option::None,
        KeepingEveryoneTogether | GettingStudentsToRelate | Restating => {
            Some(TalkCategory::LearningCommunity)
        }
        PressForAccuracy => Some(TalkCategory::ContentKnowledge),
        Revoicing | PressForReasoning => Some(TalkCategory::RigorousThinking),
    }
}

/// Parses a label, folding case and treating spaces, hyphens and
/// underscores alike. Only the seven canonical names are accepted.
pub fn parse_label(text: &str) -> Result<TalkMoveLabel, UnknownLabel> {
    let folded: String = text
        .trim()
        .split(|c: char| c.is_whitespace() || c == '_' || c == '-')
        .filter(|part| !part.is_empty())
        .map(|part| part.to_lowercase())
        .collect::<Vec<_>>()
        .join("_");
    TalkMoveLabel::ALL
        .into_iter()
        .find(|label| label.as_str() == folded)
        .ok_or_else(|| UnknownLabel(text.to_string()))
}

impl fmt::Display for TalkMoveLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TalkMoveLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_label(s)
    }
}

impl Serialize for TalkMoveLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for TalkMoveLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_label(&s).map_err(serde::de::Error::custom)
    }
}

impl TalkCategory {
    pub const ALL: [TalkCategory; 3] = [
        TalkCategory::LearningCommunity,
        TalkCategory::ContentKnowledge,
        TalkCategory::RigorousThinking,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TalkCategory::LearningCommunity => "learning_community",
            TalkCategory::ContentKnowledge => "content_knowledge",
            TalkCategory::RigorousThinking => "rigorous_thinking",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            TalkCategory::LearningCommunity => "Learning community",
            TalkCategory::ContentKnowledge => "Content knowledge",
            TalkCategory::RigorousThinking => "Rigorous thinking",
        }
    }
}

impl fmt::Display for TalkCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for TalkCategory {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for TalkCategory {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        TalkCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown category {s:?}")))
    }
}
