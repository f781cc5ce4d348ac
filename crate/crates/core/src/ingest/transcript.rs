//! Transcript types and the three supported input formats.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Teacher,
    Student,
    Other,
}

impl Speaker {
    /// Anything other than `teacher` or `student` is `Other`.
    pub fn from_label(text: &str) -> Speaker {
        match text.trim().to_lowercase().as_str() {
            "teacher" => Speaker::Teacher,
            "student" => Speaker::Student,
            _ => Speaker::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Speaker::Teacher => "teacher",
            Speaker::Student => "student",
            Speaker::Other => "other",
        }
    }
}

impl fmt::Display for Speaker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    #[serde(deserialize_with = "deserialize_speaker")]
    pub speaker: Speaker,
    #[serde(default)]
    pub start_ms: Option<u64>,
    #[serde(default)]
    pub end_ms: Option<u64>,
    pub text: String,
}

impl Utterance {
    pub fn new(speaker: Speaker, text: impl Into<String>) -> Self {
        Utterance {
            speaker,
            start_ms: None,
            end_ms: None,
            text: text.into(),
        }
    }

    pub fn timed(speaker: Speaker, start_ms: u64, end_ms: u64, text: impl Into<String>) -> Self {
        Utterance {
            speaker,
            start_ms: Some(start_ms),
            end_ms: Some(end_ms),
            text: text.into(),
        }
    }
}

fn deserialize_speaker<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Speaker, D::Error> {
    let s = String::deserialize(d)?;
    Ok(Speaker::from_label(&s))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub lesson_id: String,
    pub utterances: Vec<Utterance>,
}

impl Transcript {
    /// Builds a transcript and checks its invariants.
    pub fn new(lesson_id: impl Into<String>, utterances: Vec<Utterance>) -> Result<Self, IngestError> {
        let t = Transcript {
            lesson_id: lesson_id.into(),
            utterances,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        if self.lesson_id.trim().is_empty() {
            return Err(IngestError::Malformed("lesson_id is empty".into()));
        }
        if self.utterances.is_empty() {
            return Err(IngestError::EmptyTranscript);
        }
        let mut last_start: Option<u64> = None;
        for (i, u) in self.utterances.iter().enumerate() {
            if u.text.trim().is_empty() {
                return Err(IngestError::Malformed(format!("utterance {i} has empty text")));
            }
            if let (Some(start), Some(end)) = (u.start_ms, u.end_ms) {
                if end < start {
                    return Err(IngestError::BadTimestamps(format!(
                        "utterance {i} ends at {end} ms before it starts at {start} ms"
                    )));
                }
            }
            if let Some(start) = u.start_ms {
                if let Some(prev) = last_start {
                    if start < prev {
                        return Err(IngestError::BadTimestamps(format!(
                            "utterance {i} starts at {start} ms, before the previous utterance at {prev} ms"
                        )));
                    }
                }
                last_start = Some(start);
            }
        }
        Ok(())
    }

    /// True when every utterance carries both timestamps.
    pub fn fully_timed(&self) -> bool {
        self.utterances
            .iter()
            .all(|u| u.start_ms.is_some() && u.end_ms.is_some())
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(self).expect("transcript serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranscriptFormat {
    Json,
    TurnsText,
    Csv,
}

impl TranscriptFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            TranscriptFormat::Json => "json",
            TranscriptFormat::TurnsText => "turns_text",
            TranscriptFormat::Csv => "csv",
        }
    }

    /// Guesses the format from a file extension.
    pub fn from_extension(ext: &str) -> Option<Self> {
        match ext.to_ascii_lowercase().as_str() {
            "json" => Some(TranscriptFormat::Json),
            "csv" => Some(TranscriptFormat::Csv),
            "txt" | "turns" => Some(TranscriptFormat::TurnsText),
            _ => None,
        }
    }
}

impl FromStr for TranscriptFormat {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(TranscriptFormat::Json),
            "turns_text" | "turns" | "text" | "txt" => Ok(TranscriptFormat::TurnsText),
            "csv" => Ok(TranscriptFormat::Csv),
            other => Err(IngestError::Malformed(format!("unknown transcript format {other:?}"))),
        }
    }
}

impl fmt::Display for TranscriptFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lesson id used for `turns_text` input, which carries none.
pub const DEFAULT_LESSON_ID: &str = "lesson";

pub fn parse_transcript(bytes: &[u8], format: TranscriptFormat) -> Result<Transcript, IngestError> {
    parse_transcript_with_id(bytes, format, DEFAULT_LESSON_ID)
}

/// Like [`parse_transcript`], with the lesson id to use when the format has none.
pub fn parse_transcript_with_id(
    bytes: &[u8],
    format: TranscriptFormat,
    fallback_lesson_id: &str,
) -> Result<Transcript, IngestError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| IngestError::Malformed(format!("input is not UTF-8: {e}")))?;
    let transcript = match format {
        TranscriptFormat::Json => parse_json(text)?,
        TranscriptFormat::TurnsText => parse_turns(text, fallback_lesson_id)?,
        TranscriptFormat::Csv => parse_csv(text)?,
    };
    transcript.validate()?;
    Ok(transcript)
}

fn parse_json(text: &str) -> Result<Transcript, IngestError> {
    serde_json::from_str(text).map_err(|e| IngestError::Malformed(format!("json: {e}")))
}

fn parse_turns(text: &str, lesson_id: &str) -> Result<Transcript, IngestError> {
    let mut utterances = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (speaker, body) = line.split_once(':').ok_or_else(|| {
            IngestError::Malformed(format!("line {}: expected \"speaker: text\"", lineno + 1))
        })?;
        if speaker.trim().is_empty() {
            return Err(IngestError::Malformed(format!("line {}: missing speaker", lineno + 1)));
        }
        utterances.push(Utterance::new(Speaker::from_label(speaker), body.trim()));
    }
    Ok(Transcript {
        lesson_id: lesson_id.to_string(),
        utterances,
    })
}

#[derive(Deserialize)]
struct CsvRow {
    lesson_id: String,
    speaker: String,
    start_ms: Option<u64>,
    end_ms: Option<u64>,
    text: String,
}

const CSV_HEADER: [&str; 5] = ["lesson_id", "speaker", "start_ms", "end_ms", "text"];

fn parse_csv(text: &str) -> Result<Transcript, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| IngestError::Malformed(format!("csv header: {e}")))?;
    if header.iter().map(str::trim).ne(CSV_HEADER) {
        return Err(IngestError::Malformed(format!(
            "csv header must be {}",
            CSV_HEADER.join(",")
        )));
    }
    let mut lesson_id: Option<String> = None;
    let mut utterances = Vec::new();
    for (i, row) in reader.deserialize::<CsvRow>().enumerate() {
        let row = row.map_err(|e| IngestError::Malformed(format!("csv row {}: {e}", i + 1)))?;
        match &lesson_id {
            None => lesson_id = Some(row.lesson_id.clone()),
            Some(id) if *id != row.lesson_id => {
                return Err(IngestError::Malformed(format!(
                    "csv row {}: lesson_id {:?} differs from {:?}",
                    i + 1,
                    row.lesson_id,
                    id
                )))
            }
            Some(_) => {}
        }
        utterances.push(Utterance {
            speaker: Speaker::from_label(&row.speaker),
            start_ms: row.start_ms,
            end_ms: row.end_ms,
            text: row.text,
        });
    }
    Ok(Transcript {
        lesson_id: lesson_id.ok_or(IngestError::EmptyTranscript)?,
        utterances,
    })
}

/// Writes a transcript in the csv layout accepted by [`parse_transcript`].
pub fn transcript_to_csv(t: &Transcript) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for u in &t.utterances {
        let start = u.start_ms.map(|v| v.to_string()).unwrap_or_default();
        let end = u.end_ms.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([t.lesson_id.as_str(), u.speaker.as_str(), &start, &end, &u.text])
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}
