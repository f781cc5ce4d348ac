//! Transcript ingestion: parsing, segmentation, normalization, pairing and
//! noise injection.

mod noise;
mod segment;
mod transcript;

use thiserror::Error;

pub use noise::{degrade, degrade_aligned, NoiseConfig};
pub use segment::{
    build_pairs, normalize, segment, segment_transcript, split_sentences, Sentence, SentencePair,
    NO_CONTEXT,
};
pub use transcript::{
    parse_transcript, parse_transcript_with_id, transcript_to_csv, Speaker, Transcript,
    TranscriptFormat, Utterance, DEFAULT_LESSON_ID,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IngestError {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("bad timestamps: {0}")]
    BadTimestamps(String),
    #[error("transcript has no utterances")]
    EmptyTranscript,
    #[error("invalid noise config: {0}")]
    InvalidNoise(String),
}
