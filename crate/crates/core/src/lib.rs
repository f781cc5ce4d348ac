//! Talk move classification and lesson feedback for math classroom transcripts.
//!
//! A transcript is parsed and split into sentences ([`ingest`]), each teacher
//! sentence is paired with the preceding student sentence and labeled with one
//! of six talk moves or None ([`classifier`]), classifiers are scored
//! ([`metrics`]) on labeled pairs ([`corpus`]), and per-lesson feedback is
//! computed and rendered ([`analytics`]).

pub mod analytics;
pub mod classifier;
pub mod corpus;
pub mod ingest;
pub mod metrics;
pub mod taxonomy;

pub use taxonomy::{TalkCategory, TalkMoveLabel};
