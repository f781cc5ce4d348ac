//! Lesson processing service: a file-system job store, a FIFO queue drained
//! by worker threads, and an HTTP API over both.

pub mod config;
pub mod engine;
pub mod queue;
pub mod server;
pub mod store;

pub use config::ServiceConfig;
pub use engine::{ClassifierChoice, Engine};
pub use queue::{process_transcript, Queue};
pub use store::{Job, JobState, Store};
