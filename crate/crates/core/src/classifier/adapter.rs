//! Contract for an external inference service.
//!
//! Request: `{"pairs": [{"student_context": s, "teacher_sentence": t}, ...]}`
//! posted to `/classify`. Response: `{"predictions": [{"probs": [7 numbers]}, ...]}`
//! in request order. The transport that moves the bytes is supplied by the
//! caller so this module stays free of any HTTP stack.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ClassifierError, Prediction};
use crate::ingest::SentencePair;
use crate::taxonomy::NUM_LABELS;

/// Tolerance on the sum of returned probabilities.
pub const PROB_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdapterConfig {
    /// Base URL of the service; requests go to `{url}/classify`.
    pub url: String,
    pub timeout_ms: u64,
    /// Extra attempts after the first failed one.
    pub retries: u32,
}

impl Default for AdapterConfig {
    fn default() -> Self {
        AdapterConfig {
            url: "http://127.0.0.1:9000".into(),
            timeout_ms: 10_000,
            retries: 2,
        }
    }
}

impl AdapterConfig {
    pub fn endpoint(&self) -> String {
        format!("{}/classify", self.url.trim_end_matches('/'))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("unreachable: {0}")]
    Unreachable(String),
    #[error("status {0}: {1}")]
    Status(u16, String),
}

/// Moves one request body to the service and returns the response body.
pub trait InferenceTransport {
    fn post_classify(&self, body: &[u8]) -> Result<Vec<u8>, TransportError>;
}

impl<F> InferenceTransport for F
where
    F: Fn(&[u8]) -> Result<Vec<u8>, TransportError>,
{
    fn post_classify(&self, body: &[u8]) -> Result<Vec<u8>, TransportError> {
        self(body)
    }
}

#[derive(Serialize, Deserialize)]
pub struct WirePair {
    pub student_context: String,
    pub teacher_sentence: String,
}

#[derive(Serialize, Deserialize)]
pub struct ClassifyRequest {
    pub pairs: Vec<WirePair>,
}

#[derive(Serialize, Deserialize)]
pub struct WirePrediction {
    pub probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
pub struct ClassifyResponse {
    pub predictions: Vec<WirePrediction>,
}

pub fn encode_request(pairs: &[SentencePair]) -> Vec<u8> {
    let req = ClassifyRequest {
        pairs: pairs
            .iter()
            .map(|p| WirePair {
                student_context: p.student_context.clone(),
                teacher_sentence: p.teacher_sentence.clone(),
            })
            .collect(),
    };
    serde_json::to_vec(&req).expect("request serializes")
}

/// Validates a response body against the request size.
pub fn decode_response(body: &[u8], expected: usize) -> Result<Vec<Prediction>, ClassifierError> {
    let bad = |msg: String| ClassifierError::BadResponse(msg);
    let resp: ClassifyResponse =
        serde_json::from_slice(body).map_err(|e| bad(format!("invalid json: {e}")))?;
    if resp.predictions.len() != expected {
        return Err(bad(format!(
            "{} predictions for {expected} pairs",
            resp.predictions.len()
        )));
    }
    resp.predictions
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let probs: [f64; NUM_LABELS] = p
                .probs
                .as_slice()
                .try_into()
                .map_err(|_| bad(format!("prediction {i} has {} probabilities, expected {NUM_LABELS}", p.probs.len())))?;
            if probs.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(bad(format!("prediction {i} has a negative or non-finite probability")));
            }
            let sum: f64 = probs.iter().sum();
            if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
                return Err(bad(format!("prediction {i} probabilities sum to {sum}")));
            }
            // Renormalize so the tighter in-process invariant holds.
            Ok(Prediction::from_probs(probs.map(|v| v / sum)))
        })
        .collect()
}

/// Classifies `pairs` through an external service, preserving order.
pub fn external_classify(
    transport: &dyn InferenceTransport,
    pairs: &[SentencePair],
) -> Result<Vec<Prediction>, ClassifierError> {
    if pairs.is_empty() {
        return Ok(Vec::new());
    }
    let body = transport.post_classify(&encode_request(pairs)).map_err(|e| match e {
        TransportError::Unreachable(msg) => ClassifierError::AdapterUnreachable(msg),
        TransportError::Status(code, msg) => ClassifierError::BadResponse(format!("status {code}: {msg}")),
    })?;
    decode_response(&body, pairs.len())
}
