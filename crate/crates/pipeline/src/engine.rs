//! Classifier selection and the HTTP transport for the external adapter.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use talkmoves::classifier::{
    external_classify, load_model, AdapterConfig, ClassifierError, InferenceTransport, ModelParams, Prediction,
    RuleSet, TransportError,
};
use talkmoves::ingest::SentencePair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierChoice {
    #[default]
    Rule,
    Trained,
    Adapter,
}

impl FromStr for ClassifierChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rule" | "rules" => Ok(ClassifierChoice::Rule),
            "trained" | "model" => Ok(ClassifierChoice::Trained),
            "adapter" | "external" => Ok(ClassifierChoice::Adapter),
            other => Err(format!("unknown classifier {other:?} (expected rule, trained or adapter)")),
        }
    }
}

impl fmt::Display for ClassifierChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierChoice::Rule => "rule",
            ClassifierChoice::Trained => "trained",
            ClassifierChoice::Adapter => "adapter",
        })
    }
}

/// Posts request bodies with `ureq`, retrying connection failures and 5xx
/// answers up to `retries` extra times.
pub struct HttpTransport {
    agent: ureq::Agent,
    config: AdapterConfig,
}

impl HttpTransport {
    pub fn new(config: AdapterConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(config.timeout_ms.max(1))))
            .http_status_as_error(false)
            .build()
            .new_agent();
        HttpTransport { agent, config }
    }

    fn attempt(&self, body: &[u8]) -> Result<Vec<u8>, TransportError> {
        let mut resp = self
            .agent
            .post(&self.config.endpoint())
            .header("content-type", "application/json")
            .send(body)
            .map_err(|e| TransportError::Unreachable(e.to_string()))?;
        let status = resp.status().as_u16();
        let bytes = resp
            .body_mut()
            .read_to_vec()
            .map_err(|e| TransportError::Unreachable(e.to_string()))?;
        if (200..300).contains(&status) {
            Ok(bytes)
        } else {
            Err(TransportError::Status(status, String::from_utf8_lossy(&bytes).into_owned()))
        }
    }
}

impl InferenceTransport for HttpTransport {
    fn post_classify(&self, body: &[u8]) -> Result<Vec<u8>, TransportError> {
        let mut last = None;
        for attempt in 0..=self.config.retries {
            if attempt > 0 {
                thread::sleep(Duration::from_millis(50 << attempt.min(6)));
            }
            match self.attempt(body) {
                Ok(bytes) => return Ok(bytes),
                Err(TransportError::Status(code, msg)) if code < 500 => {
                    return Err(TransportError::Status(code, msg));
                }
                Err(e) => last = Some(e),
            }
        }
        Err(last.unwrap_or_else(|| TransportError::Unreachable("no attempt made".into())))
    }
}

/// A loaded classifier, shared read-only by the workers.
pub enum Engine {
    Rule(RuleSet),
    Trained(ModelParams),
    Adapter(HttpTransport),
}

impl Engine {
    pub fn load(
        choice: ClassifierChoice,
        model_path: Option<&Path>,
        adapter: &AdapterConfig,
    ) -> anyhow::Result<Engine> {
        Ok(match choice {
            ClassifierChoice::Rule => Engine::Rule(RuleSet::default()),
            ClassifierChoice::Trained => {
                let path = model_path.ok_or_else(|| anyhow::anyhow!("the trained classifier needs a model path"))?;
                let bytes = std::fs::read(path)
                    .map_err(|e| anyhow::anyhow!("reading model {}: {e}", path.display()))?;
                Engine::Trained(load_model(&bytes)?)
            }
            ClassifierChoice::Adapter => Engine::Adapter(HttpTransport::new(adapter.clone())),
        })
    }

    pub fn classify(&self, pairs: &[SentencePair]) -> Result<Vec<Prediction>, ClassifierError> {
        match self {
            Engine::Rule(rules) => Ok(pairs.iter().map(|p| rules.classify(p)).collect()),
            Engine::Trained(model) => Ok(pairs.iter().map(|p| model.predict(p)).collect()),
            Engine::Adapter(transport) => external_classify(transport, pairs),
        }
    }
}
