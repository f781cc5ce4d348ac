//! Service configuration. Sources, lowest precedence first: built-in
//! defaults, a config file (`key = value` lines or a flat JSON object),
//! `TALKMOVES_<KEY>` environment variables, command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use talkmoves::analytics::{parse_stopwords, AnalyticsConfig};
use talkmoves::classifier::AdapterConfig;

use crate::engine::ClassifierChoice;

pub const ENV_PREFIX: &str = "TALKMOVES_";

/// Every recognized key.
pub const KEYS: [&str; 11] = [
    "listen",
    "store",
    "classifier",
    "model",
    "adapter_url",
    "adapter_timeout_ms",
    "adapter_retries",
    "workers",
    "analytics_config",
    "stage_delay_ms",
    "poll_ms",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub listen: String,
    pub store: PathBuf,
    pub classifier: ClassifierChoice,
    pub model: Option<PathBuf>,
    pub adapter: AdapterConfig,
    /// Worker threads, at least 1.
    pub workers: usize,
    pub analytics_config: Option<PathBuf>,
    /// Pause inserted before each processing stage. Used by tests to widen
    /// the window for interrupting a job.
    pub stage_delay_ms: u64,
    /// Idle worker poll interval.
    pub poll_ms: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: "127.0.0.1:8080".into(),
            store: PathBuf::from("talkmoves-store"),
            classifier: ClassifierChoice::Rule,
            model: None,
            adapter: AdapterConfig::default(),
            workers: 1,
            analytics_config: None,
            stage_delay_ms: 0,
            poll_ms: 100,
        }
    }
}

/// Parses `key = value` lines (blank lines and `#` comments skipped) or a
/// flat JSON object.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    if text.trim_start().starts_with('{') {
        let v: serde_json::Map<String, serde_json::Value> =
            serde_json::from_str(text).context("config is not a JSON object")?;
        for (k, v) in v {
            let value = match v {
                serde_json::Value::String(s) => s,
                serde_json::Value::Null => continue,
                serde_json::Value::Array(_) | serde_json::Value::Object(_) => {
                    bail!("config key {k:?} must be a scalar")
                }
                other => other.to_string(),
            };
            out.insert(normalize_key(&k), value);
        }
        return Ok(out);
    }
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected key = value", n + 1))?;
        let v = v.trim().trim_matches('"');
        out.insert(normalize_key(k), v.to_string());
    }
    Ok(out)
}

fn normalize_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('-', "_")
}

/// Values from `TALKMOVES_*` variables for the known keys.
pub fn env_overrides<I: IntoIterator<Item = (String, String)>>(vars: I) -> BTreeMap<String, String> {
    vars.into_iter()
        .filter_map(|(k, v)| {
            let key = k.strip_prefix(ENV_PREFIX)?.to_ascii_lowercase();
            KEYS.contains(&key.as_str()).then_some((key, v))
        })
        .collect()
}

impl ServiceConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |v: &str| -> Result<u64> { v.trim().parse().with_context(|| format!("{key}: {v:?} is not a number")) };
        match key {
            "listen" => self.listen = value.to_string(),
            "store" => self.store = PathBuf::from(value),
            "classifier" => self.classifier = value.parse().map_err(|e: String| anyhow!(e))?,
            "model" => self.model = (!value.is_empty()).then(|| PathBuf::from(value)),
            "adapter_url" => self.adapter.url = value.to_string(),
            "adapter_timeout_ms" => self.adapter.timeout_ms = num(value)?,
            "adapter_retries" => self.adapter.retries = num(value)? as u32,
            "workers" => {
                let n = num(value)? as usize;
                if n == 0 {
                    bail!("workers must be at least 1");
                }
                self.workers = n;
            }
            "analytics_config" => self.analytics_config = (!value.is_empty()).then(|| PathBuf::from(value)),
            "stage_delay_ms" => self.stage_delay_ms = num(value)?,
            "poll_ms" => self.poll_ms = num(value)?.max(1),
            other => bail!("unknown config key {other:?}"),
        }
        Ok(())
    }

    /// Layers file values, environment values and flag values over the defaults.
    pub fn resolve(
        file: Option<&Path>,
        env: BTreeMap<String, String>,
        flags: BTreeMap<String, String>,
    ) -> Result<Self> {
        let mut cfg = ServiceConfig::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            for (k, v) in parse_config_text(&text)? {
                cfg.set(&k, &v)?;
            }
        }
        for layer in [env, flags] {
            for (k, v) in layer {
                cfg.set(&k, &v)?;
            }
        }
        Ok(cfg)
    }

    pub fn analytics(&self) -> Result<AnalyticsConfig> {
        load_analytics_config(self.analytics_config.as_deref())
    }
}

/// Analytics settings file: `top_n` and `stopwords` (path to a word list,
/// relative to the settings file).
pub fn load_analytics_config(path: Option<&Path>) -> Result<AnalyticsConfig> {
    let mut cfg = AnalyticsConfig::default();
    let Some(path) = path else { return Ok(cfg) };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    for (k, v) in parse_config_text(&text)? {
        match k.as_str() {
            "top_n" => {
                cfg.top_n = v.parse().with_context(|| format!("top_n: {v:?}"))?;
                if cfg.top_n == 0 {
                    bail!("top_n must be at least 1");
                }
            }
            "stopwords" => {
                let list = path.parent().unwrap_or(Path::new(".")).join(&v);
                let words = std::fs::read_to_string(&list).with_context(|| format!("reading {}", list.display()))?;
                cfg.stopwords = parse_stopwords(&words);
            }
            other => bail!("unknown analytics key {other:?}"),
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn both_file_syntaxes() {
        let kv = parse_config_text("# c\nworkers = 3\nlisten=\"0.0.0.0:1\"\n").unwrap();
        let js = parse_config_text(r#"{"workers": 3, "listen": "0.0.0.0:1", "model": null}"#).unwrap();
        assert_eq!(kv, js);
        assert!(parse_config_text("workers 3").is_err());
    }

    #[test]
    fn precedence() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("c.conf");
        std::fs::write(&file, "workers = 2\nstore = from-file\nlisten = file:1\n").unwrap();
        let env = env_overrides(vec![
            ("TALKMOVES_STORE".to_string(), "from-env".to_string()),
            ("TALKMOVES_LISTEN".to_string(), "env:1".to_string()),
            ("UNRELATED".to_string(), "x".to_string()),
        ]);
        let flags = map(&[("listen", "flag:1")]);
        let cfg = ServiceConfig::resolve(Some(&file), env, flags).unwrap();
        assert_eq!(cfg.workers, 2);
        assert_eq!(cfg.store, PathBuf::from("from-env"));
        assert_eq!(cfg.listen, "flag:1");
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = ServiceConfig::default();
        assert!(cfg.set("workers", "0").is_err());
        assert!(cfg.set("classifier", "bert").is_err());
        assert!(cfg.set("colour", "red").is_err());
    }

    #[test]
    fn analytics_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("words.txt"), "slope\n").unwrap();
        let path = dir.path().join("analytics.conf");
        std::fs::write(&path, "top_n = 5\nstopwords = words.txt\n").unwrap();
        let cfg = load_analytics_config(Some(&path)).unwrap();
        assert_eq!(cfg.top_n, 5);
        assert_eq!(cfg.stopwords.len(), 1);
    }
}
