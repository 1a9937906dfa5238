//! Client for a classifier served over HTTP.
//!
//! `POST {endpoint}/classify` with `{"texts": [...]}` answers
//! `{"labels": [...], "confidences": [...]}`; `GET {endpoint}/health` answers
//! `{"status": "ok", "labels": [...]}`.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::Classifier;
use crate::domain::{Classification, LabelSpace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteClassifierConfig {
    pub endpoint_url: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
}

fn default_timeout_ms() -> u64 {
    10_000
}

fn default_batch_size() -> usize {
    32
}

impl RemoteClassifierConfig {
    pub fn new(endpoint_url: impl Into<String>) -> Self {
        Self {
            endpoint_url: endpoint_url.into(),
            timeout_ms: default_timeout_ms(),
            batch_size: default_batch_size(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.timeout_ms == 0 {
            return Err(Error::InvalidParameter("timeout_ms must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch_size must be at least 1".into()));
        }
        Ok(())
    }

    fn url(&self, path: &str) -> String {
        format!("{}/{}", self.endpoint_url.trim_end_matches('/'), path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyRequest {
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyResponse {
    pub labels: Vec<String>,
    pub confidences: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub labels: Vec<String>,
}

/// A [`Classifier`] backed by a remote service. Batches larger than
/// `batch_size` are split and sent concurrently; results keep input order.
pub struct RemoteClassifier {
    config: RemoteClassifierConfig,
    label_space: LabelSpace,
    agent: ureq::Agent,
}

impl RemoteClassifier {
    pub fn new(config: RemoteClassifierConfig, label_space: LabelSpace) -> Result<Self> {
        config.validate()?;
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(config.timeout_ms)))
            .build()
            .into();
        Ok(Self {
            config,
            label_space,
            agent,
        })
    }

    /// Builds the client from the label list the service reports on `/health`.
    pub fn connect(config: RemoteClassifierConfig) -> Result<Self> {
        let mut client = Self::new(config, LabelSpace::new(["_", "__"])?)?;
        let health = client.health()?;
        if health.status != "ok" {
            return Err(Error::Protocol(format!(
                "service reports status `{}`",
                health.status
            )));
        }
        client.label_space = LabelSpace::new(health.labels)
            .map_err(|e| Error::Protocol(format!("bad label list: {e}")))?;
        Ok(client)
    }

    pub fn config(&self) -> &RemoteClassifierConfig {
        &self.config
    }

    pub fn health(&self) -> Result<HealthResponse> {
        let mut resp = self
            .agent
            .get(&self.config.url("health"))
            .call()
            .map_err(map_ureq)?;
        resp.body_mut().read_json().map_err(map_ureq)
    }

    fn post_chunk(&self, texts: &[&str]) -> Result<Vec<Classification>> {
        let request = ClassifyRequest {
            texts: texts.iter().map(|t| t.to_string()).collect(),
        };
        let mut resp = self
            .agent
            .post(&self.config.url("classify"))
            .send_json(&request)
            .map_err(map_ureq)?;
        let body: ClassifyResponse = resp.body_mut().read_json().map_err(map_ureq)?;
        self.decode(texts.len(), body)
    }

    fn decode(&self, expected: usize, body: ClassifyResponse) -> Result<Vec<Classification>> {
        if body.labels.len() != expected || body.confidences.len() != expected {
            return Err(Error::Protocol(format!(
                "expected {expected} results, got {} labels and {} confidences",
                body.labels.len(),
                body.confidences.len()
            )));
        }
        body.labels
            .into_iter()
            .zip(body.confidences)
            .map(|(name, confidence)| {
                if !(0.0..=1.0).contains(&confidence) {
                    return Err(Error::Protocol(format!(
                        "confidence {confidence} outside [0, 1]"
                    )));
                }
                let label = self.label_space.resolve(&name)?.clone();
                Ok(Classification { label, confidence })
            })
            .collect()
    }
}

fn map_ureq(err: ureq::Error) -> Error {
    match err {
        ureq::Error::StatusCode(code) => Error::Protocol(format!("HTTP status {code}")),
        ureq::Error::Json(e) => Error::Protocol(format!("invalid response body: {e}")),
        other => Error::Transport(other.to_string()),
    }
}

impl Classifier for RemoteClassifier {
    fn label_space(&self) -> &LabelSpace {
        &self.label_space
    }

    fn classify(&self, text: &str) -> Result<Classification> {
        let mut out = self.post_chunk(&[text])?;
        Ok(out.remove(0))
    }

    fn classify_batch(&self, texts: &[&str]) -> Result<Vec<Classification>> {
        if texts.is_empty() {
            return Err(Error::EmptyInput);
        }
        let chunks: Vec<&[&str]> = texts.chunks(self.config.batch_size).collect();
        if chunks.len() == 1 {
            return self.post_chunk(chunks[0]);
        }
        let results: Vec<Result<Vec<Classification>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|chunk| scope.spawn(move || self.post_chunk(chunk)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("remote batch worker panicked"))
                .collect()
        });
        let mut out = Vec::with_capacity(texts.len());
        for chunk in results {
            out.extend(chunk?);
        }
        Ok(out)
    }
}

/// One-shot batch classification against a remote service.
pub fn remote_classify_batch(
    config: &RemoteClassifierConfig,
    label_space: &LabelSpace,
    texts: &[&str],
) -> Result<Vec<Classification>> {
    RemoteClassifier::new(config.clone(), label_space.clone())?.classify_batch(texts)
}
