//! The primary classifier seat: a shared interface, a bundled naive-Bayes
//! baseline, and a client for a remote classifier service.

mod baseline;
mod remote;

use std::sync::Arc;

pub use baseline::{BaselineModel, TEMPERATURE_RANGE};
pub use remote::{
    remote_classify_batch, ClassifyRequest, ClassifyResponse, HealthResponse, RemoteClassifier,
    RemoteClassifierConfig,
};

use crate::domain::{Classification, LabelSpace};
use crate::error::Result;

/// Anything that maps a text to a label with a confidence.
///
/// Implementations must be deterministic for a fixed trained state and only
/// return labels from [`label_space`](Classifier::label_space).
pub trait Classifier: Send + Sync {
    fn label_space(&self) -> &LabelSpace;

    fn classify(&self, text: &str) -> Result<Classification>;

    fn classify_batch(&self, texts: &[&str]) -> Result<Vec<Classification>> {
        texts.iter().map(|t| self.classify(t)).collect()
    }
}

impl<C: Classifier + ?Sized> Classifier for Box<C> {
    fn label_space(&self) -> &LabelSpace {
        (**self).label_space()
    }

    fn classify(&self, text: &str) -> Result<Classification> {
        (**self).classify(text)
    }

    fn classify_batch(&self, texts: &[&str]) -> Result<Vec<Classification>> {
        (**self).classify_batch(texts)
    }
}

impl<C: Classifier + ?Sized> Classifier for Arc<C> {
    fn label_space(&self) -> &LabelSpace {
        (**self).label_space()
    }

    fn classify(&self, text: &str) -> Result<Classification> {
        (**self).classify(text)
    }

    fn classify_batch(&self, texts: &[&str]) -> Result<Vec<Classification>> {
        (**self).classify_batch(texts)
    }
}

impl<C: Classifier + ?Sized> Classifier for &C {
    fn label_space(&self) -> &LabelSpace {
        (**self).label_space()
    }

    fn classify(&self, text: &str) -> Result<Classification> {
        (**self).classify(text)
    }

    fn classify_batch(&self, texts: &[&str]) -> Result<Vec<Classification>> {
        (**self).classify_batch(texts)
    }
}

/// Lowercased runs of Unicode alphanumerics; everything else separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}
