use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{tokenize, Classifier};
use crate::domain::{label_space_from_corpus, Classification, Document, LabelSpace};
use crate::error::{Error, Result};

/// Search bounds for [`BaselineModel::fit_temperature`].
pub const TEMPERATURE_RANGE: (f64, f64) = (0.05, 100.0);

/// Multinomial naive Bayes over TF-IDF weighted token counts.
///
/// Confidence is the maximum class posterior. An optional temperature divides
/// the log-posteriors before normalization; `1.0` leaves them untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr", into = "ModelRepr")]
pub struct BaselineModel {
    label_space: LabelSpace,
    vocabulary: Vec<String>,
    index: HashMap<String, usize>,
    idf: Vec<f64>,
    log_priors: Vec<f64>,
    /// `[class][token]`
    log_likelihoods: Vec<Vec<f64>>,
    smoothing: f64,
    temperature: f64,
}

impl BaselineModel {
    /// Trains over the labels seen in `docs`, in first-appearance order.
    pub fn train(docs: &[Document], smoothing: f64) -> Result<Self> {
        let space = label_space_from_corpus(docs)?;
        Self::train_with_space(docs, space, smoothing)
    }

    /// Every label in `label_space` needs at least one training document.
    pub fn train_with_space(docs: &[Document], label_space: LabelSpace, smoothing: f64) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if !(smoothing > 0.0 && smoothing.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "smoothing must be positive, got {smoothing}"
            )));
        }
        let n_classes = label_space.len();

        let mut vocabulary = Vec::new();
        let mut index = HashMap::new();
        let mut doc_freq: Vec<usize> = Vec::new();
        let mut tokenized = Vec::with_capacity(docs.len());
        for doc in docs {
            let mut counts: Vec<(usize, usize)> = Vec::new();
            for token in tokenize(&doc.text) {
                let next = vocabulary.len();
                let idx = *index.entry(token.clone()).or_insert_with(|| {
                    vocabulary.push(token);
                    doc_freq.push(0);
                    next
                });
                match counts.iter_mut().find(|(i, _)| *i == idx) {
                    Some((_, c)) => *c += 1,
                    None => counts.push((idx, 1)),
                }
            }
            for &(idx, _) in &counts {
                doc_freq[idx] += 1;
            }
            let class = doc.gold_label(&label_space)?.id;
            tokenized.push((class, counts));
        }

        let n_docs = docs.len() as f64;
        let idf: Vec<f64> = doc_freq
            .iter()
            .map(|&df| ((1.0 + n_docs) / (1.0 + df as f64)).ln() + 1.0)
            .collect();

        let vocab_size = vocabulary.len();
        let mut class_docs = vec![0usize; n_classes];
        let mut mass = vec![vec![0.0; vocab_size]; n_classes];
        for (class, counts) in &tokenized {
            class_docs[*class] += 1;
            for &(idx, tf) in counts {
                mass[*class][idx] += tf as f64 * idf[idx];
            }
        }

        if let Some(empty) = class_docs.iter().position(|&n| n == 0) {
            return Err(Error::InvalidParameter(format!(
                "label `{}` has no training documents",
                label_space.labels()[empty].name
            )));
        }
        let log_priors = class_docs
            .iter()
            .map(|&n| (n as f64 / n_docs).ln())
            .collect();
        let log_likelihoods = mass
            .iter()
            .map(|row| {
                let total: f64 = row.iter().sum::<f64>() + smoothing * vocab_size as f64;
                row.iter().map(|m| ((m + smoothing) / total).ln()).collect()
            })
            .collect();

        Ok(Self {
            label_space,
            vocabulary,
            index,
            idf,
            log_priors,
            log_likelihoods,
            smoothing,
            temperature: 1.0,
        })
    }

    pub fn with_temperature(mut self, temperature: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        self.temperature = temperature;
        Ok(self)
    }

    /// Temperature minimizing negative log-likelihood of the gold labels of
    /// `docs`, searched over [`TEMPERATURE_RANGE`] on a log scale. Argmax
    /// predictions do not change.
    pub fn fit_temperature(&self, docs: &[Document]) -> Result<f64> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let scored = docs
            .iter()
            .map(|d| Ok((self.log_scores(&d.text), d.gold_label(&self.label_space)?.id)))
            .collect::<Result<Vec<_>>>()?;
        let nll = |ln_t: f64| {
            let t = ln_t.exp();
            scored
                .iter()
                .map(|(scores, gold)| {
                    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let lse = scores.iter().map(|s| ((s - max) / t).exp()).sum::<f64>().ln();
                    lse - (scores[*gold] - max) / t
                })
                .sum::<f64>()
        };
        let (lo, hi) = (TEMPERATURE_RANGE.0.ln(), TEMPERATURE_RANGE.1.ln());
        // coarse grid, then golden-section inside the best cell
        const GRID: usize = 64;
        let step = (hi - lo) / GRID as f64;
        let best = (0..=GRID)
            .map(|i| lo + step * i as f64)
            .map(|x| (x, nll(x)))
            .fold((lo, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
            .0;
        let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..60 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if nll(c) <= nll(d) {
                b = d;
            } else {
                a = c;
            }
        }
        Ok(((a + b) / 2.0).exp())
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    /// Unnormalized log joint scores per class, before temperature scaling.
    /// Unknown tokens contribute nothing.
    pub fn log_scores(&self, text: &str) -> Vec<f64> {
        let mut features: Vec<(usize, f64)> = Vec::new();
        for token in tokenize(text) {
            if let Some(&idx) = self.index.get(&token) {
                match features.iter_mut().find(|(i, _)| *i == idx) {
                    Some((_, tf)) => *tf += 1.0,
                    None => features.push((idx, 1.0)),
                }
            }
        }
        self.log_priors
            .iter()
            .zip(&self.log_likelihoods)
            .map(|(prior, loglik)| {
                prior
                    + features
                        .iter()
                        .map(|&(idx, tf)| tf * self.idf[idx] * loglik[idx])
                        .sum::<f64>()
            })
            .collect()
    }

    /// Class posteriors indexed by label id; they sum to one.
    pub fn posteriors(&self, text: &str) -> Vec<f64> {
        let scaled: Vec<f64> = self
            .log_scores(text)
            .into_iter()
            .map(|s| s / self.temperature)
            .collect();
        let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = scaled.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = exp.iter().sum();
        exp.into_iter().map(|e| e / z).collect()
    }

    pub fn predict(&self, text: &str) -> Classification {
        let posteriors = self.posteriors(text);
        let mut best = 0;
        for (id, &p) in posteriors.iter().enumerate().skip(1) {
            if p > posteriors[best] {
                best = id;
            }
        }
        Classification {
            label: self.label_space.labels()[best].clone(),
            confidence: posteriors[best].clamp(0.0, 1.0),
        }
    }
}

impl Classifier for BaselineModel {
    fn label_space(&self) -> &LabelSpace {
        &self.label_space
    }

    fn classify(&self, text: &str) -> Result<Classification> {
        Ok(self.predict(text))
    }
}

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    labels: LabelSpace,
    smoothing: f64,
    temperature: f64,
    vocabulary: Vec<String>,
    idf: Vec<f64>,
    log_priors: Vec<f64>,
    log_likelihoods: Vec<Vec<f64>>,
}

impl From<BaselineModel> for ModelRepr {
    fn from(m: BaselineModel) -> Self {
        Self {
            labels: m.label_space,
            smoothing: m.smoothing,
            temperature: m.temperature,
            vocabulary: m.vocabulary,
            idf: m.idf,
            log_priors: m.log_priors,
            log_likelihoods: m.log_likelihoods,
        }
    }
}

impl TryFrom<ModelRepr> for BaselineModel {
    type Error = Error;

    fn try_from(r: ModelRepr) -> Result<Self> {
        let v = r.vocabulary.len();
        let k = r.labels.len();
        if r.idf.len() != v
            || r.log_priors.len() != k
            || r.log_likelihoods.len() != k
            || r.log_likelihoods.iter().any(|row| row.len() != v)
        {
            return Err(Error::InvalidParameter(
                "model tables do not match vocabulary and label sizes".into(),
            ));
        }
        let mut index = HashMap::with_capacity(v);
        for (i, token) in r.vocabulary.iter().enumerate() {
            if index.insert(token.clone(), i).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate vocabulary entry `{token}`"
                )));
            }
        }
        Ok(Self {
            label_space: r.labels,
            vocabulary: r.vocabulary,
            index,
            idf: r.idf,
            log_priors: r.log_priors,
            log_likelihoods: r.log_likelihoods,
            smoothing: r.smoothing,
            temperature: r.temperature,
        })
    }
}
