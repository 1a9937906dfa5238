use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{argmax_lowest, Agent, AgentContext};
use crate::classifier::tokenize;
use crate::domain::{
    AgentId, AgentVerdict, Classification, Document, Label, LabelSpace,
};
use crate::error::{Error, Result};

pub const DEFAULT_PRECISION_THRESHOLD: f64 = 0.7;

#[derive(Debug, Clone, PartialEq)]
pub struct KeywordEntry {
    pub label: Label,
    pub weight: f64,
}

/// Keyword token → label with a weight in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KeywordMap {
    entries: BTreeMap<String, KeywordEntry>,
    precision_threshold: f64,
}

impl KeywordMap {
    pub fn new(precision_threshold: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&precision_threshold) {
            return Err(Error::InvalidParameter(format!(
                "precision threshold {precision_threshold} outside [0, 1]"
            )));
        }
        Ok(Self {
            entries: BTreeMap::new(),
            precision_threshold,
        })
    }

    /// Adds or replaces a keyword. The keyword must already be a single
    /// normalized token.
    pub fn insert(&mut self, keyword: &str, label: Label, weight: f64) -> Result<()> {
        if !(weight > 0.0 && weight <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "keyword `{keyword}` weight {weight} outside (0, 1]"
            )));
        }
        if tokenize(keyword) != [keyword] {
            return Err(Error::InvalidParameter(format!(
                "keyword `{keyword}` is not a normalized token"
            )));
        }
        self.entries
            .insert(keyword.to_string(), KeywordEntry { label, weight });
        Ok(())
    }

    pub fn get(&self, keyword: &str) -> Option<&KeywordEntry> {
        self.entries.get(keyword)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn precision_threshold(&self) -> f64 {
        self.precision_threshold
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &KeywordEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn from_json(json: &str, space: &LabelSpace) -> Result<Self> {
        let file: KeywordMapFile = serde_json::from_str(json)?;
        let mut map = Self::new(file.precision_threshold)?;
        for (token, entry) in file.entries {
            let label = space.resolve(&entry.label)?.clone();
            map.insert(&token, label, entry.weight)?;
        }
        Ok(map)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = KeywordMapFile {
            precision_threshold: self.precision_threshold,
            entries: self
                .entries
                .iter()
                .map(|(k, v)| {
                    (
                        k.clone(),
                        KeywordFileEntry {
                            label: v.label.name.clone(),
                            weight: v.weight,
                        },
                    )
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

#[derive(Serialize, Deserialize)]
struct KeywordMapFile {
    precision_threshold: f64,
    entries: BTreeMap<String, KeywordFileEntry>,
}

#[derive(Serialize, Deserialize)]
struct KeywordFileEntry {
    label: String,
    weight: f64,
}

/// Keyword-mass vote. Abstains with no hits or when the winning share is
/// below the map's precision threshold.
pub fn lexical_evaluate(doc: &Document, map: &KeywordMap, space: &LabelSpace) -> AgentVerdict {
    let mut mass = vec![0.0; space.len()];
    let mut hits: Vec<(String, &KeywordEntry)> = Vec::new();
    for token in tokenize(&doc.text) {
        if let Some(entry) = map.get(&token) {
            mass[entry.label.id] += entry.weight;
            hits.push((token, entry));
        }
    }
    if hits.is_empty() {
        return AgentVerdict::abstain(AgentId::Lexical, "no keyword matched");
    }
    let total: f64 = mass.iter().sum();
    let top = argmax_lowest(&mass).expect("label space is non-empty");
    let confidence = (mass[top] / total).clamp(0.0, 1.0);
    let listed = hits
        .iter()
        .map(|(t, e)| format!("{t}->{} ({:.2})", e.label.name, e.weight))
        .collect::<Vec<_>>()
        .join(", ");
    if confidence < map.precision_threshold {
        return AgentVerdict::abstain(
            AgentId::Lexical,
            format!(
                "keyword share {confidence:.2} below precision threshold {:.2}: {listed}",
                map.precision_threshold
            ),
        );
    }
    let label = space.labels()[top].clone();
    AgentVerdict::suggest(
        AgentId::Lexical,
        Classification { label, confidence },
        format!("matched keywords {listed}"),
    )
}

/// Builds a keyword map from a labeled corpus: a token seen in at least
/// `min_count` documents is kept for its majority label when
/// P(label | token present) reaches `min_precision`, weighted by that precision.
pub fn induce_lexical_map(
    docs: &[Document],
    space: &LabelSpace,
    min_precision: f64,
    min_count: usize,
) -> Result<KeywordMap> {
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut presence: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for doc in docs {
        let label = doc.gold_label(space)?.id;
        let mut tokens = tokenize(&doc.text);
        tokens.sort_unstable();
        tokens.dedup();
        for token in tokens {
            presence.entry(token).or_insert_with(|| vec![0; space.len()])[label] += 1;
        }
    }
    let mut map = KeywordMap::new(DEFAULT_PRECISION_THRESHOLD)?;
    for (token, counts) in presence {
        let df: usize = counts.iter().sum();
        if df < min_count.max(1) {
            continue;
        }
        let as_f64: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let best = argmax_lowest(&as_f64).expect("label space is non-empty");
        let precision = counts[best] as f64 / df as f64;
        if precision >= min_precision {
            map.insert(&token, space.labels()[best].clone(), precision)?;
        }
    }
    Ok(map)
}

#[derive(Debug, Clone)]
pub struct LexicalAgent {
    map: KeywordMap,
}

impl LexicalAgent {
    pub fn new(map: KeywordMap) -> Self {
        Self { map }
    }

    pub fn map(&self) -> &KeywordMap {
        &self.map
    }
}

impl Agent for LexicalAgent {
    fn id(&self) -> AgentId {
        AgentId::Lexical
    }

    fn evaluate(
        &self,
        doc: &Document,
        _primary: &Classification,
        context: &AgentContext<'_>,
    ) -> AgentVerdict {
        lexical_evaluate(doc, &self.map, context.label_space)
    }
}
