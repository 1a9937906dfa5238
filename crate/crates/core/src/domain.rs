//! Core data types shared by the classifier, the agents and the evaluation harness.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A class label. `id` is the label's insertion index within its [`LabelSpace`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label {
    pub id: usize,
    pub name: String,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Ordered, duplicate-free set of at least two labels.
///
/// Labels are compared as exact, case-sensitive strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LabelSpace {
    labels: Vec<Label>,
    index: HashMap<String, usize>,
}

impl LabelSpace {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut labels = Vec::new();
        let mut index = HashMap::new();
        for name in names {
            let name = name.into();
            if name.is_empty() {
                return Err(Error::EmptyLabelName);
            }
            if index.contains_key(&name) {
                return Err(Error::DuplicateLabel(name));
            }
            let id = labels.len();
            index.insert(name.clone(), id);
            labels.push(Label { id, name });
        }
        if labels.len() < 2 {
            return Err(Error::TooFewLabels(labels.len()));
        }
        Ok(Self { labels, index })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn by_id(&self, id: usize) -> Option<&Label> {
        self.labels.get(id)
    }

    pub fn by_name(&self, name: &str) -> Option<&Label> {
        self.index.get(name).map(|&id| &self.labels[id])
    }

    /// Like [`by_name`](Self::by_name) but fails with [`Error::UnknownLabel`].
    pub fn resolve(&self, name: &str) -> Result<&Label> {
        self.by_name(name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(|l| l.name.as_str())
    }
}

impl TryFrom<Vec<String>> for LabelSpace {
    type Error = Error;

    fn try_from(names: Vec<String>) -> Result<Self> {
        LabelSpace::new(names)
    }
}

impl From<LabelSpace> for Vec<String> {
    fn from(space: LabelSpace) -> Self {
        space.labels.into_iter().map(|l| l.name).collect()
    }
}

/// One input text. `gold` holds the label name and is only present in
/// evaluation corpora.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_id: Option<String>,
    pub seq: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, seq: u64) -> Result<Self> {
        let id = id.into();
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::EmptyText(id));
        }
        Ok(Self {
            id,
            text,
            user_id: None,
            seq,
            gold: None,
        })
    }

    pub fn with_user(mut self, user_id: impl Into<String>) -> Self {
        self.user_id = Some(user_id.into());
        self
    }

    pub fn with_gold(mut self, label: impl Into<String>) -> Self {
        self.gold = Some(label.into());
        self
    }

    /// Resolves the gold label against `space`.
    pub fn gold_label<'a>(&self, space: &'a LabelSpace) -> Result<&'a Label> {
        let name = self
            .gold
            .as_deref()
            .ok_or_else(|| Error::MissingGold(self.id.clone()))?;
        space.resolve(name)
    }
}

/// A label with a confidence in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: Label,
    pub confidence: f64,
}

impl Classification {
    pub fn new(label: Label, confidence: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::ConfidenceOutOfRange(confidence));
        }
        Ok(Self { label, confidence })
    }
}

/// The three verdict-producing agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentId {
    Lexical,
    Contextual,
    Logic,
}

impl AgentId {
    pub const ALL: [AgentId; 3] = [AgentId::Lexical, AgentId::Contextual, AgentId::Logic];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentId::Lexical => "lexical",
            AgentId::Contextual => "contextual",
            AgentId::Logic => "logic",
        }
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AgentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lexical" => Ok(AgentId::Lexical),
            "contextual" => Ok(AgentId::Contextual),
            "logic" => Ok(AgentId::Logic),
            other => Err(Error::UnknownAgent(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suggestion {
    Label(Classification),
    Abstain,
}

/// One agent's answer for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentVerdict {
    pub agent: AgentId,
    pub suggestion: Suggestion,
    pub rationale: String,
}

impl AgentVerdict {
    /// Panics if `rationale` is empty; every suggesting verdict must carry one.
    pub fn suggest(agent: AgentId, classification: Classification, rationale: String) -> Self {
        assert!(!rationale.is_empty(), "suggesting verdicts need a rationale");
        Self {
            agent,
            suggestion: Suggestion::Label(classification),
            rationale,
        }
    }

    pub fn abstain(agent: AgentId, rationale: impl Into<String>) -> Self {
        Self {
            agent,
            suggestion: Suggestion::Abstain,
            rationale: rationale.into(),
        }
    }

    pub fn classification(&self) -> Option<&Classification> {
        match &self.suggestion {
            Suggestion::Label(c) => Some(c),
            Suggestion::Abstain => None,
        }
    }

    pub fn is_abstain(&self) -> bool {
        matches!(self.suggestion, Suggestion::Abstain)
    }
}

/// Builds the label space of a labeled corpus, in order of first appearance.
pub fn label_space_from_corpus(docs: &[Document]) -> Result<LabelSpace> {
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut names: Vec<&str> = Vec::new();
    for doc in docs {
        let gold = doc
            .gold
            .as_deref()
            .ok_or_else(|| Error::MissingGold(doc.id.clone()))?;
        if !names.contains(&gold) {
            names.push(gold);
        }
    }
    LabelSpace::new(names)
}
