use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{argmax_lowest, Agent, AgentContext};
use crate::domain::{AgentId, AgentVerdict, Classification, Document, Label, LabelSpace};

pub const DEFAULT_HISTORY_LEN: usize = 5;

/// Per-user ring buffer of the most recent final labels.
#[derive(Debug, Clone, PartialEq)]
pub struct UserHistory {
    capacity: usize,
    users: HashMap<String, Vec<Label>>,
}

impl Default for UserHistory {
    fn default() -> Self {
        Self::new(DEFAULT_HISTORY_LEN)
    }
}

impl UserHistory {
    /// # Panics
    /// If `capacity` is zero.
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "history capacity must be positive");
        Self {
            capacity,
            users: HashMap::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Appends `label`, evicting the oldest entry once the buffer is full.
    pub fn record(&mut self, user: &str, label: Label) {
        let buf = self.users.entry(user.to_string()).or_default();
        if buf.len() == self.capacity {
            buf.remove(0);
        }
        buf.push(label);
    }

    /// The user's labels, oldest first.
    pub fn recent(&self, user: &str) -> &[Label] {
        self.users.get(user).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Seeds histories from labeled documents in `seq` order.
    pub fn warm_from(&mut self, docs: &[Document], space: &LabelSpace) {
        HistoryReplay::new(docs, space).finish(self);
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }
}

/// Feeds labeled background documents into a [`UserHistory`] in `seq`
/// order, interleaved with the documents being classified.
#[derive(Debug, Clone)]
pub struct HistoryReplay<'a> {
    pending: Vec<(&'a Document, Label)>,
    next: usize,
}

impl<'a> HistoryReplay<'a> {
    /// Documents without a user or a resolvable gold label are skipped.
    pub fn new(background: &'a [Document], space: &LabelSpace) -> Self {
        let mut pending: Vec<(&Document, Label)> = background
            .iter()
            .filter(|d| d.user_id.is_some())
            .filter_map(|d| {
                let label = d.gold.as_deref().and_then(|g| space.by_name(g))?;
                Some((d, label.clone()))
            })
            .collect();
        pending.sort_by_key(|(d, _)| d.seq);
        Self { pending, next: 0 }
    }

    /// Records every background document with `seq` strictly below `seq`.
    pub fn advance(&mut self, seq: u64, history: &mut UserHistory) {
        while let Some((doc, label)) = self.pending.get(self.next) {
            if doc.seq >= seq {
                break;
            }
            if let Some(user) = doc.user_id.as_deref() {
                history.record(user, label.clone());
            }
            self.next += 1;
        }
    }

    /// Records everything not yet replayed.
    pub fn finish(&mut self, history: &mut UserHistory) {
        for (doc, label) in &self.pending[self.next..] {
            if let Some(user) = doc.user_id.as_deref() {
                history.record(user, label.clone());
            }
        }
        self.next = self.pending.len();
    }
}

/// Weights given to history positions, oldest first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum RecencyWeighting {
    /// 1, 2, ..., n with the newest heaviest.
    #[default]
    Linear,
    Uniform,
    /// Newest gets 1, each older entry is multiplied by `ratio`.
    Exponential { ratio: f64 },
}

impl RecencyWeighting {
    fn weights(self, n: usize) -> Vec<f64> {
        match self {
            RecencyWeighting::Linear => (1..=n).map(|i| i as f64).collect(),
            RecencyWeighting::Uniform => vec![1.0; n],
            RecencyWeighting::Exponential { ratio } => {
                (0..n).map(|i| ratio.powi((n - 1 - i) as i32)).collect()
            }
        }
    }
}

fn vote(
    doc: &Document,
    history: &[Label],
    space: &LabelSpace,
    weighting: RecencyWeighting,
) -> AgentVerdict {
    if doc.user_id.is_none() {
        return AgentVerdict::abstain(AgentId::Contextual, "document has no user");
    }
    if history.is_empty() {
        return AgentVerdict::abstain(AgentId::Contextual, "user has no history");
    }
    let mut mass = vec![0.0; space.len()];
    for (label, w) in history.iter().zip(weighting.weights(history.len())) {
        mass[label.id] += w;
    }
    let total: f64 = mass.iter().sum();
    if total <= 0.0 {
        return AgentVerdict::abstain(AgentId::Contextual, "history carries no weight");
    }
    let top = argmax_lowest(&mass).expect("label space is non-empty");
    let label = space.labels()[top].clone();
    let confidence = (mass[top] / total).clamp(0.0, 1.0);
    let trail = history
        .iter()
        .map(|l| l.name.as_str())
        .collect::<Vec<_>>()
        .join(" > ");
    AgentVerdict::suggest(
        AgentId::Contextual,
        Classification { label, confidence },
        format!("recent labels for this user (oldest first): {trail}"),
    )
}

/// Linear recency vote over the document user's history.
pub fn contextual_evaluate(doc: &Document, history: &UserHistory, space: &LabelSpace) -> AgentVerdict {
    let recent = doc
        .user_id
        .as_deref()
        .map(|u| history.recent(u))
        .unwrap_or(&[]);
    vote(doc, recent, space, RecencyWeighting::Linear)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextualAgent {
    pub weighting: RecencyWeighting,
    pub history_len: usize,
}

impl Default for ContextualAgent {
    fn default() -> Self {
        Self::new(RecencyWeighting::Linear)
    }
}

impl ContextualAgent {
    pub fn new(weighting: RecencyWeighting) -> Self {
        Self {
            weighting,
            history_len: DEFAULT_HISTORY_LEN,
        }
    }

    pub fn with_history_len(mut self, history_len: usize) -> Self {
        self.history_len = history_len.max(1);
        self
    }

    /// An empty history sized for this agent.
    pub fn new_history(&self) -> UserHistory {
        UserHistory::new(self.history_len)
    }
}

impl Agent for ContextualAgent {
    fn id(&self) -> AgentId {
        AgentId::Contextual
    }

    fn evaluate(
        &self,
        doc: &Document,
        _primary: &Classification,
        context: &AgentContext<'_>,
    ) -> AgentVerdict {
        vote(doc, context.history, context.label_space, self.weighting)
    }
}
