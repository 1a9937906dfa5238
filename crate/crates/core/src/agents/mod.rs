//! Deterministic verdict agents and the explanation template.
//!
//! Each agent sees the document, the primary classification and a read-only
//! context; none of them sees the others' verdicts.

mod contextual;
mod explain;
mod lexical;
mod logic;

pub use contextual::{
    contextual_evaluate, ContextualAgent, HistoryReplay, RecencyWeighting, UserHistory,
    DEFAULT_HISTORY_LEN,
};
pub use explain::explain;
pub use lexical::{induce_lexical_map, lexical_evaluate, KeywordEntry, KeywordMap, LexicalAgent};
pub use logic::{logic_evaluate, LogicAgent, Rule, RuleSet, RuleSpec};

use crate::consensus::AgentWeights;
use crate::domain::{AgentId, AgentVerdict, Classification, Document, Label, LabelSpace};

/// Read-only view handed to agents for one document.
#[derive(Debug, Clone, Copy)]
pub struct AgentContext<'a> {
    /// The user's most recent final labels, oldest first.
    pub history: &'a [Label],
    pub label_space: &'a LabelSpace,
}

pub trait Agent: Send + Sync {
    fn id(&self) -> AgentId;

    fn evaluate(
        &self,
        doc: &Document,
        primary: &Classification,
        context: &AgentContext<'_>,
    ) -> AgentVerdict;
}

/// The verdict agents taking part in a round, plus their consensus weights.
#[derive(Debug, Clone)]
pub struct AgentSuite {
    pub lexical: Option<LexicalAgent>,
    pub contextual: Option<ContextualAgent>,
    pub logic: Option<LogicAgent>,
    pub weights: AgentWeights,
}

impl AgentSuite {
    pub fn new(
        lexical: Option<LexicalAgent>,
        contextual: Option<ContextualAgent>,
        logic: Option<LogicAgent>,
    ) -> Self {
        Self {
            lexical,
            contextual,
            logic,
            weights: AgentWeights::default(),
        }
    }

    pub fn empty() -> Self {
        Self::new(None, None, None)
    }

    pub fn with_weights(mut self, weights: AgentWeights) -> Self {
        self.weights = weights;
        self
    }

    /// Active agents in fixed lexical, contextual, logic order.
    pub fn agents(&self) -> Vec<&dyn Agent> {
        let mut out: Vec<&dyn Agent> = Vec::with_capacity(3);
        if let Some(a) = &self.lexical {
            out.push(a);
        }
        if let Some(a) = &self.contextual {
            out.push(a);
        }
        if let Some(a) = &self.logic {
            out.push(a);
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.lexical.is_none() && self.contextual.is_none() && self.logic.is_none()
    }

    pub fn has_contextual(&self) -> bool {
        self.contextual.is_some()
    }

    /// Copy of the suite with one agent switched off.
    pub fn without(&self, agent: AgentId) -> Self {
        let mut out = self.clone();
        match agent {
            AgentId::Lexical => out.lexical = None,
            AgentId::Contextual => out.contextual = None,
            AgentId::Logic => out.logic = None,
        }
        out
    }

    /// Runs one round: one verdict per active agent, in suite order.
    pub fn round(
        &self,
        doc: &Document,
        primary: &Classification,
        context: &AgentContext<'_>,
    ) -> Vec<AgentVerdict> {
        self.agents()
            .into_iter()
            .map(|a| a.evaluate(doc, primary, context))
            .collect()
    }
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax_lowest(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if v <= values[b] => {}
            _ => best = Some(i),
        }
    }
    best
}
