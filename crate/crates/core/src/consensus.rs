//! Weighted fusion of agent verdicts.
//!
//! Over the M participating agents (non-abstaining, positive weight):
//!
//! ```text
//! score(y) = Σ_j [y_j = y] · w_j · c_j
//! y_final  = argmax_y score(y)            (ties → lowest label id)
//! c_final  = score(y_final) / Σ_j w_j
//! ```
//!
//! Zero-weight verdicts add nothing to either sum, so they are dropped from
//! the participant set. With no participants the primary classification is
//! returned and `fallback_used` is set.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::agents::{AgentContext, AgentSuite, HistoryReplay};
use crate::classifier::Classifier;
use crate::domain::{AgentId, AgentVerdict, Classification, Document, Label};
use crate::error::{Error, Result};

/// Relative tolerance under which two label scores count as tied.
const TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<AgentId, f64>", into = "BTreeMap<AgentId, f64>")]
pub struct AgentWeights(BTreeMap<AgentId, f64>);

impl Default for AgentWeights {
    fn default() -> Self {
        Self(AgentId::ALL.iter().map(|&a| (a, 1.0)).collect())
    }
}

impl AgentWeights {
    pub fn new(weights: BTreeMap<AgentId, f64>) -> Result<Self> {
        for (agent, &w) in &weights {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "weight {w} for agent {agent} must be finite and non-negative"
                )));
            }
        }
        if !weights.values().any(|&w| w > 0.0) {
            return Err(Error::InvalidParameter(
                "at least one agent weight must be positive".into(),
            ));
        }
        Ok(Self(weights))
    }

    pub fn get(&self, agent: AgentId) -> Option<f64> {
        self.0.get(&agent).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (AgentId, f64)> + '_ {
        self.0.iter().map(|(&a, &w)| (a, w))
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|(&a, &w)| (a, w * factor)).collect())
    }
}

impl TryFrom<BTreeMap<AgentId, f64>> for AgentWeights {
    type Error = Error;

    fn try_from(map: BTreeMap<AgentId, f64>) -> Result<Self> {
        Self::new(map)
    }
}

impl From<AgentWeights> for BTreeMap<AgentId, f64> {
    fn from(w: AgentWeights) -> Self {
        w.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScore {
    pub label: Label,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusResult {
    #[serde(rename = "final")]
    pub outcome: Classification,
    /// Weighted sums for every suggested label, in label id order.
    pub per_label_score: Vec<LabelScore>,
    pub participants: usize,
    pub agreed_agents: Vec<AgentId>,
    pub fallback_used: bool,
    #[serde(default)]
    pub clamped: bool,
}

/// Fuses one round of verdicts into a final classification.
pub fn aggregate(
    verdicts: &[AgentVerdict],
    weights: &AgentWeights,
    primary: &Classification,
) -> Result<ConsensusResult> {
    let mut seen = HashSet::new();
    let mut participants: Vec<(AgentId, &Classification, f64)> = Vec::new();
    for verdict in verdicts {
        if !seen.insert(verdict.agent) {
            return Err(Error::InvalidParameter(format!(
                "agent {} voted twice",
                verdict.agent
            )));
        }
        let w = weights
            .get(verdict.agent)
            .ok_or_else(|| Error::UnknownAgent(verdict.agent.to_string()))?;
        if let Some(c) = verdict.classification() {
            if w > 0.0 {
                participants.push((verdict.agent, c, w));
            }
        }
    }

    if participants.is_empty() {
        return Ok(ConsensusResult {
            outcome: primary.clone(),
            per_label_score: Vec::new(),
            participants: 0,
            agreed_agents: Vec::new(),
            fallback_used: true,
            clamped: false,
        });
    }

    let mut scores: BTreeMap<usize, (Label, f64)> = BTreeMap::new();
    for &(_, c, w) in &participants {
        scores
            .entry(c.label.id)
            .or_insert_with(|| (c.label.clone(), 0.0))
            .1 += w * c.confidence;
    }

    // BTreeMap iterates by ascending label id, so keeping the first of any
    // tied group gives the lowest-id tie-break.
    let mut best: Option<(&Label, f64)> = None;
    for (label, score) in scores.values() {
        match best {
            Some((_, b)) if !exceeds(*score, b) => {}
            _ => best = Some((label, *score)),
        }
    }
    let (winner, top) = best.expect("at least one participant");
    let winner = winner.clone();

    let weight_sum: f64 = participants.iter().map(|&(_, _, w)| w).sum();
    let mut confidence = top / weight_sum;
    let mut clamped = false;
    if confidence > 1.0 {
        log::warn!("consensus confidence {confidence} exceeded 1 and was clamped");
        confidence = 1.0;
        clamped = true;
    }

    let agreed_agents = participants
        .iter()
        .filter(|(_, c, _)| c.label == winner)
        .map(|&(a, _, _)| a)
        .collect();

    Ok(ConsensusResult {
        outcome: Classification {
            label: winner,
            confidence,
        },
        per_label_score: scores
            .into_values()
            .map(|(label, score)| LabelScore { label, score })
            .collect(),
        participants: participants.len(),
        agreed_agents,
        fallback_used: false,
        clamped,
    })
}

/// `a` beats `b` by more than floating-point noise.
fn exceeds(a: f64, b: f64) -> bool {
    a - b > TIE_EPSILON * a.abs().max(b.abs()).max(1.0)
}

/// Sets each agent's weight to its accuracy on the validation documents it
/// did not abstain on.
///
/// User histories are rebuilt from gold labels: `background` documents and
/// already-seen validation documents are replayed in `seq` order.
pub fn estimate_weights<C: Classifier + ?Sized>(
    suite: &AgentSuite,
    primary: &C,
    validation: &[Document],
    background: &[Document],
) -> Result<AgentWeights> {
    if validation.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let space = primary.label_space();
    let mut history = suite
        .contextual
        .as_ref()
        .map(|c| c.new_history())
        .unwrap_or_default();
    let mut replay = HistoryReplay::new(background, space);
    let mut ordered: Vec<&Document> = validation.iter().collect();
    ordered.sort_by_key(|d| d.seq);

    let mut tally: BTreeMap<AgentId, (usize, usize)> =
        AgentId::ALL.iter().map(|&a| (a, (0, 0))).collect();
    for doc in ordered {
        let gold = doc.gold_label(space)?.clone();
        replay.advance(doc.seq, &mut history);
        let primary_out = primary
            .classify(&doc.text)
            .map_err(|e| e.for_document(&doc.id))?;
        let recent = doc
            .user_id
            .as_deref()
            .map(|u| history.recent(u))
            .unwrap_or(&[]);
        let ctx = AgentContext {
            history: recent,
            label_space: space,
        };
        for verdict in suite.round(doc, &primary_out, &ctx) {
            if let Some(c) = verdict.classification() {
                let entry = tally.get_mut(&verdict.agent).expect("all agents tallied");
                entry.1 += 1;
                if c.label == gold {
                    entry.0 += 1;
                }
            }
        }
        if let Some(user) = doc.user_id.as_deref() {
            history.record(user, gold);
        }
    }

    let weights: BTreeMap<AgentId, f64> = tally
        .into_iter()
        .map(|(agent, (correct, answered))| {
            let w = if answered == 0 {
                0.0
            } else {
                correct as f64 / answered as f64
            };
            (agent, w)
        })
        .collect();
    if weights.values().all(|&w| w == 0.0) {
        return Ok(AgentWeights::default());
    }
    AgentWeights::new(weights)
}
