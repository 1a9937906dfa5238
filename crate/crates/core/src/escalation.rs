//! Threshold routing and the combined cascade classifier.
//!
//! A primary prediction with confidence `c >= tau` is accepted as final;
//! anything below `tau` goes to the agent round and consensus. After every
//! decision the user's history receives the final label.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{AgentContext, AgentSuite, UserHistory};
use crate::classifier::Classifier;
use crate::consensus::{aggregate, ConsensusResult};
use crate::domain::{AgentVerdict, Classification, Document, Label, LabelSpace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouterConfig {
    pub tau: f64,
    pub escalation_enabled: bool,
}

impl RouterConfig {
    pub fn new(tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::InvalidParameter(format!("tau {tau} outside [0, 1]")));
        }
        Ok(Self {
            tau,
            escalation_enabled: true,
        })
    }

    /// Routes everything to the primary classifier.
    pub fn disabled() -> Self {
        Self {
            tau: 0.0,
            escalation_enabled: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Accepted,
    Escalated,
}

pub fn route(primary: &Classification, config: &RouterConfig) -> Route {
    if !config.escalation_enabled || primary.confidence >= config.tau {
        Route::Accepted
    } else {
        Route::Escalated
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutedDecision {
    pub document_id: String,
    pub primary: Classification,
    pub path: Route,
    #[serde(rename = "final")]
    pub outcome: Classification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consensus: Option<ConsensusResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub verdicts: Vec<AgentVerdict>,
}

impl RoutedDecision {
    fn accepted(doc: &Document, primary: Classification) -> Self {
        Self {
            document_id: doc.id.clone(),
            outcome: primary.clone(),
            primary,
            path: Route::Accepted,
            consensus: None,
            verdicts: Vec::new(),
        }
    }
}

fn decide(
    doc: &Document,
    primary: Classification,
    agents: &AgentSuite,
    config: &RouterConfig,
    context: &AgentContext<'_>,
) -> Result<RoutedDecision> {
    if route(&primary, config) == Route::Accepted {
        return Ok(RoutedDecision::accepted(doc, primary));
    }
    let verdicts = agents.round(doc, &primary, context);
    let consensus =
        aggregate(&verdicts, &agents.weights, &primary).map_err(|e| e.for_document(&doc.id))?;
    Ok(RoutedDecision {
        document_id: doc.id.clone(),
        outcome: consensus.outcome.clone(),
        primary,
        path: Route::Escalated,
        consensus: Some(consensus),
        verdicts,
    })
}

/// Routes a document whose primary classification is already known, then
/// feeds the final label back into `history`.
pub fn resolve(
    doc: &Document,
    primary: Classification,
    agents: &AgentSuite,
    config: &RouterConfig,
    space: &LabelSpace,
    history: &mut UserHistory,
) -> Result<RoutedDecision> {
    let decision = {
        let recent = doc
            .user_id
            .as_deref()
            .map(|u| history.recent(u))
            .unwrap_or(&[]);
        let ctx = AgentContext {
            history: recent,
            label_space: space,
        };
        decide(doc, primary, agents, config, &ctx)?
    };
    if let Some(user) = doc.user_id.as_deref() {
        history.record(user, decision.outcome.label.clone());
    }
    Ok(decision)
}

/// Classifies one document and feeds the final label back into `history`.
pub fn classify_cascade<C: Classifier + ?Sized>(
    doc: &Document,
    primary: &C,
    agents: &AgentSuite,
    config: &RouterConfig,
    history: &mut UserHistory,
) -> Result<RoutedDecision> {
    let first = primary
        .classify(&doc.text)
        .map_err(|e| e.for_document(&doc.id))?;
    resolve(doc, first, agents, config, primary.label_space(), history)
}

/// The combined classifier: primary model, agent suite, router and the
/// per-user history that carries state between documents.
pub struct Cascade<C> {
    primary: C,
    agents: AgentSuite,
    config: RouterConfig,
    history: UserHistory,
}

impl<C: Classifier> Cascade<C> {
    pub fn new(primary: C, agents: AgentSuite, config: RouterConfig) -> Self {
        Self {
            primary,
            agents,
            config,
            history: UserHistory::default(),
        }
    }

    pub fn with_history(mut self, history: UserHistory) -> Self {
        self.history = history;
        self
    }

    pub fn primary(&self) -> &C {
        &self.primary
    }

    pub fn agents(&self) -> &AgentSuite {
        &self.agents
    }

    pub fn config(&self) -> &RouterConfig {
        &self.config
    }

    pub fn history(&self) -> &UserHistory {
        &self.history
    }

    pub fn classify(&mut self, doc: &Document) -> Result<RoutedDecision> {
        classify_cascade(doc, &self.primary, &self.agents, &self.config, &mut self.history)
    }

    /// Classifies a corpus; results are returned in input order.
    ///
    /// Documents are processed in `seq` order. Without a contextual agent no
    /// state flows between documents, so escalations run in parallel.
    pub fn classify_corpus(&mut self, docs: &[Document]) -> Result<Vec<RoutedDecision>> {
        if docs.is_empty() {
            return Ok(Vec::new());
        }
        let texts: Vec<&str> = docs.iter().map(|d| d.text.as_str()).collect();
        let primaries = self.primary.classify_batch(&texts)?;

        let mut order: Vec<usize> = (0..docs.len()).collect();
        order.sort_by_key(|&i| docs[i].seq);

        let space = self.primary.label_space();
        let mut out: Vec<Option<RoutedDecision>> = vec![None; docs.len()];
        if self.agents.has_contextual() {
            for i in order {
                let decision = resolve(
                    &docs[i],
                    primaries[i].clone(),
                    &self.agents,
                    &self.config,
                    space,
                    &mut self.history,
                )?;
                out[i] = Some(decision);
            }
        } else {
            let ctx = AgentContext {
                history: &[],
                label_space: space,
            };
            let decided: Vec<RoutedDecision> = docs
                .par_iter()
                .zip(primaries.into_par_iter())
                .map(|(doc, p)| decide(doc, p, &self.agents, &self.config, &ctx))
                .collect::<Result<_>>()?;
            for i in order {
                if let Some(user) = docs[i].user_id.as_deref() {
                    self.history.record(user, decided[i].outcome.label.clone());
                }
            }
            out = decided.into_iter().map(Some).collect();
        }
        Ok(out.into_iter().map(|d| d.expect("every document decided")).collect())
    }
}

/// Accuracy split into the accepted and escalated strata.
///
/// An empty stratum reports accuracy 0 with its `*_defined` flag cleared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub n: usize,
    pub n_accept: usize,
    pub n_escalate: usize,
    pub p_accept: f64,
    pub acc_accept: f64,
    pub acc_accept_defined: bool,
    pub p_escalate: f64,
    pub acc_escalate: f64,
    pub acc_escalate_defined: bool,
    /// Accuracy the primary classifier alone reaches on the escalated stratum.
    pub primary_acc_escalate: f64,
    pub overall: f64,
}

impl DecompositionReport {
    /// `p_accept·acc_accept + p_escalate·acc_escalate`
    pub fn recombined(&self) -> f64 {
        self.p_accept * self.acc_accept + self.p_escalate * self.acc_escalate
    }
}

pub fn decompose_accuracy(decisions: &[RoutedDecision], gold: &[Label]) -> Result<DecompositionReport> {
    if decisions.is_empty() {
        return Err(Error::EmptyInput);
    }
    if decisions.len() != gold.len() {
        return Err(Error::LengthMismatch(decisions.len(), gold.len()));
    }
    let (mut n_accept, mut ok_accept) = (0usize, 0usize);
    let (mut n_escalate, mut ok_escalate, mut primary_ok_escalate) = (0usize, 0usize, 0usize);
    for (d, g) in decisions.iter().zip(gold) {
        let correct = d.outcome.label == *g;
        match d.path {
            Route::Accepted => {
                n_accept += 1;
                ok_accept += correct as usize;
            }
            Route::Escalated => {
                n_escalate += 1;
                ok_escalate += correct as usize;
                primary_ok_escalate += (d.primary.label == *g) as usize;
            }
        }
    }
    let n = decisions.len();
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    Ok(DecompositionReport {
        n,
        n_accept,
        n_escalate,
        p_accept: ratio(n_accept, n),
        acc_accept: ratio(ok_accept, n_accept),
        acc_accept_defined: n_accept > 0,
        p_escalate: ratio(n_escalate, n),
        acc_escalate: ratio(ok_escalate, n_escalate),
        acc_escalate_defined: n_escalate > 0,
        primary_acc_escalate: ratio(primary_ok_escalate, n_escalate),
        overall: ratio(ok_accept + ok_escalate, n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::LabelSpace;

    fn label(id: usize) -> Label {
        LabelSpace::new(["A", "B"]).unwrap().by_id(id).unwrap().clone()
    }

    fn c(confidence: f64) -> Classification {
        Classification {
            label: label(0),
            confidence,
        }
    }

    #[test]
    fn below_threshold_escalates() {
        assert_eq!(route(&c(0.65), &RouterConfig::new(0.7).unwrap()), Route::Escalated);
    }

    #[test]
    fn boundary_is_inclusive() {
        assert_eq!(route(&c(0.7), &RouterConfig::new(0.7).unwrap()), Route::Accepted);
    }

    #[test]
    fn disabled_router_accepts_everything() {
        let cfg = RouterConfig {
            tau: 0.9,
            escalation_enabled: false,
        };
        assert_eq!(route(&c(0.2), &cfg), Route::Accepted);
        assert_eq!(route(&c(0.2), &RouterConfig::disabled()), Route::Accepted);
    }

    #[test]
    fn tau_range() {
        assert!(RouterConfig::new(-0.01).is_err());
        assert!(RouterConfig::new(1.01).is_err());
        assert!(RouterConfig::new(f64::NAN).is_err());
    }

    fn decision(path: Route, predicted: usize, primary: usize) -> RoutedDecision {
        RoutedDecision {
            document_id: "d".into(),
            primary: Classification {
                label: label(primary),
                confidence: 0.5,
            },
            path,
            outcome: Classification {
                label: label(predicted),
                confidence: 0.5,
            },
            consensus: None,
            verdicts: Vec::new(),
        }
    }

    #[test]
    fn all_accepted_and_correct() {
        let ds = vec![decision(Route::Accepted, 0, 0); 4];
        let r = decompose_accuracy(&ds, &vec![label(0); 4]).unwrap();
        assert_eq!((r.p_accept, r.acc_accept, r.p_escalate, r.acc_escalate, r.overall), (1.0, 1.0, 0.0, 0.0, 1.0));
        assert!(!r.acc_escalate_defined);
    }

    #[test]
    fn hand_counted_strata() {
        // 6 accepted (5 correct), 4 escalated (3 correct)
        let mut ds = Vec::new();
        ds.extend(vec![decision(Route::Accepted, 0, 0); 5]);
        ds.push(decision(Route::Accepted, 1, 1));
        ds.extend(vec![decision(Route::Escalated, 0, 1); 3]);
        ds.push(decision(Route::Escalated, 1, 1));
        let r = decompose_accuracy(&ds, &vec![label(0); 10]).unwrap();
        assert_eq!(r.p_accept, 0.6);
        assert!((r.acc_accept - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(r.p_escalate, 0.4);
        assert_eq!(r.acc_escalate, 0.75);
        assert_eq!(r.overall, 0.8);
        assert_eq!(r.primary_acc_escalate, 0.0);
        assert!((r.overall - r.recombined()).abs() < 1e-12);
    }

    #[test]
    fn all_escalated() {
        let ds = vec![decision(Route::Escalated, 0, 0), decision(Route::Escalated, 1, 0)];
        let r = decompose_accuracy(&ds, &[label(0), label(0)]).unwrap();
        assert_eq!(r.p_accept, 0.0);
        assert!(!r.acc_accept_defined);
        assert_eq!(r.overall, r.acc_escalate);
    }

    #[test]
    fn decomposition_errors() {
        assert!(matches!(decompose_accuracy(&[], &[]), Err(Error::EmptyInput)));
        let ds = vec![decision(Route::Accepted, 0, 0)];
        assert!(matches!(decompose_accuracy(&ds, &[]), Err(Error::LengthMismatch(1, 0))));
    }
}
