//! Corpus-level runs of the cascade: single evaluations, threshold sweeps
//! and agent ablations.
//!
//! A run replays labeled background documents into the per-user history in
//! `seq` order, interleaved with the evaluated documents, whose final labels
//! are fed back as they are decided.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::augment::{robustness_score, CorpusPredictor, Perturbation, RobustnessReport};
use super::metrics::{evaluate, EvaluationReport};
use crate::agents::{AgentSuite, HistoryReplay};
use crate::classifier::Classifier;
use crate::domain::{AgentId, Classification, Document, Label, LabelSpace};
use crate::error::{Error, Result};
use crate::escalation::{resolve, RoutedDecision, RouterConfig};

/// A corpus with its primary classifications computed once, reusable
/// across router and agent configurations.
pub struct Experiment<'a> {
    space: &'a LabelSpace,
    corpus: &'a [Document],
    background: &'a [Document],
    primaries: Vec<Classification>,
    gold: Vec<Label>,
}

impl<'a> Experiment<'a> {
    /// `corpus` must be labeled. `background` supplies user history only.
    pub fn new<C: Classifier + ?Sized>(
        primary: &'a C,
        corpus: &'a [Document],
        background: &'a [Document],
    ) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let space = primary.label_space();
        let gold = corpus
            .iter()
            .map(|d| d.gold_label(space).cloned().map_err(|e| e.for_document(&d.id)))
            .collect::<Result<Vec<_>>>()?;
        let texts: Vec<&str> = corpus.iter().map(|d| d.text.as_str()).collect();
        let primaries = primary.classify_batch(&texts)?;
        Ok(Self {
            space,
            corpus,
            background,
            primaries,
            gold,
        })
    }

    pub fn corpus(&self) -> &[Document] {
        self.corpus
    }

    pub fn gold(&self) -> &[Label] {
        &self.gold
    }

    pub fn primaries(&self) -> &[Classification] {
        &self.primaries
    }

    /// Decisions in corpus order.
    pub fn run(&self, agents: &AgentSuite, config: &RouterConfig) -> Result<Vec<RoutedDecision>> {
        run_cascade(self.corpus, &self.primaries, self.background, agents, config, self.space)
    }

    pub fn evaluate(&self, agents: &AgentSuite, config: &RouterConfig) -> Result<EvaluationReport> {
        evaluate(&self.run(agents, config)?, &self.gold, self.space)
    }

    pub fn evaluate_primary(&self) -> Result<EvaluationReport> {
        self.evaluate(&AgentSuite::empty(), &RouterConfig::disabled())
    }

    /// One evaluation per threshold, in input order.
    pub fn sweep_threshold(&self, agents: &AgentSuite, taus: &[f64]) -> Result<Vec<SweepRow>> {
        if taus.is_empty() {
            return Err(Error::EmptyInput);
        }
        if taus.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("thresholds must be sorted ascending".into()));
        }
        let configs = taus
            .iter()
            .map(|&t| RouterConfig::new(t))
            .collect::<Result<Vec<_>>>()?;
        configs
            .par_iter()
            .map(|cfg| {
                Ok(SweepRow {
                    tau: cfg.tau,
                    report: self.evaluate(agents, cfg)?,
                })
            })
            .collect()
    }
}

/// Routes every document in `seq` order given precomputed primary
/// classifications. Output is in input order.
pub fn run_cascade(
    docs: &[Document],
    primaries: &[Classification],
    background: &[Document],
    agents: &AgentSuite,
    config: &RouterConfig,
    space: &LabelSpace,
) -> Result<Vec<RoutedDecision>> {
    if docs.len() != primaries.len() {
        return Err(Error::LengthMismatch(docs.len(), primaries.len()));
    }
    let mut history = agents
        .contextual
        .as_ref()
        .map(|c| c.new_history())
        .unwrap_or_default();
    let mut replay = HistoryReplay::new(background, space);
    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.sort_by_key(|&i| docs[i].seq);
    let mut out: Vec<Option<RoutedDecision>> = vec![None; docs.len()];
    for i in order {
        replay.advance(docs[i].seq, &mut history);
        out[i] = Some(resolve(
            &docs[i],
            primaries[i].clone(),
            agents,
            config,
            space,
            &mut history,
        )?);
    }
    Ok(out.into_iter().map(|d| d.expect("every document decided")).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    pub report: EvaluationReport,
}

/// A cascade configuration wrapped for [`robustness_score`].
pub struct CascadeRun<'a, C: ?Sized> {
    pub primary: &'a C,
    pub agents: &'a AgentSuite,
    pub config: RouterConfig,
    pub background: &'a [Document],
}

impl<C: Classifier + ?Sized> CorpusPredictor for CascadeRun<'_, C> {
    fn label_space(&self) -> &LabelSpace {
        self.primary.label_space()
    }

    fn predict_corpus(&mut self, docs: &[Document]) -> Result<Vec<Label>> {
        let texts: Vec<&str> = docs.iter().map(|d| d.text.as_str()).collect();
        let primaries = self.primary.classify_batch(&texts)?;
        let decisions = run_cascade(
            docs,
            &primaries,
            self.background,
            self.agents,
            &self.config,
            self.primary.label_space(),
        )?;
        Ok(decisions.into_iter().map(|d| d.outcome.label).collect())
    }
}

/// The primary classifier on its own.
pub struct PrimaryOnly<'a, C: ?Sized>(pub &'a C);

impl<C: Classifier + ?Sized> CorpusPredictor for PrimaryOnly<'_, C> {
    fn label_space(&self) -> &LabelSpace {
        self.0.label_space()
    }

    fn predict_corpus(&mut self, docs: &[Document]) -> Result<Vec<Label>> {
        let texts: Vec<&str> = docs.iter().map(|d| d.text.as_str()).collect();
        Ok(self
            .0
            .classify_batch(&texts)?
            .into_iter()
            .map(|c| c.label)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AblationSpec {
    /// Row label, naming what was removed.
    pub name: String,
    pub lexical: bool,
    pub contextual: bool,
    pub logic: bool,
    pub escalation: bool,
}

impl AblationSpec {
    fn suite(&self, full: &AgentSuite) -> AgentSuite {
        let mut suite = full.clone();
        for (on, agent) in [
            (self.lexical, AgentId::Lexical),
            (self.contextual, AgentId::Contextual),
            (self.logic, AgentId::Logic),
        ] {
            if !on {
                suite = suite.without(agent);
            }
        }
        suite
    }
}

/// Full framework, each verdict agent removed in turn, and escalation off.
pub fn default_ablations() -> Vec<AblationSpec> {
    let spec = |name: &str, lexical, contextual, logic, escalation| AblationSpec {
        name: name.into(),
        lexical,
        contextual,
        logic,
        escalation,
    };
    vec![
        spec("None (full framework)", true, true, true, true),
        spec("Lexical agent", false, true, true, true),
        spec("Contextual agent", true, false, true, true),
        spec("Logic agent", true, true, false, true),
        spec("Escalation (primary only)", true, true, true, false),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationResult {
    pub name: String,
    pub evaluation: EvaluationReport,
    pub robustness: RobustnessReport,
}

impl Experiment<'_> {
    /// Rows come back in `specs` order; cells run concurrently.
    pub fn run_ablations<C: Classifier + ?Sized>(
        &self,
        primary: &C,
        agents: &AgentSuite,
        tau: f64,
        specs: &[AblationSpec],
        seed: u64,
    ) -> Result<Vec<AblationResult>> {
        let base = RouterConfig::new(tau)?;
        specs
            .par_iter()
            .map(|spec| {
                let suite = spec.suite(agents);
                let config = if spec.escalation {
                    base
                } else {
                    RouterConfig::disabled()
                };
                let evaluation = self.evaluate(&suite, &config)?;
                let mut run = CascadeRun {
                    primary,
                    agents: &suite,
                    config,
                    background: self.background,
                };
                let robustness =
                    robustness_score(&mut run, self.corpus, seed, &Perturbation::DEFAULT)?;
                Ok(AblationResult {
                    name: spec.name.clone(),
                    evaluation,
                    robustness,
                })
            })
            .collect()
    }
}

/// Aligned plain-text summary of one evaluation.
pub fn render_report(report: &EvaluationReport) -> String {
    let m = &report.metrics;
    let d = &report.decomposition;
    let width = m
        .per_class
        .iter()
        .map(|c| c.label.chars().count())
        .max()
        .unwrap_or(5)
        .max(5);
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  {:>9}  {:>6}  {:>6}  {:>7}", "Class", "Precision", "Recall", "F1", "Support");
    for c in &m.per_class {
        let _ = writeln!(
            out,
            "{:<width$}  {:>9.4}  {:>6.4}  {:>6.4}  {:>7}",
            c.label, c.precision, c.recall, c.f1, c.support
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "Accuracy         {:.4}", m.accuracy);
    let _ = writeln!(out, "Macro F1         {:.4}", m.macro_f1);
    let _ = writeln!(out, "Escalation rate  {:.4}", report.escalation_rate);
    let _ = writeln!(
        out,
        "Accepted         {:>5}  acc {}",
        d.n_accept,
        defined(d.acc_accept, d.acc_accept_defined)
    );
    let _ = writeln!(
        out,
        "Escalated        {:>5}  acc {}  (primary alone {})",
        d.n_escalate,
        defined(d.acc_escalate, d.acc_escalate_defined),
        defined(d.primary_acc_escalate, d.acc_escalate_defined)
    );
    out
}

fn defined(value: f64, is_defined: bool) -> String {
    if is_defined {
        format!("{value:.4}")
    } else {
        "n/a".into()
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "tau,accuracy,macro_f1,escalation_rate,n_escalated,acc_accept,acc_escalate\n",
    );
    for row in rows {
        let r = &row.report;
        let _ = writeln!(
            out,
            "{:.2},{:.6},{:.6},{:.6},{},{:.6},{:.6}",
            row.tau,
            r.accuracy(),
            r.macro_f1(),
            r.escalation_rate,
            r.decomposition.n_escalate,
            r.decomposition.acc_accept,
            r.decomposition.acc_escalate
        );
    }
    out
}

/// Component Removed | Acc (%) | F1 | Robustness
pub fn render_ablation_table(rows: &[AblationResult]) -> String {
    let header = "Component Removed";
    let width = rows
        .iter()
        .map(|r| r.name.chars().count())
        .chain([header.len()])
        .max()
        .unwrap_or(header.len());
    let mut out = String::new();
    let _ = writeln!(out, "{header:<width$}  {:>7}  {:>6}  {:>10}", "Acc (%)", "F1", "Robustness");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>7.2}  {:>6.4}  {:>10.4}",
            r.name,
            100.0 * r.evaluation.accuracy(),
            r.evaluation.macro_f1(),
            r.robustness.score
        );
    }
    out
}
