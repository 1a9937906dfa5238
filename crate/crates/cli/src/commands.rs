use std::fs;
use std::io::{self, Read, Write};

use cascade_core::agents::{explain, RuleSet};
use cascade_core::data::{parse_jsonl, split};
use cascade_core::domain::label_space_from_corpus;
use cascade_core::evaluation::{
    default_ablations, render_ablation_table, render_report, sweep_csv, EvaluationReport,
    Experiment,
};
use cascade_core::{
    AgentId, AgentWeights, Artifacts, Cascade, Classifier, Document, RemoteClassifier,
    RemoteClassifierConfig, Route, RoutedDecision, RouterConfig,
};
use serde::Serialize;

use crate::config::{PrimaryKind, RunConfig};
use crate::{ClassifyArgs, Failure, GateArgs, REQUIRED_GAIN};

fn io_failure(what: &str, e: io::Error) -> Failure {
    Failure::op(format!("{what}: {e}"))
}

fn stdout_failure(e: io::Error) -> Failure {
    io_failure("stdout", e)
}

/// Loads saved artifacts, or trains them on the train and validation splits.
fn artifacts(cfg: &RunConfig) -> Result<Artifacts, Failure> {
    let mut artifacts = match &cfg.artifacts {
        Some(dir) => {
            log::info!("loading artifacts from {}", dir.display());
            Artifacts::load(dir)?
        }
        None => {
            let docs = cfg.corpus.load()?;
            let space = label_space_from_corpus(&docs)?;
            let rules = match (&cfg.rules, cfg.corpus.fixture()) {
                (Some(path), _) => {
                    let json = fs::read_to_string(path)
                        .map_err(|e| io_failure(&path.display().to_string(), e))?;
                    RuleSet::from_json(&json, &space)?
                }
                (None, Some(fixture)) => fixture.rules(&space)?,
                (None, None) => return Err(Failure::op("a corpus file needs a `rules` path")),
            };
            let t = &cfg.training;
            let parts = split(&docs, t.split, t.seed, t.stratify)?;
            log::info!(
                "training on {} documents, validating on {}",
                parts.train.len(),
                parts.validation.len()
            );
            Artifacts::train(&parts.train, &parts.validation, space, rules, t)?
        }
    };
    if let Some(path) = &cfg.weights {
        let json =
            fs::read_to_string(path).map_err(|e| io_failure(&path.display().to_string(), e))?;
        artifacts.weights = serde_json::from_str::<AgentWeights>(&json)
            .map_err(|e| Failure::op(format!("{}: {e}", path.display())))?;
    }
    Ok(artifacts)
}

fn primary(cfg: &RunConfig, artifacts: &Artifacts) -> Result<Box<dyn Classifier>, Failure> {
    match cfg.primary {
        PrimaryKind::Baseline => Ok(Box::new(artifacts.model.clone())),
        PrimaryKind::Remote => {
            let endpoint = cfg.endpoint.clone().unwrap_or_default();
            let client = RemoteClassifier::connect(RemoteClassifierConfig::new(endpoint))?;
            if client.label_space() != &artifacts.label_space {
                let names = |s: &cascade_core::LabelSpace| s.names().collect::<Vec<_>>().join(", ");
                return Err(Failure::op(format!(
                    "remote labels [{}] differ from trained labels [{}]",
                    names(client.label_space()),
                    names(&artifacts.label_space)
                )));
            }
            Ok(Box::new(client))
        }
    }
}

/// Documents to evaluate plus the labeled documents that precede them.
fn evaluation_data(cfg: &RunConfig) -> Result<(Vec<Document>, Vec<Document>), Failure> {
    if let Some(eval) = &cfg.eval {
        return Ok((eval.load()?, Vec::new()));
    }
    let t = &cfg.training;
    let parts = split(&cfg.corpus.load()?, t.split, t.seed, t.stratify)?;
    let mut background = parts.train;
    background.extend(parts.validation);
    Ok((parts.test, background))
}

fn write_json<T: Serialize>(cfg: &RunConfig, name: &str, value: &T) -> Result<(), Failure> {
    let Some(dir) = &cfg.out else {
        return Ok(());
    };
    fs::create_dir_all(dir).map_err(|e| io_failure(&dir.display().to_string(), e))?;
    let path = dir.join(name);
    let body = serde_json::to_string_pretty(value).map_err(|e| Failure::op(e.to_string()))?;
    fs::write(&path, body + "\n").map_err(|e| io_failure(&path.display().to_string(), e))
}

fn gate(args: &GateArgs, full: &EvaluationReport, primary: &EvaluationReport) -> Result<(), Failure> {
    let gain = full.accuracy() - primary.accuracy();
    if args.require_improvement && gain < REQUIRED_GAIN {
        return Err(Failure::Gate(format!(
            "accuracy gain {:+.4} over primary-alone is below {REQUIRED_GAIN}",
            gain
        )));
    }
    Ok(())
}

pub fn train(cfg: &RunConfig, out: &mut impl Write) -> Result<(), Failure> {
    let dir = cfg
        .out
        .as_deref()
        .ok_or_else(|| Failure::op("train needs --out"))?;
    let a = artifacts(cfg)?;
    a.save(dir)?;
    let labels: Vec<&str> = a.label_space.names().collect();
    let mut summary = format!(
        "labels: {}\nvocabulary: {}\ntemperature: {:.6}\nkeywords: {}\nrules: {}\n",
        labels.join(", "),
        a.model.vocabulary().len(),
        a.model.temperature(),
        a.keyword_map.len(),
        a.rules.len()
    );
    for agent in AgentId::ALL {
        summary += &format!("weight {}: {:.6}\n", agent, a.weights.get(agent).unwrap_or(0.0));
    }
    summary += &format!("artifacts: {}\n", dir.display());
    out.write_all(summary.as_bytes()).map_err(stdout_failure)
}

fn read_inputs(args: &ClassifyArgs) -> Result<Vec<Document>, Failure> {
    let raw = if !args.text.is_empty() {
        args.text.join("\n")
    } else if let Some(path) = &args.input {
        fs::read_to_string(path).map_err(|e| io_failure(&path.display().to_string(), e))?
    } else {
        let mut buf = String::new();
        io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| io_failure("stdin", e))?;
        buf
    };
    if args.jsonl {
        return Ok(parse_jsonl(&raw)?);
    }
    let docs: Vec<Document> = raw
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| Document::new(format!("line-{}", i + 1), line.trim(), i as u64))
        .collect::<Result<_, _>>()?;
    if docs.is_empty() {
        return Err(Failure::op("no input text"));
    }
    Ok(docs)
}

#[derive(Serialize)]
struct Scored<'a> {
    label: &'a str,
    confidence: f64,
}

#[derive(Serialize)]
struct ConsensusLine<'a> {
    participants: usize,
    agreed_agents: &'a [AgentId],
    fallback_used: bool,
    /// Weighted sums per suggested label, not confidences.
    scores: Vec<LabelScore<'a>>,
}

#[derive(Serialize)]
struct LabelScore<'a> {
    label: &'a str,
    score: f64,
}

#[derive(Serialize)]
struct DecisionLine<'a> {
    id: &'a str,
    label: &'a str,
    confidence: f64,
    path: Route,
    primary: Scored<'a>,
    #[serde(skip_serializing_if = "Option::is_none")]
    consensus: Option<ConsensusLine<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    explanation: Option<String>,
}

fn decision_line<'a>(doc: &'a Document, d: &'a RoutedDecision, tau: f64, with_explanation: bool) -> DecisionLine<'a> {
    let explanation = with_explanation.then(|| match &d.consensus {
        Some(c) => explain(doc, &d.verdicts, c),
        None => format!(
            "Document {}: primary classification \"{}\" with confidence {:.2} meets the threshold {:.2} and is accepted.",
            doc.id, d.primary.label.name, d.primary.confidence, tau
        ),
    });
    DecisionLine {
        id: &doc.id,
        label: &d.outcome.label.name,
        confidence: d.outcome.confidence,
        path: d.path,
        primary: Scored {
            label: &d.primary.label.name,
            confidence: d.primary.confidence,
        },
        consensus: d.consensus.as_ref().map(|c| ConsensusLine {
            participants: c.participants,
            agreed_agents: &c.agreed_agents,
            fallback_used: c.fallback_used,
            scores: c
                .per_label_score
                .iter()
                .map(|s| LabelScore {
                    label: &s.label.name,
                    score: s.score,
                })
                .collect(),
        }),
        explanation,
    }
}

pub fn classify(cfg: &RunConfig, args: &ClassifyArgs, out: &mut impl Write) -> Result<(), Failure> {
    let docs = read_inputs(args)?;
    let a = artifacts(cfg)?;
    let primary = primary(cfg, &a)?;
    let mut cascade = Cascade::new(primary, a.suite(), RouterConfig::new(cfg.tau)?)
        .with_history(a.contextual.new_history());
    let decisions = cascade.classify_corpus(&docs)?;
    for (doc, d) in docs.iter().zip(&decisions) {
        let line = serde_json::to_string(&decision_line(doc, d, cfg.tau, args.explain))
            .map_err(|e| Failure::op(e.to_string()))?;
        writeln!(out, "{line}").map_err(stdout_failure)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct EvaluationOutput<'a> {
    tau: f64,
    cascade: &'a EvaluationReport,
    primary_alone: &'a EvaluationReport,
}

pub fn evaluate(cfg: &RunConfig, args: &GateArgs, out: &mut impl Write) -> Result<(), Failure> {
    let a = artifacts(cfg)?;
    let primary = primary(cfg, &a)?;
    let (docs, background) = evaluation_data(cfg)?;
    let exp = Experiment::new(&primary, &docs, &background)?;
    let full = exp.evaluate(&a.suite(), &RouterConfig::new(cfg.tau)?)?;
    let alone = exp.evaluate_primary()?;
    let text = format!(
        "{}\nPrimary alone: accuracy {:.4}, macro F1 {:.4}\nGain: {:+.2} points\n",
        render_report(&full),
        alone.accuracy(),
        alone.macro_f1(),
        100.0 * (full.accuracy() - alone.accuracy())
    );
    out.write_all(text.as_bytes()).map_err(stdout_failure)?;
    write_json(
        cfg,
        "evaluation.json",
        &EvaluationOutput {
            tau: cfg.tau,
            cascade: &full,
            primary_alone: &alone,
        },
    )?;
    gate(args, &full, &alone)
}

/// 0.0, 0.1, ..., 1.0 computed from integers so the grid has no drift.
pub fn sweep_taus() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

pub fn sweep(cfg: &RunConfig, args: &GateArgs, out: &mut impl Write) -> Result<(), Failure> {
    let a = artifacts(cfg)?;
    let primary = primary(cfg, &a)?;
    let (docs, background) = evaluation_data(cfg)?;
    let exp = Experiment::new(&primary, &docs, &background)?;
    let rows = exp.sweep_threshold(&a.suite(), &sweep_taus())?;
    out.write_all(sweep_csv(&rows).as_bytes()).map_err(stdout_failure)?;
    write_json(cfg, "sweep.json", &rows)?;
    if args.require_improvement {
        let full = exp.evaluate(&a.suite(), &RouterConfig::new(cfg.tau)?)?;
        gate(args, &full, &exp.evaluate_primary()?)?;
    }
    Ok(())
}

pub fn ablate(cfg: &RunConfig, args: &GateArgs, out: &mut impl Write) -> Result<(), Failure> {
    let a = artifacts(cfg)?;
    let primary = primary(cfg, &a)?;
    let (docs, background) = evaluation_data(cfg)?;
    let exp = Experiment::new(&primary, &docs, &background)?;
    let specs = default_ablations();
    let rows = exp.run_ablations(&primary, &a.suite(), cfg.tau, &specs, cfg.seed)?;
    out.write_all(render_ablation_table(&rows).as_bytes())
        .map_err(stdout_failure)?;
    write_json(cfg, "ablation.json", &rows)?;
    let pick = |full: bool| {
        specs
            .iter()
            .zip(&rows)
            .find(|(s, _)| s.escalation == full && (!full || (s.lexical && s.contextual && s.logic)))
            .map(|(_, r)| &r.evaluation)
    };
    if let (Some(full), Some(alone)) = (pick(true), pick(false)) {
        gate(args, full, alone)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_grid_has_eleven_exact_points() {
        let taus = sweep_taus();
        assert_eq!(taus.len(), 11);
        assert_eq!(taus[0], 0.0);
        assert_eq!(taus[7], 0.7);
        assert_eq!(taus[10], 1.0);
    }

    #[test]
    fn gate_threshold() {
        let cfg = RunConfig::default();
        let a = artifacts(&cfg).unwrap();
        let (docs, background) = evaluation_data(&cfg).unwrap();
        let exp = Experiment::new(&a.model, &docs, &background).unwrap();
        let alone = exp.evaluate_primary().unwrap();
        let on = GateArgs {
            require_improvement: true,
        };
        assert!(matches!(gate(&on, &alone, &alone), Err(Failure::Gate(_))));
        let off = GateArgs {
            require_improvement: false,
        };
        assert!(gate(&off, &alone, &alone).is_ok());
    }
}
