use std::fmt::Write;

use crate::consensus::ConsensusResult;
use crate::domain::{AgentVerdict, Document, Suggestion};

/// Renders the template explanation for an escalated document.
///
/// Output depends only on the arguments, so identical inputs give identical bytes.
pub fn explain(doc: &Document, verdicts: &[AgentVerdict], result: &ConsensusResult) -> String {
    let mut out = String::new();
    let outcome = &result.outcome;
    if result.fallback_used {
        let _ = write!(
            out,
            "Document {}: no agent offered a suggestion, so the primary classification \"{}\" \
             (confidence {:.2}) is kept.",
            doc.id, outcome.label.name, outcome.confidence
        );
        return out;
    }

    let _ = writeln!(out, "Document {} was reviewed by {} agent(s).", doc.id, result.participants);
    for verdict in verdicts {
        match &verdict.suggestion {
            Suggestion::Label(c) => {
                let _ = writeln!(
                    out,
                    "- {} agent suggests \"{}\" with confidence {:.2}: {}.",
                    capitalize(verdict.agent.as_str()),
                    c.label.name,
                    c.confidence,
                    verdict.rationale
                );
            }
            Suggestion::Abstain => {
                let _ = writeln!(
                    out,
                    "- {} agent abstained: {}.",
                    capitalize(verdict.agent.as_str()),
                    verdict.rationale
                );
            }
        }
    }
    let agreed = result
        .agreed_agents
        .iter()
        .map(|a| a.as_str())
        .collect::<Vec<_>>()
        .join(", ");
    let _ = write!(
        out,
        "Final label \"{}\" with confidence {:.2}, supported by {} of {} participating agent(s) ({}).",
        outcome.label.name,
        outcome.confidence,
        result.agreed_agents.len(),
        result.participants,
        agreed
    );
    out
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}
