use std::collections::HashSet;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{Agent, AgentContext};
use crate::domain::{AgentId, AgentVerdict, Classification, Document, Label, LabelSpace};
use crate::error::{Error, Result};

/// Rule counts above this are accepted but logged; larger sets get hard to audit.
pub const RULE_CAPACITY_GUIDELINE: usize = 50;

#[derive(Debug, Clone)]
pub struct Rule {
    pub id: String,
    pub pattern: Regex,
    pub label: Label,
    pub confidence: f64,
}

/// Serialized form of a rule, as found in rule files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSpec {
    pub id: String,
    pub pattern: String,
    pub label: String,
    pub confidence: f64,
}

#[derive(Serialize, Deserialize)]
struct RuleFile {
    rules: Vec<RuleSpec>,
}

/// Ordered regex rules; earlier rules win confidence ties.
#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    rules: Vec<Rule>,
}

impl RuleSet {
    pub fn compile(specs: &[RuleSpec], space: &LabelSpace) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut rules = Vec::with_capacity(specs.len());
        for spec in specs {
            if !seen.insert(spec.id.as_str()) {
                return Err(Error::DuplicateRule(spec.id.clone()));
            }
            if !(spec.confidence > 0.0 && spec.confidence <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "rule `{}` confidence {} outside (0, 1]",
                    spec.id, spec.confidence
                )));
            }
            let pattern = Regex::new(&spec.pattern).map_err(|source| Error::InvalidRule {
                rule_id: spec.id.clone(),
                source,
            })?;
            rules.push(Rule {
                id: spec.id.clone(),
                pattern,
                label: space.resolve(&spec.label)?.clone(),
                confidence: spec.confidence,
            });
        }
        if rules.len() > RULE_CAPACITY_GUIDELINE {
            log::warn!(
                "rule set has {} rules, above the guideline of {RULE_CAPACITY_GUIDELINE}",
                rules.len()
            );
        }
        Ok(Self { rules })
    }

    pub fn from_json(json: &str, space: &LabelSpace) -> Result<Self> {
        let file: RuleFile = serde_json::from_str(json)?;
        Self::compile(&file.rules, space)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = RuleFile {
            rules: self.specs(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn specs(&self) -> Vec<RuleSpec> {
        self.rules
            .iter()
            .map(|r| RuleSpec {
                id: r.id.clone(),
                pattern: r.pattern.as_str().to_string(),
                label: r.label.name.clone(),
                confidence: r.confidence,
            })
            .collect()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Rules matching `text`, in list order.
    pub fn matching<'a>(&'a self, text: &'a str) -> impl Iterator<Item = &'a Rule> + 'a {
        self.rules.iter().filter(move |r| r.pattern.is_match(text))
    }
}

/// Picks the most confident matching rule; the earliest wins ties.
pub fn logic_evaluate(doc: &Document, rules: &RuleSet) -> AgentVerdict {
    let mut winner: Option<&Rule> = None;
    let mut matched = 0usize;
    for rule in rules.matching(&doc.text) {
        matched += 1;
        if winner.is_none_or(|w| rule.confidence > w.confidence) {
            winner = Some(rule);
        }
    }
    match winner {
        None => AgentVerdict::abstain(AgentId::Logic, "no rule matched"),
        Some(rule) => AgentVerdict::suggest(
            AgentId::Logic,
            Classification {
                label: rule.label.clone(),
                confidence: rule.confidence,
            },
            format!(
                "rule {} matched /{}/ ({matched} of {} rules fired)",
                rule.id,
                rule.pattern.as_str(),
                rules.len()
            ),
        ),
    }
}

#[derive(Debug, Clone)]
pub struct LogicAgent {
    rules: RuleSet,
}

impl LogicAgent {
    pub fn new(rules: RuleSet) -> Self {
        Self { rules }
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }
}

impl Agent for LogicAgent {
    fn id(&self) -> AgentId {
        AgentId::Logic
    }

    fn evaluate(
        &self,
        doc: &Document,
        _primary: &Classification,
        _context: &AgentContext<'_>,
    ) -> AgentVerdict {
        logic_evaluate(doc, &self.rules)
    }
}
