use serde::{Deserialize, Serialize};

use crate::domain::{Label, LabelSpace};
use crate::error::{Error, Result};
use crate::escalation::{decompose_accuracy, DecompositionReport, Route, RoutedDecision};

/// Precision, recall and F1 for one class. A zero denominator reports 0 and
/// clears the matching `*_defined` flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    pub predicted: usize,
    pub precision_defined: bool,
    pub recall_defined: bool,
}

impl ClassMetrics {
    /// Neither predicted nor present in the gold labels.
    pub fn is_absent(&self) -> bool {
        self.support == 0 && self.predicted == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub n: usize,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    /// Mean F1 over classes that occur in the gold or predicted labels.
    pub macro_f1: f64,
    /// `confusion[gold][predicted]`
    pub confusion: Vec<Vec<u64>>,
}

impl ClassificationMetrics {
    pub fn compute(predicted: &[Label], gold: &[Label], space: &LabelSpace) -> Result<Self> {
        if predicted.is_empty() {
            return Err(Error::EmptyInput);
        }
        if predicted.len() != gold.len() {
            return Err(Error::LengthMismatch(predicted.len(), gold.len()));
        }
        let k = space.len();
        let mut confusion = vec![vec![0u64; k]; k];
        for (p, g) in predicted.iter().zip(gold) {
            if p.id >= k || g.id >= k {
                return Err(Error::UnknownLabel(if p.id >= k { p } else { g }.name.clone()));
            }
            confusion[g.id][p.id] += 1;
        }
        let n = predicted.len();
        let trace: u64 = (0..k).map(|i| confusion[i][i]).sum();

        let per_class: Vec<ClassMetrics> = space
            .labels()
            .iter()
            .map(|label| {
                let i = label.id;
                let tp = confusion[i][i] as f64;
                let support: u64 = confusion[i].iter().sum();
                let predicted: u64 = confusion.iter().map(|row| row[i]).sum();
                let precision = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
                let recall = if support > 0 { tp / support as f64 } else { 0.0 };
                // harmonic mean of P and R in count form, one rounding step
                let f1 = if tp > 0.0 {
                    2.0 * tp / (support + predicted) as f64
                } else {
                    0.0
                };
                ClassMetrics {
                    label: label.name.clone(),
                    precision,
                    recall,
                    f1,
                    support: support as usize,
                    predicted: predicted as usize,
                    precision_defined: predicted > 0,
                    recall_defined: support > 0,
                }
            })
            .collect();

        let present: Vec<f64> = per_class
            .iter()
            .filter(|c| !c.is_absent())
            .map(|c| c.f1)
            .collect();
        let macro_f1 = present.iter().sum::<f64>() / present.len() as f64;

        Ok(Self {
            n,
            accuracy: trace as f64 / n as f64,
            per_class,
            macro_f1,
            confusion,
        })
    }

    pub fn class(&self, name: &str) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|c| c.label == name)
    }

    /// Micro-averaged F1; equals accuracy for single-label predictions.
    pub fn micro_f1(&self) -> f64 {
        let k = self.confusion.len();
        let tp: u64 = (0..k).map(|i| self.confusion[i][i]).sum();
        let total: u64 = self.confusion.iter().flatten().sum();
        // pooled fp and fn both equal total - tp
        let (fp, fn_) = (total - tp, total - tp);
        if tp == 0 {
            0.0
        } else {
            2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    #[serde(flatten)]
    pub metrics: ClassificationMetrics,
    pub escalation_rate: f64,
    pub decomposition: DecompositionReport,
}

impl EvaluationReport {
    pub fn accuracy(&self) -> f64 {
        self.metrics.accuracy
    }

    pub fn macro_f1(&self) -> f64 {
        self.metrics.macro_f1
    }
}

pub fn evaluate(
    decisions: &[RoutedDecision],
    gold: &[Label],
    space: &LabelSpace,
) -> Result<EvaluationReport> {
    let predicted: Vec<Label> = decisions.iter().map(|d| d.outcome.label.clone()).collect();
    let metrics = ClassificationMetrics::compute(&predicted, gold, space)?;
    let decomposition = decompose_accuracy(decisions, gold)?;
    let escalated = decisions.iter().filter(|d| d.path == Route::Escalated).count();
    Ok(EvaluationReport {
        metrics,
        escalation_rate: escalated as f64 / decisions.len() as f64,
        decomposition,
    })
}
