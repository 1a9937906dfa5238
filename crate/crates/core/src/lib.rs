//! Confidence-gated text classification.
//!
//! A primary classifier labels every document. Predictions whose confidence
//! falls below a threshold are handed to deterministic verdict agents
//! (lexical, contextual, logic) whose suggestions are fused by weighted
//! consensus. Final labels feed back into per-user history.

pub mod agents;
pub mod classifier;
pub mod consensus;
pub mod data;
pub mod domain;
pub mod error;
pub mod escalation;
pub mod evaluation;
pub mod pipeline;
pub mod rng;

pub use agents::{Agent, AgentContext, AgentSuite, UserHistory};
pub use classifier::{BaselineModel, Classifier, RemoteClassifier, RemoteClassifierConfig};
pub use consensus::{aggregate, estimate_weights, AgentWeights, ConsensusResult};
pub use domain::{
    AgentId, AgentVerdict, Classification, Document, Label, LabelSpace, Suggestion,
};
pub use error::{Error, Result};
pub use escalation::{
    classify_cascade, decompose_accuracy, route, Cascade, DecompositionReport, Route,
    RoutedDecision, RouterConfig,
};
pub use pipeline::{Artifacts, TrainingConfig};
