//! Run configuration: one JSON file, overridden by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use cascade_core::data::{load_corpus, CorpusSpec, Fixture};
use cascade_core::{Document, TrainingConfig};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PrimaryKind {
    Baseline,
    Remote,
}

/// A bundled fixture or a corpus file on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorpusSource {
    Fixture { fixture: Fixture },
    File(CorpusSpec),
}

impl CorpusSource {
    pub fn load(&self) -> Result<Vec<Document>, Failure> {
        match self {
            CorpusSource::Fixture { fixture } => Ok(fixture.documents()),
            CorpusSource::File(spec) => Ok(load_corpus(spec)?),
        }
    }

    pub fn fixture(&self) -> Option<Fixture> {
        match self {
            CorpusSource::Fixture { fixture } => Some(*fixture),
            CorpusSource::File(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Training corpus. Without `eval`, its test split is evaluated.
    pub corpus: CorpusSource,
    pub eval: Option<CorpusSource>,
    /// Rule set JSON. Defaults to the fixture's bundled rules.
    pub rules: Option<PathBuf>,
    /// Directory written by `train`; when set, nothing is retrained.
    pub artifacts: Option<PathBuf>,
    /// Replaces the estimated agent weights.
    pub weights: Option<PathBuf>,
    pub tau: f64,
    /// Drives the split and the augmentation; overrides `training.seed`.
    pub seed: u64,
    pub primary: PrimaryKind,
    pub endpoint: Option<String>,
    pub out: Option<PathBuf>,
    pub training: TrainingConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus: CorpusSource::Fixture {
                fixture: Fixture::Intent,
            },
            eval: None,
            rules: None,
            artifacts: None,
            weights: None,
            tau: 0.7,
            seed: 42,
            primary: PrimaryKind::Baseline,
            endpoint: None,
            out: None,
            training: TrainingConfig::default(),
        }
    }
}

/// Flag values that win over the config file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub fixture: Option<Fixture>,
    pub tau: Option<f64>,
    pub seed: Option<u64>,
    pub primary: Option<PrimaryKind>,
    pub endpoint: Option<String>,
    pub out: Option<PathBuf>,
    pub artifacts: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(path: Option<&Path>, flags: Overrides) -> Result<Self, Failure> {
        let mut cfg = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Failure::op(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| Failure::op(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(fixture) = flags.fixture {
            cfg.corpus = CorpusSource::Fixture { fixture };
        }
        if let Some(tau) = flags.tau {
            cfg.tau = tau;
        }
        if let Some(seed) = flags.seed {
            cfg.seed = seed;
        }
        if let Some(primary) = flags.primary {
            cfg.primary = primary;
        }
        if flags.endpoint.is_some() {
            cfg.endpoint = flags.endpoint;
        }
        if flags.out.is_some() {
            cfg.out = flags.out;
        }
        if flags.artifacts.is_some() {
            cfg.artifacts = flags.artifacts;
        }
        cfg.training.seed = cfg.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Failure> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Failure::op(format!("tau {} outside [0, 1]", self.tau)));
        }
        if self.primary == PrimaryKind::Remote && self.endpoint.is_none() {
            return Err(Failure::op("--primary remote needs --endpoint"));
        }
        let sources = [Some(&self.corpus), self.eval.as_ref()];
        let corpus_paths = sources.into_iter().flatten().filter_map(|s| match s {
            CorpusSource::File(spec) => Some(&spec.path),
            CorpusSource::Fixture { .. } => None,
        });
        let files = [&self.rules, &self.artifacts, &self.weights];
        for path in corpus_paths.chain(files.into_iter().flatten()) {
            if !path.exists() {
                return Err(Failure::op(format!("{}: no such file or directory", path.display())));
            }
        }
        if self.rules.is_none() && self.artifacts.is_none() && self.corpus.fixture().is_none() {
            return Err(Failure::op("a corpus file needs a `rules` path"));
        }
        Ok(())
    }
}
