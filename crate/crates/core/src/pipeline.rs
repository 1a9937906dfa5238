//! Training every learned artifact of the cascade from a labeled corpus.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::{
    induce_lexical_map, AgentSuite, ContextualAgent, KeywordMap, LexicalAgent, LogicAgent,
    RecencyWeighting, RuleSet, DEFAULT_HISTORY_LEN,
};
use crate::classifier::{BaselineModel, Classifier};
use crate::consensus::{estimate_weights, AgentWeights};
use crate::data::SplitFractions;
use crate::domain::{Document, LabelSpace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub smoothing: f64,
    pub temperature: f64,
    /// Replace `temperature` with the value fitted on the validation split.
    pub calibrate: bool,
    pub min_precision: f64,
    pub min_count: usize,
    pub history_len: usize,
    pub recency: RecencyWeighting,
    pub split: SplitFractions,
    pub stratify: bool,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            smoothing: 1.0,
            temperature: 1.0,
            calibrate: true,
            min_precision: 0.7,
            min_count: 3,
            history_len: DEFAULT_HISTORY_LEN,
            recency: RecencyWeighting::Linear,
            split: SplitFractions::default(),
            stratify: true,
            seed: 42,
        }
    }
}

pub const MODEL_FILE: &str = "model.json";
pub const KEYWORD_MAP_FILE: &str = "keyword_map.json";
pub const RULES_FILE: &str = "rules.json";
pub const WEIGHTS_FILE: &str = "weights.json";
pub const CONTEXTUAL_FILE: &str = "contextual.json";

/// Trained model, induced keyword map, rule set and consensus weights.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub label_space: LabelSpace,
    pub model: BaselineModel,
    pub keyword_map: KeywordMap,
    pub rules: RuleSet,
    pub weights: AgentWeights,
    pub contextual: ContextualAgent,
}

impl Artifacts {
    /// Trains the baseline and keyword map on `train`, then estimates agent
    /// weights on `validation` with `train` as history background.
    pub fn train(
        train: &[Document],
        validation: &[Document],
        label_space: LabelSpace,
        rules: RuleSet,
        config: &TrainingConfig,
    ) -> Result<Self> {
        if config.history_len == 0 {
            return Err(Error::InvalidParameter("history_len must be positive".into()));
        }
        let model = BaselineModel::train_with_space(train, label_space.clone(), config.smoothing)?;
        let temperature = if config.calibrate {
            model.fit_temperature(validation)?
        } else {
            config.temperature
        };
        let model = model.with_temperature(temperature)?;
        let keyword_map =
            induce_lexical_map(train, &label_space, config.min_precision, config.min_count)?;
        let contextual = ContextualAgent::new(config.recency).with_history_len(config.history_len);
        let mut artifacts = Self {
            label_space,
            model,
            keyword_map,
            rules,
            weights: AgentWeights::default(),
            contextual,
        };
        artifacts.weights =
            estimate_weights(&artifacts.suite(), &artifacts.model, validation, train)?;
        Ok(artifacts)
    }

    /// Writes one JSON file per artifact into `dir`, creating it if needed.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = [
            (MODEL_FILE, serde_json::to_string_pretty(&self.model)?),
            (KEYWORD_MAP_FILE, self.keyword_map.to_json()?),
            (RULES_FILE, self.rules.to_json()?),
            (WEIGHTS_FILE, serde_json::to_string_pretty(&self.weights)?),
            (CONTEXTUAL_FILE, serde_json::to_string_pretty(&self.contextual)?),
        ];
        for (name, body) in files {
            let path = dir.join(name);
            fs::write(&path, body + "\n").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }

    /// Reads what [`save`](Artifacts::save) wrote. The label space comes
    /// from the model.
    pub fn load(dir: &Path) -> Result<Self> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(|e| Error::io(path, e))
        };
        let model: BaselineModel = serde_json::from_str(&read(MODEL_FILE)?)?;
        let label_space = model.label_space().clone();
        let keyword_map = KeywordMap::from_json(&read(KEYWORD_MAP_FILE)?, &label_space)?;
        let rules = RuleSet::from_json(&read(RULES_FILE)?, &label_space)?;
        let weights: AgentWeights = serde_json::from_str(&read(WEIGHTS_FILE)?)?;
        let contextual: ContextualAgent = serde_json::from_str(&read(CONTEXTUAL_FILE)?)?;
        if contextual.history_len == 0 {
            return Err(Error::InvalidParameter("history_len must be positive".into()));
        }
        Ok(Self {
            label_space,
            model,
            keyword_map,
            rules,
            weights,
            contextual,
        })
    }

    /// All three verdict agents with the estimated weights.
    pub fn suite(&self) -> AgentSuite {
        AgentSuite::new(
            Some(LexicalAgent::new(self.keyword_map.clone())),
            Some(self.contextual.clone()),
            Some(LogicAgent::new(self.rules.clone())),
        )
        .with_weights(self.weights.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{split, Fixture};
    use crate::domain::AgentId;

    fn trained(config: &TrainingConfig) -> Artifacts {
        let docs = Fixture::Intent.documents();
        let space = Fixture::Intent.label_space();
        let parts = split(&docs, config.split, config.seed, config.stratify).unwrap();
        let rules = Fixture::Intent.rules(&space).unwrap();
        Artifacts::train(&parts.train, &parts.validation, space, rules, config).unwrap()
    }

    #[test]
    fn deterministic_for_a_seed() {
        let cfg = TrainingConfig::default();
        let a = trained(&cfg);
        let b = trained(&cfg);
        assert_eq!(a.model, b.model);
        assert_eq!(a.keyword_map.to_json().unwrap(), b.keyword_map.to_json().unwrap());
        assert_eq!(a.weights, b.weights);
    }

    #[test]
    fn calibration_switch() {
        let fixed = trained(&TrainingConfig {
            calibrate: false,
            temperature: 2.5,
            ..Default::default()
        });
        assert_eq!(fixed.model.temperature(), 2.5);
        let fitted = trained(&TrainingConfig::default());
        assert!(fitted.model.temperature() != 1.0);
    }

    #[test]
    fn suite_carries_all_agents_and_weights() {
        let a = trained(&TrainingConfig::default());
        let suite = a.suite();
        assert_eq!(suite.agents().len(), 3);
        assert_eq!(suite.weights, a.weights);
        for agent in AgentId::ALL {
            assert!(a.weights.get(agent).unwrap() > 0.0);
        }
        assert_eq!(a.model.label_space(), &a.label_space);
    }

    #[test]
    fn save_then_load_round_trips() {
        let a = trained(&TrainingConfig::default());
        let dir = tempfile::tempdir().unwrap();
        a.save(dir.path()).unwrap();
        let b = Artifacts::load(dir.path()).unwrap();
        assert_eq!(b.model, a.model);
        assert_eq!(b.label_space, a.label_space);
        assert_eq!(b.keyword_map.to_json().unwrap(), a.keyword_map.to_json().unwrap());
        assert_eq!(b.rules.specs(), a.rules.specs());
        assert_eq!(b.weights, a.weights);
        assert_eq!(b.contextual, a.contextual);
        let again = tempfile::tempdir().unwrap();
        b.save(again.path()).unwrap();
        for name in [MODEL_FILE, KEYWORD_MAP_FILE, RULES_FILE, WEIGHTS_FILE, CONTEXTUAL_FILE] {
            let x = fs::read(dir.path().join(name)).unwrap();
            assert_eq!(x, fs::read(again.path().join(name)).unwrap(), "{name}");
        }
    }

    #[test]
    fn load_names_the_missing_file() {
        let dir = tempfile::tempdir().unwrap();
        let err = Artifacts::load(dir.path()).unwrap_err();
        assert!(err.to_string().contains(MODEL_FILE), "{err}");
    }

    #[test]
    fn config_json_defaults_and_rejects_unknown_fields() {
        let cfg: TrainingConfig = serde_json::from_str(r#"{"seed": 7}"#).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.min_precision, 0.7);
        assert!(serde_json::from_str::<TrainingConfig>(r#"{"sede": 7}"#).is_err());
    }
}
