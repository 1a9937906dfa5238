use std::sync::OnceLock;

use cascade_core::agents::{KeywordMap, RuleSet};
use cascade_core::data::{split, Fixture};
use cascade_core::evaluation::Experiment;
use cascade_core::{
    classify_cascade, AgentId, AgentWeights, Artifacts, BaselineModel, Cascade, Classifier,
    Document, Route, RouterConfig, TrainingConfig, UserHistory,
};
use proptest::prelude::*;

struct Trained {
    artifacts: Artifacts,
    test: Vec<Document>,
    background: Vec<Document>,
}

fn intent() -> &'static Trained {
    static CELL: OnceLock<Trained> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = TrainingConfig::default();
        let docs = Fixture::Intent.documents();
        let space = Fixture::Intent.label_space();
        let parts = split(&docs, cfg.split, cfg.seed, cfg.stratify).unwrap();
        let rules = Fixture::Intent.rules(&space).unwrap();
        let artifacts = Artifacts::train(&parts.train, &parts.validation, space, rules, &cfg).unwrap();
        let mut background = parts.train;
        background.extend(parts.validation);
        Trained {
            artifacts,
            test: parts.test,
            background,
        }
    })
}

#[test]
fn ambiguous_request_escalates() {
    let t = intent();
    let doc = Document::new("q", "I need more information about the order process.", 0).unwrap();
    let primary = t.artifacts.model.classify(&doc.text).unwrap();
    assert!(primary.confidence < 0.7, "{primary:?}");
    let mut history = UserHistory::default();
    let d = classify_cascade(
        &doc,
        &t.artifacts.model,
        &t.artifacts.suite(),
        &RouterConfig::new(0.7).unwrap(),
        &mut history,
    )
    .unwrap();
    assert_eq!(d.path, Route::Escalated);
    let consensus = d.consensus.unwrap();
    assert!(!consensus.fallback_used);
    // the logic agent's order rule fires
    let logic = d.verdicts.iter().find(|v| v.agent == AgentId::Logic).unwrap();
    assert_eq!(logic.classification().unwrap().label.name, "Information Request");
    assert!(logic.rationale.contains("ir-more-info-order"));
}

#[test]
fn cascade_struct_matches_experiment_without_background() {
    let t = intent();
    let config = RouterConfig::new(0.7).unwrap();
    let exp = Experiment::new(&t.artifacts.model, &t.test, &[]).unwrap();
    for suite in [t.artifacts.suite(), t.artifacts.suite().without(AgentId::Contextual)] {
        let expected = exp.run(&suite, &config).unwrap();
        let mut cascade = Cascade::new(&t.artifacts.model, suite.clone(), config);
        assert_eq!(cascade.classify_corpus(&t.test).unwrap(), expected);
        let mut one_by_one = Cascade::new(&t.artifacts.model, suite, config);
        let mut ordered: Vec<&Document> = t.test.iter().collect();
        ordered.sort_by_key(|d| d.seq);
        for doc in ordered {
            let d = one_by_one.classify(doc).unwrap();
            let i = t.test.iter().position(|x| x.id == doc.id).unwrap();
            assert_eq!(d, expected[i]);
        }
    }
}

#[test]
fn history_holds_final_labels() {
    let t = intent();
    let config = RouterConfig::new(0.7).unwrap();
    let mut cascade = Cascade::new(&t.artifacts.model, t.artifacts.suite(), config);
    let decisions = cascade.classify_corpus(&t.test).unwrap();
    let user = t.test[0].user_id.as_deref().unwrap();
    let mut mine: Vec<(u64, String)> = t
        .test
        .iter()
        .zip(&decisions)
        .filter(|(d, _)| d.user_id.as_deref() == Some(user))
        .map(|(d, r)| (d.seq, r.outcome.label.name.clone()))
        .collect();
    mine.sort();
    let tail: Vec<String> = mine.iter().rev().take(5).rev().map(|(_, l)| l.clone()).collect();
    let recorded: Vec<String> = cascade.history().recent(user).iter().map(|l| l.name.clone()).collect();
    assert_eq!(recorded, tail);
}

#[test]
fn artifacts_round_trip_through_json() {
    let t = intent();
    let a = &t.artifacts;
    let model: BaselineModel = serde_json::from_str(&serde_json::to_string(&a.model).unwrap()).unwrap();
    assert_eq!(model, a.model);
    let map = KeywordMap::from_json(&a.keyword_map.to_json().unwrap(), &a.label_space).unwrap();
    assert_eq!(map.to_json().unwrap(), a.keyword_map.to_json().unwrap());
    let rules = RuleSet::from_json(&a.rules.to_json().unwrap(), &a.label_space).unwrap();
    assert_eq!(rules.specs(), a.rules.specs());
    let weights: AgentWeights = serde_json::from_str(&serde_json::to_string(&a.weights).unwrap()).unwrap();
    assert_eq!(weights, a.weights);
}

#[test]
fn bundled_rule_sets_fit_the_guideline() {
    for fixture in [Fixture::Spam, Fixture::Intent] {
        let rules = fixture.rules(&fixture.label_space()).unwrap();
        assert!(!rules.is_empty() && rules.len() <= 50);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn escalations_never_shrink_as_tau_grows(mut taus in proptest::collection::vec(0.0f64..=1.0, 1..8)) {
        taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let t = intent();
        let exp = Experiment::new(&t.artifacts.model, &t.test, &t.background).unwrap();
        let rows = exp.sweep_threshold(&t.artifacts.suite(), &taus).unwrap();
        for w in rows.windows(2) {
            prop_assert!(w[0].report.decomposition.n_escalate <= w[1].report.decomposition.n_escalate);
            prop_assert!(w[0].report.escalation_rate <= w[1].report.escalation_rate);
        }
        for r in &rows {
            let d = &r.report.decomposition;
            prop_assert!((d.overall - d.recombined()).abs() < 1e-12);
            prop_assert!((r.report.accuracy() - d.overall).abs() < 1e-12);
        }
    }
}
