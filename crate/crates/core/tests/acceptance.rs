//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::{BTreeMap, HashMap};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use cascade_core::data::{split, Fixture};
use cascade_core::evaluation::{
    augment, evaluate, paired_t_test, robustness_score, CascadeRun, CorpusPredictor, Experiment,
    Perturbation,
};
use cascade_core::{
    aggregate, decompose_accuracy, route, AgentId, AgentSuite, AgentVerdict, AgentWeights,
    Artifacts, Classification, Classifier, Document, Label, LabelSpace, Route, RoutedDecision,
    RouterConfig, TrainingConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        // NaN makes the condition false and fails the check
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("consensus worked example", consensus_worked_example),
        ("threshold semantics grid", threshold_grid),
        ("decomposition identity", decomposition_identity),
        ("cascade degeneracy on spam", cascade_degeneracy),
        ("consensus brute-force equivalence", consensus_brute_force),
        ("intent fixture improvement", fixture_improvement),
        ("robustness determinism", robustness_determinism),
        ("paired t-test table values", t_test_table),
        ("metric hand count", metric_hand_count),
    ];
    // keep panic messages out of the report; they are captured below
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(panic_message(&p)));
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS  {name} ({detail}; {ms} ms)"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} ({ms} ms)");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        format!("panicked: {s}")
    } else if let Some(s) = p.downcast_ref::<String>() {
        format!("panicked: {s}")
    } else {
        "panicked".into()
    }
}

fn intents() -> LabelSpace {
    Fixture::Intent.label_space()
}

fn consensus_worked_example() -> Outcome {
    let space = intents();
    let ir = space.resolve("Information Request").map_err(err)?.clone();
    let verdicts: Vec<AgentVerdict> = AgentId::ALL
        .iter()
        .zip([0.70, 0.75, 0.80])
        .map(|(&a, c)| AgentVerdict::suggest(a, Classification::new(ir.clone(), c).unwrap(), "worked example".into()))
        .collect();
    let primary = Classification::new(space.labels()[0].clone(), 0.65).map_err(err)?;
    let r = aggregate(&verdicts, &AgentWeights::default(), &primary).map_err(err)?;
    ensure!(r.outcome.label == ir, "label {}", r.outcome.label.name);
    ensure!((r.outcome.confidence - 0.75).abs() < 1e-12, "confidence {}", r.outcome.confidence);
    ensure!(!r.fallback_used && r.participants == 3, "participants {}", r.participants);
    Ok(format!("{} at {:.12}", r.outcome.label.name, r.outcome.confidence))
}

fn threshold_grid() -> Outcome {
    let space = intents();
    let label = space.labels()[0].clone();
    let at = |c: f64| Classification::new(label.clone(), c).unwrap();
    let mut cells = 0;
    for ic in 0..=20u32 {
        for it in 0..=20u32 {
            let c = at(ic as f64 / 20.0);
            let cfg = RouterConfig::new(it as f64 / 20.0).map_err(err)?;
            let expected = if ic >= it { Route::Accepted } else { Route::Escalated };
            ensure!(route(&c, &cfg) == expected, "c={ic}/20 tau={it}/20 routed {:?}", route(&c, &cfg));
            ensure!(route(&c, &RouterConfig::disabled()) == Route::Accepted, "disabled router escalated");
            cells += 1;
        }
    }
    let tau = RouterConfig::new(0.7).map_err(err)?;
    ensure!(route(&at(0.65), &tau) == Route::Escalated, "0.65 against 0.7 accepted");
    ensure!(route(&at(0.7), &tau) == Route::Accepted, "0.7 against 0.7 escalated");
    Ok(format!("{cells} grid cells"))
}

fn decomposition_identity() -> Outcome {
    let space = LabelSpace::new(["a", "b", "c", "d"]).map_err(err)?;
    let labels = space.labels();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0f64;
    for set in 0..1000 {
        let n = rng.random_range(1..=200usize);
        let mut decisions = Vec::with_capacity(n);
        let mut gold = Vec::with_capacity(n);
        let mut correct = 0usize;
        for i in 0..n {
            let g = labels[rng.random_range(0..labels.len())].clone();
            let p = Classification::new(labels[rng.random_range(0..labels.len())].clone(), rng.random()).unwrap();
            let f = Classification::new(labels[rng.random_range(0..labels.len())].clone(), rng.random()).unwrap();
            let escalated = rng.random_bool(rng_share(set));
            let outcome = if escalated { f } else { p.clone() };
            correct += (outcome.label == g) as usize;
            decisions.push(RoutedDecision {
                document_id: format!("d{i}"),
                primary: p,
                path: if escalated { Route::Escalated } else { Route::Accepted },
                outcome,
                consensus: None,
                verdicts: Vec::new(),
            });
            gold.push(g);
        }
        let r = decompose_accuracy(&decisions, &gold).map_err(err)?;
        let oracle = correct as f64 / n as f64;
        ensure!(r.overall == oracle, "set {set}: overall {} vs counted {oracle}", r.overall);
        let gap = (r.overall - r.recombined()).abs();
        worst = worst.max(gap);
        ensure!(gap < 1e-12, "set {set}: gap {gap:e}");
    }
    Ok(format!("1000 sets, worst gap {worst:e}"))
}

/// Escalation share per set, including the all-accepted and all-escalated extremes.
fn rng_share(set: usize) -> f64 {
    match set % 10 {
        0 => 0.0,
        1 => 1.0,
        k => k as f64 / 10.0,
    }
}

fn train(fixture: Fixture) -> Result<(Artifacts, Vec<Document>, Vec<Document>), String> {
    let cfg = TrainingConfig::default();
    let docs = fixture.documents();
    let space = fixture.label_space();
    let parts = split(&docs, cfg.split, cfg.seed, cfg.stratify).map_err(err)?;
    let rules = fixture.rules(&space).map_err(err)?;
    let artifacts = Artifacts::train(&parts.train, &parts.validation, space, rules, &cfg).map_err(err)?;
    let mut background = parts.train;
    background.extend(parts.validation);
    Ok((artifacts, parts.test, background))
}

fn cascade_degeneracy() -> Outcome {
    let (a, _, _) = train(Fixture::Spam)?;
    let docs = Fixture::Spam.documents();
    let expected: Vec<Classification> = docs
        .iter()
        .map(|d| a.model.classify(&d.text))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let exp = Experiment::new(&a.model, &docs, &[]).map_err(err)?;
    let runs = [
        ("tau 0", exp.run(&a.suite(), &RouterConfig::new(0.0).map_err(err)?)),
        ("no agents", exp.run(&AgentSuite::empty(), &RouterConfig::new(0.7).map_err(err)?)),
    ];
    for (name, run) in runs {
        let decisions = run.map_err(err)?;
        ensure!(decisions.len() == docs.len(), "{name}: {} decisions", decisions.len());
        for ((d, doc), want) in decisions.iter().zip(&docs).zip(&expected) {
            ensure!(d.document_id == doc.id, "{name}: order broken at {}", doc.id);
            ensure!(d.outcome == *want, "{name}: {} differs from primary", doc.id);
        }
    }
    Ok(format!("{} documents, both configurations", docs.len()))
}

fn consensus_brute_force() -> Outcome {
    let space = LabelSpace::new(["x", "y", "z"]).map_err(err)?;
    let labels = space.labels();
    let primary = Classification::new(labels[2].clone(), 0.5).map_err(err)?;
    // None abstains; Some((label, tenths))
    let mut options: Vec<Option<(usize, u32)>> = vec![None];
    for l in 0..3 {
        for k in 0..=10 {
            options.push(Some((l, k)));
        }
    }
    let weight_sets: [[u32; 3]; 6] = [[1, 1, 1], [1, 2, 3], [3, 1, 2], [2, 2, 1], [0, 1, 2], [0, 0, 1]];
    let mut cases = 0usize;
    for ws in weight_sets {
        let weights = AgentWeights::new(
            AgentId::ALL.iter().zip(ws).map(|(&a, w)| (a, w as f64)).collect::<BTreeMap<_, _>>(),
        )
        .map_err(err)?;
        for &v0 in &options {
            for &v1 in &options {
                for &v2 in &options {
                    let votes = [v0, v1, v2];
                    let verdicts: Vec<AgentVerdict> = AgentId::ALL
                        .iter()
                        .zip(votes)
                        .map(|(&a, v)| match v {
                            None => AgentVerdict::abstain(a, "no evidence"),
                            Some((l, k)) => AgentVerdict::suggest(
                                a,
                                Classification::new(labels[l].clone(), k as f64 / 10.0).unwrap(),
                                "grid".into(),
                            ),
                        })
                        .collect();
                    let got = aggregate(&verdicts, &weights, &primary).map_err(err)?;
                    let (label, confidence) = exact_consensus(&votes, &ws, &primary, labels);
                    ensure!(
                        got.outcome.label == label && (got.outcome.confidence - confidence).abs() < 1e-12,
                        "weights {ws:?} votes {votes:?}: got {} {} want {} {}",
                        got.outcome.label.name,
                        got.outcome.confidence,
                        label.name,
                        confidence
                    );
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} cases"))
}

/// Integer arithmetic in tenths: weighted argmax with the lowest label id on
/// ties, confidence = winning score over the participating weight.
fn exact_consensus(
    votes: &[Option<(usize, u32)>; 3],
    weights: &[u32; 3],
    primary: &Classification,
    labels: &[Label],
) -> (Label, f64) {
    let mut score = [0u32; 3];
    let mut suggested = [false; 3];
    let mut weight_sum = 0u32;
    for (v, &w) in votes.iter().zip(weights) {
        if let (Some((l, k)), true) = (v, w > 0) {
            score[*l] += w * k;
            suggested[*l] = true;
            weight_sum += w;
        }
    }
    if weight_sum == 0 {
        return (primary.label.clone(), primary.confidence);
    }
    let mut best = None;
    for l in 0..3 {
        if suggested[l] && best.is_none_or(|b: usize| score[l] > score[b]) {
            best = Some(l);
        }
    }
    let b = best.unwrap();
    (labels[b].clone(), score[b] as f64 / (10 * weight_sum) as f64)
}

fn fixture_improvement() -> Outcome {
    let (a, test, background) = train(Fixture::Intent)?;
    let exp = Experiment::new(&a.model, &test, &background).map_err(err)?;
    let primary = exp.evaluate_primary().map_err(err)?;
    let full = exp.evaluate(&a.suite(), &RouterConfig::new(0.7).map_err(err)?).map_err(err)?;
    let gain = full.accuracy() - primary.accuracy();
    let detail = format!(
        "primary {:.4}, full {:.4}, gain {:+.2} pp, escalation {:.3}",
        primary.accuracy(),
        full.accuracy(),
        100.0 * gain,
        full.escalation_rate
    );
    ensure!(gain >= 0.02, "{detail}");
    Ok(detail)
}

fn robustness_determinism() -> Outcome {
    let (score, n) = robustness_against_oracle(Fixture::Spam)?;
    // spam is nearly separable, so repeat the oracle check where errors occur
    let (intent_score, _) = robustness_against_oracle(Fixture::Intent)?;
    Ok(format!("spam score {score:.6} over {n} variants; intent cross-check {intent_score:.6}"))
}

fn robustness_against_oracle(fixture: Fixture) -> Result<(f64, usize), String> {
    let (a, test, background) = train(fixture)?;
    let suite = a.suite();
    let config = RouterConfig::new(0.7).map_err(err)?;
    let system = || CascadeRun {
        primary: &a.model,
        agents: &suite,
        config,
        background: &background,
    };
    let kinds = Perturbation::DEFAULT;
    let first = robustness_score(&mut system(), &test, 42, &kinds).map_err(err)?;
    let second = robustness_score(&mut system(), &test, 42, &kinds).map_err(err)?;
    let (j1, j2) = (
        serde_json::to_string(&first).map_err(err)?,
        serde_json::to_string(&second).map_err(err)?,
    );
    ensure!(j1 == j2, "reports differ:\n{j1}\n{j2}");

    let mut pairs: Vec<(String, String)> = Vec::new();
    for kind in kinds {
        let variants: Vec<Document> = test.iter().flat_map(|d| augment(d, 42, &[kind])).collect();
        let predicted = system().predict_corpus(&variants).map_err(err)?;
        for (v, p) in variants.iter().zip(predicted) {
            pairs.push((v.gold.clone().unwrap(), p.name));
        }
    }
    let oracle = macro_f1_oracle(&pairs);
    ensure!(first.n_variants == pairs.len(), "{} variants vs {}", first.n_variants, pairs.len());
    ensure!((first.score - oracle).abs() < 1e-9, "score {} vs oracle {oracle}", first.score);
    Ok((first.score, first.n_variants))
}

/// Macro-F1 from (gold, predicted) name pairs, averaged over every class seen
/// on either side.
fn macro_f1_oracle(pairs: &[(String, String)]) -> f64 {
    let mut tp: HashMap<&str, f64> = HashMap::new();
    let mut fp: HashMap<&str, f64> = HashMap::new();
    let mut fn_: HashMap<&str, f64> = HashMap::new();
    for (g, p) in pairs {
        tp.entry(g).or_default();
        tp.entry(p).or_default();
        if g == p {
            *tp.get_mut(g.as_str()).unwrap() += 1.0;
        } else {
            *fp.entry(p).or_default() += 1.0;
            *fn_.entry(g).or_default() += 1.0;
        }
    }
    let f1s: Vec<f64> = tp
        .iter()
        .map(|(c, &t)| {
            let precision = if t > 0.0 { t / (t + fp.get(c).copied().unwrap_or(0.0)) } else { 0.0 };
            let recall = if t > 0.0 { t / (t + fn_.get(c).copied().unwrap_or(0.0)) } else { 0.0 };
            if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            }
        })
        .collect();
    f1s.iter().sum::<f64>() / f1s.len() as f64
}

fn t_test_table() -> Outcome {
    let r = paired_t_test(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]).map_err(err)?;
    ensure!((r.t - 3.4641).abs() <= 1e-3, "t {}", r.t);
    ensure!((r.p - 0.0742).abs() <= 1e-3, "p {}", r.p);
    ensure!(r.df == 2, "df {}", r.df);
    Ok(format!("t {:.4}, p {:.4}", r.t, r.p))
}

fn metric_hand_count() -> Outcome {
    let space = LabelSpace::new(["A", "B"]).map_err(err)?;
    let l = |n: &str| space.by_name(n).unwrap().clone();
    let gold: Vec<Label> = ["A", "A", "B", "B"].iter().map(|n| l(n)).collect();
    let decisions: Vec<RoutedDecision> = ["A", "B", "B", "B"]
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let c = Classification::new(l(n), 0.9).unwrap();
            RoutedDecision {
                document_id: format!("d{i}"),
                primary: c.clone(),
                path: Route::Accepted,
                outcome: c,
                consensus: None,
                verdicts: Vec::new(),
            }
        })
        .collect();
    let r = evaluate(&decisions, &gold, &space).map_err(err)?;
    let f1 = |n: &str| r.metrics.class(n).map(|c| c.f1);
    ensure!(r.accuracy() == 0.75, "accuracy {}", r.accuracy());
    ensure!(f1("A") == Some(2.0 / 3.0), "F1(A) {:?}", f1("A"));
    ensure!(f1("B") == Some(0.8), "F1(B) {:?}", f1("B"));
    Ok("accuracy 0.75, F1(A) 2/3, F1(B) 0.8".into())
}
