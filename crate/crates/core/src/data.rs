//! Corpus loading, the canonical JSONL format, seeded splits and the bundled
//! synthetic fixtures.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::agents::RuleSet;
use crate::domain::{label_space_from_corpus, Document, LabelSpace};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFormat {
    Jsonl,
    SmsTsv,
    AgCsv,
    ImdbDir,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub format: CorpusFormat,
    pub path: PathBuf,
}

const SPLIT_STREAM: u64 = 1;

/// AG News class indices 1..=4, in order.
pub const AG_NEWS_LABELS: [&str; 4] = ["World", "Sports", "Business", "Sci/Tech"];

/// One line of the canonical JSONL format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalRecord {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_id: Option<String>,
}

#[derive(Deserialize)]
struct LooseRecord {
    id: Option<String>,
    text: Option<String>,
    label: Option<String>,
    user_id: Option<String>,
}

/// NFC normalization; whitespace controls become spaces, other controls are dropped.
pub fn normalize_text(raw: &str) -> String {
    raw.nfc()
        .filter_map(|c| {
            if c.is_control() {
                c.is_whitespace().then_some(' ')
            } else {
                Some(c)
            }
        })
        .collect()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn make_doc(
    id: String,
    text: &str,
    seq: u64,
    line: usize,
    label: Option<String>,
    user: Option<String>,
) -> Result<Document> {
    let text = normalize_text(text);
    let mut doc = Document::new(id, text, seq).map_err(|_| Error::Malformed {
        line,
        reason: "text is empty".into(),
    })?;
    doc.gold = label.filter(|l| !l.is_empty());
    doc.user_id = user;
    Ok(doc)
}

pub fn parse_jsonl(content: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: LooseRecord = serde_json::from_str(line).map_err(|e| Error::Malformed {
            line: line_no,
            reason: e.to_string(),
        })?;
        let text = rec.text.ok_or_else(|| Error::Malformed {
            line: line_no,
            reason: "missing field `text`".into(),
        })?;
        let seq = docs.len() as u64;
        let id = rec.id.unwrap_or_else(|| seq.to_string());
        docs.push(make_doc(id, &text, seq, line_no, rec.label, rec.user_id)?);
    }
    non_empty(docs)
}

pub fn parse_sms_tsv(content: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (label, text) = line.split_once('\t').ok_or_else(|| Error::Malformed {
            line: line_no,
            reason: "expected `label<TAB>text`".into(),
        })?;
        let label = label.trim();
        if label.is_empty() {
            return Err(Error::Malformed {
                line: line_no,
                reason: "empty label".into(),
            });
        }
        let seq = docs.len() as u64;
        docs.push(make_doc(seq.to_string(), text, seq, line_no, Some(label.to_string()), None)?);
    }
    non_empty(docs)
}

pub fn parse_ag_csv(content: &str) -> Result<Vec<Document>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(content.as_bytes());
    let mut docs = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line_no = i + 1;
        let row = row.map_err(|e| Error::Malformed {
            line: line_no,
            reason: e.to_string(),
        })?;
        if row.len() != 3 {
            return Err(Error::Malformed {
                line: line_no,
                reason: format!("expected 3 fields, found {}", row.len()),
            });
        }
        let label = row[0]
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|k| (1..=AG_NEWS_LABELS.len()).contains(k))
            .map(|k| AG_NEWS_LABELS[k - 1].to_string())
            .ok_or_else(|| Error::Malformed {
                line: line_no,
                reason: format!("class index `{}` not in 1..=4", &row[0]),
            })?;
        let text = format!("{} {}", row[1].trim(), row[2].trim());
        let seq = docs.len() as u64;
        docs.push(make_doc(seq.to_string(), &text, seq, line_no, Some(label), None)?);
    }
    non_empty(docs)
}

fn load_imdb_dir(root: &Path) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for class in ["neg", "pos"] {
        let dir = root.join(class);
        let mut files: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        for file in files {
            let text = read(&file)?;
            let name = file
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let seq = docs.len() as u64;
            let line = docs.len() + 1;
            docs.push(make_doc(
                format!("{class}/{name}"),
                &text,
                seq,
                line,
                Some(class.to_string()),
                None,
            )?);
        }
    }
    non_empty(docs)
}

fn non_empty(docs: Vec<Document>) -> Result<Vec<Document>> {
    if docs.is_empty() {
        Err(Error::EmptyCorpus)
    } else {
        Ok(docs)
    }
}

pub fn load_corpus(spec: &CorpusSpec) -> Result<Vec<Document>> {
    if !spec.path.exists() {
        return Err(Error::io(
            &spec.path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        ));
    }
    match spec.format {
        CorpusFormat::Jsonl => parse_jsonl(&read(&spec.path)?),
        CorpusFormat::SmsTsv => parse_sms_tsv(&read(&spec.path)?),
        CorpusFormat::AgCsv => parse_ag_csv(&read(&spec.path)?),
        CorpusFormat::ImdbDir => load_imdb_dir(&spec.path),
    }
}

pub fn write_jsonl<W: Write>(docs: &[Document], mut out: W) -> Result<()> {
    for doc in docs {
        let rec = CanonicalRecord {
            id: doc.id.clone(),
            text: doc.text.clone(),
            label: doc.gold.clone(),
            user_id: doc.user_id.clone(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")
            .map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.6,
            validation: 0.2,
            test: 0.2,
        }
    }
}

impl SplitFractions {
    fn validate(&self) -> Result<()> {
        let all = [self.train, self.validation, self.test];
        if all.iter().any(|f| !(*f > 0.0 && f.is_finite())) || all.iter().sum::<f64>() > 1.0 + 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "split fractions must be positive and sum to at most 1, got {all:?}"
            )));
        }
        Ok(())
    }

    fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let nf = n as f64;
        let train = ((nf * self.train).round() as usize).min(n);
        let validation = ((nf * self.validation).round() as usize).min(n - train);
        let test = ((nf * self.test).round() as usize).min(n - train - validation);
        (train, validation, test)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<Document>,
    pub validation: Vec<Document>,
    pub test: Vec<Document>,
}

/// Seeded shuffle followed by contiguous slicing. With `stratify`, each label
/// is shuffled and sliced separately. Each slice is returned in `seq` order.
pub fn split(docs: &[Document], fractions: SplitFractions, seed: u64, stratify: bool) -> Result<Split> {
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    fractions.validate()?;
    let groups: Vec<Vec<&Document>> = if stratify {
        let space = label_space_from_corpus(docs)?;
        let mut groups = vec![Vec::new(); space.len()];
        for doc in docs {
            groups[doc.gold_label(&space)?.id].push(doc);
        }
        groups
    } else {
        vec![docs.iter().collect()]
    };

    let mut out = Split {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
    };
    for (g, mut group) in groups.into_iter().enumerate() {
        rng::shuffle(&mut rng::stream(seed, &[SPLIT_STREAM, g as u64]), &mut group);
        let (a, b, c) = fractions.sizes(group.len());
        out.train.extend(group[..a].iter().map(|d| (*d).clone()));
        out.validation.extend(group[a..a + b].iter().map(|d| (*d).clone()));
        out.test.extend(group[a + b..a + b + c].iter().map(|d| (*d).clone()));
    }
    for slice in [&mut out.train, &mut out.validation, &mut out.test] {
        slice.sort_by_key(|d| d.seq);
    }
    Ok(out)
}

/// Synthetic corpora shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fixture {
    /// ~500 short spam/ham messages.
    Spam,
    /// ~200 workplace messages over five intents, with user ids.
    Intent,
}

impl Fixture {
    pub fn jsonl(self) -> &'static str {
        match self {
            Fixture::Spam => include_str!("../fixtures/spam.jsonl"),
            Fixture::Intent => include_str!("../fixtures/intent.jsonl"),
        }
    }

    pub fn rules_json(self) -> &'static str {
        match self {
            Fixture::Spam => include_str!("../fixtures/spam_rules.json"),
            Fixture::Intent => include_str!("../fixtures/intent_rules.json"),
        }
    }

    pub fn documents(self) -> Vec<Document> {
        parse_jsonl(self.jsonl()).expect("bundled fixture parses")
    }

    pub fn label_space(self) -> LabelSpace {
        label_space_from_corpus(&self.documents()).expect("bundled fixture is labeled")
    }

    pub fn rules(self, space: &LabelSpace) -> Result<RuleSet> {
        RuleSet::from_json(self.rules_json(), space)
    }
}

impl std::str::FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spam" => Ok(Fixture::Spam),
            "intent" => Ok(Fixture::Intent),
            other => Err(Error::InvalidParameter(format!("unknown fixture `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sms_line() {
        let docs = parse_sms_tsv("ham\tOk lar... Joking wif u oni\nspam\tWIN now\n").unwrap();
        assert_eq!(docs[0].gold.as_deref(), Some("ham"));
        assert_eq!(docs[0].text, "Ok lar... Joking wif u oni");
        assert_eq!(docs[1].seq, 1);
        assert!(matches!(parse_sms_tsv("no tab here"), Err(Error::Malformed { line: 1, .. })));
    }

    #[test]
    fn jsonl_missing_text_reports_line() {
        let content = "{\"text\": \"fine\", \"label\": \"a\"}\n\n{\"label\": \"b\"}\n";
        match parse_jsonl(content) {
            Err(Error::Malformed { line, reason }) => {
                assert_eq!(line, 3);
                assert!(reason.contains("text"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_jsonl("not json"), Err(Error::Malformed { line: 1, .. })));
        assert!(matches!(parse_jsonl("\n\n"), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn ag_class_index() {
        let docs = parse_ag_csv("3,\"Stocks rally\",\"Markets up, again\"\n1,a,b\n").unwrap();
        assert_eq!(docs[0].gold.as_deref(), Some("Business"));
        assert_eq!(docs[0].text, "Stocks rally Markets up, again");
        assert_eq!(docs[1].gold.as_deref(), Some("World"));
        assert!(matches!(parse_ag_csv("5,a,b\n"), Err(Error::Malformed { line: 1, .. })));
        assert!(matches!(parse_ag_csv("1,a\n"), Err(Error::Malformed { .. })));
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_text("e\u{301}\u{0007}x\ty"), "\u{e9}x y");
    }

    #[test]
    fn split_sizes_and_determinism() {
        let docs: Vec<Document> = (0..10)
            .map(|i| Document::new(i.to_string(), "t", i).unwrap().with_gold(if i % 2 == 0 { "a" } else { "b" }))
            .collect();
        let f = SplitFractions {
            train: 0.8,
            validation: 0.1,
            test: 0.1,
        };
        let s = split(&docs, f, 3, false).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (8, 1, 1));
        assert_eq!(s, split(&docs, f, 3, false).unwrap());
        assert_ne!(s, split(&docs, f, 4, false).unwrap());
        assert!(s.train.windows(2).all(|w| w[0].seq < w[1].seq));
        let bad = SplitFractions {
            train: 0.9,
            validation: 0.2,
            test: 0.1,
        };
        assert!(split(&docs, bad, 3, false).is_err());
        assert!(matches!(split(&[], f, 3, false), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn stratified_split_is_balanced() {
        let docs: Vec<Document> = (0..100)
            .map(|i| Document::new(i.to_string(), "t", i).unwrap().with_gold(if i < 50 { "a" } else { "b" }))
            .collect();
        for seed in 0..20 {
            let s = split(&docs, SplitFractions::default(), seed, true).unwrap();
            for slice in [&s.train, &s.validation, &s.test] {
                let a = slice.iter().filter(|d| d.gold.as_deref() == Some("a")).count() as i64;
                let b = slice.len() as i64 - a;
                assert!((a - b).abs() <= 1, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn fixtures_load() {
        let spam = Fixture::Spam.documents();
        assert!(spam.len() >= 450);
        assert_eq!(Fixture::Spam.label_space().len(), 2);
        let intent = Fixture::Intent.documents();
        assert!(intent.len() >= 180);
        assert_eq!(Fixture::Intent.label_space().len(), 5);
        assert!(intent.iter().all(|d| d.user_id.is_some()));
        let rules = Fixture::Intent.rules(&Fixture::Intent.label_space()).unwrap();
        assert!(rules.len() <= 50);
        Fixture::Spam.rules(&Fixture::Spam.label_space()).unwrap();
    }
}
