//! Corpus text format and the JSON model file.
//!
//! Corpora hold one sequence per line. In token mode each whitespace
//! separated token is a symbol and the vocabulary is built in order of first
//! appearance; in integer mode tokens are 1-based symbol ids checked against
//! a declared vocabulary size. Blank lines are skipped.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{PbctError, Result};
use crate::model::{
    AlphaSchedule, ContextTree, CountTable, Hyperparams, NodeIndex, Partition, SequenceCorpus,
    Vocabulary,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusMode {
    Tokens,
    Integers { vocab_size: u32 },
}

pub fn read_corpus(path: impl AsRef<Path>, mode: CorpusMode) -> Result<SequenceCorpus> {
    let text = fs::read_to_string(path)?;
    parse_corpus(&text, mode)
}

fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.split_ascii_whitespace().collect::<Vec<_>>()))
        .filter(|(_, tokens)| !tokens.is_empty())
}

pub fn parse_corpus(text: &str, mode: CorpusMode) -> Result<SequenceCorpus> {
    match mode {
        CorpusMode::Tokens => {
            let mut labels: Vec<String> = Vec::new();
            let mut index: std::collections::HashMap<String, u32> = Default::default();
            let mut sequences = Vec::new();
            for (_, tokens) in lines(text) {
                let seq = tokens
                    .into_iter()
                    .map(|tok| {
                        *index.entry(tok.to_string()).or_insert_with(|| {
                            labels.push(tok.to_string());
                            labels.len() as u32
                        })
                    })
                    .collect();
                sequences.push(seq);
            }
            if labels.is_empty() {
                return Err(PbctError::Parse {
                    line: 0,
                    message: "corpus contains no tokens".into(),
                });
            }
            SequenceCorpus::new(Vocabulary::with_labels(labels)?, sequences)
        }
        CorpusMode::Integers { vocab_size } => {
            let vocab = Vocabulary::new(vocab_size)?;
            let mut sequences = Vec::new();
            for (line, tokens) in lines(text) {
                let seq = tokens
                    .into_iter()
                    .map(|tok| parse_symbol(tok, line, vocab_size))
                    .collect::<Result<Vec<_>>>()?;
                sequences.push(seq);
            }
            SequenceCorpus::new(vocab, sequences)
        }
    }
}

fn parse_symbol(tok: &str, line: usize, vocab_size: u32) -> Result<u32> {
    let value: u64 = tok.parse().map_err(|_| PbctError::Parse {
        line,
        message: format!("expected a positive integer symbol, found {tok:?}"),
    })?;
    if value == 0 || value > u64::from(vocab_size) {
        return Err(PbctError::SymbolOutOfRange {
            symbol: value,
            vocab_size,
            line: Some(line),
        });
    }
    Ok(value as u32)
}

/// Reads a corpus against an existing vocabulary: labels when the vocabulary
/// has them, integer ids otherwise.
pub fn read_corpus_with_vocab(
    path: impl AsRef<Path>,
    vocab: &Vocabulary,
) -> Result<SequenceCorpus> {
    let text = fs::read_to_string(path)?;
    parse_corpus_with_vocab(&text, vocab)
}

pub fn parse_corpus_with_vocab(text: &str, vocab: &Vocabulary) -> Result<SequenceCorpus> {
    if vocab.labels().is_none() {
        return parse_corpus(
            text,
            CorpusMode::Integers {
                vocab_size: vocab.size(),
            },
        );
    }
    let index: std::collections::HashMap<&str, u32> = vocab
        .labels()
        .unwrap_or_default()
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i as u32 + 1))
        .collect();
    let mut sequences = Vec::new();
    for (line, tokens) in lines(text) {
        let seq = tokens
            .into_iter()
            .map(|tok| {
                index
                    .get(tok)
                    .copied()
                    .ok_or_else(|| PbctError::UnknownToken {
                        token: tok.to_string(),
                        line,
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        sequences.push(seq);
    }
    SequenceCorpus::new(vocab.clone(), sequences)
}

/// One sequence per line, symbols written as labels when available.
pub fn format_corpus(corpus: &SequenceCorpus) -> String {
    let vocab = corpus.vocab();
    let mut out = String::new();
    for seq in corpus.sequences() {
        let line: Vec<String> = seq.iter().map(|&s| vocab.label(s)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_corpus(path: impl AsRef<Path>, corpus: &SequenceCorpus) -> Result<()> {
    fs::write(path, format_corpus(corpus))?;
    Ok(())
}

/// Hex SHA-256 over the symbol ids of every sequence.
pub fn corpus_digest(corpus: &SequenceCorpus) -> String {
    let mut hasher = Sha256::new();
    hasher.update(corpus.vocab().size().to_le_bytes());
    for seq in corpus.sequences() {
        hasher.update((seq.len() as u64).to_le_bytes());
        for s in seq {
            hasher.update(s.to_le_bytes());
        }
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest.iter() {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeNodeRecord {
    pub path: Vec<u32>,
    pub blocks: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeRecord {
    pub max_depth: usize,
    /// Internal nodes only; leaves are implied.
    pub nodes: Vec<TreeNodeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeafCountsRecord {
    pub path: Vec<u32>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub model: Option<String>,
    pub seed: Option<u64>,
    pub fit_unix_time: Option<u64>,
    pub corpus_digest: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFileRecord {
    format_version: u32,
    vocab: Vocabulary,
    hyper: Hyperparams,
    tree: TreeRecord,
    train_counts: Vec<LeafCountsRecord>,
    provenance: Provenance,
}

/// A fitted model: vocabulary, hyperparameters, tree and training counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub vocab: Vocabulary,
    pub hyper: Hyperparams,
    pub tree: ContextTree,
    pub train_counts: CountTable,
    pub provenance: Provenance,
}

impl ModelFile {
    pub fn new(
        hyper: Hyperparams,
        tree: ContextTree,
        train_counts: CountTable,
        provenance: Provenance,
    ) -> Result<Self> {
        if !train_counts.same_shape(&CountTable::zeros(&tree)) {
            return Err(PbctError::InvalidParameter(
                "training counts do not match the tree's leaves".into(),
            ));
        }
        if hyper.eta.len() != tree.vocab().len() {
            return Err(PbctError::InvalidParameter(
                "eta length does not match the vocabulary".into(),
            ));
        }
        Ok(Self {
            vocab: tree.vocab().clone(),
            hyper,
            tree,
            train_counts,
            provenance,
        })
    }

    /// Burn-in used for every count in this model.
    pub fn burn_in(&self) -> usize {
        self.hyper.max_depth
    }

    fn to_record(&self) -> ModelFileRecord {
        ModelFileRecord {
            format_version: FORMAT_VERSION,
            vocab: self.vocab.clone(),
            hyper: self.hyper.clone(),
            tree: TreeRecord {
                max_depth: self.tree.max_depth(),
                nodes: self
                    .tree
                    .splits()
                    .iter()
                    .map(|(node, p)| TreeNodeRecord {
                        path: node.path().to_vec(),
                        blocks: p.blocks().to_vec(),
                    })
                    .collect(),
            },
            train_counts: self
                .train_counts
                .iter()
                .map(|(leaf, c)| LeafCountsRecord {
                    path: leaf.path().to_vec(),
                    counts: c.to_vec(),
                })
                .collect(),
            provenance: self.provenance.clone(),
        }
    }

    fn from_record(record: ModelFileRecord) -> Result<Self> {
        let schema = |path: String, message: String| PbctError::Schema { path, message };
        let vocab = record.vocab;
        if let Some(labels) = vocab.labels() {
            if labels.len() != vocab.len() {
                return Err(schema(
                    "vocab.labels".into(),
                    format!("{} labels for {} symbols", labels.len(), vocab.len()),
                ));
            }
            Vocabulary::with_labels(labels.to_vec())
                .map_err(|e| schema("vocab.labels".into(), e.to_string()))?;
        }
        if vocab.size() == 0 {
            return Err(schema("vocab.size".into(), "must be at least 1".into()));
        }
        let hyper = record.hyper;
        if hyper.eta.len() != vocab.len() {
            return Err(schema(
                "hyper.eta".into(),
                format!(
                    "length {} does not match vocabulary size {}",
                    hyper.eta.len(),
                    vocab.len()
                ),
            ));
        }
        hyper
            .validate()
            .map_err(|e| schema("hyper".into(), e.to_string()))?;

        let mut splits = BTreeMap::new();
        let mut positions = BTreeMap::new();
        for (i, node) in record.tree.nodes.into_iter().enumerate() {
            let index = NodeIndex::new(node.path);
            let partition = Partition::from_blocks_unchecked(vocab.size(), node.blocks);
            positions.insert(index.clone(), i);
            if splits.insert(index.clone(), partition).is_some() {
                return Err(schema(
                    format!("tree.nodes[{i}]"),
                    format!("duplicate node {index}"),
                ));
            }
        }
        let tree = ContextTree::from_splits_unchecked(vocab.clone(), record.tree.max_depth, splits);
        if let Some(v) = tree.validate().into_iter().next() {
            return Err(schema(
                format!("tree.nodes[{}]", positions[&v.node]),
                v.to_string(),
            ));
        }

        let mut counts = BTreeMap::new();
        for (i, leaf) in record.train_counts.into_iter().enumerate() {
            let index = NodeIndex::new(leaf.path);
            let path = format!("train_counts[{i}]");
            if !tree.is_leaf(&index) {
                return Err(schema(path, format!("{index} is not a leaf of the tree")));
            }
            if leaf.counts.len() != vocab.len() {
                return Err(schema(
                    path,
                    format!(
                        "count vector has length {}, expected {}",
                        leaf.counts.len(),
                        vocab.len()
                    ),
                ));
            }
            if counts.insert(index.clone(), leaf.counts).is_some() {
                return Err(schema(path, format!("duplicate leaf {index}")));
            }
        }
        if let Some(missing) = tree.leaves().iter().find(|l| !counts.contains_key(*l)) {
            return Err(schema(
                "train_counts".into(),
                format!("missing counts for leaf {missing}"),
            ));
        }
        let train_counts = CountTable::from_map(&tree, counts)?;
        Ok(Self {
            vocab,
            hyper,
            tree,
            train_counts,
            provenance: record.provenance,
        })
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_record())
            .expect("model records always serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| PbctError::Schema {
                path: format!("line {}", e.line()),
                message: e.to_string(),
            })?;
        match value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
        {
            Some(v) if v == u64::from(FORMAT_VERSION) => {}
            Some(v) => {
                return Err(PbctError::FormatVersionMismatch {
                    found: u32::try_from(v).unwrap_or(u32::MAX),
                    expected: FORMAT_VERSION,
                })
            }
            None => {
                return Err(PbctError::Schema {
                    path: "format_version".into(),
                    message: "missing or not an integer".into(),
                })
            }
        }
        let record: ModelFileRecord =
            serde_path_to_error::deserialize(value).map_err(|e| PbctError::Schema {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        Self::from_record(record)
    }
}

pub fn write_model(path: impl AsRef<Path>, model: &ModelFile) -> Result<()> {
    fs::write(path, model.to_json())?;
    Ok(())
}

pub fn read_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    let text = fs::read_to_string(path)?;
    ModelFile::from_json(&text)
}

/// Default hyperparameters for a vocabulary: symmetric `eta`, constant or
/// geometric `alpha`.
pub fn hyperparams(
    vocab: &Vocabulary,
    eta: f64,
    alpha: f64,
    decay: f64,
    max_depth: usize,
) -> Result<Hyperparams> {
    Hyperparams::new(
        vec![eta; vocab.len()],
        AlphaSchedule::geometric(alpha, decay),
        max_depth,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::compute_counts;
    use crate::model::fixtures::abc_tree;

    #[test]
    fn token_corpus() {
        let c = parse_corpus("a b a\nb b\n", CorpusMode::Tokens).unwrap();
        assert_eq!(c.vocab().size(), 2);
        assert_eq!(c.sequences(), &[vec![1, 2, 1], vec![2, 2]]);
        assert_eq!(
            c.vocab().labels().unwrap(),
            &["a".to_string(), "b".to_string()]
        );
    }

    #[test]
    fn crlf_and_blank_lines() {
        let c = parse_corpus("x  y\r\n\r\n\ty x\r\n", CorpusMode::Tokens).unwrap();
        assert_eq!(c.sequences(), &[vec![1, 2], vec![2, 1]]);
    }

    #[test]
    fn integer_corpus() {
        let c = parse_corpus("1 2 1\n", CorpusMode::Integers { vocab_size: 2 }).unwrap();
        assert_eq!(c.sequences(), &[vec![1, 2, 1]]);
        match parse_corpus("1 3 1\n", CorpusMode::Integers { vocab_size: 2 }) {
            Err(PbctError::SymbolOutOfRange {
                symbol: 3,
                line: Some(1),
                ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_corpus("1 2\n\n1 x\n", CorpusMode::Integers { vocab_size: 2 }) {
            Err(PbctError::Parse { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn corpus_against_vocab() {
        let vocab = Vocabulary::with_labels(vec!["ls".into(), "cd".into()]).unwrap();
        let c = parse_corpus_with_vocab("cd ls\n", &vocab).unwrap();
        assert_eq!(c.sequences(), &[vec![2, 1]]);
        assert!(matches!(
            parse_corpus_with_vocab("cd rm\n", &vocab),
            Err(PbctError::UnknownToken { line: 1, .. })
        ));
        assert_eq!(format_corpus(&c), "cd ls\n");
    }

    fn sample_model() -> ModelFile {
        let tree = abc_tree();
        let corpus = SequenceCorpus::new(
            tree.vocab().clone(),
            vec![vec![1, 3, 2, 1, 3, 3, 2, 1, 1, 2, 3, 1, 3, 2]],
        )
        .unwrap();
        let hyper =
            Hyperparams::new(vec![0.5, 1.0, 0.1], AlphaSchedule::geometric(1.5, 0.7), 3).unwrap();
        let counts = compute_counts(&tree, &corpus, 3).unwrap();
        ModelFile::new(
            hyper,
            tree,
            counts,
            Provenance {
                model: Some("pbct".into()),
                seed: Some(42),
                fit_unix_time: Some(1_700_000_000),
                corpus_digest: Some(corpus_digest(&corpus)),
            },
        )
        .unwrap()
    }

    #[test]
    fn model_round_trip() {
        let model = sample_model();
        let text = model.to_json();
        let back = ModelFile::from_json(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn unknown_version_is_rejected() {
        let text =
            sample_model()
                .to_json()
                .replacen("\"format_version\": 1", "\"format_version\": 7", 1);
        assert!(matches!(
            ModelFile::from_json(&text),
            Err(PbctError::FormatVersionMismatch {
                found: 7,
                expected: 1
            })
        ));
    }

    #[test]
    fn invalid_tree_names_the_node() {
        let mut value: serde_json::Value = serde_json::from_str(&sample_model().to_json()).unwrap();
        value["tree"]["nodes"][1]["blocks"] = serde_json::json!([[1, 3], [3]]);
        match ModelFile::from_json(&value.to_string()) {
            Err(PbctError::Schema { path, message }) => {
                assert_eq!(path, "tree.nodes[1]");
                assert!(message.contains("(1)"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_field_paths() {
        let mut value: serde_json::Value = serde_json::from_str(&sample_model().to_json()).unwrap();
        value["hyper"]["eta"][1] = serde_json::json!("one");
        match ModelFile::from_json(&value.to_string()) {
            Err(PbctError::Schema { path, .. }) => assert_eq!(path, "hyper.eta[1]"),
            other => panic!("unexpected {other:?}"),
        }
        let mut value: serde_json::Value = serde_json::from_str(&sample_model().to_json()).unwrap();
        value["train_counts"].as_array_mut().unwrap().pop();
        assert!(matches!(
            ModelFile::from_json(&value.to_string()),
            Err(PbctError::Schema { .. })
        ));
    }

    #[test]
    fn digest_depends_on_content() {
        let v = Vocabulary::new(3).unwrap();
        let a = SequenceCorpus::new(v.clone(), vec![vec![1, 2], vec![3]]).unwrap();
        let b = SequenceCorpus::new(v, vec![vec![1], vec![2, 3]]).unwrap();
        assert_ne!(corpus_digest(&a), corpus_digest(&b));
        assert_eq!(corpus_digest(&a).len(), 64);
    }
}
