//! Predictive log-loss and structural comparison of context trees.

use std::collections::BTreeMap;

use crate::error::{PbctError, Result};
use crate::generator::LeafDistributionTable;
use crate::likelihood::{compute_counts, log_predictive_likelihood};
use crate::model::{ContextTree, CountTable, NodeIndex, Partition, SequenceCorpus};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub marginal_log_loss: f64,
    pub true_log_loss: Option<f64>,
    /// Keyed by 1-based depth.
    pub tree_similarity_by_depth: Option<BTreeMap<usize, f64>>,
    pub model_size_l: usize,
}

/// Mean negative predictive log-likelihood of the test corpus under a tree
/// trained on `train_counts`.
pub fn marginal_log_loss_with_counts(
    tree: &ContextTree,
    train_counts: &CountTable,
    test_corpus: &SequenceCorpus,
    eta: &[f64],
    burn_in: usize,
) -> Result<f64> {
    let test_counts = compute_counts(tree, test_corpus, burn_in)?;
    let report = log_predictive_likelihood(train_counts, &test_counts, eta)?;
    if report.n_scored == 0 {
        return Err(PbctError::NoScorablePositions { burn_in });
    }
    Ok(-report.total_log_ml / report.n_scored as f64)
}

/// Marginal log-loss with training counts tallied from `train_corpus`.
pub fn marginal_log_loss(
    tree: &ContextTree,
    train_corpus: &SequenceCorpus,
    test_corpus: &SequenceCorpus,
    eta: &[f64],
    burn_in: usize,
) -> Result<f64> {
    let train_counts = compute_counts(tree, train_corpus, burn_in)?;
    marginal_log_loss_with_counts(tree, &train_counts, test_corpus, eta, burn_in)
}

/// Mean negative log-probability of the test corpus under known leaf
/// distributions.
pub fn true_log_loss(
    tree: &ContextTree,
    dists: &LeafDistributionTable,
    test_corpus: &SequenceCorpus,
    burn_in: usize,
) -> Result<f64> {
    let leaf_dists = tree
        .leaves()
        .iter()
        .map(|leaf| {
            dists.get(leaf).ok_or_else(|| {
                PbctError::InvalidParameter(format!("no distribution for leaf {leaf}"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    let mut n = 0u64;
    for (s, seq) in test_corpus.sequences().iter().enumerate() {
        for pos in burn_in..seq.len() {
            let leaf = tree.leaf_ordinal_at(seq, pos)?;
            let symbol = seq[pos];
            let p = leaf_dists[leaf][symbol as usize - 1];
            if p <= 0.0 {
                return Err(PbctError::ZeroProbabilityEvent {
                    sequence: s,
                    position: pos,
                    symbol,
                    leaf: tree.leaves()[leaf].clone(),
                });
            }
            total -= p.ln();
            n += 1;
        }
    }
    if n == 0 {
        return Err(PbctError::NoScorablePositions { burn_in });
    }
    Ok(total / n as f64)
}

fn choose2(n: u64) -> f64 {
    (n as f64) * (n.saturating_sub(1) as f64) / 2.0
}

/// Adjusted Rand index from the contingency table of two partitions.
///
/// When the expected and maximal index coincide (e.g. both partitions are
/// the single block), the result is 1 for identical partitions and 0
/// otherwise.
pub fn adjusted_rand_index(p1: &Partition, p2: &Partition) -> Result<f64> {
    if p1.universe() != p2.universe() {
        return Err(PbctError::MismatchedUniverse {
            left: p1.universe(),
            right: p2.universe(),
        });
    }
    let (k1, k2) = (p1.len(), p2.len());
    let mut table = vec![0u64; k1 * k2];
    for s in 1..=p1.universe() {
        let (a, b) = match (p1.block_of(s), p2.block_of(s)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(PbctError::InvalidParameter(format!(
                    "symbol {s} is not covered by both partitions"
                )))
            }
        };
        table[a * k2 + b] += 1;
    }
    let index: f64 = table.iter().map(|&n| choose2(n)).sum();
    let rows: f64 = p1.blocks().iter().map(|b| choose2(b.len() as u64)).sum();
    let cols: f64 = p2.blocks().iter().map(|b| choose2(b.len() as u64)).sum();
    let pairs = choose2(u64::from(p1.universe()));
    let expected = if pairs > 0.0 {
        rows * cols / pairs
    } else {
        0.0
    };
    let max = 0.5 * (rows + cols);
    let denom = max - expected;
    if denom == 0.0 {
        return Ok(if p1 == p2 { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / denom)
}

/// Fraction of post-burn-in contexts of `corpus` routed through each node
/// of `tree` at `node_depth`. Contexts ending at shallower leaves are not
/// counted. Falls back to equal weights when no context reaches the depth.
pub fn depth_weights(
    tree: &ContextTree,
    corpus: &SequenceCorpus,
    node_depth: usize,
    burn_in: usize,
) -> Result<BTreeMap<NodeIndex, f64>> {
    let nodes = tree.nodes_at_depth(node_depth);
    if nodes.is_empty() {
        return Err(PbctError::DepthUnavailable { depth: node_depth });
    }
    let mut counts: BTreeMap<NodeIndex, u64> = nodes.iter().map(|n| (n.clone(), 0)).collect();
    let mut total = 0u64;
    for seq in corpus.sequences() {
        for pos in burn_in..seq.len() {
            if let Some(node) = tree.node_at_depth_for(seq, pos, node_depth) {
                *counts.get_mut(node).expect("node present at depth") += 1;
                total += 1;
            }
        }
    }
    let n = nodes.len() as f64;
    Ok(counts
        .into_iter()
        .map(|(node, c)| {
            let w = if total == 0 {
                1.0 / n
            } else {
                c as f64 / total as f64
            };
            (node, w)
        })
        .collect())
}

fn node_partition(tree: &ContextTree, node: &NodeIndex) -> Partition {
    tree.children_partition(node)
        .cloned()
        .unwrap_or_else(|| Partition::trivial(tree.vocab_size()))
}

/// Context-weighted maximal ARI between the child partitions of `t1` and
/// `t2` at tree depth `depth` (1-based: depth 1 compares the roots' child
/// partitions). Leaves count as having the partition `{V}`; when `t2` has
/// no nodes at the level, `{V}` stands in for it.
pub fn tree_similarity(
    t1: &ContextTree,
    t2: &ContextTree,
    weight_corpus: &SequenceCorpus,
    depth: usize,
) -> Result<f64> {
    if t1.vocab_size() != t2.vocab_size() {
        return Err(PbctError::MismatchedUniverse {
            left: t1.vocab_size(),
            right: t2.vocab_size(),
        });
    }
    if depth == 0 || depth > t1.max_depth() {
        return Err(PbctError::InvalidParameter(format!(
            "similarity depth must lie in 1..={}, got {depth}",
            t1.max_depth()
        )));
    }
    if t1.max_depth() < t2.max_depth() {
        return Err(PbctError::InvalidParameter(format!(
            "first tree must have the larger maximum depth ({} < {})",
            t1.max_depth(),
            t2.max_depth()
        )));
    }
    let node_depth = depth - 1;
    let weights = depth_weights(t1, weight_corpus, node_depth, t1.max_depth())?;
    let mut candidates: Vec<Partition> = t2
        .nodes_at_depth(node_depth)
        .iter()
        .map(|n| node_partition(t2, n))
        .collect();
    if candidates.is_empty() {
        candidates.push(Partition::trivial(t2.vocab_size()));
    }
    let mut total = 0.0;
    for (node, w) in weights {
        if w == 0.0 {
            continue;
        }
        let own = node_partition(t1, &node);
        let mut best = f64::NEG_INFINITY;
        for other in &candidates {
            best = best.max(adjusted_rand_index(&own, other)?);
        }
        total += w * best;
    }
    Ok(total)
}

/// Number of leaves `L`.
pub fn model_size(tree: &ContextTree) -> usize {
    tree.leaf_count()
}
