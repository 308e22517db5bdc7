//! Sufficient statistics and exact Dirichlet–Categorical likelihoods.
//!
//! All quantities are computed in log space. Counts are tallied only at
//! positions with at least `burn_in` preceding symbols, where `burn_in` is
//! the model's specified maximum depth, and each sequence of a corpus is
//! tallied independently before aggregation.

use std::collections::BTreeMap;

use statrs::function::gamma::ln_gamma;

use crate::error::{PbctError, Result};
use crate::model::{ContextTree, CountTable, NodeIndex, SequenceCorpus};

/// Log marginal or predictive likelihood, split by leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLikelihoodReport {
    pub total_log_ml: f64,
    pub per_leaf: BTreeMap<NodeIndex, f64>,
    /// Symbols scored after burn-in.
    pub n_scored: u64,
}

/// `sum_i lnΓ(v_i) - lnΓ(sum_i v_i)`.
pub fn log_multivariate_beta(vec: &[f64]) -> Result<f64> {
    if vec.is_empty() {
        return Err(PbctError::InvalidParameter(
            "multivariate beta of an empty vector".into(),
        ));
    }
    if let Some(bad) = vec.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(PbctError::InvalidParameter(format!(
            "multivariate beta needs positive entries, got {bad}"
        )));
    }
    Ok(log_beta_unchecked(vec.iter().copied()))
}

fn log_beta_unchecked(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut acc = 0.0;
    for v in values {
        sum += v;
        acc += ln_gamma(v);
    }
    acc - ln_gamma(sum)
}

/// `log B(counts + eta)`.
pub(crate) fn log_beta_counts(counts: &[u64], eta: &[f64]) -> f64 {
    log_beta_unchecked(counts.iter().zip(eta).map(|(&c, &e)| c as f64 + e))
}

/// `log B(counts + eta) - log B(eta)`, the log Dirichlet–Categorical
/// evidence of one block of counts.
pub(crate) fn log_evidence(counts: &[u64], eta: &[f64], log_beta_eta: f64) -> f64 {
    if counts.iter().all(|&c| c == 0) {
        return 0.0;
    }
    log_beta_counts(counts, eta) - log_beta_eta
}

fn check_eta(eta: &[f64], vocab_size: u32) -> Result<()> {
    if eta.len() != vocab_size as usize {
        return Err(PbctError::InvalidParameter(format!(
            "eta has length {}, vocabulary has {vocab_size} symbols",
            eta.len()
        )));
    }
    if let Some(bad) = eta.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(PbctError::InvalidParameter(format!(
            "eta entries must be positive, got {bad}"
        )));
    }
    Ok(())
}

/// Tallies next-symbol counts per leaf over every sequence of the corpus.
pub fn compute_counts(
    tree: &ContextTree,
    corpus: &SequenceCorpus,
    burn_in: usize,
) -> Result<CountTable> {
    if corpus.vocab().size() != tree.vocab_size() {
        return Err(PbctError::InvalidParameter(format!(
            "corpus vocabulary has {} symbols, tree has {}",
            corpus.vocab().size(),
            tree.vocab_size()
        )));
    }
    let mut table = CountTable::zeros(tree);
    for seq in corpus.sequences() {
        accumulate_counts(tree, seq, burn_in, &mut table)?;
    }
    Ok(table)
}

pub(crate) fn accumulate_counts(
    tree: &ContextTree,
    seq: &[u32],
    burn_in: usize,
    table: &mut CountTable,
) -> Result<()> {
    for pos in burn_in..seq.len() {
        let symbol = seq[pos];
        if !tree.vocab().contains(symbol) {
            return Err(PbctError::SymbolOutOfRange {
                symbol: symbol as u64,
                vocab_size: tree.vocab_size(),
                line: None,
            });
        }
        let leaf = tree.leaf_ordinal_at(seq, pos)?;
        table.increment(leaf, symbol);
    }
    Ok(())
}

/// `log p(x | T) = sum_e [log B(X_e + eta) - log B(eta)]`.
pub fn log_marginal_likelihood(counts: &CountTable, eta: &[f64]) -> Result<LogLikelihoodReport> {
    check_eta(eta, counts.vocab_size())?;
    let log_beta_eta = log_beta_unchecked(eta.iter().copied());
    let mut per_leaf = BTreeMap::new();
    let mut total = 0.0;
    let mut n_scored = 0;
    for (leaf, x) in counts.iter() {
        let value = log_evidence(x, eta, log_beta_eta);
        total += value;
        n_scored += x.iter().sum::<u64>();
        per_leaf.insert(leaf.clone(), value);
    }
    Ok(LogLikelihoodReport {
        total_log_ml: total,
        per_leaf,
        n_scored,
    })
}

/// Predictive marginal likelihood of test counts given training counts:
/// `sum_e [log B(X_test + X_train + eta) - log B(X_train + eta)]`.
pub fn log_predictive_likelihood(
    train_counts: &CountTable,
    test_counts: &CountTable,
    eta: &[f64],
) -> Result<LogLikelihoodReport> {
    if !train_counts.same_shape(test_counts) {
        return Err(PbctError::InvalidParameter(
            "train and test counts are keyed by different leaves".into(),
        ));
    }
    check_eta(eta, train_counts.vocab_size())?;
    let mut per_leaf = BTreeMap::new();
    let mut total = 0.0;
    let mut n_scored = 0;
    let mut combined = vec![0u64; eta.len()];
    for ((leaf, train), (_, test)) in train_counts.iter().zip(test_counts.iter()) {
        let scored: u64 = test.iter().sum();
        let value = if scored == 0 {
            0.0
        } else {
            for ((c, a), b) in combined.iter_mut().zip(train).zip(test) {
                *c = a + b;
            }
            log_beta_counts(&combined, eta) - log_beta_counts(train, eta)
        };
        total += value;
        n_scored += scored;
        per_leaf.insert(leaf.clone(), value);
    }
    Ok(LogLikelihoodReport {
        total_log_ml: total,
        per_leaf,
        n_scored,
    })
}

/// Posterior mean `(X_v + eta_v) / sum_u (X_u + eta_u)`.
pub fn posterior_mean(counts: &[u64], eta: &[f64]) -> Result<Vec<f64>> {
    if counts.len() != eta.len() {
        return Err(PbctError::InvalidParameter(format!(
            "count vector has length {}, eta has length {}",
            counts.len(),
            eta.len()
        )));
    }
    check_eta(eta, eta.len() as u32)?;
    let total: f64 = counts.iter().zip(eta).map(|(&c, &e)| c as f64 + e).sum();
    Ok(counts
        .iter()
        .zip(eta)
        .map(|(&c, &e)| (c as f64 + e) / total)
        .collect())
}

/// Plug-in predictive distribution of the next symbol given a context,
/// most recent symbol first.
pub fn predict_next(
    tree: &ContextTree,
    train_counts: &CountTable,
    eta: &[f64],
    recent_history: &[u32],
) -> Result<Vec<f64>> {
    let leaf = tree.map_context_to_leaf(recent_history)?;
    let counts = train_counts.get(leaf).ok_or_else(|| {
        PbctError::InvalidParameter(format!("count table has no entry for leaf {leaf}"))
    })?;
    posterior_mean(counts, eta)
}

/// Scores a sequence one symbol at a time with the running posterior
/// predictive at each routed leaf. Equal to the log marginal likelihood of
/// the sequence's counts; serves as an independent check of it.
pub fn chain_rule_log_prob(
    tree: &ContextTree,
    eta: &[f64],
    sequence: &[u32],
    burn_in: usize,
) -> Result<f64> {
    check_eta(eta, tree.vocab_size())?;
    let eta_total: f64 = eta.iter().sum();
    let mut counts = vec![vec![0u64; eta.len()]; tree.leaf_count()];
    let mut totals = vec![0u64; tree.leaf_count()];
    let mut log_prob = 0.0;
    for pos in burn_in..sequence.len() {
        let symbol = sequence[pos];
        if !tree.vocab().contains(symbol) {
            return Err(PbctError::SymbolOutOfRange {
                symbol: symbol as u64,
                vocab_size: tree.vocab_size(),
                line: None,
            });
        }
        let leaf = tree.leaf_ordinal_at(sequence, pos)?;
        let v = symbol as usize - 1;
        let p = (counts[leaf][v] as f64 + eta[v]) / (totals[leaf] as f64 + eta_total);
        log_prob += p.ln();
        counts[leaf][v] += 1;
        totals[leaf] += 1;
    }
    Ok(log_prob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::abc_tree;
    use crate::model::Vocabulary;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    fn root_tree(v: u32) -> ContextTree {
        ContextTree::single_leaf(Vocabulary::new(v).unwrap(), 0)
    }

    fn corpus(v: u32, seqs: Vec<Vec<u32>>) -> SequenceCorpus {
        SequenceCorpus::new(Vocabulary::new(v).unwrap(), seqs).unwrap()
    }

    #[test]
    fn log_beta_values() {
        close(log_multivariate_beta(&[1.0, 1.0]).unwrap(), 0.0, 1e-14);
        close(
            log_multivariate_beta(&[2.0, 2.0]).unwrap(),
            (1.0f64 / 6.0).ln(),
            1e-13,
        );
        close(
            log_multivariate_beta(&[1.0, 1.0, 1.0]).unwrap(),
            0.5f64.ln(),
            1e-13,
        );
        assert!(log_multivariate_beta(&[1.0, 0.0]).is_err());
        assert!(log_multivariate_beta(&[-1.0]).is_err());
    }

    #[test]
    fn counts_direct_tally() {
        let tree = root_tree(2);
        let table = compute_counts(&tree, &corpus(2, vec![vec![1, 2, 2, 1]]), 0).unwrap();
        assert_eq!(table.get(&NodeIndex::root()), Some(&[2, 2][..]));

        let agg = compute_counts(&tree, &corpus(2, vec![vec![1, 2], vec![2, 1]]), 0).unwrap();
        assert_eq!(agg.get(&NodeIndex::root()), Some(&[2, 2][..]));
    }

    #[test]
    fn short_sequences_give_zero_counts() {
        let tree = abc_tree();
        let table = compute_counts(&tree, &corpus(3, vec![vec![1, 2, 3]]), 3).unwrap();
        assert_eq!(table.total(), 0);
    }

    #[test]
    fn counts_follow_routing() {
        let tree = abc_tree();
        // positions 3.. : context (x2,x1,x0) most recent first
        let seq = vec![2, 3, 1, 3, 2];
        let table = compute_counts(&tree, &corpus(3, vec![seq.clone()]), 3).unwrap();
        // pos 3 (symbol 3): context (1,3,2) -> (1,2,2)
        // pos 4 (symbol 2): context (3,1,3) -> {A,C} -> {A} -> (1,1)
        assert_eq!(
            table.get(&NodeIndex::new(vec![1, 2, 2])),
            Some(&[0, 0, 1][..])
        );
        assert_eq!(table.get(&NodeIndex::new(vec![1, 1])), Some(&[0, 1, 0][..]));
        assert_eq!(table.total(), 2);
    }

    #[test]
    fn marginal_likelihood_examples() {
        let tree = root_tree(2);
        let eta = [1.0, 1.0];
        let zero = CountTable::zeros(&tree);
        assert_eq!(
            log_marginal_likelihood(&zero, &eta).unwrap().total_log_ml,
            0.0
        );

        let t = compute_counts(&tree, &corpus(2, vec![vec![1, 2]]), 0).unwrap();
        close(
            log_marginal_likelihood(&t, &eta).unwrap().total_log_ml,
            (1.0f64 / 6.0).ln(),
            1e-12,
        );
        let t = compute_counts(&tree, &corpus(2, vec![vec![1, 1]]), 0).unwrap();
        let report = log_marginal_likelihood(&t, &eta).unwrap();
        close(report.total_log_ml, (1.0f64 / 3.0).ln(), 1e-12);
        assert_eq!(report.n_scored, 2);
    }

    #[test]
    fn report_total_equals_leaf_sum() {
        let tree = abc_tree();
        let seq = vec![1, 3, 2, 1, 3, 3, 2, 1, 1, 2, 3, 1, 3, 2];
        let t = compute_counts(&tree, &corpus(3, vec![seq]), 3).unwrap();
        let report = log_marginal_likelihood(&t, &[0.5, 1.0, 2.0]).unwrap();
        close(
            report.per_leaf.values().sum::<f64>(),
            report.total_log_ml,
            1e-9,
        );
    }

    #[test]
    fn predictive_likelihood_examples() {
        let tree = root_tree(2);
        let eta = [1.0, 1.0];
        let empty = CountTable::zeros(&tree);
        let train = compute_counts(&tree, &corpus(2, vec![vec![1]]), 0).unwrap();
        let test = compute_counts(&tree, &corpus(2, vec![vec![1]]), 0).unwrap();
        assert_eq!(
            log_predictive_likelihood(&train, &empty, &eta)
                .unwrap()
                .total_log_ml,
            0.0
        );
        close(
            log_predictive_likelihood(&train, &test, &eta)
                .unwrap()
                .total_log_ml,
            (2.0f64 / 3.0).ln(),
            1e-12,
        );
        let test = compute_counts(&tree, &corpus(2, vec![vec![1, 2, 2]]), 0).unwrap();
        assert_eq!(
            log_predictive_likelihood(&empty, &test, &eta)
                .unwrap()
                .total_log_ml,
            log_marginal_likelihood(&test, &eta).unwrap().total_log_ml
        );
    }

    #[test]
    fn posterior_mean_examples() {
        assert_eq!(
            posterior_mean(&[0, 0, 0], &[1.0; 3]).unwrap(),
            vec![1.0 / 3.0; 3]
        );
        let p = posterior_mean(&[3, 1], &[1.0, 1.0]).unwrap();
        close(p[0], 4.0 / 6.0, 1e-15);
        close(p[1], 2.0 / 6.0, 1e-15);
        let p = posterior_mean(&[0, 0, 6], &[1.0, 1.0, 1.0]).unwrap();
        close(p[0], 1.0 / 9.0, 1e-15);
        close(p[2], 7.0 / 9.0, 1e-15);
        assert!(posterior_mean(&[1], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn predict_next_uses_routed_leaf() {
        let tree = root_tree(4);
        let zero = CountTable::zeros(&tree);
        assert_eq!(
            predict_next(&tree, &zero, &[1.0; 4], &[]).unwrap(),
            vec![0.25; 4]
        );

        let tree = abc_tree();
        let mut map = BTreeMap::new();
        map.insert(NodeIndex::new(vec![1, 2, 2]), vec![0, 5, 1]);
        let counts = CountTable::from_map(&tree, map).unwrap();
        let p = predict_next(&tree, &counts, &[1.0; 3], &[1, 3, 2]).unwrap();
        assert_eq!(p, posterior_mean(&[0, 5, 1], &[1.0; 3]).unwrap());
        assert!(predict_next(&tree, &counts, &[1.0; 3], &[1, 3]).is_err());
    }

    #[test]
    fn chain_rule_small_cases() {
        let tree = root_tree(2);
        close(
            chain_rule_log_prob(&tree, &[1.0, 1.0], &[1, 2], 0).unwrap(),
            (1.0f64 / 6.0).ln(),
            1e-14,
        );
        assert_eq!(
            chain_rule_log_prob(&abc_tree(), &[1.0; 3], &[1, 2], 3).unwrap(),
            0.0
        );
    }

    #[test]
    fn chain_rule_matches_counts_on_abc_tree() {
        let tree = abc_tree();
        let seq: Vec<u32> = (0..300u32).map(|i| (i * 7 + i / 3) % 3 + 1).collect();
        let eta = [0.3, 1.0, 2.5];
        let direct = compute_counts(&tree, &corpus(3, vec![seq.clone()]), 3).unwrap();
        close(
            chain_rule_log_prob(&tree, &eta, &seq, 3).unwrap(),
            log_marginal_likelihood(&direct, &eta).unwrap().total_log_ml,
            1e-9,
        );
    }

    #[test]
    fn routing_deeper_than_burn_in_fails() {
        let tree = abc_tree();
        let err = compute_counts(&tree, &corpus(3, vec![vec![1, 3, 2, 1]]), 1).unwrap_err();
        assert!(matches!(err, PbctError::InsufficientHistory { .. }));
    }

    #[test]
    fn mismatched_vocab_is_rejected() {
        let tree = root_tree(2);
        assert!(compute_counts(&tree, &corpus(3, vec![vec![1]]), 0).is_err());
    }
}
