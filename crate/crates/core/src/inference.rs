//! Recursive agglomerative clustering (RAC) for fitting parsimonious
//! context trees, plus the variable-order (VBM) and fixed-order (FBM)
//! baselines.
//!
//! At every node the training positions routed to it are summarized as one
//! next-symbol count vector per value of the history symbol examined at
//! that depth. Starting from singletons, the pair of clusters with the
//! largest merge similarity is merged until one cluster remains; the
//! configuration on this chain with the largest local log posterior
//! (Dirichlet–Categorical evidence plus CRP prior) becomes the node's
//! children. Positions are routed to the children and the procedure
//! recurses until the maximum depth or a single-block optimum.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{PbctError, Result};
use crate::generator::{crp_log_prior_unchecked, ln_factorial};
use crate::likelihood::{log_beta_counts, log_evidence};
use crate::model::{ContextTree, Hyperparams, NodeIndex, Partition, SequenceCorpus, Vocabulary};

/// Rule for choosing among merge candidates with equal similarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Merge the pair whose (min element, min element) is lexicographically smallest.
    #[default]
    LexicographicMin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub hyper: Hyperparams,
    pub tie_break: TieBreak,
    /// Nodes reached by fewer training positions are made leaves. Zero
    /// disables the rule (only empty nodes become leaves).
    pub min_context_count: usize,
}

impl FitConfig {
    pub fn new(hyper: Hyperparams) -> Self {
        Self {
            hyper,
            tie_break: TieBreak::default(),
            min_context_count: 0,
        }
    }
}

fn check_inputs(counts: &[Vec<u64>], alpha: f64, eta: &[f64]) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(PbctError::InvalidParameter(format!(
            "CRP concentration must be positive, got {alpha}"
        )));
    }
    if let Some(bad) = eta.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(PbctError::InvalidParameter(format!(
            "eta entries must be positive, got {bad}"
        )));
    }
    if let Some(c) = counts.iter().find(|c| c.len() != eta.len()) {
        return Err(PbctError::InvalidParameter(format!(
            "count vector of length {} does not match eta of length {}",
            c.len(),
            eta.len()
        )));
    }
    Ok(())
}

/// Local log posterior of a node's clustering: the log evidence of every
/// block plus the CRP log prior of the block sizes. Factors from the rest
/// of the tree do not depend on this choice and are omitted.
pub fn local_log_posterior(
    block_counts: &[Vec<u64>],
    block_sizes: &[usize],
    alpha: f64,
    eta: &[f64],
) -> Result<f64> {
    check_inputs(block_counts, alpha, eta)?;
    if block_counts.is_empty()
        || block_counts.len() != block_sizes.len()
        || block_sizes.contains(&0)
    {
        return Err(PbctError::InvalidParameter(
            "need one positive block size per count vector".into(),
        ));
    }
    let log_beta_eta = log_beta_counts(&vec![0; eta.len()], eta);
    let evidence: f64 = block_counts
        .iter()
        .map(|c| log_evidence(c, eta, log_beta_eta))
        .sum();
    Ok(evidence + crp_log_prior_unchecked(block_sizes.iter().copied(), alpha))
}

/// Log of the multiplicative change in local posterior from merging two
/// blocks: evidence ratio times the exact CRP prior ratio
/// `(m_i + m_j - 1)! / (alpha (m_i - 1)! (m_j - 1)!)`.
pub fn merge_similarity(
    counts_i: &[u64],
    counts_j: &[u64],
    m_i: usize,
    m_j: usize,
    alpha: f64,
    eta: &[f64],
) -> Result<f64> {
    check_inputs(&[counts_i.to_vec(), counts_j.to_vec()], alpha, eta)?;
    if m_i == 0 || m_j == 0 {
        return Err(PbctError::InvalidParameter(
            "blocks must be non-empty".into(),
        ));
    }
    let log_beta_eta = log_beta_counts(&vec![0; eta.len()], eta);
    let merged: Vec<u64> = counts_i.iter().zip(counts_j).map(|(a, b)| a + b).collect();
    let evidence = log_evidence(&merged, eta, log_beta_eta)
        - log_evidence(counts_i, eta, log_beta_eta)
        - log_evidence(counts_j, eta, log_beta_eta);
    Ok(evidence + prior_merge_ratio(m_i, m_j, alpha))
}

fn prior_merge_ratio(m_i: usize, m_j: usize, alpha: f64) -> f64 {
    ln_factorial(m_i + m_j - 1) - alpha.ln() - ln_factorial(m_i - 1) - ln_factorial(m_j - 1)
}

#[derive(Debug, Clone)]
struct Cluster {
    members: Vec<u32>,
    counts: Vec<u64>,
    evidence: f64,
}

/// Working state of one node's agglomeration. Slot `s` always holds the
/// cluster whose minimum element is `s + 1`; merged slots are retired.
#[derive(Debug, Clone)]
pub struct AgglomerationState {
    slots: Vec<Option<Cluster>>,
    similarity: Vec<Vec<f64>>,
    alpha: f64,
    eta: Vec<f64>,
    log_beta_eta: f64,
    k: usize,
}

impl AgglomerationState {
    /// All-singletons configuration for `V = element_counts.len()` elements.
    pub fn new(element_counts: &[Vec<u64>], alpha: f64, eta: &[f64]) -> Result<Self> {
        check_inputs(element_counts, alpha, eta)?;
        if element_counts.is_empty() {
            return Err(PbctError::InvalidParameter(
                "agglomeration needs at least one element".into(),
            ));
        }
        let log_beta_eta = log_beta_counts(&vec![0; eta.len()], eta);
        let slots: Vec<Option<Cluster>> = element_counts
            .iter()
            .enumerate()
            .map(|(i, c)| {
                Some(Cluster {
                    members: vec![i as u32 + 1],
                    counts: c.clone(),
                    evidence: log_evidence(c, eta, log_beta_eta),
                })
            })
            .collect();
        let n = slots.len();
        let mut state = Self {
            slots,
            similarity: vec![vec![f64::NEG_INFINITY; n]; n],
            alpha,
            eta: eta.to_vec(),
            log_beta_eta,
            k: n,
        };
        for i in 0..n {
            for j in i + 1..n {
                state.similarity[i][j] = state.pair_similarity(i, j);
            }
        }
        Ok(state)
    }

    fn cluster(&self, slot: usize) -> &Cluster {
        self.slots[slot].as_ref().expect("active slot")
    }

    fn pair_similarity(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.cluster(i), self.cluster(j));
        let merged: Vec<u64> = a.counts.iter().zip(&b.counts).map(|(x, y)| x + y).collect();
        let evidence =
            log_evidence(&merged, &self.eta, self.log_beta_eta) - a.evidence - b.evidence;
        evidence + prior_merge_ratio(a.members.len(), b.members.len(), self.alpha)
    }

    /// Current number of clusters `K`.
    pub fn num_clusters(&self) -> usize {
        self.k
    }

    /// Local log posterior of the current configuration.
    pub fn log_posterior(&self) -> f64 {
        let active = self.slots.iter().flatten();
        let evidence: f64 = active.clone().map(|c| c.evidence).sum();
        evidence + crp_log_prior_unchecked(active.map(|c| c.members.len()), self.alpha)
    }

    pub fn partition(&self) -> Partition {
        Partition::from_blocks_unchecked(
            self.slots.len() as u32,
            self.slots
                .iter()
                .flatten()
                .map(|c| c.members.clone())
                .collect(),
        )
    }

    /// Per-block count vectors in canonical block order.
    pub fn block_counts(&self) -> Vec<Vec<u64>> {
        self.slots
            .iter()
            .flatten()
            .map(|c| c.counts.clone())
            .collect()
    }

    /// Pair of active slots with maximal similarity under the tie rule.
    pub fn best_pair(&self, tie_break: TieBreak) -> Option<(usize, usize, f64)> {
        let TieBreak::LexicographicMin = tie_break;
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.slots.len() {
            if self.slots[i].is_none() {
                continue;
            }
            for j in i + 1..self.slots.len() {
                if self.slots[j].is_none() {
                    continue;
                }
                let s = self.similarity[i][j];
                if best.is_none_or(|(_, _, b)| s > b) {
                    best = Some((i, j, s));
                }
            }
        }
        best
    }

    /// Merges slot `j` into slot `i` (`i < j`) and refreshes the cached
    /// similarities of the merged cluster.
    pub fn merge(&mut self, i: usize, j: usize) {
        assert!(i < j, "merge expects slot order");
        let b = self.slots[j].take().expect("active slot");
        let a = self.slots[i].as_mut().expect("active slot");
        a.members.extend(b.members);
        a.members.sort_unstable();
        for (x, y) in a.counts.iter_mut().zip(&b.counts) {
            *x += y;
        }
        a.evidence = log_evidence(&a.counts, &self.eta, self.log_beta_eta);
        self.k -= 1;
        for other in 0..self.slots.len() {
            if other == i || self.slots[other].is_none() {
                continue;
            }
            let (lo, hi) = if other < i { (other, i) } else { (i, other) };
            self.similarity[lo][hi] = self.pair_similarity(lo, hi);
        }
    }
}

/// Every configuration visited by one agglomeration, from `V` singletons
/// down to one block, with its local log posterior.
#[derive(Debug, Clone)]
pub struct AgglomerationChain {
    pub configurations: Vec<(Partition, f64)>,
    /// Index of the chosen configuration.
    pub best: usize,
}

impl AgglomerationChain {
    pub fn best_partition(&self) -> &Partition {
        &self.configurations[self.best].0
    }

    pub fn best_log_posterior(&self) -> f64 {
        self.configurations[self.best].1
    }
}

/// Runs the full merge chain. Among configurations with equal posterior
/// the coarsest is chosen.
pub fn agglomerate_chain(
    element_counts: &[Vec<u64>],
    alpha: f64,
    eta: &[f64],
    tie_break: TieBreak,
) -> Result<AgglomerationChain> {
    let mut state = AgglomerationState::new(element_counts, alpha, eta)?;
    let mut configurations = Vec::with_capacity(element_counts.len());
    configurations.push((state.partition(), state.log_posterior()));
    while let Some((i, j, _)) = state.best_pair(tie_break) {
        state.merge(i, j);
        configurations.push((state.partition(), state.log_posterior()));
    }
    let mut best = 0;
    for (idx, (_, value)) in configurations.iter().enumerate() {
        if *value >= configurations[best].1 {
            best = idx;
        }
    }
    Ok(AgglomerationChain {
        configurations,
        best,
    })
}

/// Greedy agglomeration of `V` elements; returns the configuration on the
/// merge chain with the largest local log posterior.
pub fn agglomerate(
    element_counts: &[Vec<u64>],
    alpha: f64,
    eta: &[f64],
    tie_break: TieBreak,
) -> Result<Partition> {
    Ok(agglomerate_chain(element_counts, alpha, eta, tie_break)?
        .best_partition()
        .clone())
}

/// Chooses between the single block and all singletons, whichever has the
/// larger local log posterior (the single block on ties).
pub fn choose_vbm_split(element_counts: &[Vec<u64>], alpha: f64, eta: &[f64]) -> Result<Partition> {
    let v = element_counts.len();
    if v == 0 {
        return Err(PbctError::InvalidParameter(
            "split selection needs at least one element".into(),
        ));
    }
    let merged: Vec<u64> = (0..eta.len())
        .map(|u| element_counts.iter().map(|c| c[u]).sum())
        .collect();
    let trivial = local_log_posterior(&[merged], &[v], alpha, eta)?;
    let singletons = local_log_posterior(element_counts, &vec![1; v], alpha, eta)?;
    Ok(if singletons > trivial {
        Partition::singletons(v as u32)
    } else {
        Partition::trivial(v as u32)
    })
}

/// A training position: sequence index and position of the predicted symbol.
type Position = (u32, u32);

/// A node of a tree under construction with the training positions whose
/// context reaches it. Sibling position lists partition the parent's.
#[derive(Debug, Clone)]
pub struct PartialTree {
    pub node: NodeIndex,
    pub positions: Vec<Position>,
}

enum Strategy {
    Agglomerate(TieBreak),
    Vbm,
}

fn check_corpus(corpus: &SequenceCorpus, config: &FitConfig) -> Result<()> {
    if corpus.is_empty() {
        return Err(PbctError::EmptyCorpus);
    }
    config.hyper.validate()?;
    if config.hyper.eta.len() != corpus.vocab().len() {
        return Err(PbctError::InvalidParameter(format!(
            "eta has length {}, vocabulary has {} symbols",
            config.hyper.eta.len(),
            corpus.vocab().len()
        )));
    }
    Ok(())
}

/// Fits a parsimonious context tree by recursive agglomerative clustering.
pub fn fit_pbct(corpus: &SequenceCorpus, config: &FitConfig) -> Result<ContextTree> {
    fit_with(corpus, config, Strategy::Agglomerate(config.tie_break))
}

/// Fits the variable-order baseline: each node either stays a leaf or
/// splits into all singletons.
pub fn fit_vbm(corpus: &SequenceCorpus, config: &FitConfig) -> Result<ContextTree> {
    fit_with(corpus, config, Strategy::Vbm)
}

fn fit_with(
    corpus: &SequenceCorpus,
    config: &FitConfig,
    strategy: Strategy,
) -> Result<ContextTree> {
    check_corpus(corpus, config)?;
    let d_max = config.hyper.max_depth;
    let positions: Vec<Position> = corpus
        .sequences()
        .iter()
        .enumerate()
        .flat_map(|(s, seq)| (d_max..seq.len()).map(move |p| (s as u32, p as u32)))
        .collect();
    let root = PartialTree {
        node: NodeIndex::root(),
        positions,
    };
    let splits = expand(corpus, config, &strategy, root)?;
    ContextTree::new(corpus.vocab().clone(), d_max, splits)
}

fn expand(
    corpus: &SequenceCorpus,
    config: &FitConfig,
    strategy: &Strategy,
    partial: PartialTree,
) -> Result<BTreeMap<NodeIndex, Partition>> {
    let depth = partial.node.depth();
    let mut splits = BTreeMap::new();
    if depth >= config.hyper.max_depth
        || partial.positions.is_empty()
        || partial.positions.len() < config.min_context_count
    {
        return Ok(splits);
    }
    let v = corpus.vocab().len();
    let seqs = corpus.sequences();
    let mut element_counts = vec![vec![0u64; v]; v];
    for &(s, p) in &partial.positions {
        let seq = &seqs[s as usize];
        let element = seq[p as usize - 1 - depth] as usize - 1;
        let next = seq[p as usize] as usize - 1;
        element_counts[element][next] += 1;
    }
    let alpha = config.hyper.alpha.at(depth);
    let partition = match strategy {
        Strategy::Agglomerate(tie_break) => {
            agglomerate(&element_counts, alpha, &config.hyper.eta, *tie_break)?
        }
        Strategy::Vbm => choose_vbm_split(&element_counts, alpha, &config.hyper.eta)?,
    };
    if partition.is_trivial() {
        return Ok(splits);
    }
    let mut children: Vec<PartialTree> = (1..=partition.len())
        .map(|k| PartialTree {
            node: partial.node.child(k as u32),
            positions: Vec::new(),
        })
        .collect();
    for &(s, p) in &partial.positions {
        let symbol = seqs[s as usize][p as usize - 1 - depth];
        let k = partition
            .block_of(symbol)
            .expect("partition covers the vocabulary");
        children[k].positions.push((s, p));
    }
    drop(partial.positions);
    let subtrees = children
        .into_par_iter()
        .map(|child| expand(corpus, config, strategy, child))
        .collect::<Result<Vec<_>>>()?;
    splits.insert(partial.node, partition);
    for subtree in subtrees {
        splits.extend(subtree);
    }
    Ok(splits)
}

/// Complete order-`d` tree: every internal node splits into singletons,
/// giving `V^d` leaves.
pub fn build_fbm(vocab: &Vocabulary, order: usize) -> Result<ContextTree> {
    let v = vocab.size();
    let mut splits = BTreeMap::new();
    let mut level = vec![NodeIndex::root()];
    for _ in 0..order {
        if v == 1 {
            break;
        }
        let mut next = Vec::with_capacity(level.len() * v as usize);
        for node in level {
            for k in 1..=v {
                next.push(node.child(k));
            }
            splits.insert(node, Partition::singletons(v));
        }
        level = next;
    }
    ContextTree::new(vocab.clone(), order, splits)
}

/// `V^d`, or `None` on overflow.
pub fn fbm_leaf_count(vocab_size: u32, order: usize) -> Option<u64> {
    if vocab_size == 1 {
        return Some(1);
    }
    u64::from(vocab_size).checked_pow(u32::try_from(order).ok()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::crp_log_prior;
    use crate::likelihood::log_multivariate_beta;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn local_posterior_with_zero_counts_is_the_prior() {
        let eta = [1.0, 1.0];
        close(
            local_log_posterior(&[vec![0, 0]], &[2], 1.0, &eta).unwrap(),
            0.5f64.ln(),
            1e-15,
        );
        close(
            local_log_posterior(&[vec![0, 0], vec![0, 0]], &[1, 1], 1.0, &eta).unwrap(),
            0.5f64.ln(),
            1e-15,
        );
        let p = Partition::new(5, vec![vec![1, 4], vec![2], vec![3, 5]]).unwrap();
        let counts = vec![vec![0u64; 5]; 3];
        assert_eq!(
            local_log_posterior(&counts, &p.block_sizes(), 0.8, &[0.5; 5]).unwrap(),
            crp_log_prior(&p, 0.8).unwrap()
        );
    }

    #[test]
    fn merge_similarity_examples() {
        let eta = [1.0, 1.0];
        close(
            merge_similarity(&[0, 0], &[0, 0], 1, 1, 1.0, &eta).unwrap(),
            0.0,
            1e-15,
        );
        close(
            merge_similarity(&[0, 0], &[0, 0], 1, 1, 2.0, &eta).unwrap(),
            0.5f64.ln(),
            1e-15,
        );
        let expected = log_multivariate_beta(&[6.0, 6.0]).unwrap()
            + log_multivariate_beta(&[1.0, 1.0]).unwrap()
            - 2.0 * log_multivariate_beta(&[6.0, 1.0]).unwrap();
        let s = merge_similarity(&[5, 0], &[0, 5], 1, 1, 1.0, &eta).unwrap();
        close(s, expected, 1e-12);
        assert!(s < 0.0);
    }

    #[test]
    fn merge_similarity_is_the_posterior_ratio() {
        let eta = [0.5, 1.0, 2.0];
        let a = vec![3, 0, 4];
        let b = vec![1, 6, 2];
        let c = vec![0, 2, 9];
        let before =
            local_log_posterior(&[a.clone(), b.clone(), c.clone()], &[2, 1, 3], 1.3, &eta).unwrap();
        let merged: Vec<u64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let after = local_log_posterior(&[merged, c], &[3, 3], 1.3, &eta).unwrap();
        close(
            merge_similarity(&a, &b, 2, 1, 1.3, &eta).unwrap(),
            after - before,
            1e-10,
        );
    }

    #[test]
    fn agglomerate_single_element() {
        let p = agglomerate(&[vec![3]], 1.0, &[1.0], TieBreak::default()).unwrap();
        assert_eq!(p, Partition::trivial(1));
    }

    #[test]
    fn agglomerate_zero_counts_prefers_one_block() {
        let counts = vec![vec![0; 3]; 3];
        let chain = agglomerate_chain(&counts, 1.0, &[1.0; 3], TieBreak::default()).unwrap();
        assert_eq!(chain.configurations.len(), 3);
        assert_eq!(chain.best_partition(), &Partition::trivial(3));
        close(chain.best_log_posterior(), (1.0f64 / 3.0).ln(), 1e-14);
    }

    #[test]
    fn agglomerate_recovers_two_groups() {
        // symbols 1,3,5 predict mostly 1; symbols 2,4 predict mostly 2
        let a = vec![900, 50, 50];
        let b = vec![40, 920, 40];
        let counts = vec![a.clone(), b.clone(), a.clone(), b.clone(), a];
        let p = agglomerate(&counts, 1.0, &[1.0; 3], TieBreak::default()).unwrap();
        assert_eq!(
            p,
            Partition::new(5, vec![vec![1, 3, 5], vec![2, 4]]).unwrap()
        );
    }

    #[test]
    fn ties_merge_lowest_pair_first() {
        let counts = vec![vec![0; 4]; 4];
        let mut state = AgglomerationState::new(&counts, 1.0, &[1.0; 4]).unwrap();
        let (i, j, _) = state.best_pair(TieBreak::LexicographicMin).unwrap();
        assert_eq!((i, j), (0, 1));
        state.merge(i, j);
        assert_eq!(state.num_clusters(), 3);
        // Joining {3} onto {1,2} has prior ratio 2, beating ratio 1 for {3,4}.
        let (i, j, _) = state.best_pair(TieBreak::LexicographicMin).unwrap();
        assert_eq!((i, j), (0, 2));
    }

    #[test]
    fn merged_block_counts_sum_to_parent() {
        let counts = vec![vec![1, 2], vec![3, 4], vec![5, 6]];
        let mut state = AgglomerationState::new(&counts, 1.0, &[1.0, 1.0]).unwrap();
        state.merge(0, 2);
        let blocks = state.block_counts();
        assert_eq!(blocks, vec![vec![6, 8], vec![3, 4]]);
        assert_eq!(state.partition().blocks(), &[vec![1, 3], vec![2]]);
    }

    #[test]
    fn vbm_choice() {
        let counts = vec![vec![0; 3]; 3];
        assert!(choose_vbm_split(&counts, 1.0, &[1.0; 3])
            .unwrap()
            .is_trivial());
        let counts = vec![vec![100, 0, 0], vec![0, 100, 0], vec![0, 0, 100]];
        assert_eq!(
            choose_vbm_split(&counts, 1.0, &[1.0; 3]).unwrap(),
            Partition::singletons(3)
        );
    }

    #[test]
    fn fbm_shapes() {
        let v3 = Vocabulary::new(3).unwrap();
        assert_eq!(build_fbm(&v3, 0).unwrap().leaf_count(), 1);
        assert_eq!(build_fbm(&v3, 2).unwrap().leaf_count(), 9);
        for v in 1..=5u32 {
            for d in 0..=3usize {
                let tree = build_fbm(&Vocabulary::new(v).unwrap(), d).unwrap();
                assert_eq!(tree.leaf_count() as u64, fbm_leaf_count(v, d).unwrap());
                assert!(tree.validate().is_empty());
            }
        }
    }

    fn corpus(v: u32, seqs: Vec<Vec<u32>>) -> SequenceCorpus {
        SequenceCorpus::new(Vocabulary::new(v).unwrap(), seqs).unwrap()
    }

    #[test]
    fn alternating_corpus_splits_at_depth_one() {
        let seq: Vec<u32> = (0..1000).map(|i| i % 2 + 1).collect();
        let config = FitConfig::new(Hyperparams::symmetric(2, 1.0, 1.0, 2).unwrap());
        let tree = fit_pbct(&corpus(2, vec![seq.clone()]), &config).unwrap();
        assert_eq!(
            tree.children_partition(&NodeIndex::root()),
            Some(&Partition::singletons(2))
        );
        assert_eq!(tree.leaf_count(), 2);

        let vbm = fit_vbm(&corpus(2, vec![seq]), &config).unwrap();
        assert_eq!(vbm, tree);
    }

    #[test]
    fn short_sequences_fit_a_single_leaf() {
        let config = FitConfig::new(Hyperparams::symmetric(3, 1.0, 1.0, 3).unwrap());
        let tree = fit_pbct(&corpus(3, vec![vec![1, 2, 3], vec![2], vec![]]), &config).unwrap();
        assert_eq!(tree.leaf_count(), 1);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let config = FitConfig::new(Hyperparams::symmetric(3, 1.0, 1.0, 3).unwrap());
        assert!(matches!(
            fit_pbct(&corpus(3, vec![]), &config),
            Err(PbctError::EmptyCorpus)
        ));
    }

    #[test]
    fn min_context_count_prunes() {
        let seq: Vec<u32> = (0..1000).map(|i| i % 2 + 1).collect();
        let mut config = FitConfig::new(Hyperparams::symmetric(2, 1.0, 1.0, 2).unwrap());
        config.min_context_count = 10_000;
        let tree = fit_pbct(&corpus(2, vec![seq]), &config).unwrap();
        assert_eq!(tree.leaf_count(), 1);
    }
}
