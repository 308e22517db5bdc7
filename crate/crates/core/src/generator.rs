//! Random context trees and sequences.
//!
//! Vocabulary partitions are drawn from the Chinese restaurant process with
//! the standard seating rule: customer `m` joins table `k` with probability
//! `m_k / (alpha + m - 1)` and opens a new table with probability
//! `alpha / (alpha + m - 1)`. [`crp_log_prior`] is the matching exchangeable
//! partition probability function.

use std::collections::{BTreeMap, VecDeque};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Gamma;

use crate::error::{PbctError, Result};
use crate::model::{ContextTree, Hyperparams, NodeIndex, Partition, Vocabulary};
use crate::rng::RngSeed;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(PbctError::InvalidParameter(format!(
            "CRP concentration must be positive, got {alpha}"
        )))
    }
}

/// Seats customers `1..=V` in order and returns the occupied tables as a
/// canonical partition.
pub fn sample_crp_partition<R: Rng + ?Sized>(v: u32, alpha: f64, rng: &mut R) -> Result<Partition> {
    if v == 0 {
        return Err(PbctError::InvalidParameter(
            "CRP needs at least one customer".into(),
        ));
    }
    check_alpha(alpha)?;
    let mut tables: Vec<Vec<u32>> = vec![vec![1]];
    for m in 2..=v {
        let seated = (m - 1) as f64;
        let mut u = rng.random::<f64>() * (alpha + seated);
        let mut chosen = tables.len();
        for (k, table) in tables.iter().enumerate() {
            u -= table.len() as f64;
            if u < 0.0 {
                chosen = k;
                break;
            }
        }
        if chosen == tables.len() {
            tables.push(vec![m]);
        } else {
            tables[chosen].push(m);
        }
    }
    Ok(Partition::from_blocks_unchecked(v, tables))
}

/// Log EPPF of a configuration given only its block sizes:
/// `K log(alpha) + sum_k log (m_k - 1)! - sum_{i<V} log(alpha + i)`.
pub fn crp_log_prior_sizes(block_sizes: &[usize], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if block_sizes.is_empty() || block_sizes.contains(&0) {
        return Err(PbctError::InvalidParameter(
            "block sizes must be positive and non-empty".into(),
        ));
    }
    Ok(crp_log_prior_unchecked(block_sizes.iter().copied(), alpha))
}

pub(crate) fn crp_log_prior_unchecked(block_sizes: impl Iterator<Item = usize>, alpha: f64) -> f64 {
    let ln_alpha = alpha.ln();
    let mut total = 0usize;
    let mut value = 0.0;
    for m in block_sizes {
        value += ln_alpha + ln_factorial(m - 1);
        total += m;
    }
    value - ln_rising(alpha, total)
}

/// `log (m!)` by direct summation.
pub(crate) fn ln_factorial(m: usize) -> f64 {
    (2..=m).map(|j| (j as f64).ln()).sum()
}

/// `log prod_{i<n} (alpha + i)`.
fn ln_rising(alpha: f64, n: usize) -> f64 {
    (0..n).map(|i| (alpha + i as f64).ln()).sum()
}

/// Log prior probability of a partition under `CRP_V(alpha)`.
pub fn crp_log_prior(partition: &Partition, alpha: f64) -> Result<f64> {
    if let Some(defect) = partition.defects().first() {
        return Err(PbctError::InvalidParameter(format!(
            "not a partition: {defect}"
        )));
    }
    crp_log_prior_sizes(&partition.block_sizes(), alpha)
}

/// Draws a tree from the recursive CRP process up to `hyper.max_depth`.
///
/// Each internal node at depth `d` draws its child partition from
/// `CRP_V(alpha(d))`; a single-block draw makes the node a leaf. The draw
/// at node `e` uses the substream `seed.derive_path(e)`, so the result does
/// not depend on traversal order.
pub fn generate_tree(
    vocab: &Vocabulary,
    hyper: &Hyperparams,
    seed: RngSeed,
) -> Result<ContextTree> {
    hyper.validate()?;
    let v = vocab.size();
    let mut splits = BTreeMap::new();
    let mut frontier = VecDeque::from([NodeIndex::root()]);
    while let Some(node) = frontier.pop_front() {
        let depth = node.depth();
        if depth >= hyper.max_depth {
            continue;
        }
        let mut rng = seed.derive_path(node.path()).rng();
        let partition = sample_crp_partition(v, hyper.alpha.at(depth), &mut rng)?;
        if partition.len() > 1 {
            for k in 1..=partition.len() {
                frontier.push_back(node.child(k as u32));
            }
            splits.insert(node, partition);
        }
    }
    ContextTree::new(vocab.clone(), hyper.max_depth, splits)
}

/// True next-symbol distributions attached to the leaves of a tree.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafDistributionTable {
    pub dists: BTreeMap<NodeIndex, Vec<f64>>,
    pub lambda: f64,
}

impl LeafDistributionTable {
    pub fn get(&self, leaf: &NodeIndex) -> Option<&[f64]> {
        self.dists.get(leaf).map(Vec::as_slice)
    }

    /// Checks that every vector is a probability vector of length `v`.
    pub fn validate(&self, v: usize) -> Result<()> {
        for (leaf, p) in &self.dists {
            let sum: f64 = p.iter().sum();
            if p.len() != v || p.iter().any(|x| x.is_nan() || *x < 0.0) || (sum - 1.0).abs() > 1e-12
            {
                return Err(PbctError::InvalidParameter(format!(
                    "distribution at leaf {leaf} is not a probability vector over {v} symbols"
                )));
            }
        }
        Ok(())
    }
}

/// `(1 - lambda) * phi + lambda * 1_V / V`.
pub fn mix_with_uniform(phi: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(PbctError::InvalidParameter(format!(
            "mixture weight must lie in [0, 1], got {lambda}"
        )));
    }
    let uniform = 1.0 / phi.len() as f64;
    Ok(phi
        .iter()
        .map(|&p| (1.0 - lambda) * p + lambda * uniform)
        .collect())
}

/// One draw from `Dirichlet(eta)` via normalized gamma variates.
pub fn sample_dirichlet<R: Rng + ?Sized>(eta: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let mut draws = Vec::with_capacity(eta.len());
    for &e in eta {
        let gamma = Gamma::new(e, 1.0)
            .map_err(|err| PbctError::InvalidParameter(format!("gamma({e}): {err}")))?;
        draws.push(gamma.sample(rng));
    }
    let mut sum: f64 = draws.iter().sum();
    if sum == 0.0 {
        // All variates underflowed (tiny eta): put the mass on the largest shape.
        let best = eta
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        draws[best] = 1.0;
        sum = 1.0;
    }
    let mut phi: Vec<f64> = draws.iter().map(|d| d / sum).collect();
    renormalize(&mut phi);
    Ok(phi)
}

fn renormalize(p: &mut [f64]) {
    let sum: f64 = p.iter().sum();
    for x in p.iter_mut() {
        *x /= sum;
    }
}

/// Draws one spike-and-slab distribution per leaf, in canonical leaf order.
pub fn sample_leaf_distributions<R: Rng + ?Sized>(
    tree: &ContextTree,
    hyper: &Hyperparams,
    lambda: f64,
    rng: &mut R,
) -> Result<LeafDistributionTable> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(PbctError::InvalidParameter(format!(
            "lambda must lie in [0, 1], got {lambda}"
        )));
    }
    if hyper.eta.len() != tree.vocab().len() {
        return Err(PbctError::InvalidParameter(
            "eta length does not match the vocabulary".into(),
        ));
    }
    let mut dists = BTreeMap::new();
    for leaf in tree.leaves() {
        let phi = sample_dirichlet(&hyper.eta, rng)?;
        dists.insert(leaf.clone(), mix_with_uniform(&phi, lambda)?);
    }
    Ok(LeafDistributionTable { dists, lambda })
}

/// Simulates a sequence of `length` symbols. The first `D` symbols (the
/// tree's maximum depth) are uniform burn-in; later symbols are drawn from
/// the distribution at the leaf routed by the preceding context.
pub fn simulate_sequence<R: Rng + ?Sized>(
    tree: &ContextTree,
    dists: &LeafDistributionTable,
    length: usize,
    rng: &mut R,
) -> Result<Vec<u32>> {
    if length == 0 {
        return Err(PbctError::InvalidParameter(
            "sequence length must be at least 1".into(),
        ));
    }
    let v = tree.vocab_size();
    let samplers = tree
        .leaves()
        .iter()
        .map(|leaf| {
            let p = dists.get(leaf).ok_or_else(|| {
                PbctError::InvalidParameter(format!("no distribution for leaf {leaf}"))
            })?;
            if p.len() != v as usize {
                return Err(PbctError::InvalidParameter(format!(
                    "distribution at leaf {leaf} has length {}",
                    p.len()
                )));
            }
            WeightedIndex::new(p).map_err(|e| {
                PbctError::InvalidParameter(format!("distribution at leaf {leaf}: {e}"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let burn_in = tree.max_depth().min(length);
    let mut seq: Vec<u32> = (0..burn_in).map(|_| rng.random_range(1..=v)).collect();
    seq.reserve(length - burn_in);
    for pos in burn_in..length {
        let leaf = tree.leaf_ordinal_at(&seq, pos)?;
        seq.push(samplers[leaf].sample(rng) as u32 + 1);
    }
    Ok(seq)
}
