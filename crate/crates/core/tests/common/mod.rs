#![allow(dead_code)]

use pbct::generator::generate_tree;
use pbct::{ContextTree, Hyperparams, Partition, RngSeed, Vocabulary};
use proptest::prelude::*;

/// Every set partition of `1..=v`, via restricted growth strings.
pub fn all_partitions(v: u32) -> Vec<Partition> {
    fn grow(prefix: &mut Vec<u32>, v: usize, out: &mut Vec<Partition>) {
        if prefix.len() == v {
            out.push(Partition::from_labels(prefix));
            return;
        }
        let next = prefix.iter().copied().max().map_or(0, |m| m + 1);
        for label in 0..=next {
            prefix.push(label);
            grow(prefix, v, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), v as usize, &mut out);
    out
}

/// ARI from explicit pair classification over all `V(V-1)/2` pairs.
pub fn brute_force_ari(p1: &Partition, p2: &Partition) -> f64 {
    let v = p1.universe();
    let (mut both, mut only1, mut only2, mut neither) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 1..=v {
        for j in (i + 1)..=v {
            let same1 = p1.block_of(i) == p1.block_of(j);
            let same2 = p2.block_of(i) == p2.block_of(j);
            match (same1, same2) {
                (true, true) => both += 1.0,
                (true, false) => only1 += 1.0,
                (false, true) => only2 += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let denom = (both + only1) * (only1 + neither) + (both + only2) * (only2 + neither);
    if denom == 0.0 {
        return if p1 == p2 { 1.0 } else { 0.0 };
    }
    2.0 * (both * neither - only1 * only2) / denom
}

pub fn partition_strategy(max_v: u32) -> impl Strategy<Value = Partition> {
    (1..=max_v).prop_flat_map(|v| {
        proptest::collection::vec(0..v, v as usize)
            .prop_map(|labels| Partition::from_labels(&labels))
    })
}

pub fn partition_pair(max_v: u32) -> impl Strategy<Value = (Partition, Partition)> {
    (1..=max_v).prop_flat_map(|v| {
        let labels = || proptest::collection::vec(0..v, v as usize);
        (labels(), labels())
            .prop_map(|(a, b)| (Partition::from_labels(&a), Partition::from_labels(&b)))
    })
}

pub fn random_tree(v: u32, depth: usize, alpha: f64, seed: u64) -> ContextTree {
    let vocab = Vocabulary::new(v).unwrap();
    let hyper = Hyperparams::symmetric(v, 1.0, alpha, depth).unwrap();
    generate_tree(&vocab, &hyper, RngSeed::new(seed)).unwrap()
}

/// A random tree together with sequences over its vocabulary.
pub fn tree_and_sequences(
    max_v: u32,
    max_depth: usize,
    max_len: usize,
) -> impl Strategy<Value = (ContextTree, Vec<Vec<u32>>)> {
    (1..=max_v, 0..=max_depth, 0.2f64..3.0, any::<u64>()).prop_flat_map(
        move |(v, depth, alpha, seed)| {
            let tree = random_tree(v, depth, alpha, seed);
            let seqs =
                proptest::collection::vec(proptest::collection::vec(1..=v, 0..=max_len), 1..4);
            (Just(tree), seqs)
        },
    )
}
