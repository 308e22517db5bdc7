//! Domain types: vocabularies, vocabulary partitions, context trees, count
//! tables, hyperparameters and sequence corpora.
//!
//! Symbols are 1-based (`1..=V`) everywhere in this crate; label strings only
//! appear at the I/O boundary. A context tree is stored as a flat map from
//! node paths to the partition owned by each internal node. Leaves are the
//! reachable nodes without a partition.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{PbctError, Result};

/// Marker for a symbol not covered by any block.
const UNASSIGNED: u32 = u32::MAX;

/// A discrete vocabulary `{1, ..., V}` with optional token labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    size: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl Vocabulary {
    pub fn new(size: u32) -> Result<Self> {
        if size == 0 {
            return Err(PbctError::InvalidParameter(
                "vocabulary size must be at least 1".into(),
            ));
        }
        Ok(Self { size, labels: None })
    }

    /// Builds a labelled vocabulary; label `i` names symbol `i + 1`.
    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(PbctError::InvalidParameter(
                "vocabulary size must be at least 1".into(),
            ));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(PbctError::InvalidParameter(format!(
                    "duplicate vocabulary label {label:?}"
                )));
            }
        }
        let size = u32::try_from(labels.len())
            .map_err(|_| PbctError::InvalidParameter("vocabulary too large".into()))?;
        Ok(Self {
            size,
            labels: Some(labels),
        })
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn len(&self) -> usize {
        self.size as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of a symbol, or its integer id when the vocabulary is unlabelled.
    pub fn label(&self, symbol: u32) -> String {
        match &self.labels {
            Some(labels) if symbol >= 1 && symbol <= self.size => {
                labels[symbol as usize - 1].clone()
            }
            _ => symbol.to_string(),
        }
    }

    /// Looks up the symbol for a token. Unlabelled vocabularies accept integer ids.
    pub fn symbol_of(&self, token: &str) -> Option<u32> {
        match &self.labels {
            Some(labels) => labels.iter().position(|l| l == token).map(|i| i as u32 + 1),
            None => token
                .parse::<u32>()
                .ok()
                .filter(|&s| s >= 1 && s <= self.size),
        }
    }

    pub fn contains(&self, symbol: u32) -> bool {
        symbol >= 1 && symbol <= self.size
    }
}

/// Position of a node in a context tree: the sequence of 1-based child
/// indices from the root. The empty path is the root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeIndex(Vec<u32>);

impl NodeIndex {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn new(path: Vec<u32>) -> Self {
        Self(path)
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn path(&self) -> &[u32] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the `k`-th child (1-based).
    pub fn child(&self, k: u32) -> Self {
        let mut path = Vec::with_capacity(self.0.len() + 1);
        path.extend_from_slice(&self.0);
        path.push(k);
        Self(path)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.0.is_empty() {
            None
        } else {
            Some(Self(self.0[..self.0.len() - 1].to_vec()))
        }
    }
}

impl From<Vec<u32>> for NodeIndex {
    fn from(path: Vec<u32>) -> Self {
        Self(path)
    }
}

impl fmt::Display for NodeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// A partition of `{1, ..., V}` into non-empty blocks.
///
/// Blocks are kept in canonical order: each block sorted ascending, blocks
/// ordered by their minimum element. Child `k` of a tree node corresponds to
/// block `k` in this order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    universe: u32,
    blocks: Vec<Vec<u32>>,
    assignment: Vec<u32>,
}

impl Partition {
    /// Validated constructor.
    pub fn new(universe: u32, blocks: Vec<Vec<u32>>) -> Result<Self> {
        let partition = Self::from_blocks_unchecked(universe, blocks);
        match partition.defects().first() {
            None => Ok(partition),
            Some(defect) => Err(PbctError::InvalidParameter(format!(
                "not a partition of 1..={universe}: {defect}"
            ))),
        }
    }

    /// Canonicalizes block order without checking the partition property.
    /// Use [`Partition::defects`] to inspect the result.
    pub fn from_blocks_unchecked(universe: u32, mut blocks: Vec<Vec<u32>>) -> Self {
        for block in &mut blocks {
            block.sort_unstable();
        }
        blocks.sort_by_key(|b| b.first().copied().unwrap_or(u32::MAX));
        let mut assignment = vec![UNASSIGNED; universe as usize];
        for (k, block) in blocks.iter().enumerate() {
            for &s in block {
                if s >= 1 && s <= universe {
                    let slot = &mut assignment[s as usize - 1];
                    if *slot == UNASSIGNED {
                        *slot = k as u32;
                    }
                }
            }
        }
        Self {
            universe,
            blocks,
            assignment,
        }
    }

    /// Builds a partition from per-symbol cluster labels (`labels[v - 1]`
    /// is the label of symbol `v`). Label values are arbitrary.
    pub fn from_labels<L: Eq + std::hash::Hash + Copy>(labels: &[L]) -> Self {
        let mut index: std::collections::HashMap<L, usize> = Default::default();
        let mut blocks: Vec<Vec<u32>> = Vec::new();
        for (i, label) in labels.iter().enumerate() {
            let k = *index.entry(*label).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[k].push(i as u32 + 1);
        }
        Self::from_blocks_unchecked(labels.len() as u32, blocks)
    }

    /// The single-block partition `{V}`.
    pub fn trivial(universe: u32) -> Self {
        Self::from_blocks_unchecked(universe, vec![(1..=universe).collect()])
    }

    /// The partition into `V` singletons.
    pub fn singletons(universe: u32) -> Self {
        Self::from_blocks_unchecked(universe, (1..=universe).map(|s| vec![s]).collect())
    }

    pub fn universe(&self) -> u32 {
        self.universe
    }

    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Vec<u32>> {
        self.blocks
    }

    /// Number of blocks `K`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.len() == 1
    }

    /// 0-based index of the block holding `symbol`.
    pub fn block_of(&self, symbol: u32) -> Option<usize> {
        if symbol == 0 || symbol > self.universe {
            return None;
        }
        match self.assignment[symbol as usize - 1] {
            UNASSIGNED => None,
            k => Some(k as usize),
        }
    }

    /// Per-symbol 0-based block labels.
    pub fn labels(&self) -> Vec<usize> {
        self.assignment.iter().map(|&k| k as usize).collect()
    }

    /// Every way in which this value fails to partition `{1..=V}`.
    pub fn defects(&self) -> Vec<PartitionDefect> {
        let mut out = Vec::new();
        if self.blocks.is_empty() {
            out.push(PartitionDefect::NoBlocks);
            return out;
        }
        let mut seen = vec![false; self.universe as usize];
        for block in &self.blocks {
            if block.is_empty() {
                out.push(PartitionDefect::EmptyBlock);
            }
            for &s in block {
                if s == 0 || s > self.universe {
                    out.push(PartitionDefect::SymbolOutOfRange(s));
                    continue;
                }
                if seen[s as usize - 1] {
                    out.push(PartitionDefect::Overlap(s));
                }
                seen[s as usize - 1] = true;
            }
        }
        for (i, covered) in seen.iter().enumerate() {
            if !covered {
                out.push(PartitionDefect::Uncovered(i as u32 + 1));
            }
        }
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, block) in self.blocks.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{")?;
            for (i, s) in block.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{s}")?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionDefect {
    NoBlocks,
    EmptyBlock,
    Overlap(u32),
    Uncovered(u32),
    SymbolOutOfRange(u32),
}

impl fmt::Display for PartitionDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionDefect::NoBlocks => write!(f, "no blocks"),
            PartitionDefect::EmptyBlock => write!(f, "empty block"),
            PartitionDefect::Overlap(s) => write!(f, "blocks overlap at symbol {s}"),
            PartitionDefect::Uncovered(s) => write!(f, "symbol {s} not covered"),
            PartitionDefect::SymbolOutOfRange(s) => write!(f, "symbol {s} out of range"),
        }
    }
}

/// A single broken tree invariant, located at a node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub node: NodeIndex,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    Partition(PartitionDefect),
    /// Partition built over a different vocabulary size.
    UniverseMismatch {
        found: u32,
        expected: u32,
    },
    /// A single-block partition stored as a split; such nodes must be leaves.
    TrivialSplit,
    /// Node lies deeper than the tree's maximum depth.
    ExceedsMaxDepth {
        depth: usize,
        max_depth: usize,
    },
    /// A split is recorded for a node that is not reachable from the root.
    Unreachable,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::Partition(d) => write!(f, "node {}: {d}", self.node),
            ViolationKind::UniverseMismatch { found, expected } => write!(
                f,
                "node {}: partition over {found} symbols, vocabulary has {expected}",
                self.node
            ),
            ViolationKind::TrivialSplit => {
                write!(f, "node {}: single-block split must be a leaf", self.node)
            }
            ViolationKind::ExceedsMaxDepth { depth, max_depth } => write!(
                f,
                "node {}: depth {depth} exceeds maximum depth {max_depth}",
                self.node
            ),
            ViolationKind::Unreachable => {
                write!(f, "node {}: split recorded for unreachable node", self.node)
            }
        }
    }
}

#[derive(Debug, Clone)]
enum ArenaKind {
    Leaf {
        ordinal: usize,
    },
    Split {
        partition_key: usize,
        first_child: usize,
    },
}

#[derive(Debug, Clone)]
struct ArenaNode {
    depth: usize,
    kind: ArenaKind,
}

/// A context tree of bounded depth over a vocabulary.
///
/// Internal nodes own a [`Partition`] of the vocabulary; the children of node
/// `e` are `e1, ..., eK` in canonical block order. Leaves index predictive
/// distributions.
#[derive(Debug, Clone)]
pub struct ContextTree {
    vocab: Vocabulary,
    max_depth: usize,
    splits: BTreeMap<NodeIndex, Partition>,
    // Derived routing structure; children of a split are contiguous.
    arena: Vec<ArenaNode>,
    arena_paths: Vec<NodeIndex>,
    split_assignments: Vec<Vec<u32>>,
    leaves: Vec<NodeIndex>,
    leaf_arena: Vec<usize>,
}

impl PartialEq for ContextTree {
    fn eq(&self, other: &Self) -> bool {
        self.vocab == other.vocab
            && self.max_depth == other.max_depth
            && self.splits == other.splits
    }
}

impl ContextTree {
    /// Builds and validates a tree from its internal-node partitions.
    pub fn new(
        vocab: Vocabulary,
        max_depth: usize,
        splits: BTreeMap<NodeIndex, Partition>,
    ) -> Result<Self> {
        let tree = Self::from_splits_unchecked(vocab, max_depth, splits);
        let violations = tree.validate();
        if violations.is_empty() {
            Ok(tree)
        } else {
            Err(PbctError::InvalidTree(violations))
        }
    }

    /// Builds a tree without validation. Routing through a malformed
    /// partition fails at runtime; call [`ContextTree::validate`] first.
    pub fn from_splits_unchecked(
        vocab: Vocabulary,
        max_depth: usize,
        splits: BTreeMap<NodeIndex, Partition>,
    ) -> Self {
        let mut tree = Self {
            vocab,
            max_depth,
            splits,
            arena: Vec::new(),
            arena_paths: Vec::new(),
            split_assignments: Vec::new(),
            leaves: Vec::new(),
            leaf_arena: Vec::new(),
        };
        tree.build_arena();
        tree
    }

    /// The depth-0 tree with a single leaf at the root.
    pub fn single_leaf(vocab: Vocabulary, max_depth: usize) -> Self {
        Self::from_splits_unchecked(vocab, max_depth, BTreeMap::new())
    }

    fn build_arena(&mut self) {
        let mut arena = vec![ArenaNode {
            depth: 0,
            kind: ArenaKind::Leaf { ordinal: 0 },
        }];
        let mut paths = vec![NodeIndex::root()];
        let mut assignments = Vec::new();
        let mut cursor = 0;
        while cursor < arena.len() {
            let path = paths[cursor].clone();
            if let Some(partition) = self.splits.get(&path) {
                let first_child = arena.len();
                let depth = arena[cursor].depth + 1;
                for k in 0..partition.len() {
                    arena.push(ArenaNode {
                        depth,
                        kind: ArenaKind::Leaf { ordinal: 0 },
                    });
                    paths.push(path.child(k as u32 + 1));
                }
                let mut assignment = partition.assignment.clone();
                assignment.resize(self.vocab.len(), UNASSIGNED);
                assignments.push(assignment);
                arena[cursor].kind = ArenaKind::Split {
                    partition_key: assignments.len() - 1,
                    first_child,
                };
            }
            cursor += 1;
        }
        let mut leaf_ids: Vec<usize> = (0..arena.len())
            .filter(|&i| matches!(arena[i].kind, ArenaKind::Leaf { .. }))
            .collect();
        leaf_ids.sort_by(|&a, &b| paths[a].cmp(&paths[b]));
        for (ordinal, &id) in leaf_ids.iter().enumerate() {
            arena[id].kind = ArenaKind::Leaf { ordinal };
        }
        self.leaves = leaf_ids.iter().map(|&id| paths[id].clone()).collect();
        self.leaf_arena = leaf_ids;
        self.arena = arena;
        self.arena_paths = paths;
        self.split_assignments = assignments;
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn vocab_size(&self) -> u32 {
        self.vocab.size()
    }

    /// Specified maximum depth `D`.
    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    /// Depth of the deepest node actually present.
    pub fn realized_depth(&self) -> usize {
        self.arena.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn splits(&self) -> &BTreeMap<NodeIndex, Partition> {
        &self.splits
    }

    /// Partition owned by an internal node, `None` for leaves or absent nodes.
    pub fn children_partition(&self, node: &NodeIndex) -> Option<&Partition> {
        self.splits.get(node)
    }

    /// Leaf indices in canonical (lexicographic path) order.
    pub fn leaves(&self) -> &[NodeIndex] {
        &self.leaves
    }

    /// Number of leaves `L = |E|`.
    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn leaf_ordinal(&self, node: &NodeIndex) -> Option<usize> {
        self.leaves.binary_search(node).ok()
    }

    pub fn contains_node(&self, node: &NodeIndex) -> bool {
        self.arena_paths.contains(node)
    }

    pub fn is_leaf(&self, node: &NodeIndex) -> bool {
        self.leaf_ordinal(node).is_some()
    }

    /// All reachable nodes at the given depth, in canonical order.
    pub fn nodes_at_depth(&self, depth: usize) -> Vec<NodeIndex> {
        let mut nodes: Vec<NodeIndex> = self
            .arena
            .iter()
            .zip(&self.arena_paths)
            .filter(|(n, _)| n.depth == depth)
            .map(|(_, p)| p.clone())
            .collect();
        nodes.sort();
        nodes
    }

    /// Enumerates every broken tree invariant; an empty list means the tree is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let reachable: HashSet<&NodeIndex> = self.arena_paths.iter().collect();
        for (node, partition) in &self.splits {
            if !reachable.contains(node) {
                out.push(Violation {
                    node: node.clone(),
                    kind: ViolationKind::Unreachable,
                });
                continue;
            }
            if partition.universe() != self.vocab.size() {
                out.push(Violation {
                    node: node.clone(),
                    kind: ViolationKind::UniverseMismatch {
                        found: partition.universe(),
                        expected: self.vocab.size(),
                    },
                });
            }
            for defect in partition.defects() {
                out.push(Violation {
                    node: node.clone(),
                    kind: ViolationKind::Partition(defect),
                });
            }
            if partition.len() == 1 {
                out.push(Violation {
                    node: node.clone(),
                    kind: ViolationKind::TrivialSplit,
                });
            }
            if node.depth() >= self.max_depth {
                out.push(Violation {
                    node: node.clone(),
                    kind: ViolationKind::ExceedsMaxDepth {
                        depth: node.depth() + 1,
                        max_depth: self.max_depth,
                    },
                });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Routes a context (most recent symbol first) to its leaf.
    pub fn map_context_to_leaf(&self, recent_history: &[u32]) -> Result<&NodeIndex> {
        let ordinal = self.route_with(recent_history.len(), |d| recent_history[d])?;
        Ok(&self.leaves[ordinal])
    }

    /// Leaf ordinal for predicting `seq[pos]` from the symbols before it.
    pub(crate) fn leaf_ordinal_at(&self, seq: &[u32], pos: usize) -> Result<usize> {
        self.route_with(pos, |d| seq[pos - 1 - d])
    }

    fn route_with(&self, available: usize, symbol_at: impl Fn(usize) -> u32) -> Result<usize> {
        let mut id = 0;
        loop {
            let node = &self.arena[id];
            match node.kind {
                ArenaKind::Leaf { ordinal } => return Ok(ordinal),
                ArenaKind::Split {
                    partition_key,
                    first_child,
                } => {
                    if node.depth >= available {
                        return Err(PbctError::InsufficientHistory {
                            node: self.arena_paths[id].clone(),
                            needed: node.depth + 1,
                            available,
                        });
                    }
                    let symbol = symbol_at(node.depth);
                    let k = self
                        .vocab
                        .contains(symbol)
                        .then(|| self.split_assignments[partition_key][symbol as usize - 1])
                        .filter(|&k| k != UNASSIGNED)
                        .ok_or(PbctError::SymbolOutOfRange {
                            symbol: symbol as u64,
                            vocab_size: self.vocab.size(),
                            line: None,
                        })?;
                    id = first_child + k as usize;
                }
            }
        }
    }

    /// Node reached after descending `depth` levels for predicting
    /// `seq[pos]`, or `None` when a leaf ends the path earlier.
    pub(crate) fn node_at_depth_for(
        &self,
        seq: &[u32],
        pos: usize,
        depth: usize,
    ) -> Option<&NodeIndex> {
        let mut id = 0;
        while self.arena[id].depth < depth {
            match self.arena[id].kind {
                ArenaKind::Leaf { .. } => return None,
                ArenaKind::Split {
                    partition_key,
                    first_child,
                } => {
                    let d = self.arena[id].depth;
                    if d >= pos {
                        return None;
                    }
                    let symbol = seq[pos - 1 - d];
                    let k = self.split_assignments[partition_key]
                        .get((symbol as usize).wrapping_sub(1))
                        .copied()
                        .filter(|&k| k != UNASSIGNED)?;
                    id = first_child + k as usize;
                }
            }
        }
        Some(&self.arena_paths[id])
    }
}

/// Per-leaf next-symbol counts `X_e`, aligned with a tree's canonical leaf order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    vocab_size: u32,
    leaves: Vec<NodeIndex>,
    counts: Vec<Vec<u64>>,
}

impl CountTable {
    pub fn zeros(tree: &ContextTree) -> Self {
        Self {
            vocab_size: tree.vocab_size(),
            leaves: tree.leaves().to_vec(),
            counts: vec![vec![0; tree.vocab.len()]; tree.leaf_count()],
        }
    }

    /// Builds a table from explicit per-leaf vectors; keys must be exactly
    /// the tree's leaves.
    pub fn from_map(tree: &ContextTree, map: BTreeMap<NodeIndex, Vec<u64>>) -> Result<Self> {
        let mut table = Self::zeros(tree);
        for (node, counts) in map {
            let ordinal = tree.leaf_ordinal(&node).ok_or_else(|| {
                PbctError::InvalidParameter(format!("count vector for non-leaf node {node}"))
            })?;
            if counts.len() != tree.vocab.len() {
                return Err(PbctError::InvalidParameter(format!(
                    "count vector at {node} has length {}, expected {}",
                    counts.len(),
                    tree.vocab.len()
                )));
            }
            table.counts[ordinal] = counts;
        }
        Ok(table)
    }

    pub fn vocab_size(&self) -> u32 {
        self.vocab_size
    }

    pub fn leaves(&self) -> &[NodeIndex] {
        &self.leaves
    }

    pub fn get(&self, leaf: &NodeIndex) -> Option<&[u64]> {
        self.leaves
            .binary_search(leaf)
            .ok()
            .map(|i| self.counts[i].as_slice())
    }

    pub fn by_ordinal(&self, ordinal: usize) -> &[u64] {
        &self.counts[ordinal]
    }

    pub(crate) fn increment(&mut self, ordinal: usize, symbol: u32) {
        self.counts[ordinal][symbol as usize - 1] += 1;
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NodeIndex, &[u64])> {
        self.leaves
            .iter()
            .zip(self.counts.iter().map(Vec::as_slice))
    }

    /// Sum of all counts.
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// True when both tables are keyed by the same leaves.
    pub fn same_shape(&self, other: &CountTable) -> bool {
        self.vocab_size == other.vocab_size && self.leaves == other.leaves
    }

    /// Elementwise sum of two tables over the same leaves.
    pub fn merge(mut self, other: &CountTable) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(PbctError::InvalidParameter(
                "count tables are keyed by different leaves".into(),
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(self)
    }
}

/// CRP concentration as a function of depth: `alpha(d) = base * decay^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSchedule {
    pub base: f64,
    pub decay: f64,
}

impl AlphaSchedule {
    pub fn constant(alpha: f64) -> Self {
        Self {
            base: alpha,
            decay: 1.0,
        }
    }

    pub fn geometric(base: f64, decay: f64) -> Self {
        Self { base, decay }
    }

    pub fn at(&self, depth: usize) -> f64 {
        self.base * self.decay.powi(depth as i32)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base > 0.0 && self.base.is_finite()) {
            return Err(PbctError::InvalidParameter(format!(
                "alpha must be positive, got {}",
                self.base
            )));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(PbctError::InvalidParameter(format!(
                "alpha decay must lie in (0, 1], got {}",
                self.decay
            )));
        }
        Ok(())
    }
}

/// Model hyperparameters: Dirichlet vector `eta`, CRP schedule and maximum depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub eta: Vec<f64>,
    pub alpha: AlphaSchedule,
    pub max_depth: usize,
}

impl Hyperparams {
    pub fn new(eta: Vec<f64>, alpha: AlphaSchedule, max_depth: usize) -> Result<Self> {
        let hyper = Self {
            eta,
            alpha,
            max_depth,
        };
        hyper.validate()?;
        Ok(hyper)
    }

    /// Symmetric Dirichlet `eta * 1_V` with constant `alpha`.
    pub fn symmetric(vocab_size: u32, eta: f64, alpha: f64, max_depth: usize) -> Result<Self> {
        Self::new(
            vec![eta; vocab_size as usize],
            AlphaSchedule::constant(alpha),
            max_depth,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.eta.is_empty() {
            return Err(PbctError::InvalidParameter("eta must be non-empty".into()));
        }
        if let Some(bad) = self.eta.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(PbctError::InvalidParameter(format!(
                "eta entries must be positive, got {bad}"
            )));
        }
        self.alpha.validate()
    }

    pub fn vocab_size(&self) -> u32 {
        self.eta.len() as u32
    }
}

/// One or more categorical sequences over a shared vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceCorpus {
    vocab: Vocabulary,
    sequences: Vec<Vec<u32>>,
}

impl SequenceCorpus {
    pub fn new(vocab: Vocabulary, sequences: Vec<Vec<u32>>) -> Result<Self> {
        for seq in &sequences {
            if let Some(&bad) = seq.iter().find(|&&s| !vocab.contains(s)) {
                return Err(PbctError::SymbolOutOfRange {
                    symbol: bad as u64,
                    vocab_size: vocab.size(),
                    line: None,
                });
            }
        }
        Ok(Self { vocab, sequences })
    }

    pub fn single(vocab: Vocabulary, sequence: Vec<u32>) -> Result<Self> {
        Self::new(vocab, vec![sequence])
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn sequences(&self) -> &[Vec<u32>] {
        &self.sequences
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn total_symbols(&self) -> usize {
        self.sequences.iter().map(Vec::len).sum()
    }

    /// Number of positions with at least `burn_in` preceding symbols.
    pub fn scorable_positions(&self, burn_in: usize) -> usize {
        self.sequences
            .iter()
            .map(|s| s.len().saturating_sub(burn_in))
            .sum()
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// The depth-3 parsimonious tree over {A, B, C} = {1, 2, 3} with four
    /// leaves: root splits {A,C} | {B}; {A,C} splits {A,B} | {C}; the {C}
    /// branch splits {A} | {B,C}.
    pub fn abc_tree() -> ContextTree {
        let vocab = Vocabulary::with_labels(vec!["A".into(), "B".into(), "C".into()]).unwrap();
        let mut splits = BTreeMap::new();
        splits.insert(
            NodeIndex::root(),
            Partition::new(3, vec![vec![1, 3], vec![2]]).unwrap(),
        );
        splits.insert(
            NodeIndex::new(vec![1]),
            Partition::new(3, vec![vec![1, 2], vec![3]]).unwrap(),
        );
        splits.insert(
            NodeIndex::new(vec![1, 2]),
            Partition::new(3, vec![vec![1], vec![2, 3]]).unwrap(),
        );
        ContextTree::new(vocab, 3, splits).unwrap()
    }
}
