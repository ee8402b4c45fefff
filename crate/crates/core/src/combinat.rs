//! Bijections linking priority sequences, binary tournament trees,
//! permutations and heap-shaped ordered trees.
//!
//! The four maps implemented here:
//!
//! * `gamma`   — priority sequence -> tournament tree (min at root, recursive
//!   split), with inverse `gamma_inv` (in-order traversal);
//! * `tau`     — permutation -> tournament tree (the permutation read as a
//!   priority sequence);
//! * `alpha`   — priority sequence -> ordered tree in heap layout, with
//!   inverse `beta`.
//!
//! # Ordered-tree convention for `alpha`/`beta`
//!
//! `alpha` fills the essentially complete binary-heap shape breadth-first,
//! left to right, with the arrival sequence: the node at heap position `x`
//! (1-based) carries the rank of the `x`-th arriving priority, and its parent
//! is the node at position `floor(x / 2)`. The heap positions *are* the
//! ordering of the ordered tree. Two deliberate choices are documented here
//! because the literature leaves them loose:
//!
//! * reading the heap-shaped binary tree through the first-child/next-sibling
//!   correspondence would yield a forest whenever the root has a right child,
//!   so the heap layout is read directly as the ordered tree instead;
//! * projecting to a parent-link-only [`RootedTree`] is lossy (sibling order
//!   disappears, and distinct sequences can collide), so [`OrderedTree`]
//!   retains the position layout and only optionally converts.
//!
//! `beta` is defined on `alpha`'s image only: trees whose canonical position
//! assignment is not the contiguous range `1..=n` are rejected.

use crate::tree::{NodeId, RootedTree};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CombinatError {
    #[error("priorities must be distinct (found duplicate {0})")]
    DuplicatePriority(i64),
    #[error("sequence of length {len} is not a permutation of 1..={len}")]
    NotAPermutation { len: usize },
    #[error("tournament tree violates its label invariant: {0}")]
    InvalidTournament(String),
    #[error("tree is not in the image of the heap correspondence: {0}")]
    NotHeapShaped(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// A permutation of `1..=n`, stored one-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self, CombinatError> {
        let n = mapping.len();
        let mut seen = vec![false; n + 1];
        for &v in &mapping {
            if v == 0 || v > n || seen[v] {
                return Err(CombinatError::NotAPermutation { len: n });
            }
            seen[v] = true;
        }
        Ok(Permutation(mapping))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((1..=n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Number of cycles of the permutation.
    pub fn cycle_count(&self) -> usize {
        let n = self.0.len();
        let mut seen = vec![false; n];
        let mut cycles = 0;
        for start in 0..n {
            if !seen[start] {
                cycles += 1;
                let mut v = start;
                while !seen[v] {
                    seen[v] = true;
                    v = self.0[v] - 1;
                }
            }
        }
        cycles
    }

    /// All `n!` permutations of `1..=n`, in lexicographic order.
    /// Intended for exhaustive checks at small `n`.
    pub fn all(n: usize) -> Vec<Permutation> {
        use itertools::Itertools;
        (1..=n)
            .permutations(n)
            .map(Permutation)
            .collect()
    }
}

/// A sequence of distinct priorities in arrival order.
///
/// Only relative order matters to every map in this module, so sequences are
/// normalized to their ranks (a permutation of `1..=n`, smallest priority
/// rank 1) internally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrioritySequence {
    priorities: Vec<i64>,
    ranks: Vec<usize>, // one-based rank of each arrival
}

impl PrioritySequence {
    pub fn new(priorities: Vec<i64>) -> Result<Self, CombinatError> {
        let mut sorted: Vec<(i64, usize)> =
            priorities.iter().copied().enumerate().map(|(i, p)| (p, i)).collect();
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(CombinatError::DuplicatePriority(w[0].0));
            }
        }
        let mut ranks = vec![0usize; priorities.len()];
        for (rank0, &(_, idx)) in sorted.iter().enumerate() {
            ranks[idx] = rank0 + 1;
        }
        Ok(PrioritySequence { priorities, ranks })
    }

    pub fn from_permutation(p: &Permutation) -> Self {
        let priorities: Vec<i64> = p.as_slice().iter().map(|&v| v as i64).collect();
        PrioritySequence { priorities, ranks: p.as_slice().to_vec() }
    }

    pub fn len(&self) -> usize {
        self.priorities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priorities.is_empty()
    }

    pub fn priorities(&self) -> &[i64] {
        &self.priorities
    }

    /// One-based ranks of the priorities in arrival order.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }
}

/// Binary tournament tree: labels are exactly `1..=n`, each subtree's root
/// carries the minimum label of the subtree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TournamentTree {
    Empty,
    Node {
        label: usize,
        left: Box<TournamentTree>,
        right: Box<TournamentTree>,
    },
}

impl TournamentTree {
    pub fn len(&self) -> usize {
        match self {
            TournamentTree::Empty => 0,
            TournamentTree::Node { left, right, .. } => 1 + left.len() + right.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, TournamentTree::Empty)
    }

    /// Checks the label invariants: labels are exactly `1..=n` and every
    /// subtree root holds the subtree minimum.
    pub fn validate(&self) -> Result<(), CombinatError> {
        fn collect(t: &TournamentTree, labels: &mut Vec<usize>) -> Result<usize, CombinatError> {
            match t {
                TournamentTree::Empty => Ok(usize::MAX),
                TournamentTree::Node { label, left, right } => {
                    labels.push(*label);
                    let lm = collect(left, labels)?;
                    let rm = collect(right, labels)?;
                    if *label > lm || *label > rm {
                        return Err(CombinatError::InvalidTournament(format!(
                            "label {label} is not the minimum of its subtree"
                        )));
                    }
                    Ok(*label)
                }
            }
        }
        let mut labels = Vec::new();
        collect(self, &mut labels)?;
        let n = labels.len();
        let mut seen = vec![false; n + 1];
        for l in labels {
            if l == 0 || l > n || seen[l] {
                return Err(CombinatError::InvalidTournament(format!(
                    "labels are not exactly 1..={n}"
                )));
            }
            seen[l] = true;
        }
        Ok(())
    }

    /// Serializes as nested parentheses: `(<label> <left> <right>)`, `.` for
    /// the empty tree.
    pub fn to_paren_string(&self) -> String {
        match self {
            TournamentTree::Empty => ".".to_string(),
            TournamentTree::Node { label, left, right } => format!(
                "({} {} {})",
                label,
                left.to_paren_string(),
                right.to_paren_string()
            ),
        }
    }

    /// Parses the [`Self::to_paren_string`] format.
    pub fn from_paren_string(s: &str) -> Result<Self, CombinatError> {
        fn parse(tokens: &mut std::iter::Peekable<std::str::SplitWhitespace>) -> Result<TournamentTree, CombinatError> {
            match tokens.next() {
                Some(".") => Ok(TournamentTree::Empty),
                Some("(") => {
                    let label: usize = tokens
                        .next()
                        .ok_or_else(|| CombinatError::Parse("missing label".into()))?
                        .parse()
                        .map_err(|_| CombinatError::Parse("bad label".into()))?;
                    let left = parse(tokens)?;
                    let right = parse(tokens)?;
                    match tokens.next() {
                        Some(")") => Ok(TournamentTree::Node {
                            label,
                            left: Box::new(left),
                            right: Box::new(right),
                        }),
                        other => Err(CombinatError::Parse(format!("expected ')', got {other:?}"))),
                    }
                }
                other => Err(CombinatError::Parse(format!("unexpected token {other:?}"))),
            }
        }
        let spaced = s.replace('(', " ( ").replace(')', " ) ");
        let mut tokens = spaced.split_whitespace().peekable();
        let t = parse(&mut tokens)?;
        if tokens.next().is_some() {
            return Err(CombinatError::Parse("trailing input".into()));
        }
        Ok(t)
    }
}

/// The map gamma: recursive min-at-root construction. Writing
/// `s = l · m · r` with `m = min(s)`, the result has `m` at the root,
/// `gamma(l)` as left subtree and `gamma(r)` as right subtree.
/// Priorities are normalized to ranks, so the root is always labeled 1.
pub fn tournament_from_sequence(s: &PrioritySequence) -> TournamentTree {
    fn build(ranks: &[usize]) -> TournamentTree {
        if ranks.is_empty() {
            return TournamentTree::Empty;
        }
        let (mi, _) = ranks.iter().enumerate().min_by_key(|(_, r)| **r).unwrap();
        TournamentTree::Node {
            label: ranks[mi],
            left: Box::new(build(&ranks[..mi])),
            right: Box::new(build(&ranks[mi + 1..])),
        }
    }
    build(s.ranks())
}

/// The inverse of gamma: in-order traversal reconstructs the arrival order.
/// Rejects trees violating the tournament invariants.
pub fn sequence_from_tournament(t: &TournamentTree) -> Result<PrioritySequence, CombinatError> {
    t.validate()?;
    fn walk(t: &TournamentTree, out: &mut Vec<i64>) {
        if let TournamentTree::Node { label, left, right } = t {
            walk(left, out);
            out.push(*label as i64);
            walk(right, out);
        }
    }
    let mut out = Vec::with_capacity(t.len());
    walk(t, &mut out);
    PrioritySequence::new(out)
}

/// The map tau: a permutation viewed as a priority sequence.
pub fn tournament_from_permutation(sigma: &Permutation) -> TournamentTree {
    tournament_from_sequence(&PrioritySequence::from_permutation(sigma))
}

/// Labels on the path from the root repeatedly to the right child; strictly
/// increasing by the tournament invariant.
pub fn right_branch(t: &TournamentTree) -> Vec<usize> {
    let mut out = Vec::new();
    let mut cur = t;
    while let TournamentTree::Node { label, right, .. } = cur {
        out.push(*label);
        cur = right;
    }
    out
}

/// Labels on the path from the root repeatedly to the left child.
pub fn left_branch(t: &TournamentTree) -> Vec<usize> {
    let mut out = Vec::new();
    let mut cur = t;
    while let TournamentTree::Node { label, left, .. } = cur {
        out.push(*label);
        cur = left;
    }
    out
}

/// Ordered tree in essentially-complete heap layout.
///
/// `pos_to_id[x - 1]` is the node id (zero-based priority rank) at heap
/// position `x`; position `floor(x / 2)` holds the parent. An empty layout
/// plays the role of the empty tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedTree {
    pos_to_id: Vec<NodeId>,
}

impl OrderedTree {
    pub fn len(&self) -> usize {
        self.pos_to_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos_to_id.is_empty()
    }

    pub fn position_layout(&self) -> &[NodeId] {
        &self.pos_to_id
    }

    /// Forgets the heap positions, keeping parent links only.
    /// Errors on the empty tree (a [`RootedTree`] has at least one node).
    pub fn to_rooted_tree(&self) -> Result<RootedTree, CombinatError> {
        let n = self.pos_to_id.len();
        if n == 0 {
            return Err(CombinatError::NotHeapShaped("empty tree".into()));
        }
        let mut parent = vec![None; n];
        for (pos0, &id) in self.pos_to_id.iter().enumerate() {
            let pos = pos0 + 1;
            if pos > 1 {
                parent[id] = Some(self.pos_to_id[pos / 2 - 1]);
            }
        }
        RootedTree::from_parents(parent)
            .map_err(|e| CombinatError::NotHeapShaped(e.to_string()))
    }

    /// Canonical embedding of a plain rooted tree back into the heap layout.
    ///
    /// Positions are assigned top-down: the root takes position 1, the
    /// children of the node at position `p` take `2p` and `2p + 1` (smaller id
    /// first; sibling order was lost by the parent-link projection, so the
    /// canonical representative orders siblings by id). Fails when any node
    /// would need a third child slot or the assigned positions are not the
    /// contiguous range `1..=n`, i.e. when the shape is not essentially
    /// complete.
    pub fn try_from_rooted_tree(tree: &RootedTree) -> Result<Self, CombinatError> {
        let n = tree.len();
        let mut children: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for x in 0..n {
            if let Some(p) = tree.parent_of(x).expect("id in range") {
                children[p].push(x);
            }
        }
        for c in &mut children {
            if c.len() > 2 {
                return Err(CombinatError::NotHeapShaped(
                    "a node has more than two children".into(),
                ));
            }
            c.sort_unstable();
        }
        let mut pos_of = vec![0usize; n];
        let mut queue = std::collections::VecDeque::new();
        pos_of[tree.root()] = 1;
        queue.push_back(tree.root());
        while let Some(v) = queue.pop_front() {
            for (i, &c) in children[v].iter().enumerate() {
                pos_of[c] = 2 * pos_of[v] + i;
                queue.push_back(c);
            }
        }
        let mut pos_to_id = vec![usize::MAX; n];
        for (id, &pos) in pos_of.iter().enumerate() {
            if pos == 0 || pos > n || pos_to_id[pos - 1] != usize::MAX {
                return Err(CombinatError::NotHeapShaped(format!(
                    "positions do not fill 1..={n} (node {id} lands at {pos})"
                )));
            }
            pos_to_id[pos - 1] = id;
        }
        Ok(OrderedTree { pos_to_id })
    }
}

/// The map alpha: fills the heap shape breadth-first, left to right, with the
/// arrival sequence. Node ids are the zero-based ranks of the priorities.
pub fn ordered_tree_from_sequence(s: &PrioritySequence) -> OrderedTree {
    OrderedTree {
        pos_to_id: s.ranks().iter().map(|r| r - 1).collect(),
    }
}

/// The map beta, inverse of alpha: reads the heap positions back in order.
/// The returned priorities are the one-based ranks, which is the normalized
/// form alpha works on.
pub fn sequence_from_ordered_tree(t: &OrderedTree) -> Result<PrioritySequence, CombinatError> {
    PrioritySequence::new(t.pos_to_id.iter().map(|id| (id + 1) as i64).collect())
}
