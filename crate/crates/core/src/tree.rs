//! Rooted trees over dense integer node ids, with the path-reversal
//! transformation and its cost.
//!
//! A path reversal at node `x` repoints every node on the path from `x` to the
//! current root (except `x` itself) to `x`, and makes `x` the new root. Its
//! cost is the number of edges on the reversed path, equivalently
//! `height_of(x) - 1` where the height of the root is 1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Node identifier, dense in `[0, n)`. Id 0 is the conventional initial root.
pub type NodeId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("tree must have at least one node")]
    Empty,
    #[error("node {0} is not a valid node of this tree")]
    UnknownNode(NodeId),
    #[error("parent map is malformed: {0}")]
    Malformed(String),
}

/// Mutable rooted tree storing only parent links.
///
/// Child order is not materialized: the reversal cost depends solely on path
/// lengths, and no tree operation here needs sibling order. (The bijection
/// code in [`crate::combinat`] keeps its own order-retaining representation.)
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedTree {
    parent: Vec<Option<NodeId>>,
    root: NodeId,
}

impl RootedTree {
    /// Builds a tree from a parent map (`None` exactly at the root).
    /// Validates uniqueness of the root, id range and acyclicity.
    pub fn from_parents(parent: Vec<Option<NodeId>>) -> Result<Self, TreeError> {
        let n = parent.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        let mut root = None;
        for (x, p) in parent.iter().enumerate() {
            match p {
                None => {
                    if root.replace(x).is_some() {
                        return Err(TreeError::Malformed("more than one root".into()));
                    }
                }
                Some(p) if *p >= n => {
                    return Err(TreeError::Malformed(format!("parent {p} of node {x} out of range")));
                }
                Some(_) => {}
            }
        }
        let root = root.ok_or_else(|| TreeError::Malformed("no root".into()))?;
        let tree = RootedTree { parent, root };
        for x in 0..n {
            // A walk longer than n - 1 edges implies a cycle.
            let mut v = x;
            for _ in 0..n {
                match tree.parent[v] {
                    Some(p) => v = p,
                    None => break,
                }
            }
            if v != tree.root {
                return Err(TreeError::Malformed(format!("cycle reachable from node {x}")));
            }
        }
        Ok(tree)
    }

    /// The initial tree: root 0 with children `1..n`.
    pub fn star(n: usize) -> Result<Self, TreeError> {
        if n == 0 {
            return Err(TreeError::Empty);
        }
        let mut parent = vec![Some(0); n];
        parent[0] = None;
        Ok(RootedTree { parent, root: 0 })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects zero nodes
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn parent_of(&self, x: NodeId) -> Result<Option<NodeId>, TreeError> {
        self.parent.get(x).copied().ok_or(TreeError::UnknownNode(x))
    }

    /// Number of nodes on the path from `x` to the root, inclusive.
    /// The root has height 1.
    pub fn height_of(&self, x: NodeId) -> Result<usize, TreeError> {
        if x >= self.parent.len() {
            return Err(TreeError::UnknownNode(x));
        }
        let mut h = 1;
        let mut v = x;
        while let Some(p) = self.parent[v] {
            v = p;
            h += 1;
        }
        Ok(h)
    }

    /// Height of the whole tree: the maximum node height.
    pub fn height(&self) -> usize {
        (0..self.len()).map(|x| self.height_of(x).unwrap()).max().unwrap()
    }

    /// Performs a path reversal at `x` in place and returns its cost
    /// (the number of edges on the reversed path).
    pub fn path_reversal(&mut self, x: NodeId) -> Result<usize, TreeError> {
        if x >= self.parent.len() {
            return Err(TreeError::UnknownNode(x));
        }
        let mut path = vec![x];
        let mut v = x;
        while let Some(p) = self.parent[v] {
            path.push(p);
            v = p;
        }
        for &u in &path[1..] {
            self.parent[u] = Some(x);
        }
        self.parent[x] = None;
        self.root = x;
        Ok(path.len() - 1)
    }

    /// Number of children of `x`. For the root this is the count of nodes at
    /// height 2.
    pub fn degree_of(&self, x: NodeId) -> Result<usize, TreeError> {
        if x >= self.parent.len() {
            return Err(TreeError::UnknownNode(x));
        }
        Ok(self.parent.iter().filter(|p| **p == Some(x)).count())
    }

    /// Debug serialization `n;p(0),p(1),...` with `-` for the root.
    /// `star(3)` serializes as `3;-,0,0`.
    pub fn to_debug_line(&self) -> String {
        let parts: Vec<String> = self
            .parent
            .iter()
            .map(|p| match p {
                None => "-".to_string(),
                Some(p) => p.to_string(),
            })
            .collect();
        format!("{};{}", self.parent.len(), parts.join(","))
    }

    /// Parses the [`Self::to_debug_line`] format.
    pub fn from_debug_line(line: &str) -> Result<Self, TreeError> {
        let (n_str, rest) = line
            .split_once(';')
            .ok_or_else(|| TreeError::Malformed("missing ';'".into()))?;
        let n: usize = n_str
            .trim()
            .parse()
            .map_err(|_| TreeError::Malformed("bad node count".into()))?;
        let parent: Result<Vec<Option<NodeId>>, TreeError> = rest
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                if tok == "-" {
                    Ok(None)
                } else {
                    tok.parse::<NodeId>()
                        .map(Some)
                        .map_err(|_| TreeError::Malformed(format!("bad parent entry {tok:?}")))
                }
            })
            .collect();
        let parent = parent?;
        if parent.len() != n {
            return Err(TreeError::Malformed(format!(
                "declared {n} nodes but listed {}",
                parent.len()
            )));
        }
        Self::from_parents(parent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_shapes() {
        let t = RootedTree::star(1).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.root(), 0);
        assert_eq!(t.height_of(0).unwrap(), 1);

        let t = RootedTree::star(4).unwrap();
        assert_eq!(t.root(), 0);
        for x in 1..4 {
            assert_eq!(t.parent_of(x).unwrap(), Some(0));
        }

        let t = RootedTree::star(2).unwrap();
        assert_eq!(t.height_of(1).unwrap(), 2);

        assert_eq!(RootedTree::star(0), Err(TreeError::Empty));
    }

    #[test]
    fn reversal_at_root_is_free() {
        let mut t = RootedTree::star(4).unwrap();
        let before = t.clone();
        assert_eq!(t.path_reversal(0).unwrap(), 0);
        assert_eq!(t, before);
    }

    #[test]
    fn reversal_one_edge() {
        let mut t = RootedTree::star(4).unwrap();
        assert_eq!(t.path_reversal(1).unwrap(), 1);
        assert_eq!(t.root(), 1);
        assert_eq!(t.parent_of(0).unwrap(), Some(1));
        assert_eq!(t.parent_of(2).unwrap(), Some(0));
        assert_eq!(t.parent_of(3).unwrap(), Some(0));
    }

    #[test]
    fn reversal_two_edges_on_three_nodes() {
        let mut t = RootedTree::star(3).unwrap();
        t.path_reversal(1).unwrap();
        // path 2 -> 0 -> 1
        assert_eq!(t.height_of(2).unwrap(), 3);
        assert_eq!(t.path_reversal(2).unwrap(), 2);
        assert_eq!(t.root(), 2);
        assert_eq!(t.parent_of(0).unwrap(), Some(2));
        assert_eq!(t.parent_of(1).unwrap(), Some(2));
    }

    #[test]
    fn cost_equals_height_minus_one_and_is_idempotent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let mut t = RootedTree::star(9).unwrap();
        for _ in 0..500 {
            let x = rng.gen_range(0..9);
            let h = t.height_of(x).unwrap();
            let c = t.path_reversal(x).unwrap();
            assert_eq!(c, h - 1);
            assert_eq!(t.path_reversal(x).unwrap(), 0);
            // Everything strictly between x and the old root, and the old
            // root itself, now sits at height 2.
            RootedTree::from_parents(
                (0..t.len()).map(|v| t.parent_of(v).unwrap()).collect(),
            )
            .expect("reversal must preserve tree validity");
        }
    }

    #[test]
    fn reversal_path_nodes_end_at_height_two() {
        let mut t = RootedTree::star(5).unwrap();
        t.path_reversal(1).unwrap();
        t.path_reversal(2).unwrap();
        // path was 2 -> 0 -> 1; both 0 and 1 must now be at height 2
        assert_eq!(t.height_of(0).unwrap(), 2);
        assert_eq!(t.height_of(1).unwrap(), 2);
    }

    #[test]
    fn rejects_unknown_nodes() {
        let mut t = RootedTree::star(3).unwrap();
        assert_eq!(t.path_reversal(7), Err(TreeError::UnknownNode(7)));
        assert_eq!(t.height_of(7), Err(TreeError::UnknownNode(7)));
    }

    #[test]
    fn validation_rejects_bad_parent_maps() {
        assert!(RootedTree::from_parents(vec![]).is_err());
        assert!(RootedTree::from_parents(vec![Some(1), Some(0)]).is_err()); // cycle, no root
        assert!(RootedTree::from_parents(vec![None, None]).is_err()); // two roots
        assert!(RootedTree::from_parents(vec![None, Some(9)]).is_err()); // out of range
        assert!(RootedTree::from_parents(vec![None, Some(2), Some(1)]).is_err()); // 1-2 cycle off the root
        assert!(RootedTree::from_parents(vec![None, Some(0), Some(1)]).is_ok()); // chain ok
    }

    #[test]
    fn debug_line_roundtrip() {
        let t = RootedTree::star(3).unwrap();
        assert_eq!(t.to_debug_line(), "3;-,0,0");
        let back = RootedTree::from_debug_line("3;-,0,0").unwrap();
        assert_eq!(back, t);
        assert!(RootedTree::from_debug_line("3;-,0").is_err());
        assert!(RootedTree::from_debug_line("nonsense").is_err());
    }
}
