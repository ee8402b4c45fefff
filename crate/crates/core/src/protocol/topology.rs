//! Undirected connected graphs for the arbitrary-network variant:
//! generators, BFS distances and exact diameter.

use crate::tree::NodeId;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("graph parameters are infeasible: {0}")]
    Infeasible(String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("could not generate a connected graph within {0} attempts")]
    RetryExhaustion(usize),
}

/// Undirected graph with adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<NodeId>>,
}

impl Graph {
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, TopologyError> {
        if n == 0 {
            return Err(TopologyError::Infeasible("empty graph".into()));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(TopologyError::Infeasible(format!("bad edge ({u}, {v})")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let g = Graph { n, adj };
        if !g.is_connected() {
            return Err(TopologyError::Disconnected);
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Result<Self, TopologyError> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v));
            }
        }
        if n == 1 {
            return Ok(Graph { n, adj: vec![Vec::new()] });
        }
        Self::from_edges(n, &edges)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adj[u]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        let d = self.bfs_distances(0);
        d.iter().all(|&x| x != u32::MAX)
    }

    /// BFS distances from `src`; unreachable nodes get `u32::MAX`.
    pub fn bfs_distances(&self, src: NodeId) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n];
        dist[src] = 0;
        let mut queue = std::collections::VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// All-pairs shortest-path distances (BFS from every node).
    pub fn all_pairs_distances(&self) -> Vec<Vec<u32>> {
        (0..self.n).map(|u| self.bfs_distances(u)).collect()
    }

    /// Exact diameter.
    pub fn diameter(&self) -> u32 {
        (0..self.n)
            .map(|u| *self.bfs_distances(u).iter().max().unwrap())
            .max()
            .unwrap_or(0)
    }
}

const MAX_RETRIES: usize = 1000;

/// Uniform random graph with exactly `m` distinct edges, resampled until
/// connected.
pub fn sparse_random<R: Rng>(n: usize, m: usize, rng: &mut R) -> Result<Graph, TopologyError> {
    if n < 2 {
        return Err(TopologyError::Infeasible("need at least 2 nodes".into()));
    }
    let max_edges = n * (n - 1) / 2;
    if m < n - 1 || m > max_edges {
        return Err(TopologyError::Infeasible(format!(
            "edge count {m} outside [{}..{max_edges}]",
            n - 1
        )));
    }
    for _ in 0..MAX_RETRIES {
        // BTreeSet keeps edge order independent of hasher state, so a seed
        // pins the graph exactly
        let mut chosen = std::collections::BTreeSet::new();
        while chosen.len() < m {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v {
                chosen.insert((u.min(v), u.max(v)));
            }
        }
        let edges: Vec<(NodeId, NodeId)> = chosen.into_iter().collect();
        if let Ok(g) = Graph::from_edges(n, &edges) {
            return Ok(g);
        }
    }
    Err(TopologyError::RetryExhaustion(MAX_RETRIES))
}

/// Random simple `r`-regular graph via the configuration model (pair random
/// stubs, reject self-loops/multi-edges), resampled until simple and
/// connected.
pub fn regular_random<R: Rng>(n: usize, r: usize, rng: &mut R) -> Result<Graph, TopologyError> {
    if r == 0 || r >= n || (n * r) % 2 != 0 {
        return Err(TopologyError::Infeasible(format!(
            "no simple {r}-regular graph on {n} nodes"
        )));
    }
    'attempt: for _ in 0..MAX_RETRIES {
        let mut stubs: Vec<NodeId> = (0..n).flat_map(|u| std::iter::repeat(u).take(r)).collect();
        stubs.shuffle(rng);
        let mut seen = std::collections::HashSet::new();
        let mut edges = Vec::with_capacity(n * r / 2);
        for pair in stubs.chunks(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || !seen.insert((u.min(v), u.max(v))) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        if let Ok(g) = Graph::from_edges(n, &edges) {
            return Ok(g);
        }
    }
    Err(TopologyError::RetryExhaustion(MAX_RETRIES))
}
