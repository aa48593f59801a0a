//! Undirected, unweighted, simple graph with dense internal node ids and an
//! external-label map.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

/// Internal node index, dense in `[0, n)` for a loaded graph.
pub type NodeId = u32;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("input contains no edges")]
    EmptyInput,
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("unknown node label {0:?}")]
    UnknownLabel(String),
    #[error("line {line}: duplicate vertex label {label:?}")]
    DuplicateLabel { line: usize, label: String },
    #[error("missing *Vertices header")]
    MissingVerticesHeader,
    #[error("line {line}: vertex index {index} out of range 1..={n}")]
    VertexIndexOutOfRange { line: usize, index: i64, n: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Counts of input edges dropped during graph construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

impl LoadStats {
    pub fn total_dropped(&self) -> usize {
        self.self_loops + self.duplicate_edges
    }
}

/// Split of a node's degree relative to a node set: edges staying inside the
/// set versus edges leaving it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeSplit {
    pub internal: usize,
    pub external: usize,
}

/// Edge counts for a node set: edges with both endpoints inside (each edge
/// counted once) and edges with exactly one endpoint inside.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CutSizes {
    pub internal: usize,
    pub external: usize,
}

impl CutSizes {
    /// Ratio of external to internal edges; defined as 0 for an isolated
    /// component (no edges at all) and +inf when internal is 0 but external
    /// is not.
    pub fn ratio(&self) -> f64 {
        if self.internal == 0 {
            if self.external == 0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.external as f64 / self.internal as f64
        }
    }
}

/// Immutable simple graph. Safe to share across threads once built.
#[derive(Debug, Clone)]
pub struct Graph {
    adj: Vec<Vec<NodeId>>,
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    edge_count: usize,
}

impl Graph {
    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        0..self.adj.len() as NodeId
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v as usize].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v as usize]
    }

    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    /// All edges as `(u, v)` pairs with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, nbrs)| {
            let u = u as NodeId;
            nbrs.iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    fn check_members(&self, members: &HashSet<NodeId>) -> Result<(), GraphError> {
        let n = self.node_count() as NodeId;
        for &v in members {
            if v >= n {
                return Err(GraphError::UnknownNode(v));
            }
        }
        Ok(())
    }

    /// Split the degree of `node` against the node set `members`.
    pub fn degree_split(
        &self,
        node: NodeId,
        members: &HashSet<NodeId>,
    ) -> Result<DegreeSplit, GraphError> {
        if node as usize >= self.node_count() {
            return Err(GraphError::UnknownNode(node));
        }
        self.check_members(members)?;
        let mut internal = 0;
        let mut external = 0;
        for &nbr in self.neighbors(node) {
            if members.contains(&nbr) {
                internal += 1;
            } else {
                external += 1;
            }
        }
        Ok(DegreeSplit { internal, external })
    }

    /// Internal and cut edge counts of a node set. Internal edges are counted
    /// once each, so summing per-node internal splits over the set gives
    /// exactly twice the internal count here.
    pub fn cut_sizes(&self, members: &HashSet<NodeId>) -> Result<CutSizes, GraphError> {
        self.check_members(members)?;
        let mut twice_internal = 0;
        let mut external = 0;
        for &v in members {
            for &nbr in self.neighbors(v) {
                if members.contains(&nbr) {
                    twice_internal += 1;
                } else {
                    external += 1;
                }
            }
        }
        Ok(CutSizes {
            internal: twice_internal / 2,
            external,
        })
    }

    /// Same as [`Graph::cut_sizes`] but using a membership mark slice of
    /// length `node_count()`; avoids hashing in hot paths.
    pub(crate) fn cut_sizes_marked(&self, members: &[NodeId], mark: &[bool]) -> CutSizes {
        let mut twice_internal = 0;
        let mut external = 0;
        for &v in members {
            for &nbr in self.neighbors(v) {
                if mark[nbr as usize] {
                    twice_internal += 1;
                } else {
                    external += 1;
                }
            }
        }
        CutSizes {
            internal: twice_internal / 2,
            external,
        }
    }

    /// Induced subgraph on `keep` (sorted, deduplicated internally). Labels
    /// are carried over; returns the new graph plus a map from new ids to the
    /// ids in `self`.
    pub fn induced_subgraph(&self, keep: &[NodeId]) -> (Graph, Vec<NodeId>) {
        let mut kept: Vec<NodeId> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();

        let mut old_to_new = vec![NodeId::MAX; self.node_count()];
        for (new, &old) in kept.iter().enumerate() {
            old_to_new[old as usize] = new as NodeId;
        }

        let mut adj = vec![Vec::new(); kept.len()];
        let mut edge_count = 0;
        for (new, &old) in kept.iter().enumerate() {
            for &nbr in self.neighbors(old) {
                let mapped = old_to_new[nbr as usize];
                if mapped != NodeId::MAX {
                    adj[new].push(mapped);
                }
            }
            edge_count += adj[new].len();
            // Neighbor lists stay sorted because the id order is preserved.
        }

        let labels: Vec<String> = kept
            .iter()
            .map(|&v| self.labels[v as usize].clone())
            .collect();
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i as NodeId))
            .collect();

        (
            Graph {
                adj,
                labels,
                index,
                edge_count: edge_count / 2,
            },
            kept,
        )
    }
}

/// Accumulates labeled nodes and edges, then builds a [`Graph`]. Self-loops
/// and duplicate edges are dropped and counted; arcs given in both directions
/// collapse to one undirected edge.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    index: HashMap<String, NodeId>,
    labels: Vec<String>,
    edges: HashSet<(NodeId, NodeId)>,
    stats: LoadStats,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a label and returns its id; ids follow first appearance.
    pub fn intern(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len() as NodeId;
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn add_edge(&mut self, a: &str, b: &str) {
        let u = self.intern(a);
        let v = self.intern(b);
        self.add_edge_ids(u, v);
    }

    pub fn add_edge_ids(&mut self, u: NodeId, v: NodeId) {
        debug_assert!((u as usize) < self.labels.len() && (v as usize) < self.labels.len());
        if u == v {
            self.stats.self_loops += 1;
            return;
        }
        let key = (u.min(v), u.max(v));
        if !self.edges.insert(key) {
            self.stats.duplicate_edges += 1;
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn build(self) -> (Graph, LoadStats) {
        let n = self.labels.len();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        let edge_count = self.edges.len();
        (
            Graph {
                adj,
                labels: self.labels,
                index: self.index,
                edge_count,
            },
            self.stats,
        )
    }
}
