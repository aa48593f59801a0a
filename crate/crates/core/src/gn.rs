//! Girvan-Newman divisive clustering: repeatedly remove the edge with the
//! highest betweenness, recomputing after every removal, until the graph
//! falls apart into the requested number of components. Kept as a
//! small-graph baseline; the cubic cost is guarded by a node limit.

use thiserror::Error;

use crate::clustering::Clustering;
use crate::graph::{Graph, NodeId};

/// Node count limit for the baseline.
pub const GN_NODE_LIMIT: usize = 2000;

#[derive(Debug, Error)]
pub enum GnError {
    #[error("graph has {n} nodes, baseline limit is {limit}")]
    GraphTooLarge { n: usize, limit: usize },
    #[error("component target {k} must be in 1..={n}")]
    InvalidK { k: usize, n: usize },
}

/// Per-edge betweenness values over unordered endpoint pairs.
#[derive(Debug, Clone)]
pub struct EdgeCentralityScores {
    edges: Vec<(NodeId, NodeId)>,
    values: Vec<f64>,
}

impl EdgeCentralityScores {
    pub fn value(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let key = (u.min(v), u.max(v));
        self.edges
            .binary_search(&key)
            .ok()
            .map(|idx| self.values[idx])
    }

    pub fn iter(&self) -> impl Iterator<Item = ((NodeId, NodeId), f64)> + '_ {
        self.edges.iter().copied().zip(self.values.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Highest-scoring edge; ties go to the lexicographically smallest pair.
    pub fn max_edge(&self) -> Option<((NodeId, NodeId), f64)> {
        let mut best: Option<((NodeId, NodeId), f64)> = None;
        for (edge, value) in self.iter() {
            let better = match best {
                None => true,
                Some((_, b)) => value > b,
            };
            if better {
                best = Some((edge, value));
            }
        }
        best
    }
}

/// Adjacency with per-entry edge indices, so the accumulation below never
/// hashes in its hot loop.
struct WorkGraph {
    adj: Vec<Vec<(NodeId, u32)>>,
    edges: Vec<(NodeId, NodeId)>,
}

impl WorkGraph {
    fn from_neighbor_lists(adj: &[Vec<NodeId>]) -> Self {
        let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
        for (u, nbrs) in adj.iter().enumerate() {
            for &v in nbrs {
                if (u as NodeId) < v {
                    edges.push((u as NodeId, v));
                }
            }
        }
        edges.sort_unstable();
        let mut indexed: Vec<Vec<(NodeId, u32)>> = vec![Vec::new(); adj.len()];
        for (idx, &(u, v)) in edges.iter().enumerate() {
            indexed[u as usize].push((v, idx as u32));
            indexed[v as usize].push((u, idx as u32));
        }
        WorkGraph {
            adj: indexed,
            edges,
        }
    }

    fn remove_edge(&mut self, u: NodeId, v: NodeId) {
        self.adj[u as usize].retain(|&(w, _)| w != v);
        self.adj[v as usize].retain(|&(w, _)| w != u);
        if let Ok(pos) = self.edges.binary_search(&(u.min(v), u.max(v))) {
            self.edges.remove(pos);
            for nbrs in &mut self.adj {
                for entry in nbrs.iter_mut() {
                    if entry.1 as usize > pos {
                        entry.1 -= 1;
                    }
                }
            }
        }
    }
}

struct EdgeScratch {
    dist: Vec<i32>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    preds: Vec<Vec<(NodeId, u32)>>,
    stack: Vec<NodeId>,
    queue: std::collections::VecDeque<NodeId>,
}

impl EdgeScratch {
    fn new(n: usize) -> Self {
        EdgeScratch {
            dist: vec![-1; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            preds: vec![Vec::new(); n],
            stack: Vec::with_capacity(n),
            queue: std::collections::VecDeque::with_capacity(n),
        }
    }

    fn sweep(&mut self, work: &WorkGraph, s: NodeId, values: &mut [f64]) {
        let n = work.adj.len();
        for v in 0..n {
            self.dist[v] = -1;
            self.sigma[v] = 0.0;
            self.delta[v] = 0.0;
            self.preds[v].clear();
        }
        self.stack.clear();
        self.queue.clear();
        self.dist[s as usize] = 0;
        self.sigma[s as usize] = 1.0;
        self.queue.push_back(s);
        while let Some(v) = self.queue.pop_front() {
            self.stack.push(v);
            let dv = self.dist[v as usize];
            for &(w, edge) in &work.adj[v as usize] {
                let wi = w as usize;
                if self.dist[wi] < 0 {
                    self.dist[wi] = dv + 1;
                    self.queue.push_back(w);
                }
                if self.dist[wi] == dv + 1 {
                    self.sigma[wi] += self.sigma[v as usize];
                    self.preds[wi].push((v, edge));
                }
            }
        }
        while let Some(w) = self.stack.pop() {
            let wi = w as usize;
            let share = (1.0 + self.delta[wi]) / self.sigma[wi];
            for &(v, edge) in &self.preds[wi] {
                let amount = self.sigma[v as usize] * share;
                values[edge as usize] += amount;
                self.delta[v as usize] += amount;
            }
        }
    }
}

const GN_SOURCE_CHUNK: usize = 64;

/// Brandes-style edge accumulation; endpoint pairs count toward their own
/// edge. Source sweeps run in fixed chunks folded in order, so the scores
/// are bit-identical at any thread count.
fn edge_betweenness_work(work: &WorkGraph) -> EdgeCentralityScores {
    use rayon::prelude::*;

    let n = work.adj.len();
    let m = work.edges.len();
    let n_chunks = n.div_ceil(GN_SOURCE_CHUNK).max(1);
    let partials: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut values = vec![0.0; m];
            let mut scratch = EdgeScratch::new(n);
            let start = chunk * GN_SOURCE_CHUNK;
            let end = (start + GN_SOURCE_CHUNK).min(n);
            for s in start..end {
                scratch.sweep(work, s as NodeId, &mut values);
            }
            values
        })
        .collect();

    let mut values = vec![0.0; m];
    for partial in partials {
        for (total, part) in values.iter_mut().zip(partial) {
            *total += part;
        }
    }
    // Every unordered pair was counted from both endpoints.
    for v in &mut values {
        *v /= 2.0;
    }
    EdgeCentralityScores {
        edges: work.edges.clone(),
        values,
    }
}

fn edge_betweenness_adj(adj: &[Vec<NodeId>]) -> EdgeCentralityScores {
    edge_betweenness_work(&WorkGraph::from_neighbor_lists(adj))
}

/// Edge betweenness of a graph.
pub fn edge_betweenness(g: &Graph) -> EdgeCentralityScores {
    let adj: Vec<Vec<NodeId>> = g.nodes().map(|v| g.neighbors(v).to_vec()).collect();
    edge_betweenness_adj(&adj)
}

fn components(adj: &[Vec<NodeId>]) -> Vec<Vec<NodeId>> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n as NodeId {
        if seen[start as usize] {
            continue;
        }
        let mut members = Vec::new();
        let mut stack = vec![start];
        seen[start as usize] = true;
        while let Some(v) = stack.pop() {
            members.push(v);
            for &w in &adj[v as usize] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Divisive clustering into at least `k` components. Returns the components
/// as disjoint clusters covering every node.
pub fn cluster(g: &Graph, k: usize) -> Result<Clustering, GnError> {
    let n = g.node_count();
    if n > GN_NODE_LIMIT {
        return Err(GnError::GraphTooLarge {
            n,
            limit: GN_NODE_LIMIT,
        });
    }
    if k < 1 || k > n {
        return Err(GnError::InvalidK { k, n });
    }

    let adj: Vec<Vec<NodeId>> = g.nodes().map(|v| g.neighbors(v).to_vec()).collect();
    let mut work = WorkGraph::from_neighbor_lists(&adj);
    loop {
        let plain: Vec<Vec<NodeId>> = work
            .adj
            .iter()
            .map(|nbrs| nbrs.iter().map(|&(w, _)| w).collect())
            .collect();
        let comps = components(&plain);
        if comps.len() >= k {
            return Ok(Clustering::from_member_sets(n, comps));
        }
        let scores = edge_betweenness_work(&work);
        let ((u, v), _) = scores
            .max_edge()
            .expect("fewer components than k implies an edge exists");
        work.remove_edge(u, v);
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::graph::GraphBuilder;
    use crate::metrics::duplication_rate;

    fn graph_from(edges: &[(&str, &str)]) -> Graph {
        let mut b = GraphBuilder::new();
        for (a, c) in edges {
            b.add_edge(a, c);
        }
        b.build().0
    }

    fn two_triangles_bridge() -> Graph {
        graph_from(&[
            ("a", "b"),
            ("b", "c"),
            ("c", "a"),
            ("d", "e"),
            ("e", "f"),
            ("f", "d"),
            ("c", "d"),
        ])
    }

    /// Per-pair shortest-path shares computed from scratch, as an oracle for
    /// the accumulation above.
    fn brute_edge_betweenness(adj: &[Vec<NodeId>]) -> HashMap<(NodeId, NodeId), f64> {
        let n = adj.len();
        let mut dist = vec![vec![-1i32; n]; n];
        let mut sigma = vec![vec![0.0f64; n]; n];
        for s in 0..n {
            dist[s][s] = 0;
            sigma[s][s] = 1.0;
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(s as NodeId);
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v as usize] {
                    let wi = w as usize;
                    if dist[s][wi] < 0 {
                        dist[s][wi] = dist[s][v as usize] + 1;
                        queue.push_back(w);
                    }
                    if dist[s][wi] == dist[s][v as usize] + 1 {
                        sigma[s][wi] += sigma[s][v as usize];
                    }
                }
            }
        }
        let mut out = HashMap::new();
        for (u, nbrs) in adj.iter().enumerate() {
            for &v in nbrs {
                if (u as NodeId) >= v {
                    continue;
                }
                let vu = v as usize;
                let mut total = 0.0;
                for s in 0..n {
                    for t in s + 1..n {
                        if dist[s][t] < 0 {
                            continue;
                        }
                        // Share of s-t shortest paths using edge (u, v) in
                        // either direction.
                        let mut through = 0.0;
                        if dist[s][u] >= 0
                            && dist[vu][t] >= 0
                            && dist[s][u] + 1 + dist[vu][t] == dist[s][t]
                        {
                            through += sigma[s][u] * sigma[vu][t];
                        }
                        if dist[s][vu] >= 0
                            && dist[u][t] >= 0
                            && dist[s][vu] + 1 + dist[u][t] == dist[s][t]
                        {
                            through += sigma[s][vu] * sigma[u][t];
                        }
                        total += through / sigma[s][t];
                    }
                }
                out.insert((u as NodeId, v), total);
            }
        }
        out
    }

    #[test]
    fn path_edge_scores() {
        let g = graph_from(&[("a", "b"), ("b", "c")]);
        let scores = edge_betweenness(&g);
        assert!((scores.value(0, 1).unwrap() - 2.0).abs() < 1e-12);
        assert!((scores.value(1, 2).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bridge_has_strict_maximum() {
        let g = two_triangles_bridge();
        let scores = edge_betweenness(&g);
        let c = g.node_by_label("c").unwrap();
        let d = g.node_by_label("d").unwrap();
        let bridge = scores.value(c, d).unwrap();
        for ((u, v), value) in scores.iter() {
            if (u, v) != (c.min(d), c.max(d)) {
                assert!(value < bridge, "bridge must dominate edge ({u},{v})");
            }
        }
        let ((u, v), _) = scores.max_edge().unwrap();
        assert_eq!((u, v), (c.min(d), c.max(d)));
    }

    #[test]
    fn triangle_edges_symmetric() {
        let g = graph_from(&[("a", "b"), ("b", "c"), ("c", "a")]);
        let scores = edge_betweenness(&g);
        let values: Vec<f64> = scores.iter().map(|(_, v)| v).collect();
        for w in values.windows(2) {
            assert!((w[0] - w[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn accumulation_matches_per_pair_oracle() {
        let g = two_triangles_bridge();
        let adj: Vec<Vec<NodeId>> = g.nodes().map(|v| g.neighbors(v).to_vec()).collect();
        let brute = brute_edge_betweenness(&adj);
        let fast = edge_betweenness(&g);
        for ((u, v), value) in fast.iter() {
            assert!((value - brute[&(u, v)]).abs() < 1e-9);
        }
    }

    #[test]
    fn recomputation_matches_oracle_at_every_removal_step() {
        // Random-ish small graph; check the recomputed scores against the
        // oracle after each removal the clustering loop would perform.
        let mut b = GraphBuilder::new();
        let n = 16u64;
        for i in 0..n {
            b.intern(&i.to_string());
        }
        let mut x = 5u64;
        for _ in 0..40 {
            x = x
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let u = (x >> 33) % n;
            x = x
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let v = (x >> 33) % n;
            b.add_edge_ids(u as NodeId, v as NodeId);
        }
        let (g, _) = b.build();
        let mut adj: Vec<Vec<NodeId>> = g.nodes().map(|v| g.neighbors(v).to_vec()).collect();
        for _ in 0..10 {
            let scores = edge_betweenness_adj(&adj);
            if scores.is_empty() {
                break;
            }
            let brute = brute_edge_betweenness(&adj);
            for ((u, v), value) in scores.iter() {
                assert!((value - brute[&(u, v)]).abs() < 1e-9);
            }
            let ((u, v), _) = scores.max_edge().unwrap();
            let pos = adj[u as usize].binary_search(&v).unwrap();
            adj[u as usize].remove(pos);
            let pos = adj[v as usize].binary_search(&u).unwrap();
            adj[v as usize].remove(pos);
        }
    }

    #[test]
    fn splits_triangles_at_k2() {
        let g = two_triangles_bridge();
        let clustering = cluster(&g, 2).unwrap();
        let mut sets = clustering.member_sets();
        sets.sort();
        assert_eq!(sets, vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn k1_returns_whole_graph() {
        let g = two_triangles_bridge();
        let clustering = cluster(&g, 1).unwrap();
        assert_eq!(clustering.len(), 1);
        assert_eq!(clustering.clusters()[0].len(), 6);
    }

    #[test]
    fn output_is_a_disjoint_partition() {
        let g = two_triangles_bridge();
        for k in 1..=4 {
            let clustering = cluster(&g, k).unwrap();
            assert_eq!(clustering.orphan_count(), 0);
            assert_eq!(duplication_rate(&clustering), 1.0);
        }
    }

    #[test]
    fn k_out_of_range_is_an_error() {
        let g = two_triangles_bridge();
        assert!(matches!(cluster(&g, 0), Err(GnError::InvalidK { .. })));
        assert!(matches!(cluster(&g, 7), Err(GnError::InvalidK { .. })));
    }
}
