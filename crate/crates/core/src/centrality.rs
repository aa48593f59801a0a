//! Vertex betweenness centrality (Brandes' algorithm plus a brute-force
//! oracle) and detection of tree-like graph tails.

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{Graph, NodeId};

/// Node count limit for the brute-force oracle.
pub const BRUTE_FORCE_NODE_LIMIT: usize = 200;

#[derive(Debug, Error)]
pub enum CentralityError {
    #[error("graph has {n} nodes, brute-force limit is {limit}")]
    GraphTooLarge { n: usize, limit: usize },
    #[error("tail decomposition does not match the graph")]
    DecompositionMismatch,
}

/// Per-node betweenness values, indexed by node id.
#[derive(Debug, Clone)]
pub struct CentralityScores {
    values: Vec<f64>,
}

impl CentralityScores {
    pub fn from_values(values: Vec<f64>) -> Self {
        CentralityScores { values }
    }

    pub fn score(&self, v: NodeId) -> f64 {
        self.values[v as usize]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Scratch space for one Brandes source sweep, reused across sources.
struct BrandesScratch {
    stack: Vec<NodeId>,
    queue: std::collections::VecDeque<NodeId>,
    dist: Vec<i32>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    preds: Vec<Vec<NodeId>>,
}

impl BrandesScratch {
    fn new(n: usize) -> Self {
        BrandesScratch {
            stack: Vec::with_capacity(n),
            queue: std::collections::VecDeque::with_capacity(n),
            dist: vec![-1; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            preds: vec![Vec::new(); n],
        }
    }

    /// One source sweep accumulating ordered-pair dependencies into `acc`.
    fn sweep(&mut self, g: &Graph, source: NodeId, acc: &mut [f64]) {
        self.stack.clear();
        self.queue.clear();
        for v in 0..g.node_count() {
            self.dist[v] = -1;
            self.sigma[v] = 0.0;
            self.delta[v] = 0.0;
            self.preds[v].clear();
        }
        self.dist[source as usize] = 0;
        self.sigma[source as usize] = 1.0;
        self.queue.push_back(source);

        while let Some(v) = self.queue.pop_front() {
            self.stack.push(v);
            let dv = self.dist[v as usize];
            for &w in g.neighbors(v) {
                let wi = w as usize;
                if self.dist[wi] < 0 {
                    self.dist[wi] = dv + 1;
                    self.queue.push_back(w);
                }
                if self.dist[wi] == dv + 1 {
                    self.sigma[wi] += self.sigma[v as usize];
                    self.preds[wi].push(v);
                }
            }
        }

        while let Some(w) = self.stack.pop() {
            let wi = w as usize;
            let coeff = (1.0 + self.delta[wi]) / self.sigma[wi];
            for &v in &self.preds[wi] {
                self.delta[v as usize] += self.sigma[v as usize] * coeff;
            }
            if w != source {
                acc[wi] += self.delta[wi];
            }
        }
    }
}

const SOURCE_CHUNK: usize = 64;

/// Exact betweenness centrality over unordered node pairs with endpoints
/// excluded; disconnected pairs contribute nothing.
///
/// Sources are processed in fixed-size chunks that run in parallel on the
/// current rayon pool; partial sums are folded in chunk order, so the result
/// is bit-identical at any thread count.
pub fn betweenness(g: &Graph) -> CentralityScores {
    let n = g.node_count();
    if n == 0 {
        return CentralityScores::from_values(Vec::new());
    }
    let n_chunks = n.div_ceil(SOURCE_CHUNK);
    let partials: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = vec![0.0; n];
            let mut scratch = BrandesScratch::new(n);
            let start = chunk * SOURCE_CHUNK;
            let end = (start + SOURCE_CHUNK).min(n);
            for s in start..end {
                scratch.sweep(g, s as NodeId, &mut acc);
            }
            acc
        })
        .collect();

    let mut values = vec![0.0; n];
    for partial in partials {
        for (total, part) in values.iter_mut().zip(partial) {
            *total += part;
        }
    }
    // Each unordered pair was visited from both endpoints.
    for v in &mut values {
        *v /= 2.0;
    }
    CentralityScores::from_values(values)
}

/// Definitional betweenness: for every pair (s, t) and interior node v,
/// accumulate sigma(s,v) * sigma(v,t) / sigma(s,t) when v lies on a shortest
/// path. Independent of the Brandes accumulation above; limited to small
/// graphs.
pub fn brute_force_betweenness(g: &Graph) -> Result<CentralityScores, CentralityError> {
    let n = g.node_count();
    if n > BRUTE_FORCE_NODE_LIMIT {
        return Err(CentralityError::GraphTooLarge {
            n,
            limit: BRUTE_FORCE_NODE_LIMIT,
        });
    }

    // All-pairs distances and path counts by BFS from every node.
    let mut dist = vec![vec![-1i32; n]; n];
    let mut sigma = vec![vec![0.0f64; n]; n];
    for s in 0..n {
        dist[s][s] = 0;
        sigma[s][s] = 1.0;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(s as NodeId);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
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

    let mut values = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            if dist[s][t] < 0 {
                continue;
            }
            for v in 0..n {
                if v == s || v == t {
                    continue;
                }
                if dist[s][v] >= 0 && dist[v][t] >= 0 && dist[s][v] + dist[v][t] == dist[s][t] {
                    values[v] += sigma[s][v] * sigma[v][t] / sigma[s][t];
                }
            }
        }
    }
    Ok(CentralityScores::from_values(values))
}

/// One tree-like appendage outside the 2-core: a connected set of pruned
/// nodes plus the core node it hangs from (none if its whole component was
/// pruned away).
#[derive(Debug, Clone)]
pub struct Tail {
    pub attachment: Option<NodeId>,
    pub members: Vec<NodeId>,
}

/// 2-core / tail split of a graph.
#[derive(Debug, Clone)]
pub struct TailDecomposition {
    pub core: Vec<NodeId>,
    pub tails: Vec<Tail>,
}

impl TailDecomposition {
    pub fn tail_node_count(&self) -> usize {
        self.tails.iter().map(|t| t.members.len()).sum()
    }
}

/// Finds graph tails by iterated pruning of degree <= 1 nodes. The core is
/// the 2-core; each tail is one connected component of the pruned subgraph.
pub fn find_tails(g: &Graph) -> TailDecomposition {
    let n = g.node_count();
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v as NodeId)).collect();
    let mut pruned = vec![false; n];
    let mut queue: Vec<NodeId> = (0..n as NodeId)
        .filter(|&v| degree[v as usize] <= 1)
        .collect();

    while let Some(v) = queue.pop() {
        if pruned[v as usize] {
            continue;
        }
        pruned[v as usize] = true;
        for &w in g.neighbors(v) {
            if !pruned[w as usize] {
                degree[w as usize] -= 1;
                if degree[w as usize] <= 1 {
                    queue.push(w);
                }
            }
        }
    }

    let core: Vec<NodeId> = (0..n as NodeId).filter(|&v| !pruned[v as usize]).collect();

    let mut tails = Vec::new();
    let mut visited = vec![false; n];
    for start in 0..n as NodeId {
        if !pruned[start as usize] || visited[start as usize] {
            continue;
        }
        let mut members = Vec::new();
        let mut attachment = None;
        let mut stack = vec![start];
        visited[start as usize] = true;
        while let Some(v) = stack.pop() {
            members.push(v);
            for &w in g.neighbors(v) {
                if pruned[w as usize] {
                    if !visited[w as usize] {
                        visited[w as usize] = true;
                        stack.push(w);
                    }
                } else {
                    // A pruned component touches the core through at most one
                    // edge, otherwise it would have survived the pruning.
                    debug_assert!(attachment.is_none() || attachment == Some(w));
                    attachment = Some(w);
                }
            }
        }
        members.sort_unstable();
        tails.push(Tail {
            attachment,
            members,
        });
    }

    TailDecomposition { core, tails }
}

/// The graph with tails removed: the subgraph induced on the 2-core, labels
/// preserved. When the core is empty the graph is returned unchanged and
/// `skipped` is set.
#[derive(Debug, Clone)]
pub struct StrippedGraph {
    pub graph: Graph,
    /// Maps ids of `graph` back to ids of the original graph.
    pub node_map: Vec<NodeId>,
    pub skipped: bool,
}

/// Removes the tails recorded in `t` from `g`.
pub fn strip_tails(g: &Graph, t: &TailDecomposition) -> Result<StrippedGraph, CentralityError> {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut total = 0usize;
    for &v in t
        .core
        .iter()
        .chain(t.tails.iter().flat_map(|t| t.members.iter()))
    {
        let vi = v as usize;
        if vi >= n || seen[vi] {
            return Err(CentralityError::DecompositionMismatch);
        }
        seen[vi] = true;
        total += 1;
    }
    if total != n {
        return Err(CentralityError::DecompositionMismatch);
    }

    if t.core.is_empty() {
        return Ok(StrippedGraph {
            graph: g.clone(),
            node_map: (0..n as NodeId).collect(),
            skipped: true,
        });
    }
    let (graph, node_map) = g.induced_subgraph(&t.core);
    Ok(StrippedGraph {
        graph,
        node_map,
        skipped: false,
    })
}
