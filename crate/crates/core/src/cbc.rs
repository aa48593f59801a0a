//! The CBC clustering algorithm: cliques seeded around low-betweenness
//! kernels, tail-cluster handling, block-matrix driven merging, orphan
//! management, and the outer retry loop over clique-size values.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::centrality::{
    betweenness, find_tails, strip_tails, CentralityScores, StrippedGraph, TailDecomposition,
};
use crate::clustering::{union_len, Clustering};
use crate::graph::{CutSizes, Graph, NodeId};

#[derive(Debug, Error)]
pub enum CbcError {
    #[error("cannot cluster an empty graph")]
    EmptyGraph,
}

/// User parameters of the clustering run.
#[derive(Debug, Clone)]
pub struct CbcParams {
    /// Community threshold: a cluster is correlated when external/internal
    /// edges < strictness.
    pub strictness: f64,
    /// Maximum cluster size as a fraction of the node count.
    pub max_cluster_frac: f64,
    /// Minimum acceptable cluster size in the final clustering.
    pub min_cluster_size: usize,
    /// Adopt orphans into adjacent clusters even when that worsens quality.
    pub minimize_orphans: bool,
    /// Enforce the strict per-node rule (more internal than external links)
    /// during reassignment.
    pub flake_strict: bool,
    /// Maximum number of clique-size values tried by the outer loop.
    pub max_retries: usize,
}

impl Default for CbcParams {
    fn default() -> Self {
        CbcParams {
            strictness: 1.0,
            max_cluster_frac: 0.5,
            min_cluster_size: 5,
            minimize_orphans: false,
            flake_strict: false,
            max_retries: 8,
        }
    }
}

impl CbcParams {
    fn max_cluster_limit(&self, n: usize) -> f64 {
        self.max_cluster_frac * n as f64
    }

    /// Range checks for user-supplied parameters.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.strictness > 0.0 && self.strictness.is_finite()) {
            return Err(format!("strictness must be positive, got {}", self.strictness));
        }
        if !(self.max_cluster_frac > 0.0 && self.max_cluster_frac <= 1.0) {
            return Err(format!(
                "max cluster fraction must lie in (0, 1], got {}",
                self.max_cluster_frac
            ));
        }
        if self.min_cluster_size < 1 {
            return Err("minimum cluster size must be at least 1".into());
        }
        if self.max_retries < 1 {
            return Err("at least one retry round is required".into());
        }
        Ok(())
    }
}

fn community_ok(cut: CutSizes, strictness: f64) -> bool {
    cut.ratio() < strictness
}

/// Symmetric l x l matrix of intra/inter-cluster edge counts. The diagonal
/// holds each cluster's internal edge count (each edge once); off-diagonal
/// entries count edges running between two clusters.
#[derive(Debug, Clone)]
pub struct BlockMatrix {
    size: usize,
    data: Vec<u64>,
}

impl BlockMatrix {
    pub fn zero(size: usize) -> Self {
        BlockMatrix {
            size,
            data: vec![0; size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.size + j]
    }

    fn bump(&mut self, i: usize, j: usize) {
        self.data[i * self.size + j] += 1;
        if i != j {
            self.data[j * self.size + i] += 1;
        }
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.data[i * self.size..(i + 1) * self.size].iter().sum()
    }

    /// Matrix after merging cluster `j` into cluster `i` (i < j): row/column
    /// folds, exact for disjoint clusters.
    fn folded(&self, i: usize, j: usize) -> BlockMatrix {
        debug_assert!(i < j);
        let old = self.size;
        let mut out = BlockMatrix::zero(old - 1);
        let map = |k: usize| if k < j { k } else { k - 1 };
        for a in 0..old {
            if a == j {
                continue;
            }
            for b in 0..old {
                if b == j {
                    continue;
                }
                out.data[map(a) * out.size + map(b)] = self.data[a * old + b];
            }
        }
        for k in 0..old {
            if k == i || k == j {
                continue;
            }
            let sum = self.get(i, k) + self.get(j, k);
            out.data[i * out.size + map(k)] = sum;
            out.data[map(k) * out.size + i] = sum;
        }
        out.data[i * out.size + i] = self.get(i, i) + self.get(j, j) + self.get(i, j);
        out
    }
}

/// The alternating clique-size sequence: sqrt(n), then sqrt(n)/d and
/// d*sqrt(n) for d = 2, 3, ... Values are rounded up and clamped to [1, n];
/// the sequence is capped at `max_retries` entries.
pub fn clique_size_schedule(n: usize, max_retries: usize) -> Vec<usize> {
    assert!(n >= 1, "schedule needs a nonempty graph");
    let root = (n as f64).sqrt();
    let clamp = |x: f64| (x.ceil() as usize).clamp(1, n);
    let mut out = Vec::with_capacity(max_retries);
    if max_retries == 0 {
        return out;
    }
    out.push(clamp(root));
    let mut divisor = 2.0;
    while out.len() < max_retries {
        out.push(clamp(root / divisor));
        if out.len() < max_retries {
            out.push(clamp(root * divisor));
        }
        divisor += 1.0;
    }
    out
}

/// Seeds cliques around unassigned kernels in ascending betweenness order.
///
/// Each kernel gathers its unassigned neighbors, then the clique is grown by
/// BFS (frontier ordered by ascending score, then node id) while its size is
/// at most `max_clique_size`, stopping at twice that. Cliques of size <= 2
/// are discarded and their nodes left unassigned. Nodes with a non-finite
/// score are ignored entirely; the full pipeline uses that to keep graph
/// tails out of clique formation. `max_clique_size == 0` means "use the
/// schedule head", the rounded-up square root of the node count.
pub fn initiate_cliques(
    g: &Graph,
    scores: &CentralityScores,
    clustering: &mut Clustering,
    max_clique_size: usize,
) {
    let n = g.node_count();
    assert_eq!(scores.len(), n, "scores must cover every node");
    assert_eq!(clustering.n_nodes(), n);
    let max_size = if max_clique_size == 0 {
        (n as f64).sqrt().ceil() as usize
    } else {
        max_clique_size
    };
    let cap = 2 * max_size;

    let mut assigned: Vec<bool> = clustering
        .membership_counts()
        .iter()
        .map(|&c| c > 0)
        .collect();

    let eligible = |v: NodeId| scores.score(v).is_finite();
    let mut order: Vec<NodeId> = (0..n as NodeId).filter(|&v| eligible(v)).collect();
    order.sort_by(|&a, &b| {
        scores
            .score(a)
            .partial_cmp(&scores.score(b))
            .unwrap()
            .then(a.cmp(&b))
    });

    for &kernel in &order {
        if assigned[kernel as usize] {
            continue;
        }
        let mut members = vec![kernel];
        assigned[kernel as usize] = true;
        for &nbr in g.neighbors(kernel) {
            if !assigned[nbr as usize] && eligible(nbr) {
                assigned[nbr as usize] = true;
                members.push(nbr);
            }
        }

        if members.len() <= max_size {
            // Grow level by level; each level is visited in ascending
            // (score, id) order and growth stops exactly at the cap.
            let mut frontier: Vec<NodeId> = Vec::new();
            for &m in &members {
                for &nbr in g.neighbors(m) {
                    if !assigned[nbr as usize] && eligible(nbr) {
                        frontier.push(nbr);
                    }
                }
            }
            while !frontier.is_empty() && members.len() < cap {
                frontier.sort_by(|&a, &b| {
                    scores
                        .score(a)
                        .partial_cmp(&scores.score(b))
                        .unwrap()
                        .then(a.cmp(&b))
                });
                frontier.dedup();
                let mut next = Vec::new();
                for &v in &frontier {
                    if members.len() >= cap {
                        break;
                    }
                    if assigned[v as usize] {
                        continue;
                    }
                    assigned[v as usize] = true;
                    members.push(v);
                    for &w in g.neighbors(v) {
                        if !assigned[w as usize] && eligible(w) {
                            next.push(w);
                        }
                    }
                }
                frontier = next;
            }
        }

        if members.len() <= 2 {
            for &v in &members {
                assigned[v as usize] = false;
            }
        } else {
            clustering.push_cluster(members);
        }
    }
}

/// Folds graph tails into the clustering built on the stripped graph:
/// single-node tails join the cluster holding their attachment point, the
/// remaining tails become clusters of their own, and tail clusters are then
/// merged into the cluster of their attachment while the union respects the
/// maximum cluster size.
pub fn handle_tails(
    g: &Graph,
    tails: &TailDecomposition,
    clustering: &mut Clustering,
    params: &CbcParams,
) {
    let limit = params.max_cluster_limit(g.node_count());

    let lowest_cluster_holding = |clustering: &Clustering, v: NodeId| -> Option<usize> {
        clustering.clusters().iter().position(|c| c.contains(v))
    };

    // (a) size-1 tails join a clique containing their attachment node.
    let counts = clustering.membership_counts();
    for tail in &tails.tails {
        if tail.members.len() != 1 || counts[tail.members[0] as usize] > 0 {
            continue;
        }
        if let Some(att) = tail.attachment {
            if let Some(idx) = lowest_cluster_holding(clustering, att) {
                clustering.cluster_mut(idx).insert(tail.members[0]);
            }
        }
    }

    // (b) every tail still fully unassigned becomes its own cluster.
    let counts = clustering.membership_counts();
    let mut created: Vec<(usize, Option<NodeId>)> = Vec::new();
    for tail in &tails.tails {
        if tail.members.is_empty() || tail.members.iter().any(|&v| counts[v as usize] > 0) {
            continue;
        }
        clustering.push_cluster(tail.members.clone());
        created.push((clustering.len() - 1, tail.attachment));
    }

    // (c) merge tail clusters into the cluster of their attachment, greedily
    // in creation order, while the union stays within the size bound.
    let mut i = 0;
    while i < created.len() {
        let (idx, att) = created[i];
        i += 1;
        let Some(att) = att else { continue };
        let Some(target) = lowest_cluster_holding(clustering, att) else {
            continue;
        };
        if target == idx {
            continue;
        }
        let union = union_len(
            clustering.clusters()[target].members(),
            clustering.clusters()[idx].members(),
        );
        if union as f64 > limit {
            continue;
        }
        clustering.merge_clusters(target, idx);
        // Tail clusters are appended after existing ones, so the removed
        // index is always above the target; later entries shift down.
        for entry in created[i..].iter_mut() {
            if entry.0 > idx {
                entry.0 -= 1;
            }
        }
    }
}

/// Builds the block matrix for a clustering. For overlapping clusters an
/// edge counts toward `B[i,j]` when it runs from a member of the
/// lower-indexed cluster to a node that is only in the other one; for
/// disjoint clusters this is the plain cross-edge count.
pub fn build_block_matrix(g: &Graph, clustering: &Clustering) -> BlockMatrix {
    let l = clustering.len();
    let mut b = BlockMatrix::zero(l);
    let memberships = clustering.memberships();
    for (u, v) in g.edges() {
        let cu = &memberships[u as usize];
        let cv = &memberships[v as usize];
        for &i in cu {
            for &j in cv {
                if i == j {
                    b.bump(i as usize, i as usize);
                } else {
                    let (p, q) = (i.min(j), i.max(j));
                    // Count once when the edge leaves the lower-indexed
                    // cluster: its far endpoint must not also be inside it.
                    let counts = if i == p {
                        !cv.contains(&p)
                    } else {
                        !cu.contains(&p)
                    };
                    if counts {
                        b.bump(p as usize, q as usize);
                    }
                }
            }
        }
    }
    b
}

/// Picks the next pair to merge: among pairs that are linked, fit the size
/// bound and are not both correlated, the one maximizing
/// `B[i,j]/max(B[i,i],1)` (evaluated in both orientations), with ties broken
/// by smaller union then lower indices. Returns `None` when no admissible
/// pair remains.
pub fn select_merge_pair(
    b: &BlockMatrix,
    clustering: &Clustering,
    params: &CbcParams,
) -> Option<(usize, usize)> {
    let limit = params.max_cluster_limit(clustering.n_nodes());
    let clusters = clustering.clusters();
    let l = clustering.len();
    debug_assert_eq!(b.size(), l);

    let mut best: Option<(f64, usize, usize, usize)> = None;
    for i in 0..l {
        for j in i + 1..l {
            let link = b.get(i, j);
            if link == 0 {
                continue;
            }
            if clusters[i].correlated && clusters[j].correlated {
                continue;
            }
            let union = union_len(clusters[i].members(), clusters[j].members());
            if union as f64 > limit {
                continue;
            }
            let ratio = (link as f64 / b.get(i, i).max(1) as f64)
                .max(link as f64 / b.get(j, j).max(1) as f64);
            let admissible = 2 * link > b.row_sum(i)
                || 2 * link > b.row_sum(j)
                || !clusters[i].correlated
                || !clusters[j].correlated
                || ratio >= params.strictness;
            if !admissible {
                continue;
            }
            let better = match best {
                None => true,
                Some((r, u, _, _)) => ratio > r || (ratio == r && union < u),
            };
            if better {
                best = Some((ratio, union, i, j));
            }
        }
    }
    best.map(|(_, _, i, j)| (i, j))
}

/// One pass over all assigned nodes enforcing the per-node constraint.
///
/// Default rule: a node singly assigned to a cluster stays only while that
/// cluster holds as many of its links as any other; otherwise it moves to
/// the cluster with the most links (ties keep the current placement, then go
/// to the lower index), and a node with no links into any cluster is
/// orphaned. With `flake_strict`, a node whose internal links do not exceed
/// its external ones is removed from the cluster instead. Nodes in several
/// clusters only drop memberships they have no links into. Returns the
/// number of changes made.
pub fn reassign_nodes(g: &Graph, clustering: &mut Clustering, params: &CbcParams) -> usize {
    let n = g.node_count();
    assert_eq!(clustering.n_nodes(), n);
    let mut memberships = clustering.memberships();
    let mut link_count: Vec<u32> = vec![0; clustering.len()];
    let mut touched: Vec<usize> = Vec::new();
    let mut changes = 0;

    for v in 0..n as NodeId {
        if memberships[v as usize].is_empty() {
            continue;
        }
        for &w in g.neighbors(v) {
            for &ci in &memberships[w as usize] {
                let ci = ci as usize;
                if link_count[ci] == 0 {
                    touched.push(ci);
                }
                link_count[ci] += 1;
            }
        }
        let degree = g.degree(v);
        let own = memberships[v as usize].clone();
        if params.flake_strict {
            for &c in &own {
                let c = c as usize;
                let internal = link_count[c] as usize;
                if internal * 2 <= degree {
                    clustering.cluster_mut(c).remove(v);
                    memberships[v as usize].retain(|&x| x as usize != c);
                    changes += 1;
                }
            }
        } else if own.len() == 1 {
            let c = own[0] as usize;
            let internal = link_count[c];
            let mut target: Option<(u32, usize)> = None;
            for &t in &touched {
                if t == c {
                    continue;
                }
                let count = link_count[t];
                let better = match target {
                    None => true,
                    Some((best, idx)) => count > best || (count == best && t < idx),
                };
                if better {
                    target = Some((count, t));
                }
            }
            match target {
                Some((count, t)) if count > internal => {
                    clustering.cluster_mut(c).remove(v);
                    clustering.cluster_mut(t).insert(v);
                    memberships[v as usize] = vec![t as u32];
                    changes += 1;
                }
                _ if internal == 0 => {
                    clustering.cluster_mut(c).remove(v);
                    memberships[v as usize].clear();
                    changes += 1;
                }
                _ => {}
            }
        } else {
            // Overlapping memberships: only drop the ones the node has no
            // links into.
            for &c in &own {
                let c = c as usize;
                if link_count[c] == 0 {
                    clustering.cluster_mut(c).remove(v);
                    memberships[v as usize].retain(|&x| x as usize != c);
                    changes += 1;
                }
            }
        }
        for &t in &touched {
            link_count[t] = 0;
        }
        touched.clear();
    }

    clustering.prune_empty();
    changes
}

/// Removes every cluster fully contained in another; equal clusters keep the
/// lower index. Returns the number of clusters removed.
pub fn manage_subsets(clustering: &mut Clustering) -> usize {
    let clusters = clustering.clusters();
    let l = clusters.len();
    let mut remove = vec![false; l];
    for j in 0..l {
        for i in 0..l {
            if i == j {
                continue;
            }
            if clusters[i].is_superset_of(&clusters[j])
                && (clusters[i].len() > clusters[j].len() || i < j)
            {
                remove[j] = true;
                break;
            }
        }
    }
    let removed = remove.iter().filter(|&&r| r).count();
    if removed > 0 {
        let kept: Vec<Vec<NodeId>> = clustering
            .clusters()
            .iter()
            .zip(&remove)
            .filter(|(_, &r)| !r)
            .map(|(c, _)| c.members().to_vec())
            .collect();
        *clustering = Clustering::from_member_sets(clustering.n_nodes(), kept);
    }
    removed
}

/// Adopts orphans into the cluster holding most of their edges (ties go to
/// the lower cluster index), repeating until no orphan can be adopted.
/// Returns the number of adoptions.
pub fn add_orphans(g: &Graph, clustering: &mut Clustering) -> usize {
    let n = g.node_count();
    assert_eq!(clustering.n_nodes(), n);
    let mut memberships = clustering.memberships();
    let mut link_count: Vec<u32> = vec![0; clustering.len()];
    let mut touched: Vec<usize> = Vec::new();
    let mut adopted_total = 0;

    loop {
        let mut adopted = 0;
        for v in 0..n as NodeId {
            if !memberships[v as usize].is_empty() {
                continue;
            }
            for &w in g.neighbors(v) {
                for &ci in &memberships[w as usize] {
                    let ci = ci as usize;
                    if link_count[ci] == 0 {
                        touched.push(ci);
                    }
                    link_count[ci] += 1;
                }
            }
            let mut target: Option<(u32, usize)> = None;
            for &t in &touched {
                let count = link_count[t];
                let better = match target {
                    None => true,
                    Some((best, idx)) => count > best || (count == best && t < idx),
                };
                if better {
                    target = Some((count, t));
                }
            }
            for &t in &touched {
                link_count[t] = 0;
            }
            touched.clear();
            if let Some((_, t)) = target {
                clustering.cluster_mut(t).insert(v);
                memberships[v as usize].push(t as u32);
                adopted += 1;
            }
        }
        adopted_total += adopted;
        if adopted == 0 {
            break;
        }
    }
    adopted_total
}

struct MergeState {
    b: BlockMatrix,
    cuts: Vec<CutSizes>,
    /// No node sits in two clusters; folds after a merge are exact only
    /// then. The pipeline always produces disjoint clusterings, but the
    /// merge loop accepts arbitrary ones.
    disjoint: bool,
}

fn rebuild_state(g: &Graph, clustering: &mut Clustering, params: &CbcParams) -> MergeState {
    let b = build_block_matrix(g, clustering);
    let disjoint = clustering.membership_counts().iter().all(|&c| c <= 1);
    let mut mark = vec![false; g.node_count()];
    let mut cuts = Vec::with_capacity(clustering.len());
    for idx in 0..clustering.len() {
        let members: Vec<NodeId> = clustering.clusters()[idx].members().to_vec();
        for &v in &members {
            mark[v as usize] = true;
        }
        let cut = g.cut_sizes_marked(&members, &mark);
        for &v in &members {
            mark[v as usize] = false;
        }
        clustering.cluster_mut(idx).correlated = community_ok(cut, params.strictness);
        cuts.push(cut);
    }
    MergeState { b, cuts, disjoint }
}

/// Folds the state after merging cluster `j` into `i`: cross edges become
/// internal and stop counting as external on both sides. Requires a
/// disjoint clustering.
fn fold_state(
    state: &mut MergeState,
    clustering: &mut Clustering,
    i: usize,
    j: usize,
    params: &CbcParams,
) {
    debug_assert!(state.disjoint);
    let link = state.b.get(i, j) as usize;
    let (ci, cj) = (state.cuts[i], state.cuts[j]);
    let merged = CutSizes {
        internal: ci.internal + cj.internal + link,
        external: ci.external + cj.external - 2 * link,
    };
    state.b = state.b.folded(i, j);
    state.cuts[i] = merged;
    state.cuts.remove(j);
    clustering.cluster_mut(i).correlated = community_ok(merged, params.strictness);
}

fn cluster_violates(cut: CutSizes, size: usize, limit: f64, params: &CbcParams) -> bool {
    !community_ok(cut, params.strictness) || size < params.min_cluster_size || size as f64 > limit
}

/// Index of the worst constraint violator: highest external/internal ratio
/// among clusters failing the community test or the size bounds.
fn find_worst_violator(
    clustering: &Clustering,
    state: &MergeState,
    params: &CbcParams,
) -> Option<usize> {
    let limit = params.max_cluster_limit(clustering.n_nodes());
    let mut worst: Option<(f64, usize)> = None;
    for (idx, cluster) in clustering.clusters().iter().enumerate() {
        if !cluster_violates(state.cuts[idx], cluster.len(), limit, params) {
            continue;
        }
        let ratio = state.cuts[idx].ratio();
        let better = match worst {
            None => true,
            Some((r, _)) => ratio > r,
        };
        if better {
            worst = Some((ratio, idx));
        }
    }
    worst.map(|(_, idx)| idx)
}

/// The merge phase: repeated reassign/select/merge with at most as many
/// merges as there were clusters on entry; when no merge is possible the
/// worst violating cluster is deleted (and, if enabled, orphans adopted)
/// before trying again. Stops at a fixpoint.
pub fn merge_loop(g: &Graph, clustering: &mut Clustering, params: &CbcParams) {
    merge_loop_timed(g, clustering, params, &mut PhaseTimings::default());
}

fn merge_loop_timed(
    g: &Graph,
    clustering: &mut Clustering,
    params: &CbcParams,
    timings: &mut PhaseTimings,
) {
    let phase_start = Instant::now();
    let mut reassign_spent = Duration::ZERO;

    let budget = clustering.len();
    let mut merges = 0;
    let mut dirty = true;
    let mut state = MergeState {
        b: BlockMatrix::zero(0),
        cuts: Vec::new(),
        disjoint: true,
    };
    // The natural exit is reaching a fixpoint; the cap only guards against
    // adopt/reassign oscillation under flake_strict.
    let max_iterations = 4 * budget + 16;

    for _ in 0..max_iterations {
        let t = Instant::now();
        let moved = reassign_nodes(g, clustering, params);
        reassign_spent += t.elapsed();
        if moved > 0 {
            dirty = true;
        }
        if dirty {
            state = rebuild_state(g, clustering, params);
            dirty = false;
        }

        let mut merged = false;
        if merges < budget {
            if let Some((i, j)) = select_merge_pair(&state.b, clustering, params) {
                clustering.merge_clusters(i, j);
                if state.disjoint {
                    fold_state(&mut state, clustering, i, j, params);
                } else {
                    dirty = true;
                }
                merges += 1;
                merged = true;
            }
        }
        if merged {
            continue;
        }

        let removed = manage_subsets(clustering);
        if removed > 0 {
            dirty = true;
            continue;
        }
        let deleted = match find_worst_violator(clustering, &state, params) {
            Some(idx) => {
                clustering.remove_cluster(idx);
                true
            }
            None => false,
        };
        let adopted = if params.minimize_orphans {
            add_orphans(g, clustering)
        } else {
            0
        };
        if !deleted && adopted == 0 {
            break;
        }
        dirty = true;
    }

    let t = Instant::now();
    reassign_nodes(g, clustering, params);
    reassign_spent += t.elapsed();

    timings.reassignment += reassign_spent;
    timings.merging += phase_start.elapsed().saturating_sub(reassign_spent);
}

/// Wall-clock time spent in each pipeline phase.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhaseTimings {
    pub tail_detection: Duration,
    pub centrality: Duration,
    pub clique_init: Duration,
    pub merging: Duration,
    pub reassignment: Duration,
}

/// Tail decomposition, stripped graph and betweenness scores shared by every
/// retry round.
pub struct Prepared {
    pub tails: TailDecomposition,
    pub stripped: StrippedGraph,
    /// Scores over the full graph's ids; tail nodes carry +inf so they never
    /// seed or join cliques.
    pub scores: CentralityScores,
    pub timings: PhaseTimings,
}

/// Result of a clustering run.
#[derive(Debug, Clone)]
pub struct CbcResult {
    pub clustering: Clustering,
    /// True when every emitted cluster passed the community test and the
    /// size bounds; false when the retry schedule was exhausted and the
    /// best-quality clustering seen is emitted instead.
    pub conforming: bool,
    /// Number of clique-size values consumed.
    pub rounds: usize,
    pub timings: PhaseTimings,
}

/// Detects and strips tails, then computes betweenness on the stripped graph.
pub fn prepare(g: &Graph) -> Result<Prepared, CbcError> {
    if g.node_count() == 0 {
        return Err(CbcError::EmptyGraph);
    }
    let mut timings = PhaseTimings::default();

    let t = Instant::now();
    let tails = find_tails(g);
    let stripped = strip_tails(g, &tails).expect("decomposition built from the same graph");
    timings.tail_detection = t.elapsed();

    let t = Instant::now();
    let core_scores = betweenness(&stripped.graph);
    timings.centrality = t.elapsed();

    let scores = if stripped.skipped {
        core_scores
    } else {
        let mut full = vec![f64::INFINITY; g.node_count()];
        for (idx, &orig) in stripped.node_map.iter().enumerate() {
            full[orig as usize] = core_scores.score(idx as NodeId);
        }
        CentralityScores::from_values(full)
    };

    Ok(Prepared {
        tails,
        stripped,
        scores,
        timings,
    })
}

fn adoptable_orphan_exists(g: &Graph, clustering: &Clustering) -> bool {
    let counts = clustering.membership_counts();
    (0..g.node_count() as NodeId)
        .any(|v| counts[v as usize] == 0 && g.neighbors(v).iter().any(|&w| counts[w as usize] > 0))
}

fn conforms(g: &Graph, clustering: &Clustering, params: &CbcParams) -> bool {
    if clustering.is_empty() {
        return false;
    }
    let limit = params.max_cluster_limit(clustering.n_nodes());
    let mut mark = vec![false; g.node_count()];
    for cluster in clustering.clusters() {
        for &v in cluster.members() {
            mark[v as usize] = true;
        }
        let cut = g.cut_sizes_marked(cluster.members(), &mark);
        for &v in cluster.members() {
            mark[v as usize] = false;
        }
        if cluster_violates(cut, cluster.len(), limit, params) {
            return false;
        }
    }
    if params.minimize_orphans && adoptable_orphan_exists(g, clustering) {
        return false;
    }
    true
}

/// Mean cluster ratio with violations pushed to +inf, for ranking candidate
/// clusterings across retry rounds.
fn guarded_quality(g: &Graph, clustering: &Clustering) -> f64 {
    if clustering.is_empty() {
        return f64::INFINITY;
    }
    let mut mark = vec![false; g.node_count()];
    let mut sum = 0.0;
    for cluster in clustering.clusters() {
        for &v in cluster.members() {
            mark[v as usize] = true;
        }
        let cut = g.cut_sizes_marked(cluster.members(), &mark);
        for &v in cluster.members() {
            mark[v as usize] = false;
        }
        sum += cut.ratio();
    }
    sum / clustering.len() as f64
}

/// Runs the remaining pipeline on prepared inputs: for each schedule value,
/// initialize cliques over the current orphans, fold in tails, merge, and
/// stop as soon as the clustering conforms.
pub fn cluster_prepared(g: &Graph, prepared: &Prepared, params: &CbcParams) -> CbcResult {
    let mut timings = prepared.timings;
    let mut clustering = Clustering::new(g.node_count());
    let schedule = clique_size_schedule(
        prepared.stripped.graph.node_count().max(1),
        params.max_retries,
    );

    let mut best: Option<(f64, Clustering)> = None;
    let mut rounds = 0;
    for &max_size in &schedule {
        rounds += 1;
        let t = Instant::now();
        initiate_cliques(g, &prepared.scores, &mut clustering, max_size);
        if !prepared.stripped.skipped {
            handle_tails(g, &prepared.tails, &mut clustering, params);
        }
        timings.clique_init += t.elapsed();

        merge_loop_timed(g, &mut clustering, params, &mut timings);

        if conforms(g, &clustering, params) {
            return CbcResult {
                clustering,
                conforming: true,
                rounds,
                timings,
            };
        }
        let quality = guarded_quality(g, &clustering);
        let keep = match &best {
            None => true,
            Some((q, _)) => quality < *q,
        };
        if keep {
            best = Some((quality, clustering.clone()));
        }
    }

    CbcResult {
        clustering: best.map(|(_, c)| c).unwrap_or(clustering),
        conforming: false,
        rounds,
        timings,
    }
}

/// The full pipeline: strip tails, compute betweenness on the stripped
/// graph, then cluster.
pub fn cluster(g: &Graph, params: &CbcParams) -> Result<CbcResult, CbcError> {
    let prepared = prepare(g)?;
    Ok(cluster_prepared(g, &prepared, params))
}
