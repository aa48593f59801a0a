//! Planted-partition generator: builds a graph with a known ground-truth
//! clustering by splitting an edge budget into intra- and inter-cluster
//! quotas controlled by an assortativity factor.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::clustering::Clustering;
use crate::graph::{Graph, GraphBuilder, GraphError, NodeId};
use crate::io::{write_clusters, write_edge_list};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("cluster {index} (size {size}) cannot host its intra-cluster quota of {quota} edges (capacity {capacity})")]
    InfeasibleQuota {
        index: usize,
        size: usize,
        quota: usize,
        capacity: usize,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Edge budget: an absolute count or a fraction of the complete graph.
#[derive(Debug, Clone, Copy)]
pub enum EdgeBudget {
    Count(usize),
    Density(f64),
}

/// Generator parameters.
#[derive(Debug, Clone)]
pub struct GenParams {
    pub n_nodes: usize,
    pub edges: EdgeBudget,
    pub n_clusters: usize,
    /// Size imbalance: cluster i (1-based) gets weight i^(-skew). Zero means
    /// equal sizes.
    pub skew: f64,
    /// Fraction of edges drawn inside clusters, in (0.5, 1.0].
    pub assortativity: f64,
    pub seed: u64,
}

/// Rounds a*b to an integer ceiling, treating values within 1e-6 of an
/// integer as exact so that quotas like 0.85 * 30000 stay at 25500.
fn ceil_fraction(fraction: f64, total: usize) -> usize {
    let t = fraction * total as f64;
    let nearest = t.round();
    if (t - nearest).abs() < 1e-6 {
        nearest as usize
    } else {
        t.ceil() as usize
    }
}

fn cluster_sizes(n: usize, k: usize, skew: f64) -> Vec<usize> {
    let weights: Vec<f64> = (1..=k).map(|i| (i as f64).powf(-skew)).collect();
    let total: f64 = weights.iter().sum();
    let mut sizes: Vec<usize> = weights
        .iter()
        .map(|w| ((n as f64) * w / total).floor() as usize)
        .collect();
    let assigned: usize = sizes.iter().sum();
    // Remainders go to the largest clusters; weights are non-increasing, so
    // that is the front of the list.
    for size in sizes.iter_mut().take(n - assigned) {
        *size += 1;
    }
    sizes
}

/// Apportions `total` across clusters proportionally to capacity, by floors
/// plus largest remainders, skipping clusters already at capacity.
fn apportion(total: usize, capacities: &[usize]) -> Option<Vec<usize>> {
    let cap_sum: usize = capacities.iter().sum();
    if total > cap_sum {
        return None;
    }
    if cap_sum == 0 {
        return Some(vec![0; capacities.len()]);
    }
    let mut quotas: Vec<usize> = Vec::with_capacity(capacities.len());
    let mut remainders: Vec<(f64, usize)> = Vec::with_capacity(capacities.len());
    let mut allocated = 0usize;
    for (idx, &cap) in capacities.iter().enumerate() {
        let ideal = total as f64 * cap as f64 / cap_sum as f64;
        let floor = (ideal.floor() as usize).min(cap);
        quotas.push(floor);
        allocated += floor;
        remainders.push((ideal - floor as f64, idx));
    }
    remainders.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut deficit = total - allocated;
    let mut cursor = 0;
    while deficit > 0 {
        let (_, idx) = remainders[cursor % remainders.len()];
        if quotas[idx] < capacities[idx] {
            quotas[idx] += 1;
            deficit -= 1;
        }
        cursor += 1;
    }
    Some(quotas)
}

/// Draws `count` distinct pairs from a pair universe using rejection
/// sampling, or a partial shuffle of the enumerated universe when the draw
/// is dense. Both paths are deterministic for a fixed rng state.
fn sample_pairs<F, E>(
    rng: &mut ChaCha8Rng,
    count: usize,
    universe_size: usize,
    mut enumerate: E,
    mut draw: F,
    edges: &mut HashSet<(NodeId, NodeId)>,
    out: &mut Vec<(NodeId, NodeId)>,
) where
    F: FnMut(&mut ChaCha8Rng) -> Option<(NodeId, NodeId)>,
    E: FnMut() -> Vec<(NodeId, NodeId)>,
{
    if count == 0 {
        return;
    }
    if count * 2 > universe_size {
        let mut pool = enumerate();
        debug_assert_eq!(pool.len(), universe_size);
        // Partial Fisher-Yates: the first `count` slots become the sample.
        for i in 0..count {
            let j = i + rng.random_range(0..pool.len() - i);
            pool.swap(i, j);
        }
        for &pair in &pool[..count] {
            let inserted = edges.insert(pair);
            debug_assert!(inserted);
            out.push(pair);
        }
    } else {
        let mut remaining = count;
        while remaining > 0 {
            let Some((u, v)) = draw(rng) else { continue };
            let key = (u.min(v), u.max(v));
            if edges.insert(key) {
                out.push(key);
                remaining -= 1;
            }
        }
    }
}

/// Generates a graph together with its planted clustering. Nodes are labeled
/// by their decimal index and assigned to contiguous ground-truth clusters;
/// the intra-cluster edge quota is `ceil(assortativity * m)`, spread over
/// clusters proportionally to their pair capacity, and the remaining edges
/// are drawn uniformly between distinct clusters. Deterministic for a fixed
/// seed.
pub fn generate(params: &GenParams) -> Result<(Graph, Clustering), GenError> {
    let n = params.n_nodes;
    let k = params.n_clusters;
    if n < 2 {
        return Err(GenError::InvalidParams("need at least two nodes".into()));
    }
    if k < 1 || k > n {
        return Err(GenError::InvalidParams(format!(
            "cluster count {k} must be in 1..={n}"
        )));
    }
    if !(params.skew >= 0.0 && params.skew.is_finite()) {
        return Err(GenError::InvalidParams(
            "skew must be a finite value >= 0".into(),
        ));
    }
    if !(params.assortativity > 0.5 && params.assortativity <= 1.0) {
        return Err(GenError::InvalidParams(
            "assortativity must lie in (0.5, 1.0]".into(),
        ));
    }
    let max_edges = n * (n - 1) / 2;
    let m = match params.edges {
        EdgeBudget::Count(m) => m,
        EdgeBudget::Density(d) => {
            if !(0.0..=1.0).contains(&d) {
                return Err(GenError::InvalidParams("density must lie in [0, 1]".into()));
            }
            ceil_fraction(d, max_edges)
        }
    };
    if m > max_edges {
        return Err(GenError::InvalidParams(format!(
            "edge count {m} exceeds the complete graph ({max_edges})"
        )));
    }

    let sizes = cluster_sizes(n, k, params.skew);
    for (index, &size) in sizes.iter().enumerate() {
        if size < 2 {
            return Err(GenError::InvalidParams(format!(
                "cluster {index} has size {size}; every cluster needs at least 2 nodes"
            )));
        }
    }
    let starts: Vec<usize> = sizes
        .iter()
        .scan(0usize, |acc, &s| {
            let start = *acc;
            *acc += s;
            Some(start)
        })
        .collect();

    let m_intra = ceil_fraction(params.assortativity, m).min(m);
    let m_inter = m - m_intra;

    let capacities: Vec<usize> = sizes.iter().map(|&s| s * (s - 1) / 2).collect();
    let quotas = apportion(m_intra, &capacities).ok_or_else(|| {
        let (index, (&size, &capacity)) = sizes
            .iter()
            .zip(&capacities)
            .enumerate()
            .min_by_key(|(_, (_, &cap))| cap)
            .unwrap();
        GenError::InfeasibleQuota {
            index,
            size,
            quota: m_intra,
            capacity,
        }
    })?;
    for (index, (&quota, &capacity)) in quotas.iter().zip(&capacities).enumerate() {
        if quota > capacity {
            return Err(GenError::InfeasibleQuota {
                index,
                size: sizes[index],
                quota,
                capacity,
            });
        }
    }
    let inter_capacity = max_edges - capacities.iter().sum::<usize>();
    if m_inter > inter_capacity {
        return Err(GenError::InvalidParams(format!(
            "inter-cluster budget {m_inter} exceeds available pairs ({inter_capacity})"
        )));
    }

    let mut cluster_of = vec![0u32; n];
    for (idx, (&start, &size)) in starts.iter().zip(&sizes).enumerate() {
        for slot in cluster_of.iter_mut().skip(start).take(size) {
            *slot = idx as u32;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut edges: HashSet<(NodeId, NodeId)> = HashSet::with_capacity(m);
    let mut edge_list: Vec<(NodeId, NodeId)> = Vec::with_capacity(m);

    for (idx, (&start, &size)) in starts.iter().zip(&sizes).enumerate() {
        let quota = quotas[idx];
        let cap = capacities[idx];
        let (s, z) = (start as NodeId, size as NodeId);
        sample_pairs(
            &mut rng,
            quota,
            cap,
            || {
                let mut pool = Vec::with_capacity(cap);
                for a in 0..z {
                    for b in a + 1..z {
                        pool.push((s + a, s + b));
                    }
                }
                pool
            },
            |rng| {
                let a = s + rng.random_range(0..z);
                let b = s + rng.random_range(0..z);
                if a == b {
                    None
                } else {
                    Some((a, b))
                }
            },
            &mut edges,
            &mut edge_list,
        );
    }

    let cluster_lookup = cluster_of.clone();
    sample_pairs(
        &mut rng,
        m_inter,
        inter_capacity,
        || {
            let mut pool = Vec::with_capacity(inter_capacity);
            for a in 0..n as NodeId {
                for b in a + 1..n as NodeId {
                    if cluster_lookup[a as usize] != cluster_lookup[b as usize] {
                        pool.push((a, b));
                    }
                }
            }
            pool
        },
        |rng| {
            let a = rng.random_range(0..n as NodeId);
            let b = rng.random_range(0..n as NodeId);
            if cluster_of[a as usize] == cluster_of[b as usize] {
                None
            } else {
                Some((a, b))
            }
        },
        &mut edges,
        &mut edge_list,
    );

    let mut builder = GraphBuilder::new();
    for v in 0..n {
        builder.intern(&v.to_string());
    }
    for &(u, v) in &edge_list {
        builder.add_edge_ids(u, v);
    }
    let (graph, stats) = builder.build();
    debug_assert_eq!(stats.total_dropped(), 0);
    debug_assert_eq!(graph.edge_count(), m);

    let truth = Clustering::from_member_sets(
        n,
        starts
            .iter()
            .zip(&sizes)
            .map(|(&start, &size)| (start as NodeId..(start + size) as NodeId).collect())
            .collect(),
    );
    Ok((graph, truth))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_os_string();
    name.push(suffix);
    PathBuf::from(name)
}

/// Writes `PREFIX.edges` (edge list) and `PREFIX.truth` (cluster file).
pub fn write_pair(
    graph: &Graph,
    truth: &Clustering,
    prefix: &Path,
) -> Result<(PathBuf, PathBuf), GenError> {
    let edges_path = with_suffix(prefix, ".edges");
    let truth_path = with_suffix(prefix, ".truth");
    let mut edges_file = BufWriter::new(File::create(&edges_path)?);
    write_edge_list(&mut edges_file, graph)?;
    let mut truth_file = BufWriter::new(File::create(&truth_path)?);
    write_clusters(&mut truth_file, graph, truth)?;
    Ok((edges_path, truth_path))
}

/// Loads a `PREFIX.edges` / `PREFIX.truth` pair. Nodes appearing only in the
/// truth file (isolated nodes) are still part of the graph.
pub fn load_pair(prefix: &Path) -> Result<(Graph, Clustering), GenError> {
    let edges_path = with_suffix(prefix, ".edges");
    let truth_path = with_suffix(prefix, ".truth");

    let mut cluster_labels: Vec<Vec<String>> = Vec::new();
    {
        use std::io::BufRead;
        let reader = BufReader::new(File::open(&truth_path)?);
        for line in reader.lines() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            cluster_labels.push(trimmed.split_whitespace().map(str::to_string).collect());
        }
    }

    let mut builder = GraphBuilder::new();
    {
        use std::io::BufRead;
        let reader = BufReader::new(File::open(&edges_path)?);
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut tokens = trimmed.split_whitespace();
            match (tokens.next(), tokens.next(), tokens.next()) {
                (Some(a), Some(b), None) => builder.add_edge(a, b),
                _ => {
                    return Err(GenError::Graph(GraphError::Parse {
                        line: idx + 1,
                        message: format!("expected two labels, got {trimmed:?}"),
                    }))
                }
            }
        }
    }
    for cluster in &cluster_labels {
        for label in cluster {
            builder.intern(label);
        }
    }
    let (graph, _) = builder.build();

    let mut truth = Clustering::new(graph.node_count());
    for cluster in cluster_labels {
        let members: Vec<NodeId> = cluster
            .iter()
            .map(|l| graph.node_by_label(l).expect("label interned above"))
            .collect();
        truth.push_cluster(members);
    }
    Ok((graph, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn params(n: usize, m: usize, k: usize, skew: f64, assortativity: f64, seed: u64) -> GenParams {
        GenParams {
            n_nodes: n,
            edges: EdgeBudget::Count(m),
            n_clusters: k,
            skew,
            assortativity,
            seed,
        }
    }

    fn count_components(g: &Graph) -> usize {
        let n = g.node_count();
        let mut seen = vec![false; n];
        let mut components = 0;
        for start in 0..n as NodeId {
            if seen[start as usize] {
                continue;
            }
            components += 1;
            let mut stack = vec![start];
            seen[start as usize] = true;
            while let Some(v) = stack.pop() {
                for &w in g.neighbors(v) {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        stack.push(w);
                    }
                }
            }
        }
        components
    }

    fn intra_count(g: &Graph, truth: &Clustering) -> usize {
        let counts = truth.memberships();
        g.edges()
            .filter(|&(u, v)| counts[u as usize] == counts[v as usize])
            .count()
    }

    #[test]
    fn full_assortativity_disconnects_clusters() {
        let (g, truth) = generate(&params(200, 800, 5, 0.0, 1.0, 7)).unwrap();
        assert_eq!(g.edge_count(), 800);
        assert_eq!(intra_count(&g, &truth), 800);
        assert!(count_components(&g) >= 5);
    }

    #[test]
    fn edge_and_intra_counts_are_exact() {
        let p = params(4000, 30000, 10, 0.1, 0.85, 42);
        let (g, truth) = generate(&p).unwrap();
        assert_eq!(g.node_count(), 4000);
        assert_eq!(g.edge_count(), 30000);
        assert_eq!(intra_count(&g, &truth), 25500);
        assert_eq!(truth.len(), 10);
        assert_eq!(truth.orphan_count(), 0);
    }

    #[test]
    fn zero_skew_balances_sizes() {
        let (_, truth) = generate(&params(103, 500, 4, 0.0, 0.9, 3)).unwrap();
        let sizes: Vec<usize> = truth.clusters().iter().map(|c| c.len()).collect();
        let min = sizes.iter().min().unwrap();
        let max = sizes.iter().max().unwrap();
        assert!(max - min <= 1, "sizes {sizes:?}");
    }

    #[test]
    fn positive_skew_orders_sizes() {
        let (_, truth) = generate(&params(1000, 5000, 8, 0.5, 0.9, 3)).unwrap();
        let sizes: Vec<usize> = truth.clusters().iter().map(|c| c.len()).collect();
        for w in sizes.windows(2) {
            assert!(w[0] >= w[1], "sizes {sizes:?}");
        }
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let p = params(300, 2000, 6, 0.3, 0.8, 99);
        let (g1, t1) = generate(&p).unwrap();
        let (g2, t2) = generate(&p).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_edge_list(&mut a, &g1).unwrap();
        write_edge_list(&mut b, &g2).unwrap();
        assert_eq!(a, b);
        assert_eq!(t1.member_sets(), t2.member_sets());

        let (g3, _) = generate(&GenParams { seed: 100, ..p }).unwrap();
        let mut c = Vec::new();
        write_edge_list(&mut c, &g3).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn density_budget_resolves_to_count() {
        let p = GenParams {
            n_nodes: 50,
            edges: EdgeBudget::Density(0.2),
            n_clusters: 3,
            skew: 0.0,
            assortativity: 0.9,
            seed: 1,
        };
        let (g, _) = generate(&p).unwrap();
        assert_eq!(g.edge_count(), 245); // 0.2 * 1225
    }

    #[test]
    fn infeasible_quota_is_reported() {
        // 3 clusters of ~3 nodes can host at most 3 intra edges each.
        let err = generate(&params(9, 30, 3, 0.0, 1.0, 5)).unwrap_err();
        assert!(matches!(err, GenError::InfeasibleQuota { .. }));
    }

    #[test]
    fn invalid_assortativity_rejected() {
        assert!(matches!(
            generate(&params(20, 40, 2, 0.0, 0.5, 1)),
            Err(GenError::InvalidParams(_))
        ));
        assert!(matches!(
            generate(&params(20, 40, 2, 0.0, 1.2, 1)),
            Err(GenError::InvalidParams(_))
        ));
    }

    #[test]
    fn written_pair_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("planted");
        let p = params(120, 700, 4, 0.2, 0.9, 11);
        let (g, truth) = generate(&p).unwrap();
        let (edges_path, truth_path) = write_pair(&g, &truth, &prefix).unwrap();

        let edge_lines = std::fs::read_to_string(&edges_path).unwrap();
        assert_eq!(edge_lines.lines().count(), g.edge_count());
        let truth_lines = std::fs::read_to_string(&truth_path).unwrap();
        assert_eq!(truth_lines.lines().count(), truth.len());

        let (g2, t2) = load_pair(&prefix).unwrap();
        assert_eq!(g2.node_count(), g.node_count());
        assert_eq!(g2.edge_count(), g.edge_count());
        // Same edge set expressed over labels.
        let edge_set = |g: &Graph| {
            let mut set: Vec<(String, String)> = g
                .edges()
                .map(|(u, v)| {
                    let (a, b) = (g.label(u).to_string(), g.label(v).to_string());
                    if a <= b {
                        (a, b)
                    } else {
                        (b, a)
                    }
                })
                .collect();
            set.sort();
            set
        };
        assert_eq!(edge_set(&g), edge_set(&g2));

        // Re-serializing the reloaded pair is byte-identical.
        let prefix2 = dir.path().join("reload");
        let (edges2, truth2) = write_pair(&g2, &t2, &prefix2).unwrap();
        assert_eq!(
            std::fs::read(&edges_path).unwrap(),
            std::fs::read(&edges2).unwrap()
        );
        assert_eq!(
            std::fs::read(&truth_path).unwrap(),
            std::fs::read(&truth2).unwrap()
        );

        // And the truth file parses against the written graph.
        let reader = BufReader::new(File::open(&truth_path).unwrap());
        let reloaded = crate::io::read_clusters(reader, &g2).unwrap();
        assert_eq!(reloaded.len(), truth.len());
    }

    #[test]
    fn ground_truth_quality_improves_with_assortativity() {
        use crate::metrics::clustering_quality;
        let mut last = f64::INFINITY;
        for a in [0.6, 0.7, 0.8, 0.9, 0.95] {
            let (g, truth) = generate(&params(500, 4000, 5, 0.1, a, 21)).unwrap();
            let q = clustering_quality(&g, &truth).unwrap();
            assert!(q < last, "quality should drop as assortativity grows");
            last = q;
        }
    }
}
