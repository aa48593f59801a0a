//! Clustering quality and comparison metrics: the community ratio test, the
//! mean cut-ratio quality score, the duplication rate, and a normalized
//! distance between two (possibly overlapping) clusterings.

use thiserror::Error;

use crate::clustering::Clustering;
use crate::graph::{CutSizes, Graph, NodeId};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error(
        "cluster {index} has internal degree 0 but external degree {external}; ratio undefined"
    )]
    UndefinedRatio { index: usize, external: usize },
    #[error("clusterings cover different node sets ({left} vs {right} nodes)")]
    NodeSetMismatch { left: usize, right: usize },
}

fn cut_of(g: &Graph, members: &[NodeId], mark: &mut [bool]) -> CutSizes {
    for &v in members {
        mark[v as usize] = true;
    }
    let cut = g.cut_sizes_marked(members, mark);
    for &v in members {
        mark[v as usize] = false;
    }
    cut
}

/// Community test: true iff external/internal < strictness, with internal
/// edges counted once. A set with no edges at all (isolated component) has
/// ratio 0 and passes; internal 0 with external > 0 fails.
pub fn is_community(g: &Graph, members: &[NodeId], strictness: f64) -> bool {
    assert!(
        members.iter().all(|&v| (v as usize) < g.node_count()),
        "members must be graph nodes"
    );
    if members.is_empty() {
        return false;
    }
    let mut mark = vec![false; g.node_count()];
    let cut = cut_of(g, members, &mut mark);
    cut.ratio() < strictness
}

/// Mean external/internal ratio over all clusters; lower is better. Isolated
/// components contribute 0. A cluster with internal 0 and external > 0 makes
/// the mean undefined.
pub fn clustering_quality(g: &Graph, clustering: &Clustering) -> Result<f64, MetricsError> {
    assert_eq!(
        g.node_count(),
        clustering.n_nodes(),
        "clustering/graph node count mismatch"
    );
    if clustering.is_empty() {
        return Ok(0.0);
    }
    let mut mark = vec![false; g.node_count()];
    let mut sum = 0.0;
    for (index, cluster) in clustering.clusters().iter().enumerate() {
        let cut = cut_of(g, cluster.members(), &mut mark);
        if cut.internal == 0 && cut.external > 0 {
            return Err(MetricsError::UndefinedRatio {
                index,
                external: cut.external,
            });
        }
        sum += cut.ratio();
    }
    Ok(sum / clustering.len() as f64)
}

/// Average number of cluster memberships per clustered node; 1.0 means no
/// overlaps, 0.0 means no node is clustered at all.
pub fn duplication_rate(clustering: &Clustering) -> f64 {
    let counts = clustering.membership_counts();
    let clustered = counts.iter().filter(|&&c| c > 0).count();
    if clustered == 0 {
        return 0.0;
    }
    let total: u64 = counts.iter().map(|&c| c as u64).sum();
    total as f64 / clustered as f64
}

/// Fraction of the clusters containing `a` that also contain `b`; 0 when `a`
/// is an orphan. Asymmetric in general.
pub fn node_similarity(a: NodeId, b: NodeId, clustering: &Clustering) -> f64 {
    let mut holding = 0usize;
    let mut shared = 0usize;
    for cluster in clustering.clusters() {
        if cluster.contains(a) {
            holding += 1;
            if cluster.contains(b) {
                shared += 1;
            }
        }
    }
    if holding == 0 {
        0.0
    } else {
        shared as f64 / holding as f64
    }
}

/// Normalized distance in [0, 1] between two clusterings of the same node
/// set: the mean absolute similarity difference over ordered node pairs.
pub fn clustering_distance(a: &Clustering, b: &Clustering) -> Result<f64, MetricsError> {
    if a.n_nodes() != b.n_nodes() {
        return Err(MetricsError::NodeSetMismatch {
            left: a.n_nodes(),
            right: b.n_nodes(),
        });
    }
    let n = a.n_nodes();
    if n < 2 {
        return Ok(0.0);
    }

    let members_a = a.memberships();
    let members_b = b.memberships();

    // Row-at-a-time: spread each cluster of the source node over a dense
    // similarity buffer, then walk the touched entries.
    let mut sim_a = vec![0.0f64; n];
    let mut sim_b = vec![0.0f64; n];
    let mut touched = vec![false; n];
    let mut touch_list: Vec<usize> = Vec::new();
    let mut total = 0.0f64;

    for n1 in 0..n {
        let ka = &members_a[n1];
        let kb = &members_b[n1];
        if !ka.is_empty() {
            let share = 1.0 / ka.len() as f64;
            for &ci in ka {
                for &v in a.clusters()[ci as usize].members() {
                    let vi = v as usize;
                    sim_a[vi] += share;
                    if !touched[vi] {
                        touched[vi] = true;
                        touch_list.push(vi);
                    }
                }
            }
        }
        if !kb.is_empty() {
            let share = 1.0 / kb.len() as f64;
            for &ci in kb {
                for &v in b.clusters()[ci as usize].members() {
                    let vi = v as usize;
                    sim_b[vi] += share;
                    if !touched[vi] {
                        touched[vi] = true;
                        touch_list.push(vi);
                    }
                }
            }
        }
        // Sum densely in index order: untouched entries contribute zero and
        // the fixed order keeps the result bit-symmetric in its arguments.
        for vi in 0..n {
            if vi != n1 {
                total += (sim_a[vi] - sim_b[vi]).abs();
            }
        }
        for &vi in &touch_list {
            sim_a[vi] = 0.0;
            sim_b[vi] = 0.0;
            touched[vi] = false;
        }
        touch_list.clear();
    }

    Ok(total / (n as f64 * (n as f64 - 1.0)))
}

/// Per-cluster statistics row: size, internal edges, external edges, ratio.
#[derive(Debug, Clone)]
pub struct ClusterStats {
    pub size: usize,
    pub internal: usize,
    pub external: usize,
    pub ratio: f64,
}

/// Summary of a clustering against its graph.
#[derive(Debug, Clone)]
pub struct QualityReport {
    pub q_c: f64,
    pub drate: f64,
    pub orphan_count: usize,
    pub rows: Vec<ClusterStats>,
}

pub fn quality_report(g: &Graph, clustering: &Clustering) -> Result<QualityReport, MetricsError> {
    let q_c = clustering_quality(g, clustering)?;
    let mut mark = vec![false; g.node_count()];
    let rows = clustering
        .clusters()
        .iter()
        .map(|cluster| {
            let cut = cut_of(g, cluster.members(), &mut mark);
            ClusterStats {
                size: cluster.len(),
                internal: cut.internal,
                external: cut.external,
                ratio: cut.ratio(),
            }
        })
        .collect();
    Ok(QualityReport {
        q_c,
        drate: duplication_rate(clustering),
        orphan_count: clustering.orphan_count(),
        rows,
    })
}
