//! Clusters and clusterings over a fixed node universe. Clusters may overlap;
//! nodes in no cluster are orphans.

use crate::graph::NodeId;

/// A set of nodes, stored sorted. `correlated` caches whether the cluster
/// currently satisfies the community ratio test; it is maintained by the
/// clustering algorithm and starts out false.
#[derive(Debug, Clone)]
pub struct Cluster {
    members: Vec<NodeId>,
    pub correlated: bool,
}

impl Cluster {
    pub fn from_members(mut members: Vec<NodeId>) -> Self {
        members.sort_unstable();
        members.dedup();
        Cluster {
            members,
            correlated: false,
        }
    }

    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub(crate) fn insert(&mut self, v: NodeId) -> bool {
        match self.members.binary_search(&v) {
            Ok(_) => false,
            Err(pos) => {
                self.members.insert(pos, v);
                true
            }
        }
    }

    pub(crate) fn remove(&mut self, v: NodeId) -> bool {
        match self.members.binary_search(&v) {
            Ok(pos) => {
                self.members.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    /// True if every member of `other` is also a member of `self`.
    pub fn is_superset_of(&self, other: &Cluster) -> bool {
        if other.members.len() > self.members.len() {
            return false;
        }
        let mut it = self.members.iter();
        'outer: for &v in &other.members {
            for &w in it.by_ref() {
                if w == v {
                    continue 'outer;
                }
                if w > v {
                    return false;
                }
            }
            return false;
        }
        true
    }
}

/// Number of distinct nodes in the union of two sorted member lists.
pub(crate) fn union_len(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
        count += 1;
    }
    count + (a.len() - i) + (b.len() - j)
}

/// An ordered collection of clusters over nodes `0..n_nodes`. The orphan set
/// is implied: every node that appears in no cluster.
#[derive(Debug, Clone)]
pub struct Clustering {
    n_nodes: usize,
    clusters: Vec<Cluster>,
}

impl Clustering {
    pub fn new(n_nodes: usize) -> Self {
        Clustering {
            n_nodes,
            clusters: Vec::new(),
        }
    }

    pub fn from_member_sets(n_nodes: usize, sets: Vec<Vec<NodeId>>) -> Self {
        let mut clustering = Clustering::new(n_nodes);
        for members in sets {
            clustering.push_cluster(members);
        }
        clustering
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn push_cluster(&mut self, members: Vec<NodeId>) {
        let cluster = Cluster::from_members(members);
        assert!(
            cluster
                .members
                .last()
                .is_none_or(|&v| (v as usize) < self.n_nodes),
            "cluster member out of range"
        );
        assert!(!cluster.is_empty(), "clusters must be nonempty");
        self.clusters.push(cluster);
    }

    pub fn remove_cluster(&mut self, idx: usize) -> Cluster {
        self.clusters.remove(idx)
    }

    pub(crate) fn cluster_mut(&mut self, idx: usize) -> &mut Cluster {
        &mut self.clusters[idx]
    }

    /// Replaces cluster `into` with the union of clusters `into` and `from`
    /// and removes `from`. Indices after `from` shift down by one.
    pub(crate) fn merge_clusters(&mut self, into: usize, from: usize) {
        assert_ne!(into, from);
        let absorbed = self.clusters.remove(from);
        let target = &mut self.clusters[if from < into { into - 1 } else { into }];
        let mut merged = Vec::with_capacity(target.members.len() + absorbed.members.len());
        let (a, b) = (&target.members, &absorbed.members);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    merged.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    merged.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    merged.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        merged.extend_from_slice(&a[i..]);
        merged.extend_from_slice(&b[j..]);
        target.members = merged;
    }

    /// Drops empty clusters, preserving the order of the rest.
    pub(crate) fn prune_empty(&mut self) {
        self.clusters.retain(|c| !c.is_empty());
    }

    /// How many clusters each node belongs to.
    pub fn membership_counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.n_nodes];
        for cluster in &self.clusters {
            for &v in cluster.members() {
                counts[v as usize] += 1;
            }
        }
        counts
    }

    /// For each node, the sorted list of indices of clusters containing it.
    pub fn memberships(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.n_nodes];
        for (idx, cluster) in self.clusters.iter().enumerate() {
            for &v in cluster.members() {
                out[v as usize].push(idx as u32);
            }
        }
        out
    }

    /// Nodes belonging to no cluster, ascending.
    pub fn orphans(&self) -> Vec<NodeId> {
        self.membership_counts()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 0)
            .map(|(v, _)| v as NodeId)
            .collect()
    }

    pub fn orphan_count(&self) -> usize {
        self.membership_counts().iter().filter(|&&c| c == 0).count()
    }

    /// Member sets as plain vectors, for comparisons in tests and tools.
    pub fn member_sets(&self) -> Vec<Vec<NodeId>> {
        self.clusters.iter().map(|c| c.members.clone()).collect()
    }
}
