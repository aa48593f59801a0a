//! Community detection for undirected, unweighted graphs.
//!
//! The centerpiece is CBC (clustering by betweenness centrality): graph
//! tails are stripped, exact betweenness is computed on the remaining core,
//! small cliques are seeded around low-centrality kernels and then merged
//! under a block-matrix heuristic until every emitted cluster is a community
//! (more internal than external edges, up to a strictness factor).
//!
//! Around the algorithm sit the pieces needed to evaluate it: quality and
//! overlap metrics, a distance between two clusterings, a planted-partition
//! generator with ground truth, and a Girvan-Newman baseline for
//! cross-checks on small graphs.

pub mod cbc;
pub mod centrality;
pub mod clustering;
pub mod fwgen;
pub mod gn;
pub mod graph;
pub mod io;
pub mod metrics;

pub use cbc::{CbcParams, CbcResult};
pub use clustering::{Cluster, Clustering};
pub use graph::{Graph, GraphBuilder, NodeId};
