//! Immutable directed weighted graph with out- and in-adjacency.
//!
//! Node ids are dense integers in `[0, n)`. Out-weights are normalized so that
//! every row sums to one; nodes without out-edges receive an implicit
//! self-loop of weight 1 at construction time, so every node has a
//! well-defined walk transition.

mod io;
mod keywords;
mod source;
mod synthetic;

use std::collections::HashSet;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use io::{load_edge_list, load_edge_list_path};
pub use keywords::{load_keywords, load_keywords_path, KeywordMap};
pub use source::SourceDistribution;
pub use synthetic::{generate_synthetic, SyntheticModel};

pub type NodeId = u32;

/// Largest node id accepted by the loaders.
pub const MAX_NODE_ID: u64 = (u32::MAX - 1) as u64;

/// Identity of a graph for index files: node count, edge count and a digest
/// of the adjacency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphFingerprint {
    pub n: u64,
    pub m: u64,
    pub checksum: u64,
}

#[derive(Debug, Clone)]
pub struct Graph {
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>,
    out_weights: Vec<f64>,
    /// Running sum of `out_weights` within each row, for weighted sampling.
    out_cumulative: Vec<f64>,
    in_offsets: Vec<usize>,
    in_sources: Vec<NodeId>,
    in_weights: Vec<f64>,
    /// Every row is uniform over its out-neighbors.
    uniform: bool,
    dangling_patched: usize,
}

impl Graph {
    /// Unweighted graph: each out-edge of `u` gets weight `1/d⁺(u)`.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let weighted: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Self::build(n, weighted, true)
    }

    /// Weighted graph; weights are normalized per source row.
    pub fn from_weighted_edges(n: usize, edges: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        Self::build(n, edges.to_vec(), false)
    }

    pub(crate) fn build(
        n: usize,
        mut edges: Vec<(NodeId, NodeId, f64)>,
        unweighted: bool,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("graph must have at least one node"));
        }
        if n as u64 > MAX_NODE_ID + 1 {
            return Err(Error::NodeIdOverflow {
                line: 0,
                id: n as u64 - 1,
            });
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for (pos, &(u, v, w)) in edges.iter().enumerate() {
            let line = pos + 1;
            for id in [u, v] {
                if id as usize >= n {
                    return Err(Error::UnknownNode {
                        line,
                        id: id as u64,
                        n,
                    });
                }
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::NonPositiveWeight { line, weight: w });
            }
            if !seen.insert((u, v)) {
                return Err(Error::DuplicateEdge {
                    line,
                    from: u,
                    to: v,
                });
            }
        }
        drop(seen);

        let mut out_degree = vec![0usize; n];
        for &(u, _, _) in &edges {
            out_degree[u as usize] += 1;
        }
        let mut dangling_patched = 0;
        for (u, deg) in out_degree.iter_mut().enumerate() {
            if *deg == 0 {
                edges.push((u as NodeId, u as NodeId, 1.0));
                *deg = 1;
                dangling_patched += 1;
            }
        }
        edges.sort_by_key(|&(u, v, _)| (u, v));

        let m = edges.len();
        let mut out_offsets = Vec::with_capacity(n + 1);
        out_offsets.push(0);
        let mut acc = 0;
        for deg in &out_degree {
            acc += deg;
            out_offsets.push(acc);
        }
        let out_targets: Vec<NodeId> = edges.iter().map(|e| e.1).collect();
        let mut out_weights: Vec<f64> = edges.iter().map(|e| e.2).collect();
        let mut out_cumulative = vec![0.0; m];
        for u in 0..n {
            let row = out_offsets[u]..out_offsets[u + 1];
            let deg = row.len();
            if unweighted {
                for w in &mut out_weights[row.clone()] {
                    *w = 1.0 / deg as f64;
                }
            } else {
                let total: f64 = out_weights[row.clone()].iter().sum();
                for w in &mut out_weights[row.clone()] {
                    *w /= total;
                }
            }
            let mut running = 0.0;
            for i in row {
                running += out_weights[i];
                out_cumulative[i] = running;
            }
        }

        let mut in_degree = vec![0usize; n];
        for &v in &out_targets {
            in_degree[v as usize] += 1;
        }
        let mut in_offsets = Vec::with_capacity(n + 1);
        in_offsets.push(0);
        let mut acc = 0;
        for deg in &in_degree {
            acc += deg;
            in_offsets.push(acc);
        }
        let mut cursor = in_offsets[..n].to_vec();
        let mut in_sources = vec![0; m];
        let mut in_weights = vec![0.0; m];
        for u in 0..n {
            for i in out_offsets[u]..out_offsets[u + 1] {
                let v = out_targets[i] as usize;
                in_sources[cursor[v]] = u as NodeId;
                in_weights[cursor[v]] = out_weights[i];
                cursor[v] += 1;
            }
        }

        Ok(Self {
            out_offsets,
            out_targets,
            out_weights,
            out_cumulative,
            in_offsets,
            in_sources,
            in_weights,
            uniform: unweighted,
            dangling_patched,
        })
    }

    pub fn node_count(&self) -> usize {
        self.out_offsets.len() - 1
    }

    /// Edge count, including self-loops added for dangling nodes.
    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    /// Average degree `m / n`.
    pub fn average_degree(&self) -> f64 {
        self.edge_count() as f64 / self.node_count() as f64
    }

    /// Number of nodes that had no out-edges and received a self-loop.
    pub fn dangling_patched(&self) -> usize {
        self.dangling_patched
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        let u = u as usize;
        self.out_offsets[u + 1] - self.out_offsets[u]
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.in_offsets[v + 1] - self.in_offsets[v]
    }

    /// `(v, w_{u,v})` for every out-edge of `u`, sorted by `v`.
    pub fn out_edges(&self, u: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        let row = self.out_offsets[u as usize]..self.out_offsets[u as usize + 1];
        self.out_targets[row.clone()]
            .iter()
            .copied()
            .zip(self.out_weights[row].iter().copied())
    }

    /// `(u, w_{u,v})` for every in-edge `u -> v`, sorted by `u`.
    pub fn in_edges(&self, v: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        let row = self.in_offsets[v as usize]..self.in_offsets[v as usize + 1];
        self.in_sources[row.clone()]
            .iter()
            .copied()
            .zip(self.in_weights[row].iter().copied())
    }

    pub(crate) fn in_slices(&self, v: NodeId) -> (&[NodeId], &[f64]) {
        let row = self.in_offsets[v as usize]..self.in_offsets[v as usize + 1];
        (&self.in_sources[row.clone()], &self.in_weights[row])
    }

    /// Weight of edge `u -> v`, or zero when absent.
    pub fn weight(&self, u: NodeId, v: NodeId) -> f64 {
        let row = self.out_offsets[u as usize]..self.out_offsets[u as usize + 1];
        match self.out_targets[row.clone()].binary_search(&v) {
            Ok(i) => self.out_weights[row.start + i],
            Err(_) => 0.0,
        }
    }

    /// Draws a successor of `u` according to the out-weights, given a uniform
    /// variate in `[0, 1)`.
    #[inline]
    pub(crate) fn step(&self, u: NodeId, unit: f64) -> NodeId {
        let start = self.out_offsets[u as usize];
        let end = self.out_offsets[u as usize + 1];
        let deg = end - start;
        if deg == 1 {
            return self.out_targets[start];
        }
        let idx = if self.uniform {
            ((unit * deg as f64) as usize).min(deg - 1)
        } else {
            let cum = &self.out_cumulative[start..end];
            let target = unit * cum[deg - 1];
            cum.partition_point(|&c| c <= target).min(deg - 1)
        };
        self.out_targets[start + idx]
    }

    pub fn fingerprint(&self) -> GraphFingerprint {
        let mut hasher = Sha256::new();
        for &o in &self.out_offsets {
            hasher.update((o as u64).to_le_bytes());
        }
        for &t in &self.out_targets {
            hasher.update(t.to_le_bytes());
        }
        for &w in &self.out_weights {
            hasher.update(w.to_bits().to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut head = [0u8; 8];
        head.copy_from_slice(&digest[..8]);
        GraphFingerprint {
            n: self.node_count() as u64,
            m: self.edge_count() as u64,
            checksum: u64::from_le_bytes(head),
        }
    }

    pub(crate) fn check_node(&self, v: NodeId) -> Result<()> {
        if (v as usize) < self.node_count() {
            Ok(())
        } else {
            Err(Error::param(format!(
                "node {v} out of range for graph with {} nodes",
                self.node_count()
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_cycle_unit_weights() {
        let g = Graph::from_edges(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.weight(0, 1), 1.0);
        assert_eq!(g.weight(1, 0), 1.0);
    }

    #[test]
    fn out_degree_two_is_uniform() {
        let g = Graph::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
        assert_eq!(g.weight(0, 1), 0.5);
        assert_eq!(g.weight(0, 2), 0.5);
    }

    #[test]
    fn weighted_rows_are_normalized() {
        let g = Graph::from_weighted_edges(3, &[(0, 1, 0.3), (0, 2, 0.9)]).unwrap();
        assert!((g.weight(0, 1) - 0.25).abs() < 1e-15);
        assert!((g.weight(0, 2) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn dangling_nodes_get_self_loops() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        assert_eq!(g.dangling_patched(), 2);
        assert_eq!(g.weight(1, 1), 1.0);
        assert_eq!(g.weight(2, 2), 1.0);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.in_degree(1), 2);
    }

    #[test]
    fn duplicate_edges_rejected() {
        let err = Graph::from_edges(2, &[(0, 1), (0, 1)]).unwrap_err();
        assert!(matches!(err, Error::DuplicateEdge { line: 2, .. }));
    }

    #[test]
    fn weighted_step_follows_cumulative_weights() {
        let g = Graph::from_weighted_edges(3, &[(0, 1, 1.0), (0, 2, 3.0)]).unwrap();
        assert_eq!(g.step(0, 0.0), 1);
        assert_eq!(g.step(0, 0.2499), 1);
        assert_eq!(g.step(0, 0.25), 2);
        assert_eq!(g.step(0, 0.9999), 2);
    }

    fn arb_edges() -> impl Strategy<Value = (usize, Vec<(NodeId, NodeId, f64)>)> {
        (1usize..20).prop_flat_map(|n| {
            let edge = (0..n as NodeId, 0..n as NodeId, 0.01f64..10.0);
            (Just(n), prop::collection::vec(edge, 0..60))
        })
    }

    proptest! {
        #[test]
        fn transpose_and_row_sums((n, raw) in arb_edges()) {
            let mut seen = HashSet::new();
            let edges: Vec<_> = raw.into_iter().filter(|e| seen.insert((e.0, e.1))).collect();
            let g = Graph::from_weighted_edges(n, &edges).unwrap();
            for u in 0..n as NodeId {
                let sum: f64 = g.out_edges(u).map(|(_, w)| w).sum();
                prop_assert!((sum - 1.0).abs() < 1e-9);
                for (v, w) in g.out_edges(u) {
                    prop_assert!(w > 0.0);
                    let back: Vec<_> = g.in_edges(v).filter(|&(x, _)| x == u).collect();
                    prop_assert_eq!(back.len(), 1);
                    prop_assert_eq!(back[0].1, w);
                }
            }
            let in_total: usize = (0..n as NodeId).map(|v| g.in_degree(v)).sum();
            prop_assert_eq!(in_total, g.edge_count());
        }
    }
}
