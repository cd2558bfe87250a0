//! Sparse bipartite graphs for the two codes and the constellations they map onto.
//!
//! One [`TannerGraph`] type serves both codes. In the parity-check view
//! (LDPC) variable nodes are code bits and check nodes are parity
//! constraints. In the generator view (LDGM) variable nodes are information
//! bits and every check node is a code bit equal to the XOR of its neighbors.

mod alist;
mod build;
mod constellation;
mod encoder;
mod profile;

pub use alist::{load_graph, read_alist, save_graph, write_alist};
pub use build::{build_graph, build_graph_with_checks};
pub use constellation::{pam2_map, pam4_gray_map, ConstellationMap};
pub use encoder::LdpcEncoder;
pub use profile::DegreeProfile;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    ParityCheck,
    Generator,
}

/// Immutable sparse bipartite graph in compressed form.
///
/// Edges are numbered in check-major order; every message array used by the
/// decoders is indexed by this edge id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    kind: GraphKind,
    n_var: usize,
    chk_ptr: Vec<usize>,
    edge_var: Vec<u32>,
    var_ptr: Vec<usize>,
    var_edges: Vec<u32>,
}

impl TannerGraph {
    /// Builds a graph from one neighbor list per check node.
    ///
    /// Neighbor lists are sorted; duplicate or out-of-range entries are rejected.
    pub fn from_checks(kind: GraphKind, n_var: usize, checks: &[Vec<usize>]) -> Result<Self> {
        let n_edges: usize = checks.iter().map(Vec::len).sum();
        let mut chk_ptr = Vec::with_capacity(checks.len() + 1);
        let mut edge_var = Vec::with_capacity(n_edges);
        chk_ptr.push(0);
        for (c, list) in checks.iter().enumerate() {
            let mut sorted = list.clone();
            sorted.sort_unstable();
            for w in sorted.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::Construction(format!(
                        "check {c} connects to variable {} twice",
                        w[0]
                    )));
                }
            }
            if let Some(&v) = sorted.last() {
                if v >= n_var {
                    return Err(Error::Construction(format!(
                        "check {c} references variable {v} >= {n_var}"
                    )));
                }
            }
            edge_var.extend(sorted.iter().map(|&v| v as u32));
            chk_ptr.push(edge_var.len());
        }

        let mut var_deg = vec![0usize; n_var];
        for &v in &edge_var {
            var_deg[v as usize] += 1;
        }
        let mut var_ptr = Vec::with_capacity(n_var + 1);
        var_ptr.push(0);
        for d in &var_deg {
            var_ptr.push(var_ptr.last().unwrap() + d);
        }
        let mut fill = var_ptr[..n_var].to_vec();
        let mut var_edges = vec![0u32; n_edges];
        for (e, &v) in edge_var.iter().enumerate() {
            let slot = &mut fill[v as usize];
            var_edges[*slot] = e as u32;
            *slot += 1;
        }

        Ok(TannerGraph {
            kind,
            n_var,
            chk_ptr,
            edge_var,
            var_ptr,
            var_edges,
        })
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn n_var(&self) -> usize {
        self.n_var
    }

    pub fn n_chk(&self) -> usize {
        self.chk_ptr.len() - 1
    }

    pub fn n_edges(&self) -> usize {
        self.edge_var.len()
    }

    /// Edge id range of check `c`.
    #[inline]
    pub fn check_edges(&self, c: usize) -> std::ops::Range<usize> {
        self.chk_ptr[c]..self.chk_ptr[c + 1]
    }

    /// Variables attached to check `c`, ascending.
    #[inline]
    pub fn check_vars(&self, c: usize) -> &[u32] {
        &self.edge_var[self.check_edges(c)]
    }

    /// Variable endpoint of every edge.
    #[inline]
    pub fn edge_vars(&self) -> &[u32] {
        &self.edge_var
    }

    /// Edge ids incident to variable `v`, in increasing check order.
    #[inline]
    pub fn var_edges(&self, v: usize) -> &[u32] {
        &self.var_edges[self.var_ptr[v]..self.var_ptr[v + 1]]
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.var_ptr[v + 1] - self.var_ptr[v]
    }

    pub fn check_degree(&self, c: usize) -> usize {
        self.chk_ptr[c + 1] - self.chk_ptr[c]
    }

    /// Check id owning edge `e`.
    pub fn edge_check(&self, e: usize) -> usize {
        self.chk_ptr.partition_point(|&p| p <= e) - 1
    }

    /// Checks attached to variable `v`, ascending.
    pub fn var_checks(&self, v: usize) -> Vec<usize> {
        self.var_edges(v).iter().map(|&e| self.edge_check(e as usize)).collect()
    }

    /// Per-check neighbor lists; the inverse of [`TannerGraph::from_checks`].
    pub fn check_lists(&self) -> Vec<Vec<usize>> {
        (0..self.n_chk())
            .map(|c| self.check_vars(c).iter().map(|&v| v as usize).collect())
            .collect()
    }

    /// Code rate: `1 - n_chk/n_var` for LDPC, `n_var/n_chk` for LDGM (bits per code bit).
    pub fn rate(&self) -> f64 {
        match self.kind {
            GraphKind::ParityCheck => 1.0 - self.n_chk() as f64 / self.n_var as f64,
            GraphKind::Generator => self.n_var as f64 / self.n_chk() as f64,
        }
    }

    /// Whether `bits` (one per variable) satisfies every check.
    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        self.unsatisfied(bits) == 0
    }

    /// Number of checks whose incident bits XOR to one.
    pub fn unsatisfied(&self, bits: &[u8]) -> usize {
        (0..self.n_chk())
            .filter(|&c| {
                self.check_vars(c)
                    .iter()
                    .fold(0u8, |acc, &v| acc ^ (bits[v as usize] & 1))
                    != 0
            })
            .count()
    }

    /// Code bits produced by the generator view: one XOR per check node.
    pub fn generate(&self, info: &[u8]) -> Vec<u8> {
        (0..self.n_chk())
            .map(|c| {
                self.check_vars(c)
                    .iter()
                    .fold(0u8, |acc, &v| acc ^ (info[v as usize] & 1))
            })
            .collect()
    }

    /// True when two variables share two or more checks.
    pub fn has_four_cycle(&self) -> bool {
        let mut seen = vec![usize::MAX; self.n_var];
        for v in 0..self.n_var {
            // For each neighbor-of-neighbor u > v, the first check that reached it is remembered.
            for &e in self.var_edges(v) {
                let c = self.edge_check(e as usize);
                for &u in self.check_vars(c) {
                    let u = u as usize;
                    if u == v {
                        continue;
                    }
                    if seen[u] == v {
                        return true;
                    }
                    seen[u] = v;
                }
            }
        }
        false
    }

    /// Histogram of variable degrees as `(degree, count)` pairs, ascending.
    pub fn var_degree_counts(&self) -> Vec<(usize, usize)> {
        histogram((0..self.n_var).map(|v| self.var_degree(v)))
    }

    pub fn check_degree_counts(&self) -> Vec<(usize, usize)> {
        histogram((0..self.n_chk()).map(|c| self.check_degree(c)))
    }
}

fn histogram(it: impl Iterator<Item = usize>) -> Vec<(usize, usize)> {
    let mut map = std::collections::BTreeMap::new();
    for d in it {
        *map.entry(d).or_insert(0usize) += 1;
    }
    map.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hamming74() -> TannerGraph {
        TannerGraph::from_checks(
            GraphKind::ParityCheck,
            7,
            &[vec![0, 3, 4, 6], vec![1, 3, 5, 6], vec![2, 4, 5, 6]],
        )
        .unwrap()
    }

    #[test]
    fn adjacency_is_consistent() {
        let g = hamming74();
        assert_eq!(g.n_edges(), 12);
        assert_eq!(g.var_checks(6), vec![0, 1, 2]);
        assert_eq!(g.var_checks(0), vec![0]);
        for e in 0..g.n_edges() {
            let c = g.edge_check(e);
            assert!(g.check_edges(c).contains(&e));
        }
        assert!((g.rate() - 4.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn syndrome() {
        let g = hamming74();
        assert!(g.syndrome_ok(&[0; 7]));
        assert!(g.syndrome_ok(&[1, 1, 1, 0, 0, 0, 1]));
        assert!(!g.syndrome_ok(&[1, 0, 0, 0, 0, 0, 0]));
        assert_eq!(g.unsatisfied(&[0, 0, 0, 0, 0, 0, 1]), 3);
    }

    #[test]
    fn duplicates_and_range_rejected() {
        assert!(TannerGraph::from_checks(GraphKind::ParityCheck, 3, &[vec![0, 0]]).is_err());
        assert!(TannerGraph::from_checks(GraphKind::ParityCheck, 3, &[vec![0, 3]]).is_err());
    }

    #[test]
    fn four_cycles_detected() {
        let g = TannerGraph::from_checks(GraphKind::ParityCheck, 3, &[vec![0, 1], vec![0, 1, 2]]).unwrap();
        assert!(g.has_four_cycle());
        assert!(hamming74().has_four_cycle());
        let tree = TannerGraph::from_checks(GraphKind::ParityCheck, 4, &[vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        assert!(!tree.has_four_cycle());
    }

    #[test]
    fn generator_view_xors() {
        let g = TannerGraph::from_checks(GraphKind::Generator, 3, &[vec![0], vec![0, 1], vec![1, 2], vec![0, 1, 2]]).unwrap();
        assert_eq!(g.generate(&[1, 1, 0]), vec![1, 0, 1, 0]);
        assert!((g.rate() - 0.75).abs() < 1e-12);
    }
}
