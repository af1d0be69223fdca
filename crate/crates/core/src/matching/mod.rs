//! General-graph matching and maximum-weight f-factors.
//!
//! [`max_weight_matching`] and [`max_weight_perfect_matching`] wrap the
//! blossom algorithm. [`max_weight_f_factor`] reduces an exact-degree
//! subgraph problem to a perfect matching on a vertex-expansion gadget.

mod blossom;
mod ffactor;

pub use ffactor::{max_weight_f_factor, FFactorError, FFactorInstance, Gadget};

use std::collections::HashSet;

use thiserror::Error;

use crate::scalar::{sum, Weight};
use blossom::Blossom;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge #{edge} is a self-loop at vertex {vertex}")]
    SelfLoop { edge: usize, vertex: usize },
    #[error("edge #{edge} has an endpoint outside 0..{n}")]
    OutOfRange { edge: usize, n: usize },
    #[error("edge #{edge} duplicates {{{u}, {v}}}")]
    Parallel { edge: usize, u: usize, v: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("no perfect matching exists")]
pub struct NoPerfectMatching;

/// A simple undirected graph with weighted edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralGraph<W = i64> {
    n: usize,
    edges: Vec<(usize, usize, W)>,
}

impl<W: Weight> GeneralGraph<W> {
    pub fn new(n: usize, edges: Vec<(usize, usize, W)>) -> Result<Self, GraphError> {
        let mut seen = HashSet::new();
        for (k, &(u, v, _)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(GraphError::OutOfRange { edge: k, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop { edge: k, vertex: u });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(GraphError::Parallel { edge: k, u, v });
            }
        }
        Ok(GeneralGraph { n, edges })
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, W)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v, _) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Total weight of a set of edge indices.
    pub fn weight_of(&self, edges: &[usize]) -> W {
        sum(edges.iter().map(|&k| self.edges[k].2))
    }

    /// True if no two of the given edges share a vertex.
    pub fn is_matching(&self, edges: &[usize]) -> bool {
        let mut used = vec![false; self.n];
        for &k in edges {
            let (u, v, _) = self.edges[k];
            if used[u] || used[v] {
                return false;
            }
            used[u] = true;
            used[v] = true;
        }
        true
    }
}

fn matched_edges(mate: &[Option<usize>]) -> Vec<usize> {
    let mut out: Vec<usize> = mate.iter().flatten().copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// A maximum-weight matching, as sorted edge indices.
///
/// Edges of negative weight never help and are never chosen.
pub fn max_weight_matching<W: Weight>(g: &GeneralGraph<W>) -> Vec<usize> {
    let mate = Blossom::new(g.n, &g.edges, false).solve();
    matched_edges(&mate)
}

/// A perfect matching of maximum weight, or [`NoPerfectMatching`].
pub fn max_weight_perfect_matching<W: Weight>(g: &GeneralGraph<W>) -> Result<Vec<usize>, NoPerfectMatching> {
    if g.n % 2 == 1 {
        return Err(NoPerfectMatching);
    }
    let mate = Blossom::new(g.n, &g.edges, true).solve();
    if mate.iter().any(Option::is_none) {
        return Err(NoPerfectMatching);
    }
    Ok(matched_edges(&mate))
}
