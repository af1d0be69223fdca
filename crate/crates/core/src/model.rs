//! Instances, assignments and solver results.
//!
//! Applicants and posts are addressed by dense zero-based indices in the API.
//! Human-facing output (files, error messages) uses one-based ids, so
//! applicant index `0` is printed as `a1`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::scalar::{sum, Weight};

/// Largest admissible edge weight (inclusive).
pub const MAX_WEIGHT: i64 = 1 << 31;
/// Largest admissible number of edges.
pub const MAX_EDGES: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge<W> {
    pub applicant: usize,
    pub post: usize,
    pub weight: W,
}

impl<W> Edge<W> {
    pub fn new(applicant: usize, post: usize, weight: W) -> Self {
        Edge { applicant, post, weight }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Quota {
    pub lower: usize,
    pub upper: usize,
}

impl Quota {
    pub fn new(lower: usize, upper: usize) -> Self {
        Quota { lower, upper }
    }

    /// Whether `count` assignees is a legal load: zero, or within `[lower, upper]`.
    pub fn admits(&self, count: usize) -> bool {
        count == 0 || (self.lower <= count && count <= self.upper)
    }
}

/// A bipartite instance: applicants on one side, posts with lower and upper
/// quotas on the other, and non-negative weights on the edges.
///
/// Construction does not check anything; call [`Instance::validate`] before
/// handing untrusted data to a solver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance<W = i64> {
    num_applicants: usize,
    quotas: Vec<Quota>,
    edges: Vec<Edge<W>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("quota order at p{}: lower {lower} exceeds upper {upper}", post + 1)]
    QuotaOrder { post: usize, lower: usize, upper: usize },
    #[error("weight out of range on edge (a{}, p{})", applicant + 1, post + 1)]
    WeightRange { applicant: usize, post: usize },
    #[error("parallel edge (a{}, p{})", applicant + 1, post + 1)]
    ParallelEdge { applicant: usize, post: usize },
    #[error("edge #{edge} references missing applicant a{}", applicant + 1)]
    DanglingApplicant { edge: usize, applicant: usize },
    #[error("edge #{edge} references missing post p{}", post + 1)]
    DanglingPost { edge: usize, post: usize },
    #[error("too many edges: {0} (limit {MAX_EDGES})")]
    TooManyEdges(usize),
}

/// Why an assignment is not feasible for an instance.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Infeasible {
    #[error("pair (a{}, p{}) is not an edge of the instance", applicant + 1, post + 1)]
    NotAnEdge { applicant: usize, post: usize },
    #[error("applicant a{} doubly assigned ({count} posts)", applicant + 1)]
    ApplicantOverassigned { applicant: usize, count: usize },
    #[error("post p{} count {count} outside {{0}} and [{lower}, {upper}]", post + 1)]
    PostCount { post: usize, count: usize, lower: usize, upper: usize },
}

impl<W: Weight> Instance<W> {
    pub fn new(num_applicants: usize, quotas: Vec<Quota>, edges: Vec<Edge<W>>) -> Self {
        Instance { num_applicants, quotas, edges }
    }

    pub fn empty() -> Self {
        Self::new(0, Vec::new(), Vec::new())
    }

    pub fn num_applicants(&self) -> usize {
        self.num_applicants
    }

    pub fn num_posts(&self) -> usize {
        self.quotas.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge<W>] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> &Edge<W> {
        &self.edges[index]
    }

    pub fn quotas(&self) -> &[Quota] {
        &self.quotas
    }

    pub fn quota(&self, post: usize) -> Quota {
        self.quotas[post]
    }

    /// Maximum upper quota over all posts (0 when there are none).
    pub fn u_max(&self) -> usize {
        self.quotas.iter().map(|q| q.upper).max().unwrap_or(0)
    }

    /// Edge indices incident to each post.
    pub fn post_edges(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_posts()];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.post].push(k);
        }
        adj
    }

    /// Edge indices incident to each applicant.
    pub fn applicant_edges(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_applicants];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.applicant].push(k);
        }
        adj
    }

    pub fn post_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_posts()];
        for e in &self.edges {
            deg[e.post] += 1;
        }
        deg
    }

    pub fn max_post_degree(&self) -> usize {
        self.post_degrees().into_iter().max().unwrap_or(0)
    }

    /// Map from `(applicant, post)` to edge index.
    pub fn edge_index(&self) -> HashMap<(usize, usize), usize> {
        self.edges
            .iter()
            .enumerate()
            .map(|(k, e)| ((e.applicant, e.post), k))
            .collect()
    }

    /// True when every edge has weight one.
    pub fn is_unit_weight(&self) -> bool {
        self.edges.iter().all(|e| e.weight == W::one())
    }

    pub fn total_weight(&self) -> W {
        sum(self.edges.iter().map(|e| e.weight))
    }

    /// Lists every broken instance invariant. An empty list means the
    /// instance is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.edges.len() > MAX_EDGES {
            out.push(Violation::TooManyEdges(self.edges.len()));
        }
        for (post, q) in self.quotas.iter().enumerate() {
            if q.lower > q.upper {
                out.push(Violation::QuotaOrder { post, lower: q.lower, upper: q.upper });
            }
        }
        let max_weight = W::from_i64(MAX_WEIGHT);
        let mut seen = HashSet::new();
        for (k, e) in self.edges.iter().enumerate() {
            if e.applicant >= self.num_applicants {
                out.push(Violation::DanglingApplicant { edge: k, applicant: e.applicant });
            }
            if e.post >= self.num_posts() {
                out.push(Violation::DanglingPost { edge: k, post: e.post });
            }
            let in_range = e.weight >= W::zero() && max_weight.is_none_or(|m| e.weight <= m);
            if !in_range {
                out.push(Violation::WeightRange { applicant: e.applicant, post: e.post });
            }
            if !seen.insert((e.applicant, e.post)) {
                out.push(Violation::ParallelEdge { applicant: e.applicant, post: e.post });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Weight of an assignment, or the first violated constraint.
    pub fn evaluate(&self, asg: &Assignment) -> Result<W, Infeasible> {
        let index = self.edge_index();
        let mut applicant_load = vec![0usize; self.num_applicants];
        let mut post_load = vec![0usize; self.num_posts()];
        let mut total = W::zero();
        for &(applicant, post) in asg.pairs() {
            let k = *index
                .get(&(applicant, post))
                .ok_or(Infeasible::NotAnEdge { applicant, post })?;
            applicant_load[applicant] += 1;
            post_load[post] += 1;
            total = total + self.edges[k].weight;
        }
        if let Some((applicant, &count)) = applicant_load.iter().enumerate().find(|(_, &c)| c > 1) {
            return Err(Infeasible::ApplicantOverassigned { applicant, count });
        }
        for (post, &count) in post_load.iter().enumerate() {
            let q = self.quotas[post];
            if !q.admits(count) {
                return Err(Infeasible::PostCount { post, count, lower: q.lower, upper: q.upper });
            }
        }
        Ok(total)
    }

    /// Applies the value-preserving reductions: cap `u(p)` at the post degree,
    /// delete posts whose lower quota exceeds their degree, raise a zero lower
    /// quota to one and delete posts that can take nobody.
    pub fn simplify(&self) -> Instance<W> {
        self.simplify_with_map().0
    }

    /// Like [`Instance::simplify`], also returning for every post of the
    /// simplified instance the index of the post it came from.
    pub fn simplify_with_map(&self) -> (Instance<W>, Vec<usize>) {
        let deg = self.post_degrees();
        let mut new_index = vec![usize::MAX; self.num_posts()];
        let mut origin = Vec::new();
        let mut quotas = Vec::new();
        for (post, q) in self.quotas.iter().enumerate() {
            if q.lower > deg[post] {
                continue;
            }
            let upper = q.upper.min(deg[post]);
            if upper == 0 {
                continue;
            }
            new_index[post] = origin.len();
            origin.push(post);
            quotas.push(Quota::new(q.lower.max(1), upper));
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| new_index[e.post] != usize::MAX)
            .map(|e| Edge::new(e.applicant, new_index[e.post], e.weight))
            .collect();
        (Instance::new(self.num_applicants, quotas, edges), origin)
    }

    /// Converts the weights to another scalar type.
    pub fn map_weights<V: Weight>(&self, f: impl Fn(W) -> V) -> Instance<V> {
        Instance::new(
            self.num_applicants,
            self.quotas.clone(),
            self.edges.iter().map(|e| Edge::new(e.applicant, e.post, f(e.weight))).collect(),
        )
    }
}

/// A set of `(applicant, post)` pairs, kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Assignment {
    pairs: Vec<(usize, usize)>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pairs are sorted; duplicates are preserved so that `evaluate` can
    /// report them as a double assignment.
    pub fn from_pairs(mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        Assignment { pairs }
    }

    pub fn from_edges<W: Weight>(inst: &Instance<W>, edges: impl IntoIterator<Item = usize>) -> Self {
        Self::from_pairs(
            edges
                .into_iter()
                .map(|k| {
                    let e = inst.edge(k);
                    (e.applicant, e.post)
                })
                .collect(),
        )
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Posts with at least one assignee.
    pub fn open_posts(&self) -> Vec<usize> {
        let mut posts: Vec<usize> = self.pairs.iter().map(|&(_, p)| p).collect();
        posts.sort_unstable();
        posts.dedup();
        posts
    }

    /// Renames posts through `origin` (simplified index to original index).
    pub fn remap_posts(&self, origin: &[usize]) -> Assignment {
        Self::from_pairs(self.pairs.iter().map(|&(a, p)| (a, origin[p])).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Greedy,
    TreeDp,
    Degree2,
    PairPosts,
    AllOpen,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Greedy,
        Algorithm::TreeDp,
        Algorithm::Degree2,
        Algorithm::PairPosts,
        Algorithm::AllOpen,
        Algorithm::Oracle,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::TreeDp => "twdp",
            Algorithm::Degree2 => "degree2",
            Algorithm::PairPosts => "u2",
            Algorithm::AllOpen => "all-open",
            Algorithm::Oracle => "oracle",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Algorithm> {
        Self::ALL.into_iter().find(|a| a.tag() == tag)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Guarantee {
    Exact,
    /// Objective times `factor` is at least the optimum.
    Approximate { factor: usize },
}

impl Guarantee {
    pub fn is_exact(self) -> bool {
        matches!(self, Guarantee::Exact)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult<W = i64> {
    pub assignment: Assignment,
    pub objective: W,
    pub algorithm: Algorithm,
    pub elapsed: Duration,
    pub guarantee: Guarantee,
    /// Number of dynamic-programming table cells, for the tree-decomposition solver.
    pub cells: Option<u64>,
    /// Width of the decomposition used, for the tree-decomposition solver.
    pub width: Option<usize>,
}

impl<W: Weight> SolveResult<W> {
    /// Builds a result from the chosen edge indices; the objective is their weight sum.
    pub fn from_edges(
        inst: &Instance<W>,
        edges: impl IntoIterator<Item = usize>,
        algorithm: Algorithm,
        guarantee: Guarantee,
        elapsed: Duration,
    ) -> Self {
        let edges: Vec<usize> = edges.into_iter().collect();
        let objective = sum(edges.iter().map(|&k| inst.edge(k).weight));
        SolveResult {
            assignment: Assignment::from_edges(inst, edges),
            objective,
            algorithm,
            elapsed,
            guarantee,
            cells: None,
            width: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge(weight: i64, lower: usize, upper: usize) -> Instance {
        Instance::new(1, vec![Quota::new(lower, upper)], vec![Edge::new(0, 0, weight)])
    }

    #[test]
    fn quota_order_is_reported() {
        let inst = single_edge(1, 3, 2);
        assert_eq!(
            inst.validate(),
            vec![Violation::QuotaOrder { post: 0, lower: 3, upper: 2 }]
        );
        assert_eq!(inst.validate()[0].to_string(), "quota order at p1: lower 3 exceeds upper 2");
    }

    #[test]
    fn empty_instance_is_valid() {
        assert!(Instance::<i64>::empty().is_valid());
    }

    #[test]
    fn parallel_edge_is_reported() {
        let inst = Instance::new(
            1,
            vec![Quota::new(1, 1)],
            vec![Edge::new(0, 0, 1), Edge::new(0, 0, 2)],
        );
        assert_eq!(inst.validate(), vec![Violation::ParallelEdge { applicant: 0, post: 0 }]);
    }

    #[test]
    fn dangling_ids_and_weights() {
        let inst = Instance::new(
            1,
            vec![Quota::new(0, 1)],
            vec![Edge::new(2, 0, 1), Edge::new(0, 5, -1), Edge::new(0, 0, MAX_WEIGHT + 1)],
        );
        let v = inst.validate();
        assert!(v.contains(&Violation::DanglingApplicant { edge: 0, applicant: 2 }));
        assert!(v.contains(&Violation::DanglingPost { edge: 1, post: 5 }));
        assert!(v.contains(&Violation::WeightRange { applicant: 0, post: 5 }));
        assert!(v.contains(&Violation::WeightRange { applicant: 0, post: 0 }));
        assert!(single_edge(MAX_WEIGHT, 1, 1).is_valid());
    }

    #[test]
    fn simplify_deletes_unreachable_lower_quota() {
        let inst = single_edge(1, 2, 2);
        let s = inst.simplify();
        assert_eq!(s.num_posts(), 0);
        assert_eq!(s.num_edges(), 0);
        assert_eq!(s.num_applicants(), 1);
    }

    #[test]
    fn simplify_caps_upper_and_raises_lower() {
        let inst = Instance::new(
            2,
            vec![Quota::new(0, 5)],
            vec![Edge::new(0, 0, 1), Edge::new(1, 0, 1)],
        );
        assert_eq!(inst.simplify().quota(0), Quota::new(1, 2));
    }

    #[test]
    fn simplify_drops_zero_capacity_posts_and_renumbers() {
        let inst = Instance::new(
            2,
            vec![Quota::new(0, 0), Quota::new(0, 3), Quota::new(1, 1)],
            vec![Edge::new(0, 0, 4), Edge::new(0, 1, 1), Edge::new(1, 2, 2)],
        );
        let (s, origin) = inst.simplify_with_map();
        assert_eq!(origin, vec![1, 2]);
        assert_eq!(s.quotas(), &[Quota::new(1, 1), Quota::new(1, 1)]);
        assert_eq!(s.edges(), &[Edge::new(0, 0, 1), Edge::new(1, 1, 2)]);
        assert_eq!(s.simplify(), s);
    }

    #[test]
    fn evaluate_cases() {
        assert_eq!(single_edge(7, 1, 1).evaluate(&Assignment::new()), Ok(0));
        assert_eq!(single_edge(7, 1, 1).evaluate(&Assignment::from_pairs(vec![(0, 0)])), Ok(7));
        let inst = Instance::new(
            3,
            vec![Quota::new(3, 3)],
            (0..3).map(|a| Edge::new(a, 0, 1)).collect(),
        );
        assert_eq!(
            inst.evaluate(&Assignment::from_pairs(vec![(0, 0), (1, 0)])),
            Err(Infeasible::PostCount { post: 0, count: 2, lower: 3, upper: 3 })
        );
        let two_posts = Instance::new(
            1,
            vec![Quota::new(1, 1), Quota::new(1, 1)],
            vec![Edge::new(0, 0, 1), Edge::new(0, 1, 1)],
        );
        assert_eq!(
            two_posts.evaluate(&Assignment::from_pairs(vec![(0, 0), (0, 1)])),
            Err(Infeasible::ApplicantOverassigned { applicant: 0, count: 2 })
        );
        assert_eq!(
            two_posts.evaluate(&Assignment::from_pairs(vec![(0, 2)])),
            Err(Infeasible::NotAnEdge { applicant: 0, post: 2 })
        );
    }

    #[test]
    fn algorithm_tags_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(Algorithm::from_tag(a.tag()), Some(a));
        }
    }
}
