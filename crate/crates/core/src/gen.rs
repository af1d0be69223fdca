//! Instance generators: hardness constructions, greedy worst cases and
//! seeded random families.
//!
//! Applicant and post numbering is part of each generator's contract, since
//! the greedy's behaviour depends on it.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Edge, Instance, Quota};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("graph is not cubic: vertex {vertex} has degree {degree}")]
    NotCubic { vertex: usize, degree: usize },
    #[error("edge {edge} has weight {weight}; weights must be at least 1")]
    BadWeight { edge: usize, weight: i64 },
    #[error("instance would have {applicants} applicants, limit is {limit}")]
    TooLarge { applicants: usize, limit: usize },
    #[error("invalid parameters: {0}")]
    Params(String),
}

/// A simple undirected graph with optional integer edge weights (default 1).
/// Vertices are `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize, i64)>,
}

impl InputGraph {
    /// Checks range, self-loops and duplicates.
    pub fn new(n: usize, edges: Vec<(usize, usize, i64)>) -> Result<Self, GenError> {
        let mut seen = HashSet::new();
        for (k, &(u, v, _)) in edges.iter().enumerate() {
            if u >= n || v >= n || u == v || !seen.insert((u.min(v), u.max(v))) {
                return Err(GenError::Params(format!("edge {} ({}, {}) is out of range, a loop or a duplicate", k + 1, u + 1, v + 1)));
            }
        }
        Ok(InputGraph { n, edges })
    }

    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self, GenError> {
        Self::new(n, edges.iter().map(|&(u, v)| (u, v, 1)).collect())
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Self::unweighted(n, &edges).expect("complete graph is simple")
    }

    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..a).flat_map(|u| (0..b).map(move |v| (u, a + v))).collect();
        Self::unweighted(a + b, &edges).expect("complete bipartite graph is simple")
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v, _) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Parses DIMACS (`p edge n m`, `e u v [w]`) or PACE (`p tw n m`,
    /// `u v [w]`) text with 1-based vertices; `c` lines are comments.
    pub fn parse(text: &str) -> Result<Self, GenError> {
        let mut n = None;
        let mut declared = 0;
        let mut edges = Vec::new();
        let err = |line: usize, msg: &str| GenError::Parse { line, msg: msg.to_string() };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let toks: Vec<&str> = raw.split_whitespace().collect();
            match toks.first() {
                None | Some(&"c") => continue,
                Some(&"p") => {
                    if toks.len() != 4 || n.is_some() {
                        return Err(err(line, "expected a single 'p <kind> <n> <m>' header"));
                    }
                    n = Some(toks[2].parse::<usize>().map_err(|_| err(line, "bad vertex count"))?);
                    declared = toks[3].parse::<usize>().map_err(|_| err(line, "bad edge count"))?;
                }
                Some(_) => {
                    let nv = n.ok_or_else(|| err(line, "edge before header"))?;
                    let body = if toks[0] == "e" { &toks[1..] } else { &toks[..] };
                    if body.len() != 2 && body.len() != 3 {
                        return Err(err(line, "expected 'u v [w]'"));
                    }
                    let id = |s: &str| -> Result<usize, GenError> {
                        let x: usize = s.parse().map_err(|_| err(line, "bad vertex id"))?;
                        if x == 0 || x > nv {
                            return Err(err(line, "vertex id out of range"));
                        }
                        Ok(x - 1)
                    };
                    let (u, v) = (id(body[0])?, id(body[1])?);
                    let w = match body.get(2) {
                        Some(s) => s.parse().map_err(|_| err(line, "bad weight"))?,
                        None => 1,
                    };
                    edges.push((u, v, w));
                }
            }
        }
        let n = n.ok_or_else(|| err(1, "missing header"))?;
        if edges.len() != declared {
            return Err(err(1, &format!("header declares {declared} edges, found {}", edges.len())));
        }
        Self::new(n, edges)
    }
}

/// One post per vertex with `l = u = 3`, one applicant per edge (in input
/// order) applying to both endpoints; unit weights.
pub fn gen_mis_cubic(g: &InputGraph) -> Result<Instance, GenError> {
    if let Some((v, &d)) = g.degrees().iter().enumerate().find(|(_, &d)| d != 3) {
        return Err(GenError::NotCubic { vertex: v + 1, degree: d });
    }
    let edges = g.edges.iter().enumerate().flat_map(|(a, &(u, v, _))| [Edge::new(a, u, 1), Edge::new(a, v, 1)]).collect();
    Ok(Instance::new(g.edges.len(), vec![Quota::new(3, 3); g.n], edges))
}

/// `n` posts with `l = u = n`. Applicant `a(i, j)` applies to post `i`; for
/// every edge `{i, j}` the applicants `a(i, j)` and `a(j, i)` are one applicant
/// applying to both. Applicants are numbered in row-major `(i, j)` order.
pub fn gen_inapprox(g: &InputGraph) -> Instance {
    let n = g.n;
    let adjacent: HashSet<(usize, usize)> = g.edges.iter().flat_map(|&(u, v, _)| [(u, v), (v, u)]).collect();
    let mut id = vec![vec![usize::MAX; n]; n];
    let mut edges = Vec::new();
    let mut next = 0;
    for i in 0..n {
        for j in 0..n {
            if j < i && adjacent.contains(&(i, j)) {
                edges.push(Edge::new(id[j][i], i, 1));
                id[i][j] = id[j][i];
            } else {
                id[i][j] = next;
                edges.push(Edge::new(next, i, 1));
                next += 1;
            }
        }
    }
    Instance::new(next, vec![Quota::new(n, n); n], edges)
}

/// Applicant limit for [`gen_outdegree`].
pub const OUTDEGREE_LIMIT: usize = 1 << 20;

/// Orientation gadget: post `v` (`l = 0, u = r`) per vertex, posts
/// `(e, v)` and `(e, v')` with `l = u = w(e) + 1` per edge, and `2 w(e) + 1`
/// applicants per edge. Posts: vertices first, then two per edge in input
/// order. Applicants per edge: the `w(e)` on the first endpoint's side, the
/// `w(e)` on the second's, then `z_e`.
pub fn gen_outdegree(g: &InputGraph, r: usize) -> Result<Instance, GenError> {
    let mut total = 0usize;
    for (k, &(_, _, w)) in g.edges.iter().enumerate() {
        if w <= 0 {
            return Err(GenError::BadWeight { edge: k + 1, weight: w });
        }
        total = total.saturating_add(2 * w as usize + 1);
    }
    if total > OUTDEGREE_LIMIT {
        return Err(GenError::TooLarge { applicants: total, limit: OUTDEGREE_LIMIT });
    }
    let mut quotas = vec![Quota::new(0, r); g.n];
    let mut edges = Vec::new();
    let mut next = 0;
    for &(u, v, w) in &g.edges {
        let w = w as usize;
        let pu = quotas.len();
        let pv = pu + 1;
        quotas.push(Quota::new(w + 1, w + 1));
        quotas.push(Quota::new(w + 1, w + 1));
        for (vertex, side) in [(u, pu), (v, pv)] {
            for _ in 0..w {
                edges.push(Edge::new(next, vertex, 1));
                edges.push(Edge::new(next, side, 1));
                next += 1;
            }
        }
        edges.push(Edge::new(next, pu, 1));
        edges.push(Edge::new(next, pv, 1));
        next += 1;
    }
    Ok(Instance::new(next, quotas, edges))
}

/// Greedy worst case for the `u_max + 1` bound: posts `p_0..p_k` with
/// `l = u = k`. Post `i >= 1` has applicants `a(i, 1..k)`, each also applying
/// to `p_0`, and `p_0` has `a(0, 1..k)` to itself. Applicants `a(1,1)..a(k,1)`
/// come first, then `a(0, *)`, then the rest row by row.
pub fn gen_tight_a(k: usize) -> Result<Instance, GenError> {
    if k == 0 {
        return Err(GenError::Params("k must be at least 1".into()));
    }
    let mut edges = Vec::new();
    let mut next = 0;
    let mut add = |posts: &[usize]| {
        for &p in posts {
            edges.push(Edge::new(next, p, 1));
        }
        next += 1;
    };
    for i in 1..=k {
        add(&[i, 0]);
    }
    for _ in 0..k {
        add(&[0]);
    }
    for i in 1..=k {
        for _ in 2..=k {
            add(&[i, 0]);
        }
    }
    Ok(Instance::new(k * (k + 1), vec![Quota::new(k, k); k + 1], edges))
}

/// Greedy worst case for the `|A|` bound: `k` posts with `l = 0, u = k`,
/// complete bipartite, weight `big` on the diagonal and 1 elsewhere.
pub fn gen_tight_b(k: usize, big: i64) -> Result<Instance, GenError> {
    if k < 2 || big < 2 {
        return Err(GenError::Params("need k >= 2 and W >= 2".into()));
    }
    let edges = (0..k)
        .flat_map(|a| (0..k).map(move |p| Edge::new(a, p, if a == p { big } else { 1 })))
        .collect();
    Ok(Instance::new(k, vec![Quota::new(0, k); k], edges))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegreeModel {
    /// Every applicant picks a uniform number of distinct posts in the range.
    Applicant { min: usize, max: usize },
    /// Every post picks a uniform number of distinct applicants in the range.
    Post { min: usize, max: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomParams {
    pub seed: u64,
    pub applicants: usize,
    pub posts: usize,
    pub degree: DegreeModel,
    /// Inclusive range for lower quotas; a draw above the post's upper quota is
    /// clipped to it.
    pub lower: (usize, usize),
    /// Inclusive range for upper quotas.
    pub upper: (usize, usize),
    /// Inclusive weight range.
    pub weight: (i64, i64),
}

impl RandomParams {
    pub fn new(seed: u64, applicants: usize, posts: usize) -> Self {
        RandomParams {
            seed,
            applicants,
            posts,
            degree: DegreeModel::Applicant { min: 1, max: 3 },
            lower: (0, 2),
            upper: (1, 3),
            weight: (0, 10),
        }
    }
}

/// Seeded random instance; the same parameters always give the same output.
pub fn gen_random(p: &RandomParams) -> Result<Instance, GenError> {
    let bad = |m: &str| Err(GenError::Params(m.to_string()));
    if p.lower.0 > p.lower.1 || p.upper.0 > p.upper.1 || p.weight.0 > p.weight.1 {
        return bad("empty range");
    }
    if p.lower.0 > p.upper.1 {
        return bad("lower quotas cannot fit below upper quotas");
    }
    if p.weight.0 < 0 || p.weight.1 > crate::model::MAX_WEIGHT {
        return bad("weights out of range");
    }
    let (lo, hi, side, other) = match p.degree {
        DegreeModel::Applicant { min, max } => (min, max, p.applicants, p.posts),
        DegreeModel::Post { min, max } => (min, max, p.posts, p.applicants),
    };
    if lo > hi || lo > other {
        return bad("degree range does not fit the other side");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let quotas: Vec<Quota> = (0..p.posts)
        .map(|_| {
            let upper = rng.gen_range(p.upper.0..=p.upper.1);
            let lower = rng.gen_range(p.lower.0.min(upper)..=p.lower.1.min(upper));
            Quota::new(lower, upper)
        })
        .collect();
    let mut edges = Vec::new();
    for x in 0..side {
        let d = rng.gen_range(lo..=hi.min(other));
        let mut picks = sample(&mut rng, other, d).into_vec();
        picks.sort_unstable();
        for y in picks {
            let w = rng.gen_range(p.weight.0..=p.weight.1);
            edges.push(match p.degree {
                DegreeModel::Applicant { .. } => Edge::new(x, y, w),
                DegreeModel::Post { .. } => Edge::new(y, x, w),
            });
        }
    }
    if edges.len() > crate::model::MAX_EDGES {
        return bad("too many edges");
    }
    Ok(Instance::new(p.applicants, quotas, edges))
}

/// Three posts with `l = 1, u = u_max` and `k` applicants for each pair of
/// posts, each applying to both. Treewidth 2; the table sizes grow with
/// `u_max` while the graph stays the same. Weights cycle through 1..=5.
pub fn gen_post_triangle(k: usize, u_max: usize) -> Instance {
    let pairs = [(0, 1), (1, 2), (0, 2)];
    let mut edges = Vec::new();
    let mut next = 0;
    for &(x, y) in &pairs {
        for _ in 0..k {
            let w = 1 + (next % 5) as i64;
            edges.push(Edge::new(next, x, w));
            edges.push(Edge::new(next, y, w + 1));
            next += 1;
        }
    }
    Instance::new(next, vec![Quota::new(1, u_max); 3], edges)
}

/// A strip of `m` posts where posts `i, i+1` and `i, i+2` share an applicant:
/// a subdivided 2-tree, so treewidth at most 2. Quotas and weights are drawn
/// from `seed` with upper quotas in `1..=u_max`.
pub fn gen_strip(m: usize, u_max: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quotas = (0..m)
        .map(|_| {
            let u = rng.gen_range(1..=u_max.max(1));
            Quota::new(rng.gen_range(0..=u), u)
        })
        .collect();
    let mut edges = Vec::new();
    let mut next = 0;
    for i in 0..m {
        for j in [i + 1, i + 2] {
            if j < m {
                edges.push(Edge::new(next, i, rng.gen_range(0..=10)));
                edges.push(Edge::new(next, j, rng.gen_range(0..=10)));
                next += 1;
            }
        }
    }
    Instance::new(next, quotas, edges)
}
