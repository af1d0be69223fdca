//! Dynamic program over a nice tree decomposition.
//!
//! For a node `b` and an assignment vector `α` over its bag, `W_b(α)` is the
//! best weight of an edge set drawn from the edges that have at least one
//! endpoint forgotten below `b`, such that every bag vertex `v` has exactly
//! `α(v)` of them and every forgotten vertex ends with a legal degree. An edge
//! is committed at the forget node of whichever endpoint leaves first.
//!
//! Tables are dense mixed-radix arrays. The digit of vertex `v` ranges over
//! `0..=min(u(v), deg(v))`, with applicants capped at one.

use std::time::Instant;

use thiserror::Error;

use super::decompose::Graph;
use super::nice::{NiceDecomposition, NiceError, NodeKind};
use crate::model::{Algorithm, Guarantee, Instance, SolveResult};
use crate::scalar::Weight;

/// Default limit on the total number of table cells.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DpError {
    #[error("table would need {estimate} cells, budget is {budget}")]
    Budget { estimate: u64, budget: u64 },
    #[error("decomposition does not fit the instance: {0}")]
    Invalid(#[from] NiceError),
}

#[derive(Clone, Copy, Debug)]
struct VertexInfo {
    cap: usize,
    lower: usize,
    upper: usize,
}

impl VertexInfo {
    fn allows(&self, d: usize) -> bool {
        d == 0 || (self.lower <= d && d <= self.upper)
    }
}

fn vertex_info<W: Weight>(inst: &Instance<W>) -> Vec<VertexInfo> {
    let na = inst.num_applicants();
    let mut deg = vec![0usize; na + inst.num_posts()];
    for e in inst.edges() {
        deg[e.applicant] += 1;
        deg[na + e.post] += 1;
    }
    (0..deg.len())
        .map(|v| {
            if v < na {
                VertexInfo { cap: deg[v].min(1), lower: 1, upper: 1 }
            } else {
                let q = inst.quota(v - na);
                VertexInfo { cap: deg[v].min(q.upper), lower: q.lower, upper: q.upper }
            }
        })
        .collect()
}

/// Neighbours of every vertex of the instance graph, with the edge index.
fn incidence<W: Weight>(inst: &Instance<W>) -> Vec<Vec<(usize, usize)>> {
    let na = inst.num_applicants();
    let mut inc = vec![Vec::new(); na + inst.num_posts()];
    for (k, e) in inst.edges().iter().enumerate() {
        inc[e.applicant].push((na + e.post, k));
        inc[na + e.post].push((e.applicant, k));
    }
    inc
}

/// Exact number of table cells the program allocates on `nd`.
pub fn estimate_cost<W: Weight>(nd: &NiceDecomposition, inst: &Instance<W>) -> u64 {
    let info = vertex_info(inst);
    nd.nodes
        .iter()
        .map(|n| n.bag.iter().fold(1u64, |acc, &v| acc.saturating_mul(info[v].cap as u64 + 1)))
        .fold(0u64, u64::saturating_add)
}

/// Mixed-radix layout of one table; the first bag vertex is the least
/// significant digit.
#[derive(Clone, Debug)]
pub struct Layout {
    pub bag: Vec<usize>,
    pub radix: Vec<usize>,
    stride: Vec<usize>,
    size: usize,
}

impl Layout {
    fn new(bag: &[usize], info: &[VertexInfo]) -> Self {
        let radix: Vec<usize> = bag.iter().map(|&v| info[v].cap + 1).collect();
        let mut stride = Vec::with_capacity(bag.len());
        let mut size = 1;
        for &r in &radix {
            stride.push(size);
            size *= r;
        }
        Layout { bag: bag.to_vec(), radix, stride, size }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        self.radix
            .iter()
            .map(|&r| {
                let d = idx % r;
                idx /= r;
                d
            })
            .collect()
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.stride).map(|(d, s)| d * s).sum()
    }

    fn stride_of(&self, v: usize) -> usize {
        self.stride[self.bag.binary_search(&v).expect("vertex in bag")]
    }
}

/// Advances `digits` as an odometer bounded by `limit` (inclusive). Returns
/// false after the last vector.
fn step(digits: &mut [usize], limit: &[usize]) -> bool {
    for (d, &l) in digits.iter_mut().zip(limit) {
        if *d < l {
            *d += 1;
            return true;
        }
        *d = 0;
    }
    false
}

/// Post-order intervals used to assert the structural facts the
/// introduce and join recurrences rely on.
struct Subtrees {
    lo: Vec<usize>,
    hi: Vec<usize>,
    occ: Vec<Vec<usize>>,
    /// `(post number of a forget node, forgotten vertex)`, sorted.
    forgets: Vec<(usize, usize)>,
}

impl Subtrees {
    fn new(nd: &NiceDecomposition, n: usize) -> Self {
        let k = nd.nodes.len();
        let mut lo = vec![0; k];
        let mut hi = vec![0; k];
        let mut post = vec![0; k];
        let mut counter = 0;
        let mut stack = vec![(nd.root, false)];
        while let Some((t, expanded)) = stack.pop() {
            if expanded {
                post[t] = counter;
                hi[t] = counter;
                counter += 1;
                lo[t] = nd.nodes[t].children.iter().map(|&c| lo[c]).min().unwrap_or(post[t]);
            } else {
                stack.push((t, true));
                for &c in nd.nodes[t].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        let mut occ = vec![Vec::new(); n];
        let mut forgets = Vec::new();
        for (t, node) in nd.nodes.iter().enumerate() {
            for &v in &node.bag {
                occ[v].push(post[t]);
            }
            if let NodeKind::Forget(v) = node.kind {
                forgets.push((post[t], v));
            }
        }
        for o in &mut occ {
            o.sort_unstable();
        }
        forgets.sort_unstable();
        Subtrees { lo, hi, occ, forgets }
    }

    fn occurs_below(&self, v: usize, t: usize) -> bool {
        let o = &self.occ[v];
        let i = o.partition_point(|&x| x < self.lo[t]);
        i < o.len() && o[i] <= self.hi[t]
    }

    fn forgotten_below(&self, t: usize) -> &[(usize, usize)] {
        let a = self.forgets.partition_point(|&(p, _)| p < self.lo[t]);
        let b = self.forgets.partition_point(|&(p, _)| p <= self.hi[t]);
        &self.forgets[a..b]
    }
}

/// All tables of one run, with the reconstruction records.
pub struct DpTables<W> {
    layouts: Vec<Layout>,
    values: Vec<Vec<Option<W>>>,
    choices: Vec<Vec<u64>>,
    /// Edges committed at each forget node: `(position in the node's bag, edge)`.
    forget_edges: Vec<Vec<(usize, usize)>>,
    info: Vec<VertexInfo>,
    cells: u64,
}

impl<W: Weight> DpTables<W> {
    /// Fills every table bottom-up. With `keep_values` false, child values are
    /// dropped as soon as the parent is done.
    pub fn compute(inst: &Instance<W>, nd: &NiceDecomposition, keep_values: bool) -> Self {
        let info = vertex_info(inst);
        let inc = incidence(inst);
        let subtrees = Subtrees::new(nd, info.len());
        let k = nd.nodes.len();
        let mut t = DpTables {
            layouts: nd.nodes.iter().map(|n| Layout::new(&n.bag, &info)).collect(),
            values: vec![Vec::new(); k],
            choices: vec![Vec::new(); k],
            forget_edges: vec![Vec::new(); k],
            info,
            cells: 0,
        };
        for b in 0..k {
            let node = &nd.nodes[b];
            match node.kind {
                NodeKind::Leaf => t.leaf(b),
                NodeKind::Introduce(v) => {
                    for &(y, _) in &inc[v] {
                        assert!(
                            node.bag.binary_search(&y).is_ok() || !subtrees.occurs_below(y, node.children[0]),
                            "introduced vertex {v} has an edge below its introduce node"
                        );
                    }
                    t.introduce(b, node.children[0], v)
                }
                NodeKind::Forget(v) => t.forget(inst, b, node.children[0], v, &inc[v]),
                NodeKind::Join => {
                    let (c1, c2) = (node.children[0], node.children[1]);
                    let (small, large) = if subtrees.forgotten_below(c1).len() <= subtrees.forgotten_below(c2).len() {
                        (c1, c2)
                    } else {
                        (c2, c1)
                    };
                    for &(_, x) in subtrees.forgotten_below(small) {
                        assert!(!subtrees.occurs_below(x, large), "join children share vertex {x} outside the bag");
                    }
                    t.join(b, c1, c2)
                }
            }
            t.cells += t.layouts[b].size as u64;
            if !keep_values {
                for &c in &node.children {
                    t.values[c] = Vec::new();
                }
            }
        }
        t
    }

    /// Total number of cells allocated over the run.
    pub fn cells(&self) -> u64 {
        self.cells
    }

    pub fn layout(&self, node: usize) -> &Layout {
        &self.layouts[node]
    }

    /// `W_b(α)` for the cell `idx` of node `b`; `None` stands for minus infinity.
    /// Only available for nodes whose values were kept.
    pub fn value(&self, b: usize, idx: usize) -> Option<W> {
        self.values[b][idx]
    }

    fn leaf(&mut self, b: usize) {
        let mut vals = vec![None; self.layouts[b].size];
        vals[0] = Some(W::zero());
        self.values[b] = vals;
    }

    fn introduce(&mut self, b: usize, c: usize, v: usize) {
        let (lay, child) = (&self.layouts[b], &self.layouts[c]);
        let map: Vec<usize> = lay.bag.iter().map(|&x| if x == v { 0 } else { child.stride_of(x) }).collect();
        let pv = lay.bag.binary_search(&v).unwrap();
        let mut vals = vec![None; lay.size];
        let limit: Vec<usize> = lay.radix.iter().map(|r| r - 1).collect();
        let mut digits = vec![0; lay.bag.len()];
        let mut idx = 0;
        loop {
            if digits[pv] == 0 {
                let ci: usize = digits.iter().zip(&map).map(|(d, s)| d * s).sum();
                vals[idx] = self.values[c][ci];
            }
            idx += 1;
            if !step(&mut digits, &limit) {
                break;
            }
        }
        self.values[b] = vals;
    }

    fn forget(&mut self, inst: &Instance<W>, b: usize, c: usize, v: usize, inc: &[(usize, usize)]) {
        let (lay, child) = (&self.layouts[b], &self.layouts[c]);
        let cs: Vec<usize> = lay.bag.iter().map(|&x| child.stride_of(x)).collect();
        let sv = child.stride_of(v);
        let fe: Vec<(usize, usize)> = inc
            .iter()
            .filter_map(|&(y, k)| lay.bag.binary_search(&y).ok().map(|pos| (pos, k)))
            .collect();
        assert!(fe.len() < 32, "bag too large for subset enumeration");
        let subsets: Vec<(u32, usize, W, usize)> = (0u32..1 << fe.len())
            .map(|mask| {
                let mut offset = 0;
                let mut w = W::zero();
                for (j, &(pos, k)) in fe.iter().enumerate() {
                    if mask >> j & 1 == 1 {
                        offset += cs[pos];
                        w = w + inst.edge(k).weight;
                    }
                }
                (mask, offset, w, mask.count_ones() as usize)
            })
            .collect();
        let vi = self.info[v];
        let degrees: Vec<usize> = (0..=vi.cap.max(vi.upper)).filter(|&i| vi.allows(i)).collect();
        let mut vals = vec![None; lay.size];
        let mut choice = vec![0u64; lay.size];
        let limit: Vec<usize> = lay.radix.iter().map(|r| r - 1).collect();
        let mut digits = vec![0; lay.bag.len()];
        let mut idx = 0;
        let child_vals = &self.values[c];
        loop {
            let base: usize = digits.iter().zip(&cs).map(|(d, s)| d * s).sum();
            let mut best: Option<W> = None;
            let mut best_choice = 0u64;
            for &(mask, offset, w, size) in &subsets {
                if fe.iter().enumerate().any(|(j, &(pos, _))| mask >> j & 1 == 1 && digits[pos] == 0) {
                    continue;
                }
                for &i in &degrees {
                    if i < size || i - size > vi.cap {
                        continue;
                    }
                    if let Some(cv) = child_vals[base - offset + (i - size) * sv] {
                        let total = cv + w;
                        if best.is_none_or(|bv| total > bv) {
                            best = Some(total);
                            best_choice = mask as u64 | (i as u64) << 32;
                        }
                    }
                }
            }
            vals[idx] = best;
            choice[idx] = best_choice;
            idx += 1;
            if !step(&mut digits, &limit) {
                break;
            }
        }
        self.values[b] = vals;
        self.choices[b] = choice;
        self.forget_edges[b] = fe;
    }

    fn join(&mut self, b: usize, c1: usize, c2: usize) {
        let lay = &self.layouts[b];
        let (v1, v2) = (&self.values[c1], &self.values[c2]);
        let mut vals = vec![None; lay.size];
        let mut choice = vec![0u64; lay.size];
        let limit: Vec<usize> = lay.radix.iter().map(|r| r - 1).collect();
        let mut digits = vec![0; lay.bag.len()];
        let mut idx = 0;
        loop {
            let mut sub = vec![0; digits.len()];
            let mut best: Option<W> = None;
            let mut best_choice = 0;
            loop {
                let i1 = lay.index(&sub);
                if let (Some(a), Some(bv)) = (v1[i1], v2[idx - i1]) {
                    let total = a + bv;
                    if best.is_none_or(|x| total > x) {
                        best = Some(total);
                        best_choice = i1 as u64;
                    }
                }
                if !step(&mut sub, &digits) {
                    break;
                }
            }
            vals[idx] = best;
            choice[idx] = best_choice;
            idx += 1;
            if !step(&mut digits, &limit) {
                break;
            }
        }
        self.values[b] = vals;
        self.choices[b] = choice;
    }

    /// Replays the choice records below `(b, idx)`; returns sorted edge indices.
    pub fn reconstruct(&self, nd: &NiceDecomposition, b: usize, idx: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![(b, idx)];
        while let Some((t, i)) = stack.pop() {
            let node = &nd.nodes[t];
            let lay = &self.layouts[t];
            match node.kind {
                NodeKind::Leaf => {}
                NodeKind::Introduce(v) => {
                    let c = node.children[0];
                    let child = &self.layouts[c];
                    let digits = lay.decode(i);
                    let ci = lay
                        .bag
                        .iter()
                        .zip(&digits)
                        .filter(|(x, _)| **x != v)
                        .map(|(&x, d)| d * child.stride_of(x))
                        .sum();
                    stack.push((c, ci));
                }
                NodeKind::Forget(v) => {
                    let c = node.children[0];
                    let child = &self.layouts[c];
                    let rec = self.choices[t][i];
                    let (mask, deg) = (rec & 0xffff_ffff, (rec >> 32) as usize);
                    let mut digits = lay.decode(i);
                    let mut size = 0;
                    for (j, &(pos, k)) in self.forget_edges[t].iter().enumerate() {
                        if mask >> j & 1 == 1 {
                            digits[pos] -= 1;
                            size += 1;
                            out.push(k);
                        }
                    }
                    let ci: usize = lay.bag.iter().zip(&digits).map(|(&x, d)| d * child.stride_of(x)).sum::<usize>()
                        + (deg - size) * child.stride_of(v);
                    stack.push((c, ci));
                }
                NodeKind::Join => {
                    let i1 = self.choices[t][i] as usize;
                    stack.push((node.children[0], i1));
                    stack.push((node.children[1], i - i1));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// The root program: best `W_r(α) + w(S)` over assignment vectors `α` of
    /// the root bag and edge sets `S` inside it, such that every root vertex
    /// ends with a legal degree. Returns the value and the full edge set.
    pub fn solve_root(&self, inst: &Instance<W>, nd: &NiceDecomposition) -> (W, Vec<usize>) {
        let r = nd.root;
        let lay = &self.layouts[r];
        let na = inst.num_applicants();
        let inner: Vec<(usize, usize, usize)> = inst
            .edges()
            .iter()
            .enumerate()
            .filter_map(|(k, e)| {
                let pa = lay.bag.binary_search(&e.applicant).ok()?;
                let pp = lay.bag.binary_search(&(na + e.post)).ok()?;
                Some((pa, pp, k))
            })
            .collect();
        assert!(inner.len() < 32, "root bag too large for subset enumeration");
        let mut best: Option<(W, usize, u32)> = None;
        let limit: Vec<usize> = lay.radix.iter().map(|r| r - 1).collect();
        let mut digits = vec![0; lay.bag.len()];
        let mut idx = 0;
        loop {
            if let Some(val) = self.values[r][idx] {
                for mask in 0u32..1 << inner.len() {
                    let mut deg = digits.clone();
                    let mut w = val;
                    for (j, &(pa, pp, k)) in inner.iter().enumerate() {
                        if mask >> j & 1 == 1 {
                            deg[pa] += 1;
                            deg[pp] += 1;
                            w = w + inst.edge(k).weight;
                        }
                    }
                    let legal = lay.bag.iter().zip(&deg).all(|(&v, &d)| self.info[v].allows(d));
                    if legal && best.is_none_or(|(bw, _, _)| w > bw) {
                        best = Some((w, idx, mask));
                    }
                }
            }
            idx += 1;
            if !step(&mut digits, &limit) {
                break;
            }
        }
        let (w, cell, mask) = best.expect("the empty assignment is always feasible");
        let mut edges = self.reconstruct(nd, r, cell);
        edges.extend(inner.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, &(_, _, k))| k));
        edges.sort_unstable();
        (w, edges)
    }
}

/// Optimal assignment of `inst` by dynamic programming over `nd`, refusing
/// to start when the table would exceed `budget` cells.
pub fn dp_solve<W: Weight>(inst: &Instance<W>, nd: &NiceDecomposition, budget: u64) -> Result<SolveResult<W>, DpError> {
    let clock = Instant::now();
    nd.check(&Graph::from_instance(inst), false)?;
    let estimate = estimate_cost(nd, inst);
    if estimate > budget {
        return Err(DpError::Budget { estimate, budget });
    }
    let tables = DpTables::compute(inst, nd, false);
    let (w, edges) = tables.solve_root(inst, nd);
    let mut res = SolveResult::from_edges(inst, edges, Algorithm::TreeDp, Guarantee::Exact, clock.elapsed());
    debug_assert_eq!(res.objective, w);
    res.cells = Some(tables.cells());
    res.width = Some(nd.width());
    Ok(res)
}
