//! Maximum-weight assignment with a prescribed set of open posts.
//!
//! The assignment polytope with every listed post forced open is a
//! circulation with lower bounds:
//!
//! ```text
//! S -> a   [0, 1]       cost 0
//! a -> p   [0, 1]       cost -w(a, p)
//! p -> T   [max(l,1), u] cost 0
//! T -> S   [0, |A|]     cost 0
//! ```
//!
//! Lower bounds and negative costs are both removed by pre-pushing flow
//! (negative arcs are saturated and replaced by their non-negative reverse),
//! which leaves a transshipment problem with node excesses and non-negative
//! costs. That is solved by successive shortest paths with Dijkstra and
//! potentials from a super source to a super sink; the circulation is
//! feasible iff every excess is shipped.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::model::Instance;
use crate::scalar::Weight;

struct Arc<W> {
    to: usize,
    cap: usize,
    cost: W,
}

struct Network<W> {
    arcs: Vec<Arc<W>>,
    adj: Vec<Vec<usize>>,
    excess: Vec<i64>,
}

impl<W: Weight> Network<W> {
    fn new(n: usize) -> Self {
        Network { arcs: Vec::new(), adj: vec![Vec::new(); n], excess: vec![0; n] }
    }

    fn add_residual(&mut self, from: usize, to: usize, cap: usize, cost: W) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap, cost });
        self.adj[from].push(id);
        self.arcs.push(Arc { to: from, cap: 0, cost: -cost });
        self.adj[to].push(id + 1);
        id
    }

    /// Adds `from -> to` with flow bounds `[lower, upper]` and the given cost.
    /// Returns the residual arc carrying the adjustable part and whether that
    /// arc runs backwards (i.e. the arc was pre-saturated).
    fn add_bounded(&mut self, from: usize, to: usize, lower: usize, upper: usize, cost: W) -> (usize, bool) {
        debug_assert!(lower <= upper);
        if cost < W::zero() {
            self.push_fixed(from, to, upper);
            (self.add_residual(to, from, upper - lower, -cost), true)
        } else {
            self.push_fixed(from, to, lower);
            (self.add_residual(from, to, upper - lower, cost), false)
        }
    }

    fn push_fixed(&mut self, from: usize, to: usize, amount: usize) {
        self.excess[from] -= amount as i64;
        self.excess[to] += amount as i64;
    }

    /// Ships all excesses to the deficits at minimum cost. Returns false when
    /// some excess cannot be shipped.
    fn ship_excesses(&mut self) -> bool {
        let n = self.adj.len();
        let source = n;
        let sink = n + 1;
        self.adj.push(Vec::new());
        self.adj.push(Vec::new());
        let mut required = 0usize;
        for v in 0..n {
            let ex = self.excess[v];
            if ex > 0 {
                self.add_residual(source, v, ex as usize, W::zero());
                required += ex as usize;
            } else if ex < 0 {
                self.add_residual(v, sink, (-ex) as usize, W::zero());
            }
        }
        let total = n + 2;
        let mut potential = vec![W::zero(); total];
        let mut shipped = 0usize;
        while shipped < required {
            let mut dist: Vec<Option<W>> = vec![None; total];
            let mut via = vec![usize::MAX; total];
            let mut heap = BinaryHeap::new();
            dist[source] = Some(W::zero());
            heap.push(Reverse((W::zero(), source)));
            while let Some(Reverse((d, v))) = heap.pop() {
                if dist[v] != Some(d) {
                    continue;
                }
                for &id in &self.adj[v] {
                    let arc = &self.arcs[id];
                    if arc.cap == 0 {
                        continue;
                    }
                    let reduced = arc.cost + potential[v] - potential[arc.to];
                    debug_assert!(reduced >= W::zero(), "negative reduced cost");
                    let nd = d + reduced;
                    if dist[arc.to].is_none_or(|old| nd < old) {
                        dist[arc.to] = Some(nd);
                        via[arc.to] = id;
                        heap.push(Reverse((nd, arc.to)));
                    }
                }
            }
            if dist[sink].is_none() {
                return false;
            }
            for v in 0..total {
                if let Some(d) = dist[v] {
                    potential[v] = potential[v] + d;
                }
            }
            let mut bottleneck = required - shipped;
            let mut v = sink;
            while v != source {
                let id = via[v];
                bottleneck = bottleneck.min(self.arcs[id].cap);
                v = self.arcs[id ^ 1].to;
            }
            let mut v = sink;
            while v != source {
                let id = via[v];
                self.arcs[id].cap -= bottleneck;
                self.arcs[id ^ 1].cap += bottleneck;
                v = self.arcs[id ^ 1].to;
            }
            shipped += bottleneck;
        }
        true
    }

    fn flow_on(&self, arc: usize) -> usize {
        self.arcs[arc ^ 1].cap
    }
}

/// Maximum-weight assignment in which exactly the posts with `open[p]` set
/// are open, each receiving between `max(l(p), 1)` and `u(p)` applicants.
/// Returns the chosen edge indices, or `None` when no such assignment exists.
pub fn max_weight_with_open_posts<W: Weight>(inst: &Instance<W>, open: &[bool]) -> Option<Vec<usize>> {
    assert_eq!(open.len(), inst.num_posts());
    let na = inst.num_applicants();
    let np = inst.num_posts();
    let s = 0;
    let t = 1;
    let applicant = |a: usize| 2 + a;
    let post = |p: usize| 2 + na + p;
    let mut net = Network::new(2 + na + np);

    for (p, &is_open) in open.iter().enumerate() {
        if !is_open {
            continue;
        }
        let q = inst.quota(p);
        let lower = q.lower.max(1);
        if lower > q.upper {
            return None;
        }
        net.add_bounded(post(p), t, lower, q.upper, W::zero());
    }
    for a in 0..na {
        net.add_bounded(s, applicant(a), 0, 1, W::zero());
    }
    net.add_bounded(t, s, 0, na, W::zero());
    let mut edge_arcs = Vec::new();
    for (k, e) in inst.edges().iter().enumerate() {
        if open[e.post] {
            let (arc, reversed) = net.add_bounded(applicant(e.applicant), post(e.post), 0, 1, -e.weight);
            edge_arcs.push((k, arc, reversed));
        }
    }
    if !net.ship_excesses() {
        return None;
    }
    Some(
        edge_arcs
            .into_iter()
            .filter(|&(_, arc, reversed)| {
                let f = net.flow_on(arc);
                if reversed {
                    f == 0
                } else {
                    f == 1
                }
            })
            .map(|(k, _, _)| k)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Assignment, Edge, Quota};

    fn weight_of(inst: &Instance, edges: &[usize]) -> i64 {
        inst.evaluate(&Assignment::from_edges(inst, edges.iter().copied())).unwrap()
    }

    #[test]
    fn nothing_open_gives_empty() {
        let inst = Instance::new(1, vec![Quota::new(1, 1)], vec![Edge::new(0, 0, 5)]);
        assert_eq!(max_weight_with_open_posts(&inst, &[false]), Some(vec![]));
    }

    #[test]
    fn lower_quota_forces_zero_weight_edges() {
        // post needs 3 applicants; the third only has weight 0
        let inst = Instance::new(
            3,
            vec![Quota::new(3, 3)],
            vec![Edge::new(0, 0, 4), Edge::new(1, 0, 2), Edge::new(2, 0, 0)],
        );
        let got = max_weight_with_open_posts(&inst, &[true]).unwrap();
        assert_eq!(got.len(), 3);
        assert_eq!(weight_of(&inst, &got), 6);
    }

    #[test]
    fn lower_quota_beats_local_weight() {
        // a0 is worth 10 at p0, but p1 must be open with two applicants, one of them a0
        let inst = Instance::new(
            3,
            vec![Quota::new(1, 1), Quota::new(2, 2)],
            vec![Edge::new(0, 0, 10), Edge::new(0, 1, 1), Edge::new(1, 1, 1), Edge::new(2, 0, 3)],
        );
        let got = max_weight_with_open_posts(&inst, &[true, true]).unwrap();
        assert_eq!(weight_of(&inst, &got), 5);
        let got = max_weight_with_open_posts(&inst, &[true, false]).unwrap();
        assert_eq!(weight_of(&inst, &got), 10);
    }

    #[test]
    fn infeasible_when_lower_quota_unreachable() {
        let inst = Instance::new(1, vec![Quota::new(2, 2)], vec![Edge::new(0, 0, 5)]);
        assert_eq!(max_weight_with_open_posts(&inst, &[true]), None);
        let shared = Instance::new(
            1,
            vec![Quota::new(0, 1), Quota::new(0, 1)],
            vec![Edge::new(0, 0, 5), Edge::new(0, 1, 3)],
        );
        assert_eq!(max_weight_with_open_posts(&shared, &[true, true]), None);
        assert!(max_weight_with_open_posts(&shared, &[true, false]).is_some());
    }

    #[test]
    fn upper_quota_zero_cannot_open() {
        let inst = Instance::new(1, vec![Quota::new(0, 0)], vec![Edge::new(0, 0, 5)]);
        assert_eq!(max_weight_with_open_posts(&inst, &[true]), None);
    }
}
