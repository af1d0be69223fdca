//! Greedy approximation: repeatedly open the admissible post that can absorb
//! the most weight from the applicants still free.
//!
//! Keys live in a lazy max-heap. Removing applicants can only lower a post's
//! key, so a popped entry whose key is still current is a true maximum; stale
//! entries are recomputed and pushed back.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::model::{Algorithm, Guarantee, Instance, SolveResult};
use crate::scalar::{sum, Weight};

/// Best weight post `p` can collect from the applicants not yet assigned,
/// taking between `max(l(p), 1)` and `u(p)` of them. `None` when too few
/// neighbours remain.
pub fn assignable_weight<W: Weight>(inst: &Instance<W>, p: usize, assigned: &[bool]) -> Option<W> {
    let q = inst.quota(p);
    let mut ws: Vec<W> = inst
        .edges()
        .iter()
        .filter(|e| e.post == p && !assigned[e.applicant])
        .map(|e| e.weight)
        .collect();
    if ws.len() < q.lower.max(1) || q.upper == 0 {
        return None;
    }
    ws.sort_unstable_by(|a, b| b.cmp(a));
    Some(sum(ws.into_iter().take(q.upper)))
}

struct PostState {
    /// Edge indices sorted by weight descending, then applicant ascending.
    adj: Vec<usize>,
    /// Entries before `start` are known to be assigned.
    start: usize,
    avail: usize,
    version: u32,
    open: bool,
}

/// Runs the greedy on `inst` (simplified internally) and reports the result
/// in the original post numbering.
pub fn solve_greedy<W: Weight>(inst: &Instance<W>) -> SolveResult<W> {
    let clock = Instant::now();
    let (simple, origin) = inst.simplify_with_map();
    let chosen = greedy_edges(&simple);
    let factor = approximation_factor(&simple);
    let mut res = SolveResult::from_edges(
        &simple,
        chosen,
        Algorithm::Greedy,
        Guarantee::Approximate { factor },
        clock.elapsed(),
    );
    res.assignment = res.assignment.remap_posts(&origin);
    res
}

/// `min(|P|, |A|, u_max + 1)`, tightened to `ceil(sqrt |A|) + 1` for unit weights.
pub fn approximation_factor<W: Weight>(inst: &Instance<W>) -> usize {
    let mut factor = inst.num_posts().min(inst.num_applicants()).min(inst.u_max() + 1).max(1);
    if inst.is_unit_weight() {
        let root = (inst.num_applicants() as f64).sqrt().ceil() as usize;
        factor = factor.min(root + 1);
    }
    factor
}

/// The greedy on an already simplified instance; returns edge indices.
pub fn greedy_edges<W: Weight>(inst: &Instance<W>) -> Vec<usize> {
    let edges = inst.edges();
    let mut posts: Vec<PostState> = inst
        .post_edges()
        .into_iter()
        .map(|mut adj| {
            adj.sort_unstable_by(|&x, &y| {
                edges[y].weight.cmp(&edges[x].weight).then(edges[x].applicant.cmp(&edges[y].applicant))
            });
            PostState { avail: adj.len(), adj, start: 0, version: 0, open: false }
        })
        .collect();
    let applicant_edges = inst.applicant_edges();
    let mut assigned = vec![false; inst.num_applicants()];

    let key = |st: &mut PostState, p: usize, assigned: &[bool]| -> Option<(W, Vec<usize>)> {
        let q = inst.quota(p);
        if st.open || st.avail < q.lower.max(1) || q.upper == 0 {
            return None;
        }
        while st.start < st.adj.len() && assigned[edges[st.adj[st.start]].applicant] {
            st.start += 1;
        }
        let take: Vec<usize> = st.adj[st.start..]
            .iter()
            .copied()
            .filter(|&k| !assigned[edges[k].applicant])
            .take(q.upper)
            .collect();
        Some((sum(take.iter().map(|&k| edges[k].weight)), take))
    };

    let mut heap = BinaryHeap::new();
    for p in 0..posts.len() {
        if let Some((w, _)) = key(&mut posts[p], p, &assigned) {
            heap.push((w, Reverse(p), 0u32));
        }
    }
    let mut chosen = Vec::new();
    while let Some((w, Reverse(p), version)) = heap.pop() {
        if posts[p].open {
            continue;
        }
        let Some((fresh, take)) = key(&mut posts[p], p, &assigned) else {
            continue;
        };
        if version != posts[p].version {
            debug_assert!(fresh <= w);
            heap.push((fresh, Reverse(p), posts[p].version));
            continue;
        }
        posts[p].open = true;
        for &k in &take {
            let a = edges[k].applicant;
            assigned[a] = true;
            for &j in &applicant_edges[a] {
                let other = &mut posts[edges[j].post];
                other.avail -= 1;
                other.version += 1;
            }
        }
        chosen.extend(take);
    }
    chosen.sort_unstable();
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Edge, Quota};

    #[test]
    fn assignable_weight_examples() {
        let inst = Instance::new(
            3,
            vec![Quota::new(2, 3)],
            vec![Edge::new(0, 0, 5i64), Edge::new(1, 0, 4), Edge::new(2, 0, 1)],
        );
        assert_eq!(assignable_weight(&inst, 0, &[false; 3]), Some(10));
        assert_eq!(assignable_weight(&inst, 0, &[true, true, false]), None);
        let single = Instance::new(2, vec![Quota::new(1, 1)], vec![Edge::new(0, 0, 3i64), Edge::new(1, 0, 7)]);
        assert_eq!(assignable_weight(&single, 0, &[false; 2]), Some(7));
    }

    #[test]
    fn assignable_weight_matches_subset_enumeration() {
        let ws = [5i64, 4, 1, 0, 3];
        for lower in 0..=5 {
            for upper in lower..=5 {
                let inst = Instance::new(
                    5,
                    vec![Quota::new(lower, upper)],
                    ws.iter().enumerate().map(|(a, &w)| Edge::new(a, 0, w)).collect(),
                );
                let brute = (1u32..32)
                    .filter(|m| {
                        let c = m.count_ones() as usize;
                        c >= lower.max(1) && c <= upper
                    })
                    .map(|m| (0..5).filter(|a| m >> a & 1 == 1).map(|a| ws[a]).sum::<i64>())
                    .max();
                assert_eq!(assignable_weight(&inst, 0, &[false; 5]), brute, "l={lower} u={upper}");
            }
        }
    }

    #[test]
    fn single_edge() {
        let inst = Instance::new(1, vec![Quota::new(1, 1)], vec![Edge::new(0, 0, 9i64)]);
        let res = solve_greedy(&inst);
        assert_eq!(res.objective, 9);
        assert_eq!(res.guarantee, Guarantee::Approximate { factor: 1 });
    }

    #[test]
    fn ties_break_to_smallest_post() {
        let inst = Instance::new(
            1,
            vec![Quota::new(1, 1), Quota::new(1, 1)],
            vec![Edge::new(0, 1, 4i64), Edge::new(0, 0, 4)],
        );
        let res = solve_greedy(&inst);
        assert_eq!(res.assignment.pairs(), &[(0, 0)]);
    }

    #[test]
    fn stale_keys_are_refreshed() {
        // p0 starts at 13 but drops to 6 once p1 takes a0, so p2 goes before it
        let inst = Instance::new(
            3,
            vec![Quota::new(1, 2), Quota::new(1, 1), Quota::new(1, 1)],
            vec![
                Edge::new(0, 0, 7i64),
                Edge::new(1, 0, 6),
                Edge::new(0, 1, 20),
                Edge::new(2, 2, 10),
            ],
        );
        let res = solve_greedy(&inst);
        assert_eq!(res.objective, 36);
        assert!(inst.evaluate(&res.assignment).is_ok());
    }

    #[test]
    fn result_uses_original_post_ids() {
        // post 0 is deleted by simplification
        let inst = Instance::new(2, vec![Quota::new(3, 3), Quota::new(1, 2)], vec![Edge::new(0, 1, 2i64), Edge::new(1, 1, 3)]);
        let res = solve_greedy(&inst);
        assert_eq!(res.assignment.pairs(), &[(0, 1), (1, 1)]);
        assert_eq!(inst.evaluate(&res.assignment), Ok(5));
    }
}
