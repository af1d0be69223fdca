//! Brute-force optimum for small instances.
//!
//! Two independent routes are run and compared: enumeration of every set of
//! open posts with a flow per set, and exhaustive search over edge subsets in
//! which each applicant takes at most one edge.

use std::time::Instant;

use thiserror::Error;

use crate::flow::max_weight_with_open_posts;
use crate::model::{Algorithm, Guarantee, Instance, SolveResult};
use crate::scalar::{sum, Weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleCaps {
    pub max_posts: usize,
    pub max_edges: usize,
    /// Edge-subset search only runs up to this many edges.
    pub max_enumeration_edges: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps { max_posts: 12, max_edges: 24, max_enumeration_edges: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance has {posts} posts and {edges} edges; oracle limit is {max_posts} posts and {max_edges} edges")]
    TooLarge { posts: usize, edges: usize, max_posts: usize, max_edges: usize },
    #[error("open-set search found {open_sets}, edge enumeration found {enumeration}")]
    Disagreement { open_sets: String, enumeration: String },
}

fn check_caps<W: Weight>(inst: &Instance<W>, caps: OracleCaps) -> Result<(), OracleError> {
    if inst.num_posts() > caps.max_posts || inst.num_edges() > caps.max_edges {
        return Err(OracleError::TooLarge {
            posts: inst.num_posts(),
            edges: inst.num_edges(),
            max_posts: caps.max_posts,
            max_edges: caps.max_edges,
        });
    }
    Ok(())
}

/// Best assignment over all `2^|P|` open-post sets, one flow per set.
pub fn by_open_sets<W: Weight>(inst: &Instance<W>) -> (W, Vec<usize>) {
    let np = inst.num_posts();
    assert!(np < 64, "too many posts for open-set enumeration");
    let mut best = (W::zero(), Vec::new());
    for mask in 1u64..1 << np {
        let open: Vec<bool> = (0..np).map(|p| mask >> p & 1 == 1).collect();
        if let Some(edges) = max_weight_with_open_posts(inst, &open) {
            let w = sum(edges.iter().map(|&k| inst.edge(k).weight));
            if w > best.0 {
                best = (w, edges);
            }
        }
    }
    best
}

/// Exhaustive search: every applicant takes none or one of its edges, and
/// `accept` decides whether the final post loads are allowed.
fn search<W: Weight>(inst: &Instance<W>, accept: &dyn Fn(&[usize]) -> bool) -> Option<(W, Vec<usize>)> {
    struct Ctx<'a, W> {
        inst: &'a Instance<W>,
        by_applicant: Vec<Vec<usize>>,
        load: Vec<usize>,
        chosen: Vec<usize>,
        best: Option<(W, Vec<usize>)>,
    }
    fn go<W: Weight>(c: &mut Ctx<'_, W>, a: usize, w: W, accept: &dyn Fn(&[usize]) -> bool) {
        if a == c.by_applicant.len() {
            if accept(&c.load) && c.best.as_ref().is_none_or(|(bw, _)| w > *bw) {
                c.best = Some((w, c.chosen.clone()));
            }
            return;
        }
        go(c, a + 1, w, accept);
        for i in 0..c.by_applicant[a].len() {
            let k = c.by_applicant[a][i];
            let e = *c.inst.edge(k);
            if c.load[e.post] == c.inst.quota(e.post).upper {
                continue;
            }
            c.load[e.post] += 1;
            c.chosen.push(k);
            go(c, a + 1, w + e.weight, accept);
            c.chosen.pop();
            c.load[e.post] -= 1;
        }
    }
    let mut ctx = Ctx {
        inst,
        by_applicant: inst.applicant_edges(),
        load: vec![0; inst.num_posts()],
        chosen: Vec::new(),
        best: None,
    };
    go(&mut ctx, 0, W::zero(), accept);
    ctx.best.map(|(w, mut e)| {
        e.sort_unstable();
        (w, e)
    })
}

/// Best assignment by exhaustive search over edge subsets.
pub fn by_enumeration<W: Weight>(inst: &Instance<W>) -> (W, Vec<usize>) {
    let quotas = inst.quotas();
    search(inst, &|load| load.iter().zip(quotas).all(|(&c, q)| q.admits(c))).expect("empty assignment is feasible")
}

/// Exact optimum. Both routes run when the instance is small enough for
/// edge enumeration; a disagreement is reported as an error.
pub fn brute_force<W: Weight>(inst: &Instance<W>, caps: OracleCaps) -> Result<SolveResult<W>, OracleError> {
    let clock = Instant::now();
    check_caps(inst, caps)?;
    let (w, edges) = by_open_sets(inst);
    if inst.num_edges() <= caps.max_enumeration_edges {
        let (w2, _) = by_enumeration(inst);
        if w != w2 {
            return Err(OracleError::Disagreement { open_sets: w.to_string(), enumeration: w2.to_string() });
        }
    }
    Ok(SolveResult::from_edges(inst, edges, Algorithm::Oracle, Guarantee::Exact, clock.elapsed()))
}

/// Optimum when exactly the posts with `open[p]` set are open, by exhaustive
/// search. `None` when no such assignment exists.
pub fn brute_force_forced_open<W: Weight>(
    inst: &Instance<W>,
    open: &[bool],
    caps: OracleCaps,
) -> Result<Option<W>, OracleError> {
    check_caps(inst, caps)?;
    assert_eq!(open.len(), inst.num_posts());
    let quotas = inst.quotas();
    let accept = |load: &[usize]| {
        load.iter().zip(quotas).zip(open).all(|((&c, q), &o)| if o { c >= q.lower.max(1) && c <= q.upper } else { c == 0 })
    };
    Ok(search(inst, &accept).map(|(w, _)| w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Edge, Quota};

    #[test]
    fn empty_instance() {
        let inst: Instance = Instance::empty();
        assert_eq!(brute_force(&inst, OracleCaps::default()).unwrap().objective, 0);
    }

    #[test]
    fn caps_are_enforced() {
        let inst = Instance::new(1, vec![Quota::new(1, 1); 13], vec![Edge::new(0, 0, 1i64)]);
        assert!(matches!(brute_force(&inst, OracleCaps::default()), Err(OracleError::TooLarge { .. })));
        let loose = OracleCaps { max_posts: 13, ..OracleCaps::default() };
        assert_eq!(brute_force(&inst, loose).unwrap().objective, 1);
    }

    #[test]
    fn forced_open_examples() {
        let inst = Instance::new(
            2,
            vec![Quota::new(2, 2), Quota::new(1, 1)],
            vec![Edge::new(0, 0, 3i64), Edge::new(0, 1, 5)],
        );
        let caps = OracleCaps::default();
        assert_eq!(brute_force_forced_open(&inst, &[false, false], caps), Ok(Some(0)));
        assert_eq!(brute_force_forced_open(&inst, &[true, false], caps), Ok(None));
        assert_eq!(brute_force_forced_open(&inst, &[false, true], caps), Ok(Some(5)));
    }

    #[test]
    fn lower_quota_closes_heavy_post() {
        // p0 wants two applicants; taking them blocks p1's heavy edge
        let inst = Instance::new(
            2,
            vec![Quota::new(2, 2), Quota::new(1, 1)],
            vec![Edge::new(0, 0, 3i64), Edge::new(1, 0, 3), Edge::new(1, 1, 10)],
        );
        let res = brute_force(&inst, OracleCaps::default()).unwrap();
        assert_eq!(res.objective, 10);
        assert_eq!(by_enumeration(&inst).0, 10);
    }
}
