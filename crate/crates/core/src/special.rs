//! Polynomial special cases and the algorithm dispatcher.

use std::collections::HashMap;
use std::time::Instant;

use thiserror::Error;

use crate::flow::max_weight_with_open_posts;
use crate::greedy::solve_greedy;
use crate::matching::{max_weight_f_factor, max_weight_matching, FFactorInstance, GeneralGraph};
use crate::model::{Algorithm, Guarantee, Instance, SolveResult};
use crate::oracle::{brute_force, OracleCaps, OracleError};
use crate::scalar::Weight;
use crate::twdp::{plan, Strategy, TwdpError, TwdpOptions, DEFAULT_BUDGET};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("{algorithm} needs {requirement}, but post {post} violates it after simplification")]
    Precondition { algorithm: Algorithm, requirement: &'static str, post: usize },
    #[error("no assignment opens every post")]
    Infeasible,
    #[error(transparent)]
    Twdp(#[from] TwdpError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Which solver to run, with its limits. `algorithm: None` selects
/// automatically.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlgorithmChoice {
    pub algorithm: Option<Algorithm>,
    /// Cell budget for the tree-decomposition solver.
    pub budget: u64,
    pub strategy: Strategy,
    pub oracle: OracleCaps,
}

impl AlgorithmChoice {
    pub fn auto() -> Self {
        AlgorithmChoice { algorithm: None, budget: DEFAULT_BUDGET, strategy: Strategy::MinFill, oracle: OracleCaps::default() }
    }

    pub fn fixed(algorithm: Algorithm) -> Self {
        AlgorithmChoice { algorithm: Some(algorithm), ..Self::auto() }
    }

    fn twdp(&self) -> TwdpOptions {
        TwdpOptions { strategy: self.strategy, budget: self.budget }
    }
}

impl Default for AlgorithmChoice {
    fn default() -> Self {
        Self::auto()
    }
}

fn finish<W: Weight>(
    simple: &Instance<W>,
    origin: &[usize],
    edges: Vec<usize>,
    algorithm: Algorithm,
    clock: Instant,
) -> SolveResult<W> {
    let mut res = SolveResult::from_edges(simple, edges, algorithm, Guarantee::Exact, clock.elapsed());
    res.assignment = res.assignment.remap_posts(origin);
    res
}

/// Exact solver when every post has at most two neighbours: posts are split
/// or contracted into a general graph and solved as a matching.
pub fn solve_degree2_posts<W: Weight>(inst: &Instance<W>) -> Result<SolveResult<W>, SolveError> {
    let clock = Instant::now();
    let (simple, origin) = inst.simplify_with_map();
    let na = simple.num_applicants();
    let post_edges = simple.post_edges();
    // vertices 0..na are applicants; post slots follow
    let mut n = na;
    let mut h_edges: Vec<(usize, usize, W)> = Vec::new();
    let mut h_origin: Vec<Vec<usize>> = Vec::new();
    let mut contracted: HashMap<(usize, usize), usize> = HashMap::new();
    for (p, es) in post_edges.iter().enumerate() {
        if es.len() > 2 {
            return Err(SolveError::Precondition {
                algorithm: Algorithm::Degree2,
                requirement: "post degree at most 2",
                post: origin[p] + 1,
            });
        }
        let q = simple.quota(p);
        if q.lower == 2 {
            let (e1, e2) = (simple.edge(es[0]), simple.edge(es[1]));
            let key = (e1.applicant.min(e2.applicant), e1.applicant.max(e2.applicant));
            let w = e1.weight + e2.weight;
            match contracted.get(&key) {
                Some(&slot) if h_edges[slot].2 >= w => {}
                Some(&slot) => {
                    h_edges[slot].2 = w;
                    h_origin[slot] = es.clone();
                }
                None => {
                    contracted.insert(key, h_edges.len());
                    h_edges.push((key.0, key.1, w));
                    h_origin.push(es.clone());
                }
            }
        } else if q.upper == 2 {
            for &k in es {
                h_edges.push((simple.edge(k).applicant, n, simple.edge(k).weight));
                h_origin.push(vec![k]);
                n += 1;
            }
        } else {
            for &k in es {
                h_edges.push((simple.edge(k).applicant, n, simple.edge(k).weight));
                h_origin.push(vec![k]);
            }
            n += 1;
        }
    }
    let h = GeneralGraph::new(n, h_edges).expect("helper graph is simple");
    let edges: Vec<usize> = max_weight_matching(&h).into_iter().flat_map(|k| h_origin[k].clone()).collect();
    Ok(finish(&simple, &origin, edges, Algorithm::Degree2, clock))
}

/// The f-factor graph behind [`solve_u2`], before the degree of the hub
/// vertex is fixed.
#[derive(Clone, Debug)]
pub struct U2Construction<W> {
    pub graph: GeneralGraph<W>,
    /// Target degrees; the entry of `hub` is a placeholder.
    pub f: Vec<usize>,
    /// The vertex every applicant is joined to.
    pub hub: usize,
    /// Vertex of every applicant, dummy applicants included at the end.
    pub applicants: Vec<usize>,
    pub posts: Vec<usize>,
    /// Posts with upper quota one.
    pub unit_posts: usize,
    /// Triangles hanging on the hub.
    pub hub_triangles: usize,
    /// Instance edge index for every graph edge that stands for one.
    pub original: Vec<Option<usize>>,
}

impl<W: Weight> U2Construction<W> {
    /// Builds the graph for an instance with `1 <= l(p) <= u(p) <= 2` everywhere.
    pub fn new(inst: &Instance<W>) -> Self {
        let na = inst.num_applicants();
        let np = inst.num_posts();
        let dummies: Vec<usize> = (0..np).filter(|&p| inst.quota(p).upper == 2 && inst.quota(p).lower < 2).collect();
        let total_applicants = na + dummies.len();
        let applicants: Vec<usize> = (0..total_applicants).collect();
        let posts: Vec<usize> = (total_applicants..total_applicants + np).collect();
        let hub = total_applicants + np;
        let mut next = hub + 1;
        let mut f = vec![1; next];
        let mut edges: Vec<(usize, usize, W)> = Vec::new();
        let mut original = Vec::new();
        for (k, e) in inst.edges().iter().enumerate() {
            edges.push((applicants[e.applicant], posts[e.post], e.weight));
            original.push(Some(k));
        }
        for (i, &p) in dummies.iter().enumerate() {
            edges.push((applicants[na + i], posts[p], W::zero()));
            original.push(None);
        }
        for &a in &applicants {
            edges.push((a, hub, W::zero()));
            original.push(None);
        }
        let mut unit_posts = 0;
        for p in 0..np {
            let u = inst.quota(p).upper;
            f[posts[p]] = u;
            if u == 1 {
                unit_posts += 1;
                let q = next;
                next += 1;
                f.push(1);
                edges.push((posts[p], q, W::zero()));
                edges.push((q, hub, W::zero()));
                original.extend([None, None]);
            } else {
                let (q1, q2) = (next, next + 1);
                next += 2;
                f.extend([1, 1]);
                edges.push((posts[p], q1, W::zero()));
                edges.push((posts[p], q2, W::zero()));
                edges.push((q1, q2, W::zero()));
                original.extend([None, None, None]);
            }
        }
        let hub_triangles = (total_applicants + unit_posts).div_ceil(2);
        for _ in 0..hub_triangles {
            let (t1, t2) = (next, next + 1);
            next += 2;
            f.extend([1, 1]);
            edges.push((hub, t1, W::zero()));
            edges.push((hub, t2, W::zero()));
            edges.push((t1, t2, W::zero()));
            original.extend([None, None, None]);
        }
        let graph = GeneralGraph::new(next, edges).expect("construction is simple");
        U2Construction { graph, f, hub, applicants, posts, unit_posts, hub_triangles, original }
    }

    /// The two hub degrees that cover every parity.
    pub fn hub_degrees(&self) -> [usize; 2] {
        let k = self.applicants.len() + self.unit_posts;
        [k, k + 1]
    }
}

/// Exact solver when every upper quota is at most 2, via two maximum-weight
/// f-factor problems.
pub fn solve_u2<W: Weight>(inst: &Instance<W>) -> Result<SolveResult<W>, SolveError> {
    let clock = Instant::now();
    let (simple, origin) = inst.simplify_with_map();
    if let Some(p) = (0..simple.num_posts()).find(|&p| simple.quota(p).upper > 2) {
        return Err(SolveError::Precondition {
            algorithm: Algorithm::PairPosts,
            requirement: "upper quota at most 2",
            post: origin[p] + 1,
        });
    }
    let cons = U2Construction::new(&simple);
    let hub_degree = cons.graph.degrees()[cons.hub];
    let mut best: Option<(W, Vec<usize>)> = None;
    for k in cons.hub_degrees() {
        if k > hub_degree {
            continue;
        }
        let mut f = cons.f.clone();
        f[cons.hub] = k;
        let ff = FFactorInstance::new(cons.graph.clone(), f).expect("targets within degrees");
        if let Ok(factor) = max_weight_f_factor(&ff) {
            let w = cons.graph.weight_of(&factor);
            if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
                best = Some((w, factor));
            }
        }
    }
    let (_, factor) = best.expect("closing every post is always an f-factor");
    let edges: Vec<usize> = factor.into_iter().filter_map(|k| cons.original[k]).collect();
    Ok(finish(&simple, &origin, edges, Algorithm::PairPosts, clock))
}

/// Best assignment in which every post with `u(p) >= 1` is open with between
/// `max(l(p), 1)` and `u(p)` applicants.
pub fn solve_all_open<W: Weight>(inst: &Instance<W>) -> Result<SolveResult<W>, SolveError> {
    let clock = Instant::now();
    let open: Vec<bool> = inst.quotas().iter().map(|q| q.upper >= 1).collect();
    let edges = max_weight_with_open_posts(inst, &open).ok_or(SolveError::Infeasible)?;
    Ok(SolveResult::from_edges(inst, edges, Algorithm::AllOpen, Guarantee::Exact, clock.elapsed()))
}

/// Runs the chosen solver. The automatic policy works on the simplified
/// instance: upper quotas at most 2 go to [`solve_u2`], post degrees at most 2
/// to [`solve_degree2_posts`], then the tree-decomposition solver if its
/// table fits the budget, and the greedy otherwise.
pub fn solve<W: Weight>(inst: &Instance<W>, choice: AlgorithmChoice) -> Result<SolveResult<W>, SolveError> {
    match choice.algorithm {
        Some(Algorithm::Greedy) => Ok(solve_greedy(inst)),
        Some(Algorithm::TreeDp) => Ok(crate::twdp::solve_twdp(inst, choice.twdp())?),
        Some(Algorithm::Degree2) => solve_degree2_posts(inst),
        Some(Algorithm::PairPosts) => solve_u2(inst),
        Some(Algorithm::AllOpen) => solve_all_open(inst),
        Some(Algorithm::Oracle) => Ok(brute_force(inst, choice.oracle)?),
        None => {
            let clock = Instant::now();
            let simple = inst.simplify();
            let mut res = if simple.u_max() <= 2 {
                solve_u2(inst)?
            } else if simple.max_post_degree() <= 2 {
                solve_degree2_posts(inst)?
            } else {
                match plan(inst, choice.twdp()) {
                    Ok(p) => p.run()?,
                    Err(TwdpError::Budget { .. } | TwdpError::TooWide { .. }) => solve_greedy(inst),
                    Err(e) => return Err(e.into()),
                }
            };
            res.elapsed = clock.elapsed();
            Ok(res)
        }
    }
}
