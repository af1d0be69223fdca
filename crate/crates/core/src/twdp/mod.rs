//! Exact solver parameterised by treewidth.

pub mod decompose;
pub mod dp;
pub mod nice;

pub use decompose::{decompose, decompose_bounded, DecomposeError, Graph, Strategy, TdParseError, TreeDecomposition};
pub use dp::{dp_solve, estimate_cost, DpError, DpTables, DEFAULT_BUDGET};
pub use nice::{to_nice, to_nice_keep_root, NiceDecomposition, NiceNode, NodeKind};

use std::time::Instant;

use thiserror::Error;

use crate::model::{Algorithm, Edge, Guarantee, Instance, SolveResult};
use crate::scalar::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TwdpOptions {
    pub strategy: Strategy,
    /// Limit on the total number of table cells.
    pub budget: u64,
}

impl Default for TwdpOptions {
    fn default() -> Self {
        TwdpOptions { strategy: Strategy::MinFill, budget: DEFAULT_BUDGET }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TwdpError {
    #[error("table would need {estimate} cells, budget is {budget}")]
    Budget { estimate: u64, budget: u64 },
    #[error("no decomposition of width at most {limit} found, and wider ones cannot fit a budget of {budget} cells")]
    TooWide { limit: usize, budget: u64 },
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Dp(#[from] DpError),
}

struct Part<W> {
    inst: Instance<W>,
    /// Edge index in the simplified instance for every edge of `inst`.
    edge_map: Vec<usize>,
    nd: NiceDecomposition,
}

/// Decompositions for every connected component of the simplified
/// instance, ready to run once the cell estimate has been inspected.
pub struct Plan<W> {
    simple: Instance<W>,
    origin: Vec<usize>,
    parts: Vec<Part<W>>,
    estimate: u64,
    width: usize,
}

/// Widest decomposition whose smallest possible table (all radices 2) still
/// fits the budget.
fn width_limit(budget: u64) -> usize {
    (63 - budget.max(1).leading_zeros() as usize).saturating_sub(1)
}

/// Simplifies `inst`, splits it into components and decomposes each one.
pub fn plan<W: Weight>(inst: &Instance<W>, opts: TwdpOptions) -> Result<Plan<W>, TwdpError> {
    let (simple, origin) = inst.simplify_with_map();
    let na = simple.num_applicants();
    let graph = Graph::from_instance(&simple);
    let limit = width_limit(opts.budget);
    let mut local = vec![usize::MAX; graph.num_vertices()];
    let mut comp_of = vec![usize::MAX; graph.num_vertices()];
    let comps: Vec<Vec<usize>> = graph.components().into_iter().filter(|c| c.len() > 1).collect();
    for (ci, comp) in comps.iter().enumerate() {
        let (mut a, mut p) = (0, 0);
        for &v in comp {
            comp_of[v] = ci;
            if v < na {
                local[v] = a;
                a += 1;
            } else {
                local[v] = p;
                p += 1;
            }
        }
    }
    let mut edges: Vec<Vec<Edge<W>>> = vec![Vec::new(); comps.len()];
    let mut edge_map: Vec<Vec<usize>> = vec![Vec::new(); comps.len()];
    for (k, e) in simple.edges().iter().enumerate() {
        let ci = comp_of[e.applicant];
        edges[ci].push(Edge::new(local[e.applicant], local[na + e.post], e.weight));
        edge_map[ci].push(k);
    }
    let mut parts = Vec::with_capacity(comps.len());
    let mut estimate = 0u64;
    let mut width = 0;
    for ((comp, edges), edge_map) in comps.iter().zip(edges).zip(edge_map) {
        let quotas = comp.iter().filter(|&&v| v >= na).map(|&v| simple.quota(v - na)).collect();
        let napp = comp.iter().filter(|&&v| v < na).count();
        let sub = Instance::new(napp, quotas, edges);
        let td = match decompose_bounded(&Graph::from_instance(&sub), opts.strategy, Some(limit)) {
            Err(DecomposeError::WidthExceeded { limit }) => {
                return Err(TwdpError::TooWide { limit, budget: opts.budget })
            }
            other => other?,
        };
        let nd = to_nice(&td);
        estimate = estimate.saturating_add(estimate_cost(&nd, &sub));
        width = width.max(nd.width());
        parts.push(Part { inst: sub, edge_map, nd });
    }
    if estimate > opts.budget {
        return Err(TwdpError::Budget { estimate, budget: opts.budget });
    }
    Ok(Plan { simple, origin, parts, estimate, width })
}

impl<W: Weight> Plan<W> {
    /// Total number of table cells the run will allocate.
    pub fn estimate(&self) -> u64 {
        self.estimate
    }

    /// Largest width over the component decompositions.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn run(self) -> Result<SolveResult<W>, TwdpError> {
        let clock = Instant::now();
        let mut chosen = Vec::new();
        let mut cells = 0;
        for part in &self.parts {
            let res = dp_solve(&part.inst, &part.nd, u64::MAX)?;
            cells += res.cells.unwrap_or(0);
            let local = part.inst.edge_index();
            chosen.extend(res.assignment.pairs().iter().map(|pair| part.edge_map[local[pair]]));
        }
        let mut res = SolveResult::from_edges(&self.simple, chosen, Algorithm::TreeDp, Guarantee::Exact, clock.elapsed());
        res.assignment = res.assignment.remap_posts(&self.origin);
        res.cells = Some(cells);
        res.width = Some(self.width);
        Ok(res)
    }
}

/// Exact optimum by tree-decomposition dynamic programming.
pub fn solve_twdp<W: Weight>(inst: &Instance<W>, opts: TwdpOptions) -> Result<SolveResult<W>, TwdpError> {
    let clock = Instant::now();
    let mut res = plan(inst, opts)?.run()?;
    res.elapsed = clock.elapsed();
    Ok(res)
}
