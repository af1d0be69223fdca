//! Benchmark harness: runs a list of solvers on a set of instances and
//! writes one CSV row per (instance, algorithm).

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;
use wmlq::twdp::{decompose, Graph, Strategy};
use wmlq::{solve, Algorithm, AlgorithmChoice, Guarantee, Instance, OracleCaps, SolveError, TwdpError};

use crate::format::parse_instance;

pub const COLUMNS: [&str; 13] = [
    "instance",
    "num_applicants",
    "num_posts",
    "num_edges",
    "u_max",
    "width_estimate",
    "algorithm",
    "objective",
    "exact",
    "cells",
    "elapsed_ms",
    "ratio",
    "status",
];

/// Width estimate above which bench skips the min-fill run.
const WIDTH_VERTEX_LIMIT: usize = 20_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub instance: String,
    pub num_applicants: usize,
    pub num_posts: usize,
    pub num_edges: usize,
    pub u_max: usize,
    pub width_estimate: Option<usize>,
    pub algorithm: String,
    pub objective: Option<i64>,
    pub exact: Option<bool>,
    pub cells: Option<u64>,
    pub elapsed_ms: f64,
    /// Best exact objective over this algorithm's objective.
    pub ratio: Option<f64>,
    pub status: String,
}

impl Row {
    fn record(&self) -> Vec<String> {
        fn opt<T: ToString>(x: &Option<T>) -> String {
            x.as_ref().map(T::to_string).unwrap_or_default()
        }
        vec![
            self.instance.clone(),
            self.num_applicants.to_string(),
            self.num_posts.to_string(),
            self.num_edges.to_string(),
            self.u_max.to_string(),
            opt(&self.width_estimate),
            self.algorithm.clone(),
            opt(&self.objective),
            opt(&self.exact),
            opt(&self.cells),
            format!("{:.3}", self.elapsed_ms),
            self.ratio.map(|r| format!("{r:.6}")).unwrap_or_default(),
            self.status.clone(),
        ]
    }
}

/// Min-fill width of the simplified instance graph.
pub fn width_estimate(inst: &Instance) -> Option<usize> {
    let g = Graph::from_instance(&inst.simplify());
    if g.num_vertices() > WIDTH_VERTEX_LIMIT {
        return None;
    }
    decompose(&g, Strategy::MinFill).ok().map(|td| td.width())
}

fn status_of(e: &SolveError) -> String {
    match e {
        SolveError::Infeasible => "infeasible".into(),
        SolveError::Twdp(TwdpError::Budget { .. } | TwdpError::TooWide { .. }) => "budget".into(),
        other => format!("error: {other}"),
    }
}

/// Solves one instance with every algorithm in `algos` (`None` is auto).
pub fn run_instance(name: &str, inst: &Instance, algos: &[Option<Algorithm>], budget: u64) -> Vec<Row> {
    let width = width_estimate(inst);
    let mut rows: Vec<Row> = algos
        .iter()
        .map(|&algorithm| {
            let oracle = OracleCaps { max_edges: crate::app::ORACLE_MAX_EDGES, ..OracleCaps::default() };
            let choice = AlgorithmChoice { algorithm, budget, oracle, ..AlgorithmChoice::auto() };
            let base = Row {
                instance: name.to_string(),
                num_applicants: inst.num_applicants(),
                num_posts: inst.num_posts(),
                num_edges: inst.num_edges(),
                u_max: inst.u_max(),
                width_estimate: width,
                algorithm: algorithm.map_or("auto".to_string(), |a| a.tag().to_string()),
                objective: None,
                exact: None,
                cells: None,
                elapsed_ms: 0.0,
                ratio: None,
                status: "ok".into(),
            };
            match solve(inst, choice) {
                Ok(res) => Row {
                    objective: Some(res.objective),
                    exact: Some(matches!(res.guarantee, Guarantee::Exact)),
                    cells: res.cells,
                    elapsed_ms: res.elapsed.as_secs_f64() * 1e3,
                    ..base
                },
                Err(e) => Row { status: status_of(&e), ..base },
            }
        })
        .collect();
    let best = rows.iter().filter(|r| r.exact == Some(true) && r.algorithm != "all-open").filter_map(|r| r.objective).max();
    if let Some(best) = best {
        for r in &mut rows {
            r.ratio = r.objective.map(|o| match (best, o) {
                (0, 0) => 1.0,
                (_, 0) => f64::INFINITY,
                _ => best as f64 / o as f64,
            });
        }
    }
    rows
}

/// Runs every instance (in parallel over `jobs` threads), sorts the rows by
/// instance then algorithm and writes them as CSV.
pub fn run<F>(items: Vec<(String, F)>, algos: &[Option<Algorithm>], budget: u64, jobs: usize, out: impl Write) -> Result<Vec<Row>>
where
    F: FnOnce() -> Result<Instance> + Send,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    let mut rows: Vec<Row> = pool.install(|| {
        items
            .into_par_iter()
            .flat_map_iter(|(name, load)| match load() {
                Ok(inst) => run_instance(&name, &inst, algos, budget),
                Err(e) => vec![Row {
                    instance: name,
                    num_applicants: 0,
                    num_posts: 0,
                    num_edges: 0,
                    u_max: 0,
                    width_estimate: None,
                    algorithm: String::new(),
                    objective: None,
                    exact: None,
                    cells: None,
                    elapsed_ms: 0.0,
                    ratio: None,
                    status: format!("error: {e:#}"),
                }],
            })
            .collect()
    });
    rows.sort_by(|a, b| (&a.instance, &a.algorithm).cmp(&(&b.instance, &b.algorithm)));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in &rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(rows)
}

/// Instance files of a directory, sorted by name, as lazy loaders.
pub fn dir_items(dir: &Path) -> Result<Vec<(String, impl FnOnce() -> Result<Instance> + Send)>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let load = move || -> Result<Instance> {
                let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                Ok(parse_instance(&text)?.instance)
            };
            (name, load)
        })
        .collect())
}
