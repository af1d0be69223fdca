//! Generator front end shared by `generate` and `bench` sweeps.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use wmlq::gen::{self, DegreeModel, InputGraph, RandomParams};
use wmlq::Instance;

#[derive(Clone, Debug, Subcommand)]
pub enum GenKind {
    /// One post per vertex of a cubic graph, one applicant per edge.
    MisCubic {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Posts with l = u = n built from a graph on n vertices.
    Inapprox {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Orientation gadget for a weighted graph and outdegree bound r.
    Outdegree {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        r: usize,
    },
    /// Greedy worst case with ratio 1/(k+1).
    TightA {
        #[arg(long)]
        k: usize,
    },
    /// Greedy worst case with one heavy edge per applicant.
    TightB {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        w: i64,
    },
    /// Seeded random instance.
    Random(RandomArgs),
    /// Three posts sharing applicants pairwise.
    Triangle {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        u: usize,
    },
    /// Strip of posts with treewidth at most 2.
    Strip {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        u: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Debug, Args)]
pub struct RandomArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub applicants: usize,
    #[arg(long)]
    pub posts: usize,
    #[arg(long, default_value_t = 1)]
    pub min_degree: usize,
    #[arg(long, default_value_t = 3)]
    pub max_degree: usize,
    /// Draw degrees per post instead of per applicant.
    #[arg(long)]
    pub post_degree: bool,
    #[arg(long, default_value_t = 0)]
    pub lower_min: usize,
    #[arg(long, default_value_t = 2)]
    pub lower_max: usize,
    #[arg(long, default_value_t = 1)]
    pub upper_min: usize,
    #[arg(long, default_value_t = 3)]
    pub upper_max: usize,
    #[arg(long, default_value_t = 0)]
    pub weight_min: i64,
    #[arg(long, default_value_t = 10)]
    pub weight_max: i64,
}

impl RandomArgs {
    pub fn params(&self) -> RandomParams {
        let (min, max) = (self.min_degree, self.max_degree);
        RandomParams {
            seed: self.seed,
            applicants: self.applicants,
            posts: self.posts,
            degree: if self.post_degree { DegreeModel::Post { min, max } } else { DegreeModel::Applicant { min, max } },
            lower: (self.lower_min, self.lower_max),
            upper: (self.upper_min, self.upper_max),
            weight: (self.weight_min, self.weight_max),
        }
    }
}

fn read_graph(path: &PathBuf) -> Result<InputGraph> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    InputGraph::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn build(kind: &GenKind) -> Result<Instance> {
    Ok(match kind {
        GenKind::MisCubic { graph } => gen::gen_mis_cubic(&read_graph(graph)?)?,
        GenKind::Inapprox { graph } => gen::gen_inapprox(&read_graph(graph)?),
        GenKind::Outdegree { graph, r } => gen::gen_outdegree(&read_graph(graph)?, *r)?,
        GenKind::TightA { k } => gen::gen_tight_a(*k)?,
        GenKind::TightB { k, w } => gen::gen_tight_b(*k, *w)?,
        GenKind::Random(args) => gen::gen_random(&args.params())?,
        GenKind::Triangle { k, u } => {
            if *u == 0 {
                bail!("u must be at least 1");
            }
            gen::gen_post_triangle(*k, *u)
        }
        GenKind::Strip { m, u, seed } => gen::gen_strip(*m, *u, *seed),
    })
}

/// One instance of a sweep: a name and its generator.
#[derive(Clone, Debug)]
pub struct SweepItem {
    pub name: String,
    pub kind: GenKind,
}

/// Expands `family:key=value,...` where one or more values may be an
/// inclusive range `a..b`. Families: `triangle` (k, u), `strip` (m, u, seed),
/// `random` (seed, a, p, u, w), `tight-a` (k), `tight-b` (k, w).
pub fn expand_sweep(spec: &str) -> Result<Vec<SweepItem>> {
    let (family, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut keys: Vec<(String, Vec<i64>)> = Vec::new();
    for part in rest.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = part.split_once('=').with_context(|| format!("expected key=value, got '{part}'"))?;
        let values = match v.split_once("..") {
            Some((a, b)) => {
                let (a, b): (i64, i64) = (a.parse()?, b.parse()?);
                if a > b {
                    bail!("empty range {v}");
                }
                (a..=b).collect()
            }
            None => vec![v.parse().with_context(|| format!("bad value '{v}' for {k}"))?],
        };
        keys.push((k.to_string(), values));
    }
    let mut combos: Vec<Vec<(String, i64)>> = vec![Vec::new()];
    for (k, values) in &keys {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |&v| {
                    let mut c = c.clone();
                    c.push((k.clone(), v));
                    c
                })
            })
            .collect();
    }
    combos
        .into_iter()
        .map(|c| {
            let get = |key: &str, default: Option<i64>| -> Result<i64> {
                c.iter()
                    .find(|(k, _)| k == key)
                    .map(|&(_, v)| v)
                    .or(default)
                    .with_context(|| format!("sweep '{family}' needs {key}="))
            };
            let us = |key: &str, default: Option<i64>| -> Result<usize> {
                usize::try_from(get(key, default)?).with_context(|| format!("{key} must be non-negative"))
            };
            for (k, _) in &c {
                let known: &[&str] = match family {
                    "triangle" => &["k", "u"],
                    "strip" => &["m", "u", "seed"],
                    "random" => &["seed", "a", "p", "u", "w"],
                    "tight-a" => &["k"],
                    "tight-b" => &["k", "w"],
                    _ => bail!("unknown sweep family '{family}'"),
                };
                if !known.contains(&k.as_str()) {
                    bail!("unknown key '{k}' for sweep family '{family}'");
                }
            }
            let kind = match family {
                "triangle" => GenKind::Triangle { k: us("k", None)?, u: us("u", None)? },
                "strip" => GenKind::Strip { m: us("m", None)?, u: us("u", Some(3))?, seed: us("seed", Some(0))? as u64 },
                "random" => GenKind::Random(RandomArgs {
                    seed: us("seed", Some(0))? as u64,
                    applicants: us("a", None)?,
                    posts: us("p", None)?,
                    min_degree: 1,
                    max_degree: 3,
                    post_degree: false,
                    lower_min: 0,
                    lower_max: us("u", Some(3))?,
                    upper_min: 1,
                    upper_max: us("u", Some(3))?,
                    weight_min: 0,
                    weight_max: get("w", Some(10))?,
                }),
                "tight-a" => GenKind::TightA { k: us("k", None)? },
                "tight-b" => GenKind::TightB { k: us("k", None)?, w: get("w", Some(1000))? },
                _ => bail!("unknown sweep family '{family}'"),
            };
            let mut name = family.to_string();
            for (k, v) in &c {
                name.push_str(&format!("-{k}{v}"));
            }
            Ok(SweepItem { name, kind })
        })
        .collect()
}
