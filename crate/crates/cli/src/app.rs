use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use wmlq::{approximation_factor, solve, Algorithm, AlgorithmChoice, Guarantee, OracleCaps, SolveError, TwdpError};

use crate::bench;
use crate::format::{parse_instance, parse_solution, render_instance, render_solution, verify, InstanceFile, SolutionFile};
use crate::generate::{build, expand_sweep, GenKind};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

/// Default oracle edge limit for `solve` and `bench`.
pub const ORACLE_MAX_EDGES: usize = 512;

#[derive(Debug, Parser)]
#[command(name = "wmlq", version, about = "Many-to-one assignment with lower and upper quotas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance file and emit a solution file.
    Solve {
        input: PathBuf,
        /// auto, greedy, twdp, degree2, u2, all-open or oracle.
        #[arg(long, default_value = "auto")]
        algo: String,
        /// Cell budget for the tree-decomposition solver.
        #[arg(long, default_value_t = wmlq::twdp::DEFAULT_BUDGET)]
        budget: u64,
        /// Echoed in the summary; every solver is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Edge limit for the oracle.
        #[arg(long, default_value_t = ORACLE_MAX_EDGES)]
        oracle_max_edges: usize,
        /// Solution path; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a generated instance file.
    Generate {
        #[command(subcommand)]
        kind: GenKind,
        /// Instance path; standard output when absent.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Check a solution file against an instance file.
    Verify { instance: PathBuf, solution: PathBuf },
    /// Run solvers over a directory of instances or a generator sweep.
    Bench {
        /// Directory of instance files.
        #[arg(long, conflicts_with = "sweep")]
        dir: Option<PathBuf>,
        /// Sweep such as `triangle:k=4,u=1..6`; may be repeated.
        #[arg(long)]
        sweep: Vec<String>,
        /// Comma-separated algorithm tags, `auto` included.
        #[arg(long, default_value = "greedy,twdp")]
        algos: String,
        #[arg(long, default_value_t = wmlq::twdp::DEFAULT_BUDGET)]
        budget: u64,
        /// CSV path; standard output when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

pub fn parse_algo(tag: &str) -> Result<Option<Algorithm>> {
    if tag == "auto" {
        return Ok(None);
    }
    Algorithm::from_tag(tag).map(Some).with_context(|| format!("unknown algorithm '{tag}'"))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(path: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

/// Runs one command; returns the process exit code. Solutions, instances and
/// CSV go to `out`, summaries and diagnostics to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    match cli.command {
        Command::Solve { input, algo, budget, seed, oracle_max_edges, out: path } => {
            let inst = parse_instance::<i64>(&read(&input)?).with_context(|| format!("parsing {}", input.display()))?.instance;
            if let Some(v) = inst.validate().first() {
                bail!("invalid instance: {v}");
            }
            let oracle = OracleCaps { max_edges: oracle_max_edges, ..OracleCaps::default() };
            let choice = AlgorithmChoice { algorithm: parse_algo(&algo)?, budget, oracle, ..AlgorithmChoice::auto() };
            match solve(&inst, choice) {
                Ok(res) => {
                    let sol = SolutionFile { objective: res.objective, assignment: res.assignment.clone() };
                    emit(&path, &render_solution(&sol), out)?;
                    writeln!(err, "objective {}", res.objective)?;
                    writeln!(err, "algorithm {}", res.algorithm)?;
                    match res.guarantee {
                        Guarantee::Exact => writeln!(err, "exact")?,
                        Guarantee::Approximate { factor } => writeln!(err, "approximate factor {factor}")?,
                    }
                    if let (Some(c), Some(w)) = (res.cells, res.width) {
                        writeln!(err, "width {w} cells {c}")?;
                    }
                    writeln!(err, "seed {seed} elapsed_ms {:.3}", res.elapsed.as_secs_f64() * 1e3)?;
                    Ok(EXIT_OK)
                }
                Err(SolveError::Infeasible) => {
                    writeln!(err, "infeasible: no assignment opens every post")?;
                    Ok(EXIT_INFEASIBLE)
                }
                Err(SolveError::Twdp(e @ (TwdpError::Budget { .. } | TwdpError::TooWide { .. }))) => {
                    writeln!(err, "budget: {e}")?;
                    writeln!(err, "greedy would guarantee factor {}", approximation_factor(&inst))?;
                    Ok(EXIT_BUDGET)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Generate { kind, out: path } => {
            let inst = build(&kind)?;
            let file = InstanceFile::new(inst).with_comment(format!("generated: {}", describe(&kind)));
            emit(&path, &render_instance(&file), out)?;
            Ok(EXIT_OK)
        }
        Command::Verify { instance, solution } => {
            let inst = parse_instance::<i64>(&read(&instance)?).with_context(|| format!("parsing {}", instance.display()))?.instance;
            let sol = parse_solution::<i64>(&read(&solution)?).with_context(|| format!("parsing {}", solution.display()))?;
            match verify(&inst, &sol) {
                Ok(w) => {
                    writeln!(out, "ok objective {w}")?;
                    Ok(EXIT_OK)
                }
                Err(e) => {
                    writeln!(out, "violation: {e}")?;
                    Ok(EXIT_FAILURE)
                }
            }
        }
        Command::Bench { dir, sweep, algos, budget, csv, jobs } => {
            let algos: Vec<Option<Algorithm>> = algos.split(',').map(|t| parse_algo(t.trim())).collect::<Result<_>>()?;
            let mut sink: Box<dyn Write> = match &csv {
                Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
                None => Box::new(&mut *out),
            };
            let rows = match (dir, sweep.is_empty()) {
                (Some(d), _) => bench::run(bench::dir_items(&d)?, &algos, budget, jobs, &mut sink)?,
                (None, false) => {
                    let mut items = Vec::new();
                    for s in &sweep {
                        for item in expand_sweep(s)? {
                            let kind = item.kind;
                            items.push((item.name, move || build(&kind)));
                        }
                    }
                    bench::run(items, &algos, budget, jobs, &mut sink)?
                }
                (None, true) => bail!("bench needs --dir or --sweep"),
            };
            drop(sink);
            let failed = rows.iter().filter(|r| r.status.starts_with("error")).count();
            writeln!(err, "{} rows, {failed} errors", rows.len())?;
            Ok(EXIT_OK)
        }
    }
}

fn describe(kind: &GenKind) -> String {
    match kind {
        GenKind::MisCubic { graph } => format!("mis-cubic --graph {}", graph.display()),
        GenKind::Inapprox { graph } => format!("inapprox --graph {}", graph.display()),
        GenKind::Outdegree { graph, r } => format!("outdegree --graph {} --r {r}", graph.display()),
        GenKind::TightA { k } => format!("tight-a --k {k}"),
        GenKind::TightB { k, w } => format!("tight-b --k {k} --w {w}"),
        GenKind::Random(a) => format!("random {:?}", a.params()),
        GenKind::Triangle { k, u } => format!("triangle --k {k} --u {u}"),
        GenKind::Strip { m, u, seed } => format!("strip --m {m} --u {u} --seed {seed}"),
    }
}
