//! Line-based text formats for instances and solutions.
//!
//! Instance:
//! ```text
//! c optional comment lines
//! wmlq <applicants> <posts> <edges>
//! p <post> <lower> <upper>
//! e <applicant> <post> <weight>
//! ```
//! Solution:
//! ```text
//! sol <objective> <pairs>
//! a <applicant> <post>
//! ```
//! Ids are 1-based. Rendering writes comments first, then the header, posts
//! in id order and edges in instance order, so canonical files round-trip
//! byte for byte.

use std::fmt::Write as _;

use thiserror::Error;
use wmlq::{Assignment, Edge, Infeasible, Instance, Quota, Weight};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct FormatError {
    pub line: usize,
    pub msg: String,
}

fn fail<T>(line: usize, msg: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError { line, msg: msg.into() })
}

/// An instance together with the comment lines of its file.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceFile<W = i64> {
    pub comments: Vec<String>,
    pub instance: Instance<W>,
}

impl<W: Weight> InstanceFile<W> {
    pub fn new(instance: Instance<W>) -> Self {
        InstanceFile { comments: Vec::new(), instance }
    }

    pub fn with_comment(mut self, comment: impl Into<String>) -> Self {
        self.comments.push(comment.into());
        self
    }
}

fn is_comment(raw: &str) -> bool {
    raw == "c" || raw.starts_with("c ")
}

fn number<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T, FormatError> {
    tok.parse().or_else(|_| fail(line, format!("bad {what} '{tok}'")))
}

fn id(line: usize, tok: &str, limit: usize, what: &str) -> Result<usize, FormatError> {
    let x: usize = number(line, tok, what)?;
    if x == 0 || x > limit {
        return fail(line, format!("{what} {x} out of range 1..={limit}"));
    }
    Ok(x - 1)
}

pub fn parse_instance<W: Weight>(text: &str) -> Result<InstanceFile<W>, FormatError> {
    let mut comments = Vec::new();
    let mut header: Option<(usize, usize, usize, usize)> = None;
    let mut quotas: Vec<Option<Quota>> = Vec::new();
    let mut edges = Vec::new();
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last = line;
        if is_comment(raw) {
            comments.push(raw.strip_prefix("c ").unwrap_or("").to_string());
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        match toks.as_slice() {
            [] => continue,
            ["wmlq", a, p, e] => {
                if header.is_some() {
                    return fail(line, "second header");
                }
                let (a, p, e) = (number(line, a, "count")?, number(line, p, "count")?, number(line, e, "count")?);
                header = Some((a, p, e, line));
                quotas = vec![None; p];
            }
            ["p", p, l, u] => {
                let (_, np, _, _) = header.ok_or_else(|| FormatError { line, msg: "post before header".into() })?;
                let p = id(line, p, np, "post")?;
                let (l, u) = (number(line, l, "lower quota")?, number(line, u, "upper quota")?);
                if quotas[p].replace(Quota::new(l, u)).is_some() {
                    return fail(line, format!("post {} declared twice", p + 1));
                }
            }
            ["e", a, p, w] => {
                let (na, np, _, _) = header.ok_or_else(|| FormatError { line, msg: "edge before header".into() })?;
                let a = id(line, a, na, "applicant")?;
                let p = id(line, p, np, "post")?;
                let w: W = number(line, w, "weight")?;
                edges.push(Edge::new(a, p, w));
            }
            _ => return fail(line, format!("unrecognised line '{raw}'")),
        }
    }
    let Some((na, _, ne, hline)) = header else {
        return fail(last.max(1), "missing 'wmlq' header");
    };
    if edges.len() != ne {
        return fail(hline, format!("header declares {ne} edges, body has {}", edges.len()));
    }
    if let Some(p) = quotas.iter().position(Option::is_none) {
        return fail(hline, format!("post {} is declared in the header but has no 'p' line", p + 1));
    }
    let quotas = quotas.into_iter().map(Option::unwrap).collect();
    Ok(InstanceFile { comments, instance: Instance::new(na, quotas, edges) })
}

pub fn render_instance<W: Weight>(file: &InstanceFile<W>) -> String {
    let inst = &file.instance;
    let mut out = String::new();
    for c in &file.comments {
        if c.is_empty() {
            out.push_str("c\n");
        } else {
            let _ = writeln!(out, "c {c}");
        }
    }
    let _ = writeln!(out, "wmlq {} {} {}", inst.num_applicants(), inst.num_posts(), inst.num_edges());
    for (p, q) in inst.quotas().iter().enumerate() {
        let _ = writeln!(out, "p {} {} {}", p + 1, q.lower, q.upper);
    }
    for e in inst.edges() {
        let _ = writeln!(out, "e {} {} {}", e.applicant + 1, e.post + 1, e.weight);
    }
    out
}

/// A declared objective with its pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionFile<W = i64> {
    pub objective: W,
    pub assignment: Assignment,
}

pub fn parse_solution<W: Weight>(text: &str) -> Result<SolutionFile<W>, FormatError> {
    let mut header: Option<(W, usize, usize)> = None;
    let mut pairs = Vec::new();
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last = line;
        if is_comment(raw) {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        match toks.as_slice() {
            [] => continue,
            ["sol", obj, n] => {
                if header.is_some() {
                    return fail(line, "second header");
                }
                header = Some((number(line, obj, "objective")?, number(line, n, "count")?, line));
            }
            ["a", a, p] => {
                if header.is_none() {
                    return fail(line, "pair before header");
                }
                let a = id(line, a, usize::MAX, "applicant")?;
                let p = id(line, p, usize::MAX, "post")?;
                pairs.push((a, p));
            }
            _ => return fail(line, format!("unrecognised line '{raw}'")),
        }
    }
    let Some((objective, n, hline)) = header else {
        return fail(last.max(1), "missing 'sol' header");
    };
    if pairs.len() != n {
        return fail(hline, format!("header declares {n} pairs, body has {}", pairs.len()));
    }
    Ok(SolutionFile { objective, assignment: Assignment::from_pairs(pairs) })
}

pub fn render_solution<W: Weight>(sol: &SolutionFile<W>) -> String {
    let mut out = format!("sol {} {}\n", sol.objective, sol.assignment.len());
    for &(a, p) in sol.assignment.pairs() {
        let _ = writeln!(out, "a {} {}", a + 1, p + 1);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("pair (a{}, p{}) refers to a missing applicant or post", .0 + 1, .1 + 1)]
    OutOfRange(usize, usize),
    #[error(transparent)]
    Infeasible(#[from] Infeasible),
    #[error("declared objective {declared} but the pairs weigh {actual}")]
    Objective { declared: String, actual: String },
}

/// Recomputes the weight of `sol` and checks it against the declaration.
pub fn verify<W: Weight>(inst: &Instance<W>, sol: &SolutionFile<W>) -> Result<W, VerifyError> {
    if let Some(&(a, p)) =
        sol.assignment.pairs().iter().find(|&&(a, p)| a >= inst.num_applicants() || p >= inst.num_posts())
    {
        return Err(VerifyError::OutOfRange(a, p));
    }
    let actual = inst.evaluate(&sol.assignment)?;
    if actual != sol.objective {
        return Err(VerifyError::Objective { declared: sol.objective.to_string(), actual: actual.to_string() });
    }
    Ok(actual)
}
