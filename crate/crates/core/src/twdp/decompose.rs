//! Graphs, tree decompositions and elimination-ordering heuristics.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::model::Instance;
use crate::scalar::Weight;

/// Simple undirected graph with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph; duplicate edges are merged and self-loops ignored.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Graph { adj }
    }

    /// The bipartite instance graph: applicant `a` is vertex `a`, post `p` is
    /// vertex `|A| + p`.
    pub fn from_instance<W: Weight>(inst: &Instance<W>) -> Self {
        let na = inst.num_applicants();
        Graph::new(
            na + inst.num_posts(),
            inst.edges().iter().map(|e| (e.applicant, na + e.post)),
        )
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.num_vertices();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    MinFill,
    MinDegree,
    /// Branch and bound over elimination orderings; minimum width, small graphs only.
    ExactSmall,
}

/// Vertex limit for [`Strategy::ExactSmall`].
pub const EXACT_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("exact decomposition supports at most {limit} vertices, got {n}")]
    TooLarge { n: usize, limit: usize },
    #[error("no decomposition of width at most {limit} found")]
    WidthExceeded { limit: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TdError {
    #[error("vertex {0} is in no bag")]
    UncoveredVertex(usize),
    #[error("edge {{{0}, {1}}} is in no bag")]
    UncoveredEdge(usize, usize),
    #[error("bags containing vertex {0} are not connected")]
    Disconnected(usize),
    #[error("bag graph is not a tree")]
    NotATree,
    #[error("bag {0} names a vertex outside the graph")]
    BadVertex(usize),
}

/// Bags (sorted vertex lists) joined by tree edges. Bag 0 is the root.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    /// Largest bag size minus one; 0 for a decomposition without bags.
    pub fn width(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(1).saturating_sub(1)
    }

    /// Children lists and a BFS order from bag 0, or `None` if not a tree.
    pub(crate) fn rooted(&self) -> Option<(Vec<Vec<usize>>, Vec<usize>)> {
        let k = self.bags.len();
        if k == 0 {
            return self.edges.is_empty().then(|| (Vec::new(), Vec::new()));
        }
        if self.edges.len() != k - 1 {
            return None;
        }
        let mut adj = vec![Vec::new(); k];
        for &(x, y) in &self.edges {
            if x >= k || y >= k {
                return None;
            }
            adj[x].push(y);
            adj[y].push(x);
        }
        let mut children = vec![Vec::new(); k];
        let mut seen = vec![false; k];
        let mut order = vec![0];
        seen[0] = true;
        let mut head = 0;
        while head < order.len() {
            let t = order[head];
            head += 1;
            for &c in &adj[t] {
                if !seen[c] {
                    seen[c] = true;
                    children[t].push(c);
                    order.push(c);
                }
            }
        }
        (order.len() == k).then_some((children, order))
    }

    /// Checks the three decomposition properties against `g`.
    pub fn check(&self, g: &Graph) -> Result<(), TdError> {
        let n = g.num_vertices();
        let (children, _) = self.rooted().ok_or(TdError::NotATree)?;
        let mut parent = vec![usize::MAX; self.bags.len()];
        for (t, cs) in children.iter().enumerate() {
            for &c in cs {
                parent[c] = t;
            }
        }
        let mut contains = vec![Vec::new(); n];
        for (t, bag) in self.bags.iter().enumerate() {
            for &v in bag {
                if v >= n {
                    return Err(TdError::BadVertex(t));
                }
                contains[v].push(t);
            }
        }
        for (v, ts) in contains.iter().enumerate() {
            if ts.is_empty() {
                return Err(TdError::UncoveredVertex(v));
            }
            // connected iff exactly one bag has a parent lacking v
            let tops = ts.iter().filter(|&&t| parent[t] == usize::MAX || !self.bags[parent[t]].contains(&v)).count();
            if tops != 1 {
                return Err(TdError::Disconnected(v));
            }
        }
        for (u, v) in g.edges() {
            if !contains[u].iter().any(|&t| self.bags[t].binary_search(&v).is_ok()) {
                return Err(TdError::UncoveredEdge(u, v));
            }
        }
        Ok(())
    }

    /// Decomposition induced by eliminating vertices in `order`. The bag of the
    /// last eliminated vertex becomes bag 0; bags of separate components are
    /// chained.
    pub fn from_elimination(g: &Graph, order: &[usize]) -> Self {
        let n = g.num_vertices();
        assert_eq!(order.len(), n);
        let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).iter().copied().collect()).collect();
        let mut pos = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let mut bags = Vec::with_capacity(n);
        let mut parent = Vec::with_capacity(n);
        for &v in order {
            let nbrs: Vec<usize> = adj[v].iter().copied().collect();
            eliminate(&mut adj, v);
            parent.push(nbrs.iter().map(|&w| pos[w]).min());
            let mut bag = nbrs;
            bag.push(v);
            bag.sort_unstable();
            bags.push(bag);
        }
        // reverse so the last eliminated bag is the root
        let rev = |i: usize| n - 1 - i;
        let mut edges = Vec::new();
        let mut roots = Vec::new();
        for (i, p) in parent.iter().enumerate() {
            match p {
                Some(j) => edges.push((rev(*j), rev(i))),
                None => roots.push(rev(i)),
            }
        }
        roots.sort_unstable();
        for w in roots.windows(2) {
            edges.push((w[0], w[1]));
        }
        edges.sort_unstable();
        bags.reverse();
        TreeDecomposition { bags, edges }
    }
}

fn eliminate(adj: &mut [BTreeSet<usize>], v: usize) {
    let nbrs: Vec<usize> = adj[v].iter().copied().collect();
    for (i, &x) in nbrs.iter().enumerate() {
        adj[x].remove(&v);
        for &y in &nbrs[i + 1..] {
            adj[x].insert(y);
            adj[y].insert(x);
        }
    }
    adj[v].clear();
}

fn fill_in(adj: &[BTreeSet<usize>], v: usize) -> usize {
    let nbrs: Vec<usize> = adj[v].iter().copied().collect();
    let mut missing = 0;
    for (i, &x) in nbrs.iter().enumerate() {
        for &y in &nbrs[i + 1..] {
            if !adj[x].contains(&y) {
                missing += 1;
            }
        }
    }
    missing
}

/// Greedy elimination ordering. Fails as soon as a bag would exceed
/// `max_width + 1` vertices.
fn heuristic_order(g: &Graph, min_fill: bool, max_width: Option<usize>) -> Result<Vec<usize>, DecomposeError> {
    let n = g.num_vertices();
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).iter().copied().collect()).collect();
    let key = |adj: &[BTreeSet<usize>], v: usize| if min_fill { (fill_in(adj, v), adj[v].len()) } else { (adj[v].len(), 0) };
    let mut current: Vec<(usize, usize)> = (0..n).map(|v| key(&adj, v)).collect();
    let mut queue: BTreeSet<((usize, usize), usize)> = (0..n).map(|v| (current[v], v)).collect();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while let Some((_, v)) = queue.pop_first() {
        if let Some(limit) = max_width {
            if adj[v].len() > limit {
                return Err(DecomposeError::WidthExceeded { limit });
            }
        }
        let nbrs: Vec<usize> = adj[v].iter().copied().collect();
        eliminate(&mut adj, v);
        done[v] = true;
        order.push(v);
        let mut touched: BTreeSet<usize> = nbrs.iter().copied().collect();
        if min_fill {
            for &x in &nbrs {
                touched.extend(adj[x].iter().copied());
            }
        }
        for x in touched {
            if done[x] {
                continue;
            }
            let k = key(&adj, x);
            if k != current[x] {
                queue.remove(&(current[x], x));
                current[x] = k;
                queue.insert((k, x));
            }
        }
    }
    Ok(order)
}

/// Width of the elimination ordering `order`.
pub fn elimination_width(g: &Graph, order: &[usize]) -> usize {
    let mut adj: Vec<BTreeSet<usize>> = (0..g.num_vertices()).map(|v| g.neighbors(v).iter().copied().collect()).collect();
    let mut width = 0;
    for &v in order {
        width = width.max(adj[v].len());
        eliminate(&mut adj, v);
    }
    width
}

struct Exact {
    adj: Vec<u32>,
    all: u32,
    best: usize,
    best_order: Vec<usize>,
    path: Vec<usize>,
    memo: HashMap<u32, usize>,
}

impl Exact {
    /// Vertices outside `s + v` reachable from `v` through `s`.
    fn reach(&self, s: u32, v: usize) -> u32 {
        let mut comp = 1u32 << v;
        let mut frontier = comp;
        let mut out = 0u32;
        while frontier != 0 {
            let x = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let nb = self.adj[x];
            out |= nb & !s;
            let new = nb & s & !comp;
            comp |= new;
            frontier |= new;
        }
        out & !(1u32 << v)
    }

    fn search(&mut self, s: u32, cur: usize) {
        if s == self.all {
            if cur < self.best {
                self.best = cur;
                self.best_order = self.path.clone();
            }
            return;
        }
        match self.memo.get(&s) {
            Some(&seen) if seen <= cur => return,
            _ => {
                self.memo.insert(s, cur);
            }
        }
        let mut rest = self.all & !s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let w = cur.max(self.reach(s, v).count_ones() as usize);
            if w < self.best {
                self.path.push(v);
                self.search(s | 1 << v, w);
                self.path.pop();
            }
        }
    }
}

fn exact_order(g: &Graph) -> Result<Vec<usize>, DecomposeError> {
    let n = g.num_vertices();
    if n > EXACT_LIMIT {
        return Err(DecomposeError::TooLarge { n, limit: EXACT_LIMIT });
    }
    let start = heuristic_order(g, true, None)?;
    let mut ex = Exact {
        adj: (0..n).map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w)).collect(),
        all: if n == 0 { 0 } else { u32::MAX >> (32 - n) },
        best: elimination_width(g, &start),
        best_order: start,
        path: Vec::with_capacity(n),
        memo: HashMap::new(),
    };
    ex.search(0, 0);
    Ok(ex.best_order)
}

/// A tree decomposition of `g` by the given strategy.
pub fn decompose(g: &Graph, strategy: Strategy) -> Result<TreeDecomposition, DecomposeError> {
    decompose_bounded(g, strategy, None)
}

/// Like [`decompose`] but gives up once the width would exceed `max_width`.
pub fn decompose_bounded(
    g: &Graph,
    strategy: Strategy,
    max_width: Option<usize>,
) -> Result<TreeDecomposition, DecomposeError> {
    let order = match strategy {
        Strategy::MinFill => heuristic_order(g, true, max_width)?,
        Strategy::MinDegree => heuristic_order(g, false, max_width)?,
        Strategy::ExactSmall => exact_order(g)?,
    };
    let td = TreeDecomposition::from_elimination(g, &order);
    if let Some(limit) = max_width {
        if td.width() > limit {
            return Err(DecomposeError::WidthExceeded { limit });
        }
    }
    Ok(td)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct TdParseError {
    pub line: usize,
    pub msg: String,
}

impl TreeDecomposition {
    /// PACE `.td` text: `s td <bags> <width+1> <vertices>`, then
    /// `b <id> <v>...` and `<id> <id>` lines, all 1-based.
    pub fn to_pace(&self, num_vertices: usize) -> String {
        let mut out = format!("s td {} {} {}\n", self.bags.len(), self.width() + 1, num_vertices);
        for (i, bag) in self.bags.iter().enumerate() {
            out.push_str(&format!("b {}", i + 1));
            for v in bag {
                out.push_str(&format!(" {}", v + 1));
            }
            out.push('\n');
        }
        for &(x, y) in &self.edges {
            out.push_str(&format!("{} {}\n", x + 1, y + 1));
        }
        out
    }

    /// Parses [`TreeDecomposition::to_pace`] output; returns the decomposition
    /// and the declared vertex count. `c` lines are comments.
    pub fn from_pace(text: &str) -> Result<(Self, usize), TdParseError> {
        let err = |line: usize, msg: &str| TdParseError { line, msg: msg.to_string() };
        let mut header: Option<(usize, usize, usize, usize)> = None;
        let mut bags: Vec<Option<Vec<usize>>> = Vec::new();
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let toks: Vec<&str> = raw.split_whitespace().collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| err(line, "bad number"));
            match toks.first() {
                None | Some(&"c") => {}
                Some(&"s") => {
                    if toks.len() != 5 || toks[1] != "td" || header.is_some() {
                        return Err(err(line, "expected a single 's td <bags> <width+1> <vertices>' header"));
                    }
                    let (nb, w, n) = (num(toks[2])?, num(toks[3])?, num(toks[4])?);
                    header = Some((nb, w, n, line));
                    bags = vec![None; nb];
                }
                Some(&"b") => {
                    let (nb, _, n, _) = header.ok_or_else(|| err(line, "bag before header"))?;
                    let id = toks.get(1).ok_or_else(|| err(line, "missing bag id")).and_then(|s| num(s))?;
                    if id == 0 || id > nb || bags[id - 1].is_some() {
                        return Err(err(line, "bag id out of range or repeated"));
                    }
                    let mut bag = Vec::new();
                    for t in &toks[2..] {
                        let v = num(t)?;
                        if v == 0 || v > n {
                            return Err(err(line, "vertex out of range"));
                        }
                        bag.push(v - 1);
                    }
                    bag.sort_unstable();
                    bag.dedup();
                    bags[id - 1] = Some(bag);
                }
                Some(_) => {
                    let (nb, _, _, _) = header.ok_or_else(|| err(line, "edge before header"))?;
                    if toks.len() != 2 {
                        return Err(err(line, "expected '<bag> <bag>'"));
                    }
                    let (x, y) = (num(toks[0])?, num(toks[1])?);
                    if x == 0 || y == 0 || x > nb || y > nb {
                        return Err(err(line, "bag id out of range"));
                    }
                    edges.push((x - 1, y - 1));
                }
            }
        }
        let (_, w, n, hline) = header.ok_or_else(|| err(1, "missing header"))?;
        let bags = bags.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| err(hline, "declared bag missing"))?;
        let td = TreeDecomposition { bags, edges };
        if !td.bags.is_empty() && td.width() + 1 != w {
            return Err(err(hline, "declared width does not match the bags"));
        }
        Ok((td, n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::Strategy;
    use proptest::prelude::*;
    use proptest::strategy::Strategy as _;

    fn path(n: usize) -> Graph {
        Graph::new(n, (1..n).map(|i| (i - 1, i)))
    }

    fn cycle(n: usize) -> Graph {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    fn complete(n: usize) -> Graph {
        Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
    }

    const ALL: [Strategy; 3] = [Strategy::MinFill, Strategy::MinDegree, Strategy::ExactSmall];

    #[test]
    fn known_widths() {
        for s in ALL {
            for (g, w) in [(path(5), 1), (cycle(6), 2), (complete(4), 3)] {
                let td = decompose(&g, s).unwrap();
                td.check(&g).unwrap();
                assert_eq!(td.width(), w, "{s:?}");
            }
        }
    }

    #[test]
    fn empty_and_disconnected() {
        let g = Graph::new(0, []);
        let td = decompose(&g, Strategy::MinFill).unwrap();
        assert!(td.bags.is_empty());
        td.check(&g).unwrap();
        let g = Graph::new(5, [(0, 1), (3, 4)]);
        let td = decompose(&g, Strategy::MinFill).unwrap();
        td.check(&g).unwrap();
        assert_eq!(td.width(), 1);
    }

    #[test]
    fn exact_rejects_large_graphs() {
        assert!(matches!(decompose(&path(21), Strategy::ExactSmall), Err(DecomposeError::TooLarge { .. })));
    }

    #[test]
    fn width_bound_is_enforced() {
        assert_eq!(
            decompose_bounded(&complete(5), Strategy::MinFill, Some(3)),
            Err(DecomposeError::WidthExceeded { limit: 3 })
        );
        assert!(decompose_bounded(&cycle(8), Strategy::MinDegree, Some(2)).is_ok());
    }

    #[test]
    fn checker_catches_broken_decompositions() {
        let g = path(3);
        let good = TreeDecomposition { bags: vec![vec![0, 1], vec![1, 2]], edges: vec![(0, 1)] };
        good.check(&g).unwrap();
        let missing_edge = TreeDecomposition { bags: vec![vec![0, 1], vec![2]], edges: vec![(0, 1)] };
        assert_eq!(missing_edge.check(&g), Err(TdError::UncoveredEdge(1, 2)));
        let split = TreeDecomposition {
            bags: vec![vec![0, 1], vec![1, 2], vec![0]],
            edges: vec![(0, 1), (1, 2)],
        };
        assert_eq!(split.check(&g), Err(TdError::Disconnected(0)));
        let not_tree = TreeDecomposition { bags: vec![vec![0, 1], vec![1, 2]], edges: vec![] };
        assert_eq!(not_tree.check(&g), Err(TdError::NotATree));
    }

    /// Minimum width over all elimination orderings by trying every permutation.
    fn brute_treewidth(g: &Graph) -> usize {
        fn go(g: &Graph, order: &mut Vec<usize>, used: &mut Vec<bool>, best: &mut usize) {
            if order.len() == g.num_vertices() {
                *best = (*best).min(elimination_width(g, order));
                return;
            }
            for v in 0..g.num_vertices() {
                if !used[v] {
                    used[v] = true;
                    order.push(v);
                    go(g, order, used, best);
                    order.pop();
                    used[v] = false;
                }
            }
        }
        let mut best = usize::MAX;
        go(g, &mut Vec::new(), &mut vec![false; g.num_vertices()], &mut best);
        if g.num_vertices() == 0 {
            0
        } else {
            best
        }
    }

    fn arb_graph(max_n: usize) -> impl proptest::strategy::Strategy<Value = Graph> {
        (0..=max_n).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            proptest::collection::vec(any::<bool>(), pairs.len()).prop_map(move |keep| {
                Graph::new(n, pairs.iter().zip(&keep).filter(|(_, k)| **k).map(|(&p, _)| p))
            })
        })
    }

    proptest! {
        #[test]
        fn every_strategy_yields_a_valid_decomposition(g in arb_graph(9)) {
            for s in ALL {
                let td = decompose(&g, s).unwrap();
                prop_assert!(td.check(&g).is_ok());
            }
        }

        #[test]
        fn exact_matches_permutation_search(g in arb_graph(7)) {
            let td = decompose(&g, Strategy::ExactSmall).unwrap();
            prop_assert_eq!(td.width(), brute_treewidth(&g));
        }
    }

    #[test]
    fn pace_round_trip() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]);
        let td = decompose(&g, Strategy::MinFill).unwrap();
        let text = td.to_pace(4);
        let (back, n) = TreeDecomposition::from_pace(&text).unwrap();
        assert_eq!((back, n), (td, 4));
        let bad = "s td 1 2 2\nb 1 1 3\n";
        assert_eq!(TreeDecomposition::from_pace(bad).unwrap_err().line, 2);
        assert!(TreeDecomposition::from_pace("s td 2 1 1\nb 1 1\n").is_err());
    }
}
