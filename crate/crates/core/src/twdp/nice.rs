//! Nice tree decompositions.

use thiserror::Error;

use super::decompose::{Graph, TdError, TreeDecomposition};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Leaf,
    Introduce(usize),
    Forget(usize),
    Join,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiceNode {
    /// Sorted vertex list.
    pub bag: Vec<usize>,
    pub kind: NodeKind,
    pub children: Vec<usize>,
}

/// A rooted decomposition whose nodes are leaves, introduces, forgets and
/// binary joins. Children always precede their parent in `nodes`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiceDecomposition {
    pub nodes: Vec<NiceNode>,
    pub root: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum NiceError {
    #[error("node {0}: {1}")]
    Shape(usize, &'static str),
    #[error("root bag is not empty")]
    RootNotEmpty,
    #[error(transparent)]
    Decomposition(#[from] TdError),
}

impl NiceDecomposition {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn width(&self) -> usize {
        self.nodes.iter().map(|n| n.bag.len()).max().unwrap_or(1).saturating_sub(1)
    }

    /// Parent of every node, `usize::MAX` at the root.
    pub fn parents(&self) -> Vec<usize> {
        let mut parent = vec![usize::MAX; self.nodes.len()];
        for (t, node) in self.nodes.iter().enumerate() {
            for &c in &node.children {
                parent[c] = t;
            }
        }
        parent
    }

    /// The same bags as a plain tree decomposition with the root as bag 0.
    pub fn to_tree_decomposition(&self) -> TreeDecomposition {
        let k = self.nodes.len();
        let relabel = |t: usize| if t == self.root { 0 } else if t == 0 { self.root } else { t };
        let mut bags = vec![Vec::new(); k];
        let mut edges = Vec::new();
        for (t, node) in self.nodes.iter().enumerate() {
            bags[relabel(t)] = node.bag.clone();
            for &c in &node.children {
                edges.push((relabel(t), relabel(c)));
            }
        }
        TreeDecomposition { bags, edges }
    }

    /// Checks the node shapes and the decomposition properties. With
    /// `empty_root` the root bag must be empty.
    pub fn check(&self, g: &Graph, empty_root: bool) -> Result<(), NiceError> {
        if self.nodes.is_empty() || self.root >= self.nodes.len() {
            return Err(NiceError::Shape(0, "no root"));
        }
        if empty_root && !self.nodes[self.root].bag.is_empty() {
            return Err(NiceError::RootNotEmpty);
        }
        let sole = self.nodes.len() == 1;
        for (t, node) in self.nodes.iter().enumerate() {
            if node.bag.windows(2).any(|w| w[0] >= w[1]) {
                return Err(NiceError::Shape(t, "bag not sorted"));
            }
            if node.children.iter().any(|&c| c >= t) {
                return Err(NiceError::Shape(t, "child after parent"));
            }
            let child = |i: usize| &self.nodes[node.children[i]].bag;
            let ok = match node.kind {
                NodeKind::Leaf => node.children.is_empty() && (node.bag.len() == 1 || (sole && node.bag.is_empty())),
                NodeKind::Introduce(v) => {
                    node.children.len() == 1
                        && node.bag.len() == child(0).len() + 1
                        && node.bag.binary_search(&v).is_ok()
                        && child(0).binary_search(&v).is_err()
                        && child(0).iter().all(|x| node.bag.binary_search(x).is_ok())
                }
                NodeKind::Forget(v) => {
                    node.children.len() == 1
                        && node.bag.len() + 1 == child(0).len()
                        && node.bag.binary_search(&v).is_err()
                        && child(0).binary_search(&v).is_ok()
                        && node.bag.iter().all(|x| child(0).binary_search(x).is_ok())
                }
                NodeKind::Join => node.children.len() == 2 && *child(0) == node.bag && *child(1) == node.bag,
            };
            if !ok {
                return Err(NiceError::Shape(t, "bag does not fit its kind"));
            }
        }
        let td = self.to_tree_decomposition();
        if g.num_vertices() > 0 || !td.bags.iter().all(Vec::is_empty) {
            td.check(g)?;
        }
        Ok(())
    }
}

struct Builder {
    nodes: Vec<NiceNode>,
}

impl Builder {
    fn push(&mut self, bag: Vec<usize>, kind: NodeKind, children: Vec<usize>) -> usize {
        self.nodes.push(NiceNode { bag, kind, children });
        self.nodes.len() - 1
    }

    /// Walks from the node `top` (bag `from`) up to a node whose bag is `to`.
    fn transition(&mut self, mut top: usize, to: &[usize]) -> usize {
        let from = self.nodes[top].bag.clone();
        let mut bag = from.clone();
        for v in from.iter().filter(|v| to.binary_search(v).is_err()) {
            bag.retain(|x| x != v);
            top = self.push(bag.clone(), NodeKind::Forget(*v), vec![top]);
        }
        for &v in to.iter().filter(|v| from.binary_search(v).is_err()) {
            let at = bag.partition_point(|&x| x < v);
            bag.insert(at, v);
            top = self.push(bag.clone(), NodeKind::Introduce(v), vec![top]);
        }
        top
    }

    fn leaf_chain(&mut self, bag: &[usize]) -> usize {
        let leaf = self.push(vec![bag[0]], NodeKind::Leaf, vec![]);
        self.transition(leaf, bag)
    }
}

/// Converts `td` (rooted at bag 0) into a nice decomposition of the same
/// width whose root bag is empty.
pub fn to_nice(td: &TreeDecomposition) -> NiceDecomposition {
    build(td, true)
}

/// Like [`to_nice`] but keeps bag 0 as the root bag instead of forgetting it.
pub fn to_nice_keep_root(td: &TreeDecomposition) -> NiceDecomposition {
    build(td, false)
}

fn build(td: &TreeDecomposition, empty_root: bool) -> NiceDecomposition {
    let mut b = Builder { nodes: Vec::new() };
    let mut top: Option<usize> = None;
    if let Some((children, order)) = td.rooted() {
        let mut built: Vec<Option<usize>> = vec![None; td.bags.len()];
        for &t in order.iter().rev() {
            let bag = &td.bags[t];
            let mut subs: Vec<usize> = children[t]
                .iter()
                .filter_map(|&c| built[c])
                .collect::<Vec<_>>()
                .into_iter()
                .map(|s| b.transition(s, bag))
                .collect();
            built[t] = match subs.len() {
                0 if bag.is_empty() => None,
                0 => Some(b.leaf_chain(bag)),
                _ => {
                    let mut acc = subs.remove(0);
                    for s in subs {
                        acc = b.push(bag.clone(), NodeKind::Join, vec![acc, s]);
                    }
                    Some(acc)
                }
            };
        }
        top = order.first().and_then(|&r| built[r]);
    }
    let root = match top {
        Some(t) if empty_root => b.transition(t, &[]),
        Some(t) => t,
        None => b.push(Vec::new(), NodeKind::Leaf, vec![]),
    };
    NiceDecomposition { nodes: b.nodes, root }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twdp::decompose::{decompose, Strategy};
    use proptest::prelude::*;
    use proptest::strategy::Strategy as _;

    #[test]
    fn single_bag() {
        let g = Graph::new(1, []);
        let td = TreeDecomposition { bags: vec![vec![0]], edges: vec![] };
        let nd = to_nice(&td);
        assert_eq!(nd.len(), 2);
        assert_eq!(nd.nodes[0].kind, NodeKind::Leaf);
        assert_eq!(nd.nodes[1].kind, NodeKind::Forget(0));
        nd.check(&g, true).unwrap();
    }

    #[test]
    fn two_adjacent_bags() {
        // vertices a=0, p=1, q=2
        let g = Graph::new(3, [(0, 1), (1, 2)]);
        let td = TreeDecomposition { bags: vec![vec![1, 2], vec![0, 1]], edges: vec![(0, 1)] };
        let nd = to_nice(&td);
        nd.check(&g, true).unwrap();
        // leaf {0}, introduce 1, forget 0, introduce 2, then forget 1 and 2 to the root
        let kinds: Vec<NodeKind> = nd.nodes.iter().map(|n| n.kind).collect();
        assert_eq!(
            kinds,
            vec![
                NodeKind::Leaf,
                NodeKind::Introduce(1),
                NodeKind::Forget(0),
                NodeKind::Introduce(2),
                NodeKind::Forget(1),
                NodeKind::Forget(2),
            ]
        );
        assert_eq!(nd.width(), 1);
    }

    #[test]
    fn empty_graph_has_root_only() {
        let g = Graph::new(0, []);
        let nd = to_nice(&TreeDecomposition::default());
        assert_eq!(nd.len(), 1);
        assert!(nd.nodes[0].bag.is_empty());
        nd.check(&g, true).unwrap();
    }

    #[test]
    fn keep_root_variant() {
        let g = Graph::new(3, [(0, 1), (1, 2)]);
        let td = TreeDecomposition { bags: vec![vec![1, 2], vec![0, 1]], edges: vec![(0, 1)] };
        let nd = to_nice_keep_root(&td);
        assert_eq!(nd.nodes[nd.root].bag, vec![1, 2]);
        nd.check(&g, false).unwrap();
        assert_eq!(nd.check(&g, true), Err(NiceError::RootNotEmpty));
    }

    #[test]
    fn checker_rejects_bad_shapes() {
        let g = Graph::new(2, [(0, 1)]);
        let mut nd = to_nice(&TreeDecomposition { bags: vec![vec![0, 1]], edges: vec![] });
        nd.check(&g, true).unwrap();
        nd.nodes[1].kind = NodeKind::Forget(1);
        assert!(matches!(nd.check(&g, true), Err(NiceError::Shape(1, _))));
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
        fn conversion_preserves_validity_and_width(g in arb_graph(10)) {
            let td = decompose(&g, Strategy::MinFill).unwrap();
            let nd = to_nice(&td);
            prop_assert!(nd.check(&g, true).is_ok());
            prop_assert_eq!(nd.width(), td.width());
            prop_assert!(nd.len() <= 1 + 4 * (td.width() + 1) * g.num_vertices().max(1));
            let kept = to_nice_keep_root(&td);
            prop_assert!(kept.check(&g, false).is_ok());
        }
    }
}
