use thiserror::Error;

use super::{max_weight_perfect_matching, GeneralGraph};
use crate::scalar::Weight;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FFactorError {
    #[error("degree prescription has {got} entries for {expected} vertices")]
    Length { expected: usize, got: usize },
    #[error("vertex {vertex} asks for degree {f} but has only {deg} incident edges")]
    TooLarge { vertex: usize, f: usize, deg: usize },
    #[error("no f-factor exists")]
    NoFactor,
}

/// A graph together with a prescribed degree `f(v)` for every vertex.
#[derive(Clone, Debug)]
pub struct FFactorInstance<W = i64> {
    graph: GeneralGraph<W>,
    f: Vec<usize>,
}

impl<W: Weight> FFactorInstance<W> {
    pub fn new(graph: GeneralGraph<W>, f: Vec<usize>) -> Result<Self, FFactorError> {
        if f.len() != graph.num_vertices() {
            return Err(FFactorError::Length { expected: graph.num_vertices(), got: f.len() });
        }
        for (v, (&fv, &d)) in f.iter().zip(graph.degrees().iter()).enumerate() {
            if fv > d {
                return Err(FFactorError::TooLarge { vertex: v, f: fv, deg: d });
            }
        }
        Ok(FFactorInstance { graph, f })
    }

    pub fn graph(&self) -> &GeneralGraph<W> {
        &self.graph
    }

    pub fn f(&self) -> &[usize] {
        &self.f
    }

    /// True if the given edge set has degree exactly `f(v)` at every vertex.
    pub fn is_factor(&self, edges: &[usize]) -> bool {
        let mut deg = vec![0; self.graph.num_vertices()];
        for &k in edges {
            let (u, v, _) = self.graph.edges()[k];
            deg[u] += 1;
            deg[v] += 1;
        }
        deg == self.f
    }

    /// The vertex-expansion gadget whose perfect matchings correspond to
    /// f-factors of this graph.
    pub fn gadget(&self) -> Gadget<W> {
        let g = &self.graph;
        let n = g.num_vertices();
        let deg = g.degrees();
        // external copy of (v, i-th incident edge)
        let mut ext_base = vec![0; n];
        let mut next = 0;
        for v in 0..n {
            ext_base[v] = next;
            next += deg[v];
        }
        let mut int_base = vec![0; n];
        for v in 0..n {
            int_base[v] = next;
            next += deg[v] - self.f[v];
        }
        let mut slot = vec![0; n];
        let mut edges = Vec::new();
        let mut original = Vec::new();
        for (k, &(u, v, w)) in g.edges().iter().enumerate() {
            let cu = ext_base[u] + slot[u];
            let cv = ext_base[v] + slot[v];
            slot[u] += 1;
            slot[v] += 1;
            edges.push((cu, cv, w));
            original.push(Some(k));
        }
        for v in 0..n {
            for i in 0..deg[v] - self.f[v] {
                for j in 0..deg[v] {
                    edges.push((int_base[v] + i, ext_base[v] + j, W::zero()));
                    original.push(None);
                }
            }
        }
        let graph = GeneralGraph::new(next, edges).expect("gadget is simple");
        Gadget { graph, original }
    }
}

/// The expanded graph plus, for each of its edges, the original edge it
/// stands for (or `None` for the weight-0 internal connections).
#[derive(Clone, Debug)]
pub struct Gadget<W> {
    pub graph: GeneralGraph<W>,
    pub original: Vec<Option<usize>>,
}

/// A maximum-weight f-factor, as sorted edge indices of the input graph.
pub fn max_weight_f_factor<W: Weight>(ff: &FFactorInstance<W>) -> Result<Vec<usize>, FFactorError> {
    let gadget = ff.gadget();
    let pm = max_weight_perfect_matching(&gadget.graph).map_err(|_| FFactorError::NoFactor)?;
    let mut out: Vec<usize> = pm.into_iter().filter_map(|k| gadget.original[k]).collect();
    out.sort_unstable();
    debug_assert!(ff.is_factor(&out));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(ff: &FFactorInstance<i64>) -> Option<i64> {
        let m = ff.graph().edges().len();
        (0u32..1 << m)
            .map(|mask| (0..m).filter(|k| mask >> k & 1 == 1).collect::<Vec<_>>())
            .filter(|s| ff.is_factor(s))
            .map(|s| ff.graph().weight_of(&s))
            .max()
    }

    #[test]
    fn triangle_two_factor() {
        let g = GeneralGraph::new(3, vec![(0, 1, 1i64), (1, 2, 2), (0, 2, 3)]).unwrap();
        let ff = FFactorInstance::new(g, vec![2, 2, 2]).unwrap();
        let got = max_weight_f_factor(&ff).unwrap();
        assert_eq!(got, vec![0, 1, 2]);
        assert_eq!(ff.graph().weight_of(&got), 6);
    }

    #[test]
    fn single_edge_with_unbalanced_degrees() {
        let g = GeneralGraph::new(2, vec![(0, 1, 1i64)]).unwrap();
        let ff = FFactorInstance::new(g, vec![1, 0]).unwrap();
        assert_eq!(max_weight_f_factor(&ff), Err(FFactorError::NoFactor));
    }

    #[test]
    fn zero_prescription_is_empty_factor() {
        let g = GeneralGraph::new(3, vec![(0, 1, 4i64), (1, 2, 5)]).unwrap();
        let ff = FFactorInstance::new(g, vec![0, 0, 0]).unwrap();
        assert_eq!(max_weight_f_factor(&ff), Ok(vec![]));
    }

    #[test]
    fn rejects_bad_prescriptions() {
        let g = GeneralGraph::new(2, vec![(0, 1, 1i64)]).unwrap();
        assert!(matches!(FFactorInstance::new(g.clone(), vec![1]), Err(FFactorError::Length { .. })));
        assert!(matches!(FFactorInstance::new(g, vec![2, 1]), Err(FFactorError::TooLarge { .. })));
    }

    #[test]
    fn gadget_size() {
        let g = GeneralGraph::new(4, vec![(0, 1, 1i64), (1, 2, 1), (2, 3, 1), (0, 2, 1)]).unwrap();
        let f = vec![1, 1, 2, 0];
        let deg = g.degrees();
        let ff = FFactorInstance::new(g, f.clone()).unwrap();
        let expected: usize = deg.iter().sum::<usize>() + deg.iter().zip(&f).map(|(d, x)| d - x).sum::<usize>();
        assert_eq!(ff.gadget().graph.num_vertices(), expected);
    }

    fn arb_ff() -> impl Strategy<Value = FFactorInstance<i64>> {
        (2..=6usize).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            let m = pairs.len();
            (
                proptest::collection::vec(any::<bool>(), m),
                proptest::collection::vec(-3i64..=9, m),
                proptest::collection::vec(0usize..=3, n),
            )
                .prop_map(move |(keep, ws, raw_f)| {
                    let edges: Vec<_> = pairs
                        .iter()
                        .zip(keep.iter().zip(ws.iter()))
                        .filter(|(_, (k, _))| **k)
                        .map(|(&(u, v), (_, &w))| (u, v, w))
                        .collect();
                    let g = GeneralGraph::new(n, edges).unwrap();
                    let f = raw_f.iter().zip(g.degrees()).map(|(&x, d)| x.min(d)).collect();
                    FFactorInstance::new(g, f).unwrap()
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn f_factor_matches_enumeration(ff in arb_ff()) {
            prop_assume!(ff.graph().edges().len() <= 15);
            match max_weight_f_factor(&ff) {
                Ok(s) => {
                    prop_assert!(ff.is_factor(&s));
                    prop_assert_eq!(Some(ff.graph().weight_of(&s)), brute(&ff));
                }
                Err(_) => prop_assert_eq!(brute(&ff), None),
            }
        }
    }
}
