use std::collections::BTreeSet;

use num_rational::Ratio;
use proptest::prelude::*;
use wmlq::oracle::{brute_force_forced_open, by_enumeration, by_open_sets};
use wmlq::twdp::{decompose, to_nice, DpTables, Graph, Strategy as TdStrategy};
use wmlq::*;

fn arb_instance(max_a: usize, max_p: usize, max_u: usize) -> impl proptest::strategy::Strategy<Value = Instance> {
    (1..=max_a, 1..=max_p).prop_flat_map(move |(na, np)| {
        let quotas = proptest::collection::vec((0..=max_u, 0..=max_u), np)
            .prop_map(|qs| qs.into_iter().map(|(a, b)| Quota::new(a.min(b), a.max(b))).collect::<Vec<_>>());
        let cells = proptest::collection::vec(proptest::option::weighted(0.4, 0..=10i64), na * np);
        (quotas, cells).prop_map(move |(quotas, cells)| {
            let edges = cells
                .iter()
                .enumerate()
                .filter_map(|(i, w)| w.map(|w| Edge::new(i / np, i % np, w)))
                .collect();
            Instance::new(na, quotas, edges)
        })
    })
}

/// Drops edges so that no post keeps more than two.
fn cap_post_degree(inst: &Instance) -> Instance {
    let mut seen = vec![0; inst.num_posts()];
    let edges = inst
        .edges()
        .iter()
        .filter(|e| {
            seen[e.post] += 1;
            seen[e.post] <= 2
        })
        .copied()
        .collect();
    Instance::new(inst.num_applicants(), inst.quotas().to_vec(), edges)
}

fn opt(inst: &Instance) -> i64 {
    brute_force(inst, OracleCaps { max_posts: 12, max_edges: 64, max_enumeration_edges: 20 }).unwrap().objective
}

fn check_result(inst: &Instance, res: &SolveResult) {
    assert_eq!(inst.evaluate(&res.assignment), Ok(res.objective));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn oracle_routes_agree(inst in arb_instance(5, 3, 3)) {
        prop_assert_eq!(by_open_sets(&inst).0, by_enumeration(&inst).0);
    }

    #[test]
    fn twdp_matches_oracle(inst in arb_instance(6, 4, 3)) {
        let res = solve_twdp(&inst, TwdpOptions::default()).unwrap();
        check_result(&inst, &res);
        prop_assert_eq!(res.objective, opt(&inst));
    }

    #[test]
    fn twdp_strategies_agree(inst in arb_instance(6, 4, 3)) {
        let a = solve_twdp(&inst, TwdpOptions { strategy: TdStrategy::MinDegree, ..TwdpOptions::default() }).unwrap();
        let b = solve_twdp(&inst, TwdpOptions { strategy: TdStrategy::ExactSmall, ..TwdpOptions::default() }).unwrap();
        prop_assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn u2_matches_oracle(inst in arb_instance(6, 4, 2)) {
        let res = solve_u2(&inst).unwrap();
        check_result(&inst, &res);
        prop_assert_eq!(res.objective, opt(&inst));
    }

    #[test]
    fn degree2_matches_oracle(inst in arb_instance(6, 5, 3)) {
        let inst = cap_post_degree(&inst);
        let res = solve_degree2_posts(&inst).unwrap();
        check_result(&inst, &res);
        prop_assert_eq!(res.objective, opt(&inst));
    }

    #[test]
    fn greedy_is_feasible_and_within_factor(inst in arb_instance(6, 4, 3)) {
        let res = solve_greedy(&inst);
        check_result(&inst, &res);
        let best = opt(&inst);
        prop_assert!(res.objective <= best);
        prop_assert!(res.objective * approximation_factor(&inst) as i64 >= best);
        let unit = inst.map_weights(|_| 1i64);
        let g = solve_greedy(&unit).objective;
        let root = (unit.num_applicants() as f64).sqrt().ceil() as i64;
        prop_assert!(g * (root + 1) >= opt(&unit));
    }

    #[test]
    fn simplification_keeps_optimum(inst in arb_instance(6, 4, 4)) {
        prop_assert_eq!(opt(&inst), opt(&inst.simplify()));
    }

    #[test]
    fn more_room_never_hurts(inst in arb_instance(5, 3, 3), p in 0usize..3) {
        let base = opt(&inst);
        let p = p % inst.num_posts();
        let mut quotas = inst.quotas().to_vec();
        quotas[p].upper += 1;
        let wider = Instance::new(inst.num_applicants(), quotas, inst.edges().to_vec());
        prop_assert!(opt(&wider) >= base);
        let mut quotas = inst.quotas().to_vec();
        quotas[p].lower = quotas[p].lower.saturating_sub(1);
        let looser = Instance::new(inst.num_applicants(), quotas, inst.edges().to_vec());
        prop_assert!(opt(&looser) >= base);
    }

    #[test]
    fn auto_policy_is_exact_when_it_claims_to_be(inst in arb_instance(6, 4, 3)) {
        let res = solve(&inst, AlgorithmChoice::auto()).unwrap();
        check_result(&inst, &res);
        prop_assert!(res.guarantee.is_exact());
        prop_assert_eq!(res.objective, opt(&inst));
    }

    #[test]
    fn all_open_matches_forced_search(inst in arb_instance(5, 3, 3)) {
        let open: Vec<bool> = inst.quotas().iter().map(|q| q.upper >= 1).collect();
        let forced = brute_force_forced_open(&inst, &open, OracleCaps::default()).unwrap();
        match solve_all_open(&inst) {
            Ok(res) => {
                check_result(&inst, &res);
                prop_assert_eq!(Some(res.objective), forced);
            }
            Err(SolveError::Infeasible) => prop_assert_eq!(forced, None),
            Err(e) => prop_assert!(false, "unexpected error {}", e),
        }
    }

    #[test]
    fn rational_weights_scale(inst in arb_instance(5, 3, 3)) {
        let third = inst.map_weights(|w| Ratio::new(w, 3));
        let res = solve_twdp(&third, TwdpOptions::default()).unwrap();
        prop_assert_eq!(res.objective, Ratio::new(opt(&inst), 3));
        let wide: WideInstance = inst.map_weights(i128::from);
        prop_assert_eq!(solve_twdp(&wide, TwdpOptions::default()).unwrap().objective, opt(&inst) as i128);
    }

    #[test]
    fn dp_tables_are_sound(inst in arb_instance(4, 3, 3)) {
        table_soundness(&inst);
    }
}

/// Every table cell against an exhaustive search over the edges committed
/// below its node.
fn table_soundness(inst: &Instance) {
    let na = inst.num_applicants();
    let g = Graph::from_instance(inst);
    let nd = to_nice(&decompose(&g, TdStrategy::MinFill).unwrap());
    let tables = DpTables::compute(inst, &nd, true);
    let vertex = |e: &Edge<i64>| (e.applicant, na + e.post);
    let mut deg = vec![0usize; g.num_vertices()];
    for e in inst.edges() {
        let (a, p) = vertex(e);
        deg[a] += 1;
        deg[p] += 1;
    }
    let legal = |v: usize, d: usize| {
        if v < na {
            d <= 1
        } else {
            inst.quota(v - na).admits(d)
        }
    };
    let cap = |v: usize| if v < na { deg[v].min(1) } else { deg[v].min(inst.quota(v - na).upper) };
    for (b, node) in nd.nodes.iter().enumerate() {
        let mut below = BTreeSet::new();
        let mut stack = vec![b];
        while let Some(t) = stack.pop() {
            below.extend(nd.nodes[t].bag.iter().copied());
            stack.extend(nd.nodes[t].children.iter().copied());
        }
        let forgotten: BTreeSet<usize> = below.iter().copied().filter(|v| node.bag.binary_search(v).is_err()).collect();
        let committed: Vec<usize> = (0..inst.num_edges())
            .filter(|&k| {
                let (a, p) = vertex(inst.edge(k));
                forgotten.contains(&a) || forgotten.contains(&p)
            })
            .collect();
        assert!(committed.len() <= 16);
        let lay = tables.layout(b);
        let mut expect: Vec<Option<i64>> = vec![None; lay.size()];
        for mask in 0u32..1 << committed.len() {
            let mut d = vec![0usize; g.num_vertices()];
            let mut w = 0;
            for (j, &k) in committed.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    let (a, p) = vertex(inst.edge(k));
                    d[a] += 1;
                    d[p] += 1;
                    w += inst.edge(k).weight;
                }
            }
            if !forgotten.iter().all(|&v| legal(v, d[v])) || !node.bag.iter().all(|&v| d[v] <= cap(v)) {
                continue;
            }
            let digits: Vec<usize> = node.bag.iter().map(|&v| d[v]).collect();
            let idx = lay.index(&digits);
            if expect[idx].is_none_or(|x| w > x) {
                expect[idx] = Some(w);
            }
        }
        for (idx, e) in expect.iter().enumerate() {
            assert_eq!(tables.value(b, idx), *e, "node {b} cell {idx}");
        }
    }
}

#[test]
fn generic_aliases_solve() {
    let inst: RationalInstance = Instance::new(
        2,
        vec![Quota::new(1, 2)],
        vec![Edge::new(0, 0, Ratio::new(1, 2)), Edge::new(1, 0, Ratio::new(1, 3))],
    );
    let res: RationalResult = solve(&inst, AlgorithmChoice::auto()).unwrap();
    assert_eq!(res.objective, Ratio::new(5, 6));
    let wide: WideInstance = Instance::new(1, vec![Quota::new(1, 1)], vec![Edge::new(0, 0, 1i128 << 70)]);
    assert_eq!(solve_greedy(&wide).objective, 1i128 << 70);
}
