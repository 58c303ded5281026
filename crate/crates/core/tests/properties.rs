//! Property-based invariants across the library surface.

use pebbleforge::graph::Dag;
use pebbleforge::nodeset::NodeSet;
use pebbleforge::oracle::{self, Limits, Objective};
use pebbleforge::pebbling::{
    self, metrics, metrics_unchecked, pebbling_from_bytes, pebbling_to_bytes, seq_transform,
    LoadedPebbling, Mode, Pebbling,
};
use pebbleforge::testkit;
use proptest::prelude::*;

fn arb_dag(max_n: usize) -> impl Strategy<Value = Dag> {
    (1..=max_n, 0.0..0.7f64, any::<u64>()).prop_map(|(n, p, seed)| {
        let mut rng = testkit::rng(seed);
        testkit::random_dag(n, p, &mut rng)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn removal_never_increases_depth(g in arb_dag(24), seed in any::<u64>()) {
        let mut rng = testkit::rng(seed);
        let s = testkit::random_subset(g.n(), 0.4, &mut rng);
        prop_assert!(g.depth_without(&s) <= g.depth());
        prop_assert_eq!(g.remove(&NodeSet::empty(g.n())).edges(), g.edges());
    }

    #[test]
    fn ancestors_are_transitively_closed(g in arb_dag(24), seed in any::<u64>()) {
        let mut rng = testkit::rng(seed);
        let t = testkit::random_subset(g.n(), 0.3, &mut rng);
        let anc = g.ancestors(&t);
        let anc2 = g.ancestors(&anc);
        prop_assert!(anc2.is_subset(&anc.union(&t)));
        // Every node reaches a sink, so the closed ancestors of the sinks
        // cover the graph.
        prop_assert_eq!(g.ancestors_closed(&g.sinks()), NodeSet::full(g.n()));
    }

    #[test]
    fn graph_file_round_trip(g in arb_dag(24)) {
        let bytes = g.to_file_bytes();
        let back = Dag::from_file_bytes(&bytes).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.to_file_bytes(), bytes);
    }

    #[test]
    fn metric_identities(g in arb_dag(10), seed in any::<u64>(), parallel in any::<bool>()) {
        let mut rng = testkit::rng(seed);
        let mode = if parallel { Mode::Parallel } else { Mode::Sequential };
        let p = testkit::random_legal_pebbling(&g, mode, &mut rng, &Default::default());
        let m = metrics(&g, &p).unwrap();
        prop_assert_eq!(m.spacetime, m.time * m.space);
        prop_assert!(m.cc <= m.spacetime);
        prop_assert_eq!(m.ss(m.space + 1), 0);
        let mut prev = u64::MAX;
        for s in 1..=m.space {
            prop_assert!(m.ss(s) <= m.time);
            prop_assert!(m.ss(s) <= m.am_ss(s), "pointwise ss <= amortized ss");
            prop_assert!(m.ss(s) <= prev, "ss non-increasing in s");
            prev = m.ss(s);
        }
    }

    #[test]
    fn sequential_transform_contract(g in arb_dag(10), seed in any::<u64>()) {
        let mut rng = testkit::rng(seed);
        let p = testkit::random_legal_pebbling(&g, Mode::Parallel, &mut rng, &Default::default());
        let t = seq_transform(&g, &p).unwrap();
        pebbling::validate(&g, &t.pebbling).unwrap();
        prop_assert_eq!(t.pebbling.mode, Mode::Sequential);
        for (i, &a) in t.anchors.iter().enumerate() {
            prop_assert_eq!(&t.pebbling.steps[a], &p.steps[i]);
        }
        let m_in = metrics_unchecked(&p);
        let m_out = metrics_unchecked(&t.pebbling);
        prop_assert!(m_out.space <= 2 * m_in.space);
        // One output step per placement; removal-only steps stay single.
        let expected_time: usize = (1..p.steps.len())
            .map(|i| p.steps[i].difference(&p.steps[i - 1]).len().max(1))
            .sum();
        prop_assert_eq!(m_out.time as usize, expected_time);
    }

    #[test]
    fn pebbling_file_round_trip(g in arb_dag(10), seed in any::<u64>()) {
        let mut rng = testkit::rng(seed);
        let p = testkit::random_legal_pebbling(&g, Mode::Parallel, &mut rng, &Default::default());
        let bytes = pebbling_to_bytes(&g, &p);
        match pebbling_from_bytes(&g, &bytes).unwrap() {
            LoadedPebbling::Black(q) => {
                prop_assert_eq!(q.steps, p.steps);
            }
            _ => prop_assert!(false, "wrong pebbling kind"),
        }
    }

    #[test]
    fn oracle_mode_ordering(seed in any::<u64>(), n in 2..=6usize, p in 0.0..0.7f64) {
        let mut rng = testkit::rng(seed);
        let g = testkit::random_dag(n, p, &mut rng);
        let lim = Limits::default();
        let cc_seq = oracle::brute_force(&g, Objective::MinCc, Mode::Sequential, &lim).unwrap();
        let cc_par = oracle::brute_force(&g, Objective::MinCc, Mode::Parallel, &lim).unwrap();
        prop_assert!(cc_par.value <= cc_seq.value);
        // min_ss(s) is non-increasing in s; min_ss(0) counts every step, so
        // it is the minimum time and bounds the whole profile.
        let mut prev = u64::MAX;
        for s in 0..=(n as u32 + 1) {
            let r = oracle::brute_force(&g, Objective::MinSs(s), Mode::Parallel, &lim).unwrap();
            prop_assert!(r.value <= prev, "ss must be non-increasing in s");
            prev = r.value;
        }
    }
}

#[test]
fn amortized_doubling_on_disjoint_union() {
    // Two disjoint copies of a graph, pebbled in lockstep: when every
    // configuration size is a multiple of s the amortized sustained count
    // doubles exactly; at s = 1 it always does.
    let g = testkit::path(4);
    let mut rng = testkit::rng(3);
    let p = testkit::random_legal_pebbling(&g, Mode::Parallel, &mut rng, &Default::default());

    let n = g.n();
    let mut edges = g.edges();
    for (u, v) in g.edges() {
        edges.push((u + n as u32, v + n as u32));
    }
    let union_graph = Dag::from_edges(2 * n, &edges).unwrap();
    let doubled = Pebbling {
        mode: Mode::Parallel,
        steps: p
            .steps
            .iter()
            .map(|cfg| {
                let mut s = NodeSet::empty(2 * n);
                for v in cfg.iter() {
                    s.insert(v);
                    s.insert(v + n as u32);
                }
                s
            })
            .collect(),
        target: None,
    };
    let m1 = metrics(&g, &p).unwrap();
    let m2 = metrics(&union_graph, &doubled).unwrap();
    assert_eq!(m2.am_ss(1), 2 * m1.am_ss(1));

    // A crafted pebbling whose sizes are multiples of s = 2.
    let g2 = Dag::from_edges(4, &[(1, 3), (2, 3), (1, 4), (2, 4)]).unwrap();
    let crafted = Pebbling {
        mode: Mode::Parallel,
        steps: vec![
            NodeSet::empty(4),
            NodeSet::from_nodes(4, [1, 2]),
            NodeSet::from_nodes(4, [1, 2, 3, 4]),
        ],
        target: None,
    };
    pebbling::validate(&g2, &crafted).expect("crafted pebbling legal");
    let mut edges = g2.edges();
    for (u, v) in g2.edges() {
        edges.push((u + 4, v + 4));
    }
    let union2 = Dag::from_edges(8, &edges).unwrap();
    let doubled2 = Pebbling {
        mode: Mode::Parallel,
        steps: crafted
            .steps
            .iter()
            .map(|cfg| {
                let mut s = NodeSet::empty(8);
                for v in cfg.iter() {
                    s.insert(v);
                    s.insert(v + 4);
                }
                s
            })
            .collect(),
        target: None,
    };
    let m1 = metrics(&g2, &crafted).unwrap();
    let m2 = metrics(&union2, &doubled2).unwrap();
    assert_eq!(m2.am_ss(2), 2 * m1.am_ss(2));
}

#[test]
fn validator_is_total_on_arbitrary_step_sets() {
    // Any in-range steps value gets a verdict, never a panic.
    let g = testkit::diamond();
    let mut rng = testkit::rng(9);
    use rand::Rng;
    for _ in 0..500 {
        let len = rng.gen_range(1..6);
        let steps: Vec<NodeSet> = (0..len)
            .map(|_| testkit::random_subset(4, 0.5, &mut rng))
            .collect();
        let p = Pebbling {
            mode: if rng.gen_bool(0.5) {
                Mode::Sequential
            } else {
                Mode::Parallel
            },
            steps,
            target: None,
        };
        let _ = pebbling::validate(&g, &p);
    }
}
