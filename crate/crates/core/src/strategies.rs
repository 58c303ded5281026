//! Constructive pebbling strategies: the naive topological walk, the
//! depth-reduction white/black schedule, and depth-reducing set search.

use crate::combinatorics::{binomial, Combinations};
use crate::graph::{Dag, Node};
use crate::nodeset::NodeSet;
use crate::pebbling::{BwPebbling, Mode, Pebbling};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("exact search over {subsets} subsets exceeds the budget {budget}")]
    ExactTooLarge { subsets: u128, budget: u128 },
    #[error("removal set leaves depth {depth}, above the requested bound {d}")]
    DepthBoundViolated { depth: usize, d: usize },
}

/// Place node `i` at step `i`, never removing: time `n`, space `n`.
pub fn naive_pebble(g: &Dag) -> Pebbling {
    let n = g.n();
    let mut steps = Vec::with_capacity(n + 1);
    let mut cfg = NodeSet::empty(n);
    steps.push(cfg.clone());
    for v in 1..=n as Node {
        cfg.insert(v);
        steps.push(cfg.clone());
    }
    Pebbling {
        mode: Mode::Sequential,
        steps,
        target: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReduceMethod {
    Exact,
    Greedy,
}

/// Find `S` with `depth(G - S) <= d`. Exact mode enumerates subsets by size
/// and returns a minimum set (first in colex order); greedy mode repeatedly
/// removes the node lying on the most maximum-length paths.
pub fn depth_reduce_set(
    g: &Dag,
    d: usize,
    method: ReduceMethod,
    subset_budget: u128,
) -> Result<NodeSet, StrategyError> {
    let n = g.n();
    if g.depth() <= d {
        return Ok(NodeSet::empty(n));
    }
    match method {
        ReduceMethod::Exact => {
            for k in 1..=n as u64 {
                let count = binomial(n as u64, k);
                if count > subset_budget {
                    return Err(StrategyError::ExactTooLarge {
                        subsets: count,
                        budget: subset_budget,
                    });
                }
                let mut combos = Combinations::new(n as u32, k as u32);
                while let Some(ids) = combos.next_subset() {
                    let s = NodeSet::from_nodes(n, ids.iter().copied());
                    if g.depth_without(&s) <= d {
                        return Ok(s);
                    }
                }
            }
            unreachable!("removing every node leaves depth 0")
        }
        ReduceMethod::Greedy => {
            let mut s = NodeSet::empty(n);
            while g.depth_without(&s) > d {
                let v = busiest_node(g, &s);
                s.insert(v);
            }
            Ok(s)
        }
    }
}

/// Node on the most maximum-length paths of `G - s` (smallest id on ties).
fn busiest_node(g: &Dag, s: &NodeSet) -> Node {
    let n = g.n();
    // Longest path lengths and (saturating) counts ending at / starting from
    // each surviving node.
    let mut len_in = vec![0usize; n + 1];
    let mut cnt_in = vec![0u64; n + 1];
    let mut len_out = vec![0usize; n + 1];
    let mut cnt_out = vec![0u64; n + 1];
    let mut depth = 0;
    for v in 1..=n {
        if s.contains(v as Node) {
            continue;
        }
        let mut l = 1;
        for &u in g.parent_list(v as Node) {
            if !s.contains(u) {
                l = l.max(len_in[u as usize] + 1);
            }
        }
        let mut c: u64 = if l == 1 { 1 } else { 0 };
        for &u in g.parent_list(v as Node) {
            if !s.contains(u) && len_in[u as usize] + 1 == l {
                c = c.saturating_add(cnt_in[u as usize]);
            }
        }
        len_in[v] = l;
        cnt_in[v] = c;
        depth = depth.max(l);
    }
    for v in (1..=n).rev() {
        if s.contains(v as Node) {
            continue;
        }
        let mut l = 1;
        for &w in g.child_list(v as Node) {
            if !s.contains(w) {
                l = l.max(len_out[w as usize] + 1);
            }
        }
        let mut c: u64 = if l == 1 { 1 } else { 0 };
        for &w in g.child_list(v as Node) {
            if !s.contains(w) && len_out[w as usize] + 1 == l {
                c = c.saturating_add(cnt_out[w as usize]);
            }
        }
        len_out[v] = l;
        cnt_out[v] = c;
    }
    let mut best = (0u64, 0 as Node);
    for v in 1..=n {
        if s.contains(v as Node) {
            continue;
        }
        if len_in[v] + len_out[v] - 1 == depth {
            let through = cnt_in[v].saturating_mul(cnt_out[v]);
            if through > best.0 {
                best = (through, v as Node);
            }
        }
    }
    debug_assert!(best.1 != 0);
    best.1
}

/// The depth-reduction black/white schedule: one white pebble per round on
/// each node of `s` (ascending), then `d` rounds of parallel black
/// saturation, then one clearing round. Requires `depth(G - s) <= d`;
/// the cumulative black/white cost is at most `e(e+1)/2 + d*n` for `e = |s|`.
pub fn reducible_bw_strategy(g: &Dag, s: &NodeSet, d: usize) -> Result<BwPebbling, StrategyError> {
    let n = g.n();
    let depth = g.depth_without(s);
    if depth > d {
        return Err(StrategyError::DepthBoundViolated { depth, d });
    }
    let mut steps = vec![(NodeSet::empty(n), NodeSet::empty(n))];
    let mut white = NodeSet::empty(n);
    for v in s.iter() {
        white.insert(v);
        steps.push((NodeSet::empty(n), white.clone()));
    }
    let mut black = NodeSet::empty(n);
    for _ in 0..d {
        let held = black.union(&white);
        let mut next = black.clone();
        for v in 1..=n as Node {
            if g.parent_list(v).iter().all(|&u| held.contains(u)) {
                next.insert(v);
            }
        }
        black = next;
        steps.push((black.clone(), white.clone()));
    }
    steps.push((NodeSet::empty(n), NodeSet::empty(n)));
    Ok(BwPebbling {
        steps,
        target: None,
    })
}
