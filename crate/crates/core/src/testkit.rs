//! Deterministic generators for test suites and experiments: named small
//! graphs, seeded random DAGs, and random legal pebblings.

use crate::graph::{Dag, Node};
use crate::nodeset::NodeSet;
use crate::pebbling::{Mode, Pebbling};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Chain `1 -> 2 -> ... -> n`.
pub fn path(n: usize) -> Dag {
    let edges: Vec<(Node, Node)> = (1..n as Node).map(|u| (u, u + 1)).collect();
    Dag::from_edges(n, &edges).unwrap()
}

/// Complete DAG: every `(u, v)` with `u < v`.
pub fn complete(n: usize) -> Dag {
    let mut edges = Vec::new();
    for u in 1..=n as Node {
        for v in u + 1..=n as Node {
            edges.push((u, v));
        }
    }
    Dag::from_edges(n, &edges).unwrap()
}

/// `1 -> 2, 1 -> 3, 2 -> 4, 3 -> 4`.
pub fn diamond() -> Dag {
    Dag::from_edges(4, &[(1, 2), (1, 3), (2, 4), (3, 4)]).unwrap()
}

/// Balanced binary in-tree with `2^levels - 1` nodes; leaves first, root last.
pub fn binary_tree(levels: u32) -> Dag {
    let n = (1usize << levels) - 1;
    let mut edges = Vec::new();
    let mut offset = 0usize;
    let mut width = 1usize << (levels - 1);
    while width > 1 {
        let next_offset = offset + width;
        for i in 0..width / 2 {
            let parent = (next_offset + i + 1) as Node;
            edges.push(((offset + 2 * i + 1) as Node, parent));
            edges.push(((offset + 2 * i + 2) as Node, parent));
        }
        offset = next_offset;
        width /= 2;
    }
    Dag::from_edges(n, &edges).unwrap()
}

/// Random DAG: each candidate edge `(u, v)`, `u < v`, kept with probability `p`.
pub fn random_dag(n: usize, p: f64, rng: &mut impl Rng) -> Dag {
    let mut edges = Vec::new();
    for u in 1..=n as Node {
        for v in u + 1..=n as Node {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Dag::from_edges(n, &edges).unwrap()
}

/// Random DAG with indegree capped at `max_indeg`: each node draws a number
/// of distinct earlier parents uniformly in `0..=min(max_indeg, v-1)`.
pub fn random_dag_indeg(n: usize, max_indeg: usize, rng: &mut impl Rng) -> Dag {
    let mut edges = Vec::new();
    for v in 2..=n as Node {
        let cap = max_indeg.min(v as usize - 1);
        let d = rng.gen_range(0..=cap);
        let mut parents: Vec<Node> = (1..v).collect();
        parents.shuffle(rng);
        for &u in parents.iter().take(d) {
            edges.push((u, v));
        }
    }
    Dag::from_edges(n, &edges).unwrap()
}

/// Random subset of `[1, n]` where each node is kept with probability `p`.
pub fn random_subset(n: usize, p: f64, rng: &mut impl Rng) -> NodeSet {
    NodeSet::from_nodes(n, (1..=n as Node).filter(|_| rng.gen_bool(p)))
}

/// Options for [`random_legal_pebbling`].
pub struct PebblingGenOpts {
    /// Probability that an eligible node is placed in a parallel step.
    pub place_prob: f64,
    /// Probability that a held pebble is dropped in a step.
    pub drop_prob: f64,
    /// Probability of emitting a removal-only step.
    pub removal_only_prob: f64,
}

impl Default for PebblingGenOpts {
    fn default() -> Self {
        PebblingGenOpts {
            place_prob: 0.5,
            drop_prob: 0.25,
            removal_only_prob: 0.1,
        }
    }
}

/// Generate a random legal pebbling of all sinks. In sequential mode at most
/// one pebble is placed per step. After a random exploration phase the
/// generator switches to a deterministic completion phase so that the
/// pebbling always terminates.
pub fn random_legal_pebbling(
    g: &Dag,
    mode: Mode,
    rng: &mut impl Rng,
    opts: &PebblingGenOpts,
) -> Pebbling {
    let n = g.n();
    let targets = g.sinks();
    let mut steps = vec![NodeSet::empty(n)];
    let mut covered = NodeSet::empty(n);
    let mut current = NodeSet::empty(n);
    let random_phase = 4 * n + 8;

    for round in 0.. {
        if targets.is_subset(&covered) {
            break;
        }
        let frontier: Vec<Node> = (1..=n as Node)
            .filter(|&v| {
                !current.contains(v)
                    && g.parent_list(v).iter().all(|&u| current.contains(u))
            })
            .collect();
        let mut next = current.clone();
        if round < random_phase {
            if rng.gen_bool(opts.removal_only_prob) {
                for v in current.to_vec() {
                    if rng.gen_bool(opts.drop_prob) {
                        next.remove(v);
                    }
                }
            } else {
                let placed: Vec<Node> = match mode {
                    Mode::Sequential => frontier
                        .choose(rng)
                        .into_iter()
                        .copied()
                        .collect(),
                    Mode::Parallel => {
                        let mut p: Vec<Node> = frontier
                            .iter()
                            .copied()
                            .filter(|_| rng.gen_bool(opts.place_prob))
                            .collect();
                        if p.is_empty() {
                            if let Some(&f) = frontier.choose(rng) {
                                p.push(f);
                            }
                        }
                        p
                    }
                };
                for v in current.to_vec() {
                    if !placed.contains(&v) && rng.gen_bool(opts.drop_prob) {
                        next.remove(v);
                    }
                }
                for v in placed {
                    next.insert(v);
                }
            }
        } else {
            // Completion: march up the graph keeping everything.
            match mode {
                Mode::Sequential => {
                    if let Some(&v) = frontier.first() {
                        next.insert(v);
                    }
                }
                Mode::Parallel => {
                    for &v in &frontier {
                        next.insert(v);
                    }
                }
            }
        }
        covered.union_with(&next);
        steps.push(next.clone());
        current = next;
    }

    Pebbling {
        mode,
        steps,
        target: None,
    }
}
