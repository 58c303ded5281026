//! Exact brute-force pebbling optima over the configuration space.
//!
//! States are `(configuration, targets-covered-so-far)` pairs encoded as bit
//! masks. Space objectives run an iterative-threshold reachability search
//! (smallest cap whose bounded configuration graph still covers every
//! target); cost objectives run least-cost-first search where entering a
//! configuration `P'` costs `|P'|` (cumulative cost) or the indicator
//! `|P'| >= s` (sustained space).
//!
//! Successor sets. The search uses the standard move convention: a newly
//! placed pebble's parents are pebbled at the end of the previous step *and
//! stay on the graph through the placing step* (removals of other pebbles
//! may share the step). Without the second half, "sliding" a pebble off a
//! parent onto its child would trivialise the classic space and cumulative
//! costs (a chain would need one pebble). The validator accepts the laxer
//! previous-step-only rule, so every oracle witness validates a fortiori.
//!
//! In parallel mode the successors of `P` are the subsets of
//! `P ∪ frontier(P)` (`frontier` = nodes whose parents all lie in `P`) that
//! retain the new nodes' parents, so enumerating those subsets loses
//! nothing. Pure-removal steps are dropped in the black game: folding a
//! removal-only step into the next placement yields pointwise-smaller
//! configurations and never breaks legality, so it cannot hurt any monotone
//! objective. The black/white game keeps removal-only transitions (the final
//! configuration must shed its white pebbles), and uses the unrestricted
//! successor relation at a smaller size cap.

use crate::graph::{Dag, Node};
use crate::nodeset::NodeSet;
use crate::pebbling::{self, BwPebbling, Mode, Pebbling};
use serde::Serialize;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    MinSpace,
    MinCc,
    /// Minimum number of steps holding at least `s` pebbles.
    MinSs(u32),
    MinBwCc,
}

#[derive(Debug, Clone)]
pub struct Limits {
    pub max_nodes_seq: usize,
    pub max_nodes_par: usize,
    pub max_nodes_bw: usize,
    /// Abort (with partial bounds) after this many edge relaxations.
    pub edge_budget: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_nodes_seq: 14,
            max_nodes_par: 12,
            max_nodes_bw: 8,
            edge_budget: 200_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Witness {
    Black(Pebbling),
    Bw(BwPebbling),
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub objective: Objective,
    pub mode: Mode,
    pub value: u64,
    pub witness: Witness,
    pub explored_states: u64,
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("graph has {n} nodes, above the exact-search cap {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("search budget exhausted after {explored} states (value in [{lower_bound}, {}])",
            upper_bound.map(|u| u.to_string()).unwrap_or_else(|| "?".into()))]
    Budget {
        explored: u64,
        lower_bound: u64,
        upper_bound: Option<u64>,
    },
}

struct Search {
    n: usize,
    parent_mask: Vec<u32>,
    /// `placeable[mask]`: nodes whose parents are all inside `mask`.
    placeable: Vec<u32>,
    targets: Vec<Node>,
    full_cov: u32,
    budget: u64,
    relaxations: u64,
}

impl Search {
    fn new(g: &Dag, budget: u64) -> Search {
        let n = g.n();
        let mut parent_mask = vec![0u32; n];
        for v in 1..=n {
            for &u in g.parent_list(v as Node) {
                parent_mask[v - 1] |= 1 << (u - 1);
            }
        }
        let mut placeable = vec![0u32; 1 << n];
        for (mask, slot) in placeable.iter_mut().enumerate() {
            let mut p = 0u32;
            for (x, pm) in parent_mask.iter().enumerate() {
                if pm & !(mask as u32) == 0 {
                    p |= 1 << x;
                }
            }
            *slot = p;
        }
        let targets: Vec<Node> = g.sinks().to_vec();
        let full_cov = if targets.is_empty() {
            0
        } else {
            (1u32 << targets.len()) - 1
        };
        Search {
            n,
            parent_mask,
            placeable,
            targets,
            full_cov,
            budget,
            relaxations: 0,
        }
    }

    fn cov_of(&self, mask: u32) -> u32 {
        let mut c = 0u32;
        for (j, &t) in self.targets.iter().enumerate() {
            if mask >> (t - 1) & 1 == 1 {
                c |= 1 << j;
            }
        }
        c
    }

    fn key(&self, mask: u32, cov: u32) -> u64 {
        mask as u64 | (cov as u64) << self.n
    }

    fn mask_of(&self, key: u64) -> u32 {
        (key & ((1u64 << self.n) - 1)) as u32
    }

    fn cov_of_key(&self, key: u64) -> u32 {
        (key >> self.n) as u32
    }

    /// Enumerate successor configurations of `mask` in ascending mask order,
    /// excluding pure removals. New pebbles keep their parents in the
    /// successor configuration.
    fn for_each_successor(&self, mode: Mode, mask: u32, mut f: impl FnMut(u32)) {
        match mode {
            Mode::Sequential => {
                let cands = self.placeable[mask as usize] & !mask;
                let mut x_bits = cands;
                while x_bits != 0 {
                    let xb = x_bits & x_bits.wrapping_neg();
                    let x = x_bits.trailing_zeros() as usize;
                    x_bits &= x_bits - 1;
                    let keep = self.parent_mask[x] | xb;
                    let free = mask & !self.parent_mask[x];
                    // Ascending subset enumeration of the droppable part.
                    let mut sub = 0u32;
                    loop {
                        f(sub | keep);
                        sub = sub.wrapping_sub(free) & free;
                        if sub == 0 {
                            break;
                        }
                    }
                }
            }
            Mode::Parallel => {
                let pf = self.placeable[mask as usize] & !mask;
                if pf == 0 {
                    return;
                }
                let union = mask | pf;
                let mut sub = 0u32;
                loop {
                    let new = sub & pf;
                    if new != 0 {
                        // Parents of every new pebble must survive the step.
                        let mut ok = true;
                        let mut nb = new;
                        while nb != 0 {
                            let x = nb.trailing_zeros() as usize;
                            nb &= nb - 1;
                            if self.parent_mask[x] & !sub != 0 {
                                ok = false;
                                break;
                            }
                        }
                        if ok {
                            f(sub);
                        }
                    }
                    sub = sub.wrapping_sub(union) & union;
                    if sub == 0 {
                        break;
                    }
                }
            }
        }
    }

    fn reconstruct(&self, parent: &HashMap<u64, u64>, goal: u64, mode: Mode) -> Pebbling {
        let mut keys = vec![goal];
        let mut k = goal;
        while k != 0 {
            k = parent[&k];
            keys.push(k);
        }
        keys.reverse();
        let steps: Vec<NodeSet> = keys
            .iter()
            .map(|&k| {
                NodeSet::from_nodes(
                    self.n,
                    (1..=self.n as Node).filter(|&v| self.mask_of(k) >> (v - 1) & 1 == 1),
                )
            })
            .collect();
        Pebbling {
            mode,
            steps,
            target: None,
        }
    }

    /// Bounded-space reachability: can every target be covered while never
    /// holding more than `cap` pebbles?
    fn space_bounded_search(
        &mut self,
        mode: Mode,
        cap: u32,
    ) -> Result<Option<(Pebbling, u64)>, OracleError> {
        let start = 0u64;
        if self.full_cov == 0 {
            return Ok(Some((self.reconstruct(&HashMap::new(), start, mode), 1)));
        }
        let mut parent: HashMap<u64, u64> = HashMap::new();
        let mut seen: HashMap<u64, ()> = HashMap::new();
        seen.insert(start, ());
        let mut queue = VecDeque::from([start]);
        let mut explored = 0u64;
        let mut succ: Vec<u32> = Vec::new();
        while let Some(key) = queue.pop_front() {
            explored += 1;
            let mask = self.mask_of(key);
            let cov = self.cov_of_key(key);
            succ.clear();
            self.for_each_successor(mode, mask, |q| {
                if q.count_ones() <= cap {
                    succ.push(q);
                }
            });
            self.relaxations += succ.len() as u64;
            for &q in &succ {
                let cov2 = cov | self.cov_of(q);
                let k2 = self.key(q, cov2);
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(k2) {
                    e.insert(());
                    parent.insert(k2, key);
                    if cov2 == self.full_cov {
                        return Ok(Some((self.reconstruct(&parent, k2, mode), explored)));
                    }
                    queue.push_back(k2);
                }
            }
            if self.relaxations > self.budget {
                return Err(OracleError::Budget {
                    explored,
                    lower_bound: 0,
                    upper_bound: None,
                });
            }
        }
        Ok(None)
    }

    /// Least-cost-first search for per-step cost `cost(Q)`.
    fn dijkstra(
        &mut self,
        mode: Mode,
        cost: impl Fn(u32) -> u64,
    ) -> Result<(u64, Pebbling, u64), OracleError> {
        let start = 0u64;
        if self.full_cov == 0 {
            return Ok((0, self.reconstruct(&HashMap::new(), start, mode), 1));
        }
        let mut dist: HashMap<u64, u64> = HashMap::from([(start, 0)]);
        let mut parent: HashMap<u64, u64> = HashMap::new();
        let mut heap = BinaryHeap::from([Reverse((0u64, start))]);
        let mut explored = 0u64;
        let mut best_goal: Option<u64> = None;
        while let Some(Reverse((d, key))) = heap.pop() {
            if dist.get(&key) != Some(&d) {
                continue;
            }
            explored += 1;
            let cov = self.cov_of_key(key);
            if cov == self.full_cov {
                return Ok((d, self.reconstruct(&parent, key, mode), explored));
            }
            let mask = self.mask_of(key);
            let mut relax: Vec<(u64, u64)> = Vec::new();
            self.for_each_successor(mode, mask, |q| {
                let k2 = self.key(q, cov | self.cov_of(q));
                relax.push((k2, d + cost(q)));
            });
            self.relaxations += relax.len() as u64;
            for (k2, nd) in relax {
                if dist.get(&k2).is_none_or(|&old| nd < old) {
                    dist.insert(k2, nd);
                    parent.insert(k2, key);
                    if self.cov_of_key(k2) == self.full_cov {
                        best_goal = Some(best_goal.map_or(nd, |b: u64| b.min(nd)));
                    }
                    heap.push(Reverse((nd, k2)));
                }
            }
            if self.relaxations > self.budget {
                return Err(OracleError::Budget {
                    explored,
                    lower_bound: d,
                    upper_bound: best_goal,
                });
            }
        }
        // Target set is nonempty and every node is eventually placeable in a
        // DAG, so the search space always contains a covering path.
        unreachable!("configuration graph of a DAG always reaches its targets")
    }
}

/// Exact optimum with witness. `mode` is ignored for [`Objective::MinBwCc`]
/// (that game is parallel-black sequential-white by definition).
pub fn brute_force(
    g: &Dag,
    objective: Objective,
    mode: Mode,
    limits: &Limits,
) -> Result<OracleResult, OracleError> {
    let n = g.n();
    let cap = match objective {
        Objective::MinBwCc => limits.max_nodes_bw,
        _ => match mode {
            Mode::Sequential => limits.max_nodes_seq,
            Mode::Parallel => limits.max_nodes_par,
        },
    };
    if n > cap.min(31) {
        return Err(OracleError::TooLarge { n, cap: cap.min(31) });
    }
    if let Objective::MinBwCc = objective {
        return bw_brute_force(g, limits);
    }

    let mut search = Search::new(g, limits.edge_budget);
    match objective {
        Objective::MinSpace => {
            let mut explored_total = 0u64;
            if search.full_cov == 0 {
                let witness = search.reconstruct(&HashMap::new(), 0, mode);
                return Ok(OracleResult {
                    objective,
                    mode,
                    value: 0,
                    witness: Witness::Black(witness),
                    explored_states: 1,
                });
            }
            let needed = g.ancestors_closed(&g.sinks());
            // Placing v forces its parents and v itself to coexist.
            let lb = needed
                .iter()
                .map(|v| g.indeg_of(v) + 1)
                .max()
                .unwrap_or(1) as u32;
            for cap in lb..=n as u32 {
                if let Some((witness, explored)) = search.space_bounded_search(mode, cap)? {
                    explored_total += explored;
                    let m = pebbling::metrics(g, &witness).expect("oracle witness must be legal");
                    debug_assert_eq!(m.space, cap as u64);
                    return Ok(OracleResult {
                        objective,
                        mode,
                        value: cap as u64,
                        witness: Witness::Black(witness),
                        explored_states: explored_total,
                    });
                }
            }
            unreachable!("every DAG can be pebbled with n pebbles")
        }
        Objective::MinCc => {
            let (value, witness, explored) = search.dijkstra(mode, |q| q.count_ones() as u64)?;
            debug_assert!(pebbling::validate(g, &witness).is_ok());
            debug_assert_eq!(pebbling::metrics_unchecked(&witness).cc, value);
            Ok(OracleResult {
                objective,
                mode,
                value,
                witness: Witness::Black(witness),
                explored_states: explored,
            })
        }
        Objective::MinSs(s) => {
            // Fast path: if the targets are coverable without ever reaching
            // `s` pebbles the sustained count is zero.
            if s >= 1 {
                if let Some((witness, explored)) =
                    search.space_bounded_search(mode, s.saturating_sub(1))?
                {
                    debug_assert!(pebbling::validate(g, &witness).is_ok());
                    return Ok(OracleResult {
                        objective,
                        mode,
                        value: 0,
                        witness: Witness::Black(witness),
                        explored_states: explored,
                    });
                }
            }
            let (value, witness, explored) =
                search.dijkstra(mode, |q| u64::from(q.count_ones() >= s))?;
            debug_assert!(pebbling::validate(g, &witness).is_ok());
            debug_assert_eq!(pebbling::metrics_unchecked(&witness).ss(s as u64), value);
            Ok(OracleResult {
                objective,
                mode,
                value,
                witness: Witness::Black(witness),
                explored_states: explored,
            })
        }
        Objective::MinBwCc => unreachable!(),
    }
}

/// Exact minimum sequential pebbling space. The CLI reports it against the
/// `n / log2 n` reference curve for constant-indegree graphs.
pub fn sequential_space_bound(g: &Dag, limits: &Limits) -> Result<u64, OracleError> {
    Ok(brute_force(g, Objective::MinSpace, Mode::Sequential, limits)?.value)
}

// ---------------------------------------------------------------------------
// Black/white search

fn bw_brute_force(g: &Dag, limits: &Limits) -> Result<OracleResult, OracleError> {
    let n = g.n();
    let search = Search::new(g, limits.edge_budget);
    let full_cov = search.full_cov;
    let key = |b: u32, w: u32, cov: u32| -> u64 {
        b as u64 | (w as u64) << n | (cov as u64) << (2 * n)
    };
    let reconstruct = |parent: &HashMap<u64, u64>, goal: u64| -> BwPebbling {
        let mut keys = vec![goal];
        let mut k = goal;
        while k != 0 {
            k = parent[&k];
            keys.push(k);
        }
        keys.reverse();
        let low = (1u64 << n) - 1;
        BwPebbling {
            steps: keys
                .iter()
                .map(|&k| {
                    let b = (k & low) as u32;
                    let w = (k >> n & low) as u32;
                    (
                        NodeSet::from_nodes(n, (1..=n as Node).filter(|&v| b >> (v - 1) & 1 == 1)),
                        NodeSet::from_nodes(n, (1..=n as Node).filter(|&v| w >> (v - 1) & 1 == 1)),
                    )
                })
                .collect(),
            target: None,
        }
    };

    if full_cov == 0 {
        return Ok(OracleResult {
            objective: Objective::MinBwCc,
            mode: Mode::Parallel,
            value: 0,
            witness: Witness::Bw(reconstruct(&HashMap::new(), 0)),
            explored_states: 1,
        });
    }

    let mut dist: HashMap<u64, u64> = HashMap::from([(0, 0)]);
    let mut parent: HashMap<u64, u64> = HashMap::new();
    let mut heap = BinaryHeap::from([Reverse((0u64, 0u64))]);
    let mut explored = 0u64;
    let mut relaxations = 0u64;
    let mut best_goal: Option<u64> = None;

    while let Some(Reverse((d, k))) = heap.pop() {
        if dist.get(&k) != Some(&d) {
            continue;
        }
        explored += 1;
        let low = (1u64 << n) - 1;
        let b = (k & low) as u32;
        let w = (k >> n & low) as u32;
        let cov = (k >> (2 * n)) as u32;
        if cov == full_cov && w == 0 {
            let witness = reconstruct(&parent, k);
            debug_assert!(pebbling::validate_bw(g, &witness).is_ok());
            debug_assert_eq!(pebbling::metrics_bw_unchecked(&witness).bw_cc, Some(d));
            return Ok(OracleResult {
                objective: Objective::MinBwCc,
                mode: Mode::Parallel,
                value: d,
                witness: Witness::Bw(witness),
                explored_states: explored,
            });
        }

        let all = b | w;
        let pf = search.placeable[all as usize] & !all;
        // Removable whites: parents pebbled (black or white) at this step.
        let mut wrm = 0u32;
        let mut wbits = w;
        while wbits != 0 {
            let x = wbits.trailing_zeros();
            wbits &= wbits - 1;
            if search.parent_mask[x as usize] & !all == 0 {
                wrm |= 1 << x;
            }
        }

        let mut relax: Vec<(u64, u64)> = Vec::new();
        // New blacks ⊆ pf, kept blacks ⊆ b, removed whites ⊆ wrm, plus at
        // most one fresh white on a node that is neither pebbled now nor
        // receiving a black.
        let mut new_b = 0u32;
        loop {
            let mut keep_b = 0u32;
            loop {
                let b2 = keep_b | new_b;
                let mut rm = 0u32;
                loop {
                    let wkeep = w & !rm;
                    let fresh_candidates = !(all | b2) & ((1u32 << n) - 1);
                    // Option: no new white.
                    let mut choose = |wnew: u32| {
                        let w2 = wkeep | wnew;
                        if (b2, w2) == (b, w) {
                            return;
                        }
                        let u2 = b2 | w2;
                        // New blacks keep their parents through the step.
                        let mut nb = new_b;
                        while nb != 0 {
                            let x = nb.trailing_zeros() as usize;
                            nb &= nb - 1;
                            if search.parent_mask[x] & !u2 != 0 {
                                return;
                            }
                        }
                        let cov2 = cov | search.cov_of(u2);
                        relax.push((key(b2, w2, cov2), d + u2.count_ones() as u64));
                    };
                    choose(0);
                    let mut fc = fresh_candidates;
                    while fc != 0 {
                        let xb = fc & fc.wrapping_neg();
                        fc &= fc - 1;
                        choose(xb);
                    }
                    rm = rm.wrapping_sub(wrm) & wrm;
                    if rm == 0 {
                        break;
                    }
                }
                keep_b = keep_b.wrapping_sub(b) & b;
                if keep_b == 0 {
                    break;
                }
            }
            new_b = new_b.wrapping_sub(pf) & pf;
            if new_b == 0 {
                break;
            }
        }

        relaxations += relax.len() as u64;
        for (k2, nd) in relax {
            if dist.get(&k2).is_none_or(|&old| nd < old) {
                dist.insert(k2, nd);
                parent.insert(k2, k);
                let c2 = (k2 >> (2 * n)) as u32;
                if c2 == full_cov && (k2 >> n & ((1u64 << n) - 1)) == 0 {
                    best_goal = Some(best_goal.map_or(nd, |bst: u64| bst.min(nd)));
                }
                heap.push(Reverse((nd, k2)));
            }
        }
        if relaxations > limits.edge_budget {
            return Err(OracleError::Budget {
                explored,
                lower_bound: d,
                upper_bound: best_goal,
            });
        }
    }
    unreachable!("black/white configuration graph of a DAG always reaches its targets")
}
