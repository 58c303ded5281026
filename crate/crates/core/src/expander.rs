//! Sampled bipartite expanders and local-expander DAGs.
//!
//! A bipartite graph on sides `A = B = [m]` is a δ-expander when every pair
//! of subsets `X ⊆ A`, `Y ⊆ B` with `|X|, |Y| >= δm` spans an edge. A DAG on
//! `[n]` is a δ-local expander when, for every position `x` and radius `r`
//! (with both intervals in range), every pair `A ⊆ {x-r+1..x}`,
//! `B ⊆ {x+1..x+r}` of size at least `δr` spans an edge.
//!
//! The builder overlays one sampled (δ/10)-expander per block scale `2^j`
//! onto all block pairs at distance up to 10, and adds the deterministic
//! short edges `(u, u+k)`, `k <= short_edge_span`. Small-scale blocks are
//! resampled until they pass exact verification; large scales are sampled
//! once (their failure probability vanishes in the block size and the built
//! graph can still be checked exhaustively at small radii).

use crate::combinatorics::{binomial, Combinations};
use crate::graph::{Dag, Node};
use crate::nodeset::NodeSet;
use crate::recipe::{LocalExpanderRecipe, Recipe};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Mutex;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpanderError {
    #[error("degree cap must be at least 1")]
    DegreeCapZero,
    #[error("delta {0} outside (0, 1)")]
    BadDelta(f64),
    #[error("side size {m} too large for exact verification (cap {cap})")]
    TooLargeForExactCheck { m: u32, cap: u32 },
    #[error("verification needs {needed} subset enumerations, budget is {budget}")]
    EnumerationBudget { needed: u128, budget: u128 },
}

/// Least integer `>= delta * r` (clamped to at least 1 for `r >= 1`).
pub fn ceil_frac(delta: f64, r: u32) -> u32 {
    let k = (delta * r as f64 - 1e-9).ceil() as i64;
    k.max(1) as u32
}

/// Default smallest certified side size for a δ-expander.
pub fn default_m_delta(delta: f64) -> u32 {
    (4.0 / delta - 1e-9).ceil() as u32
}

/// Default per-node sample count for a δ-expander.
pub fn default_degree_cap(delta: f64) -> u32 {
    ((8.0 / delta) * (std::f64::consts::E / delta).ln() - 1e-9).ceil() as u32
}

#[derive(Debug, Clone)]
pub struct BipartiteExpander {
    pub m: u32,
    pub delta: f64,
    pub degree_cap: u32,
    pub seed: u64,
    /// `parents_of_b[b-1]`: A-side neighbours of B-node `b`, ascending.
    parents_of_b: Vec<Vec<u32>>,
    pub verified: bool,
}

impl BipartiteExpander {
    pub fn parents_of(&self, b: u32) -> &[u32] {
        &self.parents_of_b[(b - 1) as usize]
    }

    /// Edges `(a, b)` in lexicographic order.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        for (bi, parents) in self.parents_of_b.iter().enumerate() {
            for &a in parents {
                out.push((a, bi as u32 + 1));
            }
        }
        out.sort_unstable();
        out
    }

    /// Realized maximum degree on the B side.
    pub fn max_indeg(&self) -> u32 {
        self.parents_of_b.iter().map(|p| p.len() as u32).max().unwrap_or(0)
    }

    /// Exact verification; sets the `verified` flag on success.
    pub fn verify(&mut self) -> Result<Option<BipartiteCex>, ExpanderError> {
        let r = verify_bipartite(self)?;
        if r.is_none() {
            self.verified = true;
        }
        Ok(r)
    }
}

/// Subset pair witnessing non-expansion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BipartiteCex {
    pub x_side: Vec<u32>,
    pub y_side: Vec<u32>,
}

/// Each B-node draws `degree_cap` A-parents uniformly with replacement;
/// duplicates collapse, so realized degree may be smaller.
pub fn sample_bipartite(
    m: u32,
    delta: f64,
    degree_cap: u32,
    seed: u64,
) -> Result<BipartiteExpander, ExpanderError> {
    if degree_cap == 0 {
        return Err(ExpanderError::DegreeCapZero);
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ExpanderError::BadDelta(delta));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_bipartite_rng(m, delta, degree_cap, seed, &mut rng))
}

fn sample_bipartite_rng(
    m: u32,
    delta: f64,
    degree_cap: u32,
    seed: u64,
    rng: &mut impl Rng,
) -> BipartiteExpander {
    let mut parents_of_b = Vec::with_capacity(m as usize);
    for _ in 0..m {
        let mut parents = BTreeSet::new();
        for _ in 0..degree_cap {
            parents.insert(rng.gen_range(1..=m));
        }
        parents_of_b.push(parents.into_iter().collect());
    }
    BipartiteExpander {
        m,
        delta,
        degree_cap,
        seed,
        parents_of_b,
        verified: false,
    }
}

const EXACT_CHECK_CAP: u32 = 24;

/// Exhaustive check over all `X, Y` of size exactly `ceil(delta * m)`;
/// larger sets contain these, so this size suffices. For a fixed `X` a bad
/// `Y` exists iff at least `ceil(delta * m)` B-nodes remain uncovered by the
/// neighbourhood of `X`.
pub fn verify_bipartite(t: &BipartiteExpander) -> Result<Option<BipartiteCex>, ExpanderError> {
    if t.m > EXACT_CHECK_CAP {
        return Err(ExpanderError::TooLargeForExactCheck {
            m: t.m,
            cap: EXACT_CHECK_CAP,
        });
    }
    let m = t.m;
    let k = ceil_frac(t.delta, m).min(m);
    // children_of_a[a-1]: bitmask of B-neighbours.
    let mut children = vec![0u32; m as usize];
    for (bi, parents) in t.parents_of_b.iter().enumerate() {
        for &a in parents {
            children[(a - 1) as usize] |= 1 << bi;
        }
    }
    let full = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let mut combos = Combinations::new(m, k);
    while let Some(x) = combos.next_subset() {
        let mut cover = 0u32;
        for &a in x {
            cover |= children[(a - 1) as usize];
        }
        let uncovered = full & !cover;
        if uncovered.count_ones() >= k {
            let mut y = Vec::with_capacity(k as usize);
            let mut bits = uncovered;
            for _ in 0..k {
                let b = bits.trailing_zeros() + 1;
                bits &= bits - 1;
                y.push(b);
            }
            return Ok(Some(BipartiteCex {
                x_side: x.to_vec(),
                y_side: y,
            }));
        }
    }
    Ok(None)
}

/// Builder output: recipe fields are also embedded in the graph metadata.
pub fn build_local_expander(
    n: usize,
    delta: f64,
    seed: u64,
) -> Result<(Dag, LocalExpanderRecipe), ExpanderError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ExpanderError::BadDelta(delta));
    }
    let m_small = default_m_delta(delta);
    let m_big = default_m_delta(delta / 10.0);
    let degree_cap = default_degree_cap(delta / 10.0);
    let log_n = if n <= 1 { 0.0 } else { (n as f64).log2() };
    let span = m_big.max((4.0 * log_n - 1e-9).ceil() as u32).max(1);

    let mut edges: BTreeSet<(Node, Node)> = BTreeSet::new();
    for u in 1..=n as Node {
        for k in 1..=span {
            let v = u + k;
            if v as usize > n {
                break;
            }
            edges.insert((u, v));
        }
    }

    let j_lo = 31 - m_small.leading_zeros(); // floor(log2(m_small))
    let mut j_hi = j_lo;
    let mut scales = 0u32;
    let mut resamples = 0u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut j = j_lo + 1;
    while (1usize << j) < n {
        let bs = 1u32 << j;
        let mut t = sample_bipartite_rng(bs, delta / 10.0, degree_cap, seed, &mut rng);
        if bs <= 16 {
            // Certify small blocks by resampling until the exact check passes.
            while t.verify()?.is_some() {
                resamples += 1;
                t = sample_bipartite_rng(bs, delta / 10.0, degree_cap, seed, &mut rng);
            }
        }
        let block_edges = t.edges();
        let blocks = (n as u32).div_ceil(bs);
        for a_idx in 0..blocks {
            for off in 1..=10u32 {
                let b_idx = a_idx + off;
                if b_idx >= blocks {
                    break;
                }
                for &(a, b) in &block_edges {
                    let u = a_idx * bs + a;
                    let v = b_idx * bs + b;
                    if v as usize <= n {
                        edges.insert((u, v));
                    }
                }
            }
        }
        j_hi = j;
        scales += 1;
        j += 1;
    }

    let edge_vec: Vec<(Node, Node)> = edges.into_iter().collect();
    let g = Dag::from_edges(n, &edge_vec).expect("builder emits ordered edges");
    let recipe = LocalExpanderRecipe {
        n: n as u32,
        delta,
        seed,
        m_delta: m_small,
        m_delta_tenth: m_big,
        degree_cap,
        j_lo,
        j_hi,
        short_edge_span: span,
        resamples,
        indeg_bound: 10 * degree_cap * scales + span,
        indeg: g.indeg() as u32,
    };
    let g = g.with_recipe(Recipe::LocalExpander(recipe.clone()));
    Ok((g, recipe))
}

/// Counterexample to local expansion at `(x, r)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalExpanderCex {
    pub x: Node,
    pub r: u32,
    pub a_side: Vec<Node>,
    pub b_side: Vec<Node>,
}

#[derive(Debug, Clone)]
pub struct VerifyOpts {
    /// Radii are checked for `r <= r_max` (and only where both intervals fit).
    pub r_max: u32,
    pub max_enumerations: u128,
    pub jobs: usize,
}

impl Default for VerifyOpts {
    fn default() -> Self {
        VerifyOpts {
            r_max: u32::MAX,
            max_enumerations: 50_000_000,
            jobs: 1,
        }
    }
}

/// Exhaustive δ-local-expansion check for all positions and radii up to
/// `opts.r_max`: for every `A` of size exactly `ceil(delta*r)` the uncovered
/// part of the right interval must stay below that size. The verdict is a
/// full one only when `r_max` reaches the maximum radius. Results are
/// independent of `opts.jobs`.
pub fn verify_local_expander(
    g: &Dag,
    delta: f64,
    opts: &VerifyOpts,
) -> Result<Option<LocalExpanderCex>, ExpanderError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ExpanderError::BadDelta(delta));
    }
    let n = g.n();
    let mut needed: u128 = 0;
    for x in 1..=n as u32 {
        let rmax = opts.r_max.min(x).min(n as u32 - x);
        for r in 1..=rmax {
            needed += binomial(r as u64, ceil_frac(delta, r) as u64);
        }
    }
    if needed > opts.max_enumerations {
        return Err(ExpanderError::EnumerationBudget {
            needed,
            budget: opts.max_enumerations,
        });
    }

    let children: Vec<NodeSet> = (0..=n)
        .map(|v| {
            if v == 0 {
                NodeSet::empty(n)
            } else {
                NodeSet::from_nodes(n, g.child_list(v as Node).iter().copied())
            }
        })
        .collect();

    let check_x = |x: u32| -> Option<LocalExpanderCex> {
        let rmax = opts.r_max.min(x).min(n as u32 - x);
        for r in 1..=rmax {
            let k = ceil_frac(delta, r);
            let right = NodeSet::from_nodes(n, x + 1..=x + r);
            let mut combos = Combinations::new(r, k);
            while let Some(idx) = combos.next_subset() {
                let mut cover = NodeSet::empty(n);
                for &i in idx {
                    cover.union_with(&children[(x - r + i) as usize]);
                }
                let uncovered = right.difference(&cover);
                if uncovered.len() >= k as usize {
                    return Some(LocalExpanderCex {
                        x,
                        r,
                        a_side: idx.iter().map(|&i| x - r + i).collect(),
                        b_side: uncovered.iter().take(k as usize).collect(),
                    });
                }
            }
        }
        None
    };

    let jobs = opts.jobs.max(1).min(n.max(1));
    if jobs == 1 {
        for x in 1..=n as u32 {
            if let Some(cex) = check_x(x) {
                return Ok(Some(cex));
            }
        }
        return Ok(None);
    }

    let best_x = AtomicU32::new(u32::MAX);
    let found: Mutex<Vec<LocalExpanderCex>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for worker in 0..jobs {
            let check_x = &check_x;
            let best_x = &best_x;
            let found = &found;
            scope.spawn(move || {
                let mut x = worker as u32 + 1;
                while x <= n as u32 {
                    if x >= best_x.load(Ordering::Relaxed) {
                        break;
                    }
                    if let Some(cex) = check_x(x) {
                        best_x.fetch_min(x, Ordering::Relaxed);
                        found.lock().unwrap().push(cex);
                        break;
                    }
                    x += jobs as u32;
                }
            });
        }
    });
    let mut cexs = found.into_inner().unwrap();
    cexs.sort_by_key(|c| c.x);
    Ok(cexs.into_iter().next())
}
