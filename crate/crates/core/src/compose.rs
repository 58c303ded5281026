//! Overlay composition and base-graph providers.
//!
//! The main construction attaches an indegree-reduced extreme depth-robust
//! DAG to the sources of a high-space base graph: the terminal of the v-th
//! metanode is *identified* with the v-th source (ascending on both sides),
//! so sources gain exactly one in-edge and the composed graph keeps
//! indegree 2.
//!
//! Base graphs are pluggable. The provider named by the underlying
//! literature is a superconcentrator stack; its internals are not pinned
//! down there, so this module ships a documented best-effort recursive
//! construction (sampled concentrators + matching, certified at desk scale
//! by a vertex-disjoint-flow oracle) next to a brute-force-certified search
//! over small indegree-2 graphs, and accepts external files.

use crate::combinatorics::{binomial, Combinations};
use crate::graph::{Dag, Node};
use crate::nodeset::NodeSet;
use crate::oracle::{self, OracleError};
use crate::recipe::{OverlayRecipe, Recipe, ScRecipe};
use crate::reduce::reduce_dr;
use crate::depth_robust::build_extreme_dr;
use crate::expander::ExpanderError;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error("base graph violates invariants: {0}")]
    BaseInvariant(String),
    #[error("no base of the requested kind is available at size {n}: {reason}")]
    UnavailableBaseSize { n: usize, reason: String },
    #[error(transparent)]
    Expander(#[from] ExpanderError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum BaseProvenance {
    /// Winner of a search over small indegree-2 DAGs, with its exact
    /// sequential pebbling space recorded.
    CertifiedSmall { space_bound: u32 },
    /// Stacked recursive superconcentrators, reduced to indegree 2;
    /// flow-certified only at desk scale.
    ScStack {
        m: u32,
        layers: u32,
        certificate: Option<ScCertificate>,
    },
    External,
}

#[derive(Debug, Clone)]
pub struct BaseGraph {
    pub dag: Dag,
    pub provenance: BaseProvenance,
}

impl BaseGraph {
    pub fn new(dag: Dag, provenance: BaseProvenance) -> Result<BaseGraph, ComposeError> {
        if dag.n() == 0 {
            return Err(ComposeError::BaseInvariant("empty base".into()));
        }
        if dag.indeg() > 2 {
            return Err(ComposeError::BaseInvariant(format!(
                "indegree {} exceeds 2",
                dag.indeg()
            )));
        }
        Ok(BaseGraph { dag, provenance })
    }

    pub fn sources(&self) -> NodeSet {
        self.dag.sources()
    }
}

#[derive(Debug, Clone)]
pub struct OverlayResult {
    pub dag: Dag,
    pub base: BaseGraph,
    /// `(base source id, composed node id)` pairs, ascending in both
    /// components; the composed id is the metanode terminal `2*delta*v`.
    pub overlay_map: Vec<(Node, Node)>,
    pub epsilon: f64,
    pub seed: u64,
    /// Indegree of the extreme depth-robust graph before reduction.
    pub delta: u32,
}

/// Compose: build an extreme depth-robust DAG on the base's source count,
/// reduce it to indegree 2, and identify each metanode terminal with the
/// corresponding base source.
pub fn overlay(base: BaseGraph, epsilon: f64, seed: u64) -> Result<OverlayResult, ComposeError> {
    let sources: Vec<Node> = base.sources().to_vec();
    let m = sources.len();
    if m == 0 {
        return Err(ComposeError::BaseInvariant("base has no sources".into()));
    }
    let dr = build_extreme_dr(m, epsilon, seed)?;
    let delta = dr.indeg().max(1) as u32;
    let (j_graph, _map) = reduce_dr(&dr);
    let nj = j_graph.n(); // 2 * m * delta
    let bn = base.dag.n();

    // Composed numbering: the reduced graph keeps its ids 1..=nj (terminal of
    // metanode v is 2*delta*v, which *is* the v-th base source); base
    // non-sources follow in base order.
    let mut base_to_comp = vec![0 as Node; bn + 1];
    let mut source_rank = vec![0usize; bn + 1];
    for (i, &s) in sources.iter().enumerate() {
        source_rank[s as usize] = i + 1;
    }
    let mut next = nj as Node;
    for b in 1..=bn as Node {
        if source_rank[b as usize] > 0 {
            base_to_comp[b as usize] = (source_rank[b as usize] as Node) * 2 * delta;
        } else {
            next += 1;
            base_to_comp[b as usize] = next;
        }
    }
    let n_comp = next as usize;
    debug_assert_eq!(n_comp, bn + m * (2 * delta as usize - 1));

    let mut edges = j_graph.edges();
    for (u, v) in base.dag.edges() {
        edges.push((base_to_comp[u as usize], base_to_comp[v as usize]));
    }
    let composed = Dag::from_edges(n_comp, &edges)
        .expect("overlay numbering is topological");
    debug_assert!(composed.indeg() <= 2);

    let recipe = Recipe::MainOverlay(Box::new(OverlayRecipe {
        epsilon,
        seed,
        delta,
        base_sources: m as u32,
        base: base.dag.recipe().cloned().unwrap_or(Recipe::External),
    }));
    let composed = composed.with_recipe(recipe);
    let overlay_map = sources
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, (i as Node + 1) * 2 * delta))
        .collect();
    Ok(OverlayResult {
        dag: composed,
        base,
        overlay_map,
        epsilon,
        seed,
        delta,
    })
}

// ---------------------------------------------------------------------------
// Superconcentrators

const SC_DEGREE: u32 = 5;
const SC_BASE_CASE: usize = 4;

struct ScBuilder {
    rng: ChaCha8Rng,
    edges: Vec<(Node, Node)>,
    next_id: Node,
    levels: u32,
}

impl ScBuilder {
    fn alloc(&mut self, count: usize) -> Vec<Node> {
        let ids = (self.next_id + 1..=self.next_id + count as Node).collect();
        self.next_id += count as Node;
        ids
    }

    /// Sampled bipartite layer: each `to`-node picks `SC_DEGREE` distinct
    /// parents in `from` (or all of them when `from` is small).
    fn concentrator(&mut self, from: &[Node], to: &[Node]) {
        for &t in to {
            if from.len() <= SC_DEGREE as usize {
                for &f in from {
                    self.edges.push((f, t));
                }
            } else {
                let mut picks: Vec<Node> = from.to_vec();
                picks.shuffle(&mut self.rng);
                picks.truncate(SC_DEGREE as usize);
                picks.sort_unstable();
                for f in picks {
                    self.edges.push((f, t));
                }
            }
        }
    }

    fn build(&mut self, m: usize, depth: u32) -> (Vec<Node>, Vec<Node>) {
        self.levels = self.levels.max(depth);
        if m <= SC_BASE_CASE {
            let inputs = self.alloc(m);
            let outputs = self.alloc(m);
            for &i in &inputs {
                for &o in &outputs {
                    self.edges.push((i, o));
                }
            }
            return (inputs, outputs);
        }
        let inputs = self.alloc(m);
        let half = m.div_ceil(2);
        let (a, b) = self.build(half, depth + 1);
        let outputs = self.alloc(m);
        self.concentrator(&inputs, &a);
        self.concentrator(&b, &outputs);
        for (i, o) in inputs.iter().zip(&outputs) {
            self.edges.push((*i, *o));
        }
        (inputs, outputs)
    }
}

/// Recursive superconcentrator: inputs feed a sampled concentrator into a
/// half-size recursive instance and are also matched directly onto the
/// outputs. Inputs are nodes `1..=m`, outputs the last `m` nodes.
pub fn build_superconcentrator(m: usize, seed: u64) -> Result<Dag, ComposeError> {
    if m == 0 {
        return Err(ComposeError::UnavailableBaseSize {
            n: 0,
            reason: "superconcentrator needs m >= 1".into(),
        });
    }
    let mut b = ScBuilder {
        rng: ChaCha8Rng::seed_from_u64(seed),
        edges: Vec::new(),
        next_id: 0,
        levels: 0,
    };
    let (inputs, outputs) = b.build(m, 1);
    let n = b.next_id as usize;
    let g = Dag::from_edges(n, &b.edges).expect("allocation order is topological");
    let recipe = ScRecipe {
        m: m as u32,
        seed,
        degree: SC_DEGREE,
        levels: b.levels,
        inputs: (inputs[0], *inputs.last().unwrap()),
        outputs: (outputs[0], *outputs.last().unwrap()),
    };
    Ok(g.with_recipe(Recipe::Superconcentrator(recipe)))
}

/// Maximum number of vertex-disjoint paths from `sources` to `sinks`
/// (standard node splitting, BFS augmentation), stopping early at `need`.
pub fn vertex_disjoint_paths(g: &Dag, sources: &[Node], sinks: &[Node], need: u32) -> u32 {
    let n = g.n();
    // Split node v into 2v (in) and 2v+1 (out); 0 = super-source, 1 = sink.
    let size = 2 * n + 2;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); size];
    let mut to: Vec<usize> = Vec::new();
    let mut cap: Vec<i32> = Vec::new();
    let mut add = |adj: &mut Vec<Vec<usize>>, u: usize, v: usize, c: i32| {
        adj[u].push(to.len());
        to.push(v);
        cap.push(c);
        adj[v].push(to.len());
        to.push(u);
        cap.push(0);
    };
    for v in 1..=n {
        add(&mut adj, 2 * v, 2 * v + 1, 1);
    }
    for (u, v) in g.edges() {
        add(&mut adj, 2 * u as usize + 1, 2 * v as usize, 1);
    }
    for &s in sources {
        add(&mut adj, 0, 2 * s as usize, 1);
    }
    for &t in sinks {
        add(&mut adj, 2 * t as usize + 1, 1, 1);
    }

    let mut flow = 0u32;
    while flow < need {
        // BFS for an augmenting path.
        let mut pred: Vec<Option<usize>> = vec![None; size];
        let mut queue = std::collections::VecDeque::from([0usize]);
        let mut reached = false;
        'bfs: while let Some(u) = queue.pop_front() {
            for &e in &adj[u] {
                if cap[e] > 0 && pred[to[e]].is_none() && to[e] != 0 {
                    pred[to[e]] = Some(e);
                    if to[e] == 1 {
                        reached = true;
                        break 'bfs;
                    }
                    queue.push_back(to[e]);
                }
            }
        }
        if !reached {
            break;
        }
        let mut v = 1usize;
        while v != 0 {
            let e = pred[v].unwrap();
            cap[e] -= 1;
            cap[e ^ 1] += 1;
            v = to[e ^ 1];
        }
        flow += 1;
    }
    flow
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScCertificate {
    pub m: u32,
    /// All `(A, B)` pairs were checked exhaustively for `k <= exhaustive_k`.
    pub exhaustive_k: u32,
    /// Additional random `(k, A, B)` probes above that.
    pub sampled: u32,
    pub flow_checks: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScCounterexample {
    pub k: u32,
    pub inputs: Vec<Node>,
    pub outputs: Vec<Node>,
    pub achieved: u32,
}

const SC_VERIFY_CAP: usize = 12;

/// Check the vertex-disjoint-paths property: every `k` inputs and `k`
/// outputs are joined by `k` disjoint paths. Exhaustive for
/// `k <= k_exhaustive`, randomly sampled above.
pub fn verify_superconcentrator(
    g: &Dag,
    inputs: &[Node],
    outputs: &[Node],
    k_exhaustive: u32,
    samples: u32,
    seed: u64,
) -> Result<Result<ScCertificate, ScCounterexample>, ComposeError> {
    let m = inputs.len();
    if m != outputs.len() || m == 0 {
        return Err(ComposeError::BaseInvariant(
            "inputs/outputs must be nonempty and equally sized".into(),
        ));
    }
    if m > SC_VERIFY_CAP {
        return Err(ComposeError::UnavailableBaseSize {
            n: m,
            reason: format!("flow verification capped at m <= {SC_VERIFY_CAP}"),
        });
    }
    let mut checks = 0u64;
    let k_exh = k_exhaustive.min(m as u32);
    for k in 1..=k_exh {
        // Guard pathological budgets (cannot trigger at the size cap).
        if binomial(m as u64, k as u64).pow(2) > 10_000_000 {
            return Err(ComposeError::UnavailableBaseSize {
                n: m,
                reason: "exhaustive k too large".into(),
            });
        }
        let mut a_sets = Combinations::new(m as u32, k);
        while let Some(ai) = a_sets.next_subset() {
            let a: Vec<Node> = ai.iter().map(|&i| inputs[(i - 1) as usize]).collect();
            let mut b_sets = Combinations::new(m as u32, k);
            while let Some(bi) = b_sets.next_subset() {
                let b: Vec<Node> = bi.iter().map(|&i| outputs[(i - 1) as usize]).collect();
                checks += 1;
                let f = vertex_disjoint_paths(g, &a, &b, k);
                if f < k {
                    return Ok(Err(ScCounterexample {
                        k,
                        inputs: a,
                        outputs: b,
                        achieved: f,
                    }));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled = 0u32;
    if (k_exh as usize) < m {
        for _ in 0..samples {
            let k = rng.gen_range(k_exh + 1..=m as u32);
            let mut pick = |side: &[Node]| -> Vec<Node> {
                let mut v: Vec<Node> = side.to_vec();
                v.shuffle(&mut rng);
                v.truncate(k as usize);
                v.sort_unstable();
                v
            };
            let a = pick(inputs);
            let b = pick(outputs);
            checks += 1;
            sampled += 1;
            let f = vertex_disjoint_paths(g, &a, &b, k);
            if f < k {
                return Ok(Err(ScCounterexample {
                    k,
                    inputs: a,
                    outputs: b,
                    achieved: f,
                }));
            }
        }
    }
    Ok(Ok(ScCertificate {
        m: m as u32,
        exhaustive_k: k_exh,
        sampled,
        flow_checks: checks,
    }))
}

// ---------------------------------------------------------------------------
// Base providers

/// Stack `layers` superconcentrators in series (outputs identified with the
/// next layer's inputs), then reduce to indegree 2.
pub fn sc_stack_base(m: usize, layers: u32, seed: u64) -> Result<BaseGraph, ComposeError> {
    if m == 0 || layers == 0 {
        return Err(ComposeError::UnavailableBaseSize {
            n: m,
            reason: "stack needs m >= 1 and layers >= 1".into(),
        });
    }
    let mut edges: Vec<(Node, Node)> = Vec::new();
    let mut boundary: Option<Vec<Node>> = None; // previous layer's outputs
    let mut next_id: Node = 0;
    for layer in 0..layers {
        let sc = build_superconcentrator(m, seed.wrapping_add(layer as u64))?;
        let (in_lo, _) = match sc.recipe() {
            Some(Recipe::Superconcentrator(r)) => (r.inputs.0, r.inputs.1),
            _ => unreachable!(),
        };
        debug_assert_eq!(in_lo, 1);
        let out_lo = sc.n() as Node - m as Node + 1;
        // Local ids 1..=m are inputs; map them onto the previous boundary if
        // any, and give every other local node a fresh global id.
        let mut local_to_global = vec![0 as Node; sc.n() + 1];
        for local in 1..=sc.n() as Node {
            if (local as usize) <= m {
                if let Some(prev) = &boundary {
                    local_to_global[local as usize] = prev[(local - 1) as usize];
                    continue;
                }
            }
            next_id += 1;
            local_to_global[local as usize] = next_id;
        }
        for (u, v) in sc.edges() {
            edges.push((local_to_global[u as usize], local_to_global[v as usize]));
        }
        boundary = Some(
            (out_lo..=sc.n() as Node)
                .map(|l| local_to_global[l as usize])
                .collect(),
        );
    }
    let stacked = Dag::from_edges(next_id as usize, &edges)
        .expect("stack numbering is topological");
    let raw_nodes = stacked.n() as u32;
    let (reduced, _map) = crate::reduce::reduce_ss(&stacked);

    let certificate = if m <= 8 {
        let ins: Vec<Node> = reduced.sources().to_vec();
        let outs: Vec<Node> = reduced.sinks().to_vec();
        match verify_superconcentrator(&reduced, &ins, &outs, 3.min(m as u32), 20, seed)? {
            Ok(cert) => Some(cert),
            Err(cex) => {
                return Err(ComposeError::BaseInvariant(format!(
                    "stack failed its own flow certificate: {cex:?}"
                )))
            }
        }
    } else {
        None
    };
    let reduced = reduced.with_recipe(Recipe::ScStack {
        m: m as u32,
        layers,
        seed,
        raw_nodes,
    });
    BaseGraph::new(
        reduced,
        BaseProvenance::ScStack {
            m: m as u32,
            layers,
            certificate,
        },
    )
}

const CERTIFIED_SMALL_EXHAUSTIVE_CAP: usize = 6;
const CERTIFIED_SMALL_CAP: usize = 12;
const CERTIFIED_SMALL_SAMPLES: u64 = 512;

/// Search over indegree-2 DAGs with the requested size and source count,
/// maximizing exact sequential pebbling space (the brute-force bound is
/// recorded). Exhaustive up to 6 nodes, seeded sampling above.
pub fn certified_small_base(
    n: usize,
    sources: usize,
    seed: u64,
) -> Result<BaseGraph, ComposeError> {
    if n == 0 || sources == 0 || sources > n {
        return Err(ComposeError::UnavailableBaseSize {
            n,
            reason: "need 1 <= sources <= n".into(),
        });
    }
    if n > CERTIFIED_SMALL_CAP {
        return Err(ComposeError::UnavailableBaseSize {
            n,
            reason: format!("brute-force scoring capped at n <= {CERTIFIED_SMALL_CAP}"),
        });
    }
    let limits = oracle::Limits::default();
    let mut best: Option<(u32, Dag)> = None;
    let mut candidates = 0u64;
    let exhaustive = n <= CERTIFIED_SMALL_EXHAUSTIVE_CAP;

    let consider = |g: Dag, best: &mut Option<(u32, Dag)>| -> Result<(), ComposeError> {
        let space =
            oracle::brute_force(&g, oracle::Objective::MinSpace, Mode::Sequential, &limits)?
                .value as u32;
        if best.as_ref().is_none_or(|(b, _)| space > *b) {
            *best = Some((space, g));
        }
        Ok(())
    };

    if exhaustive {
        // Odometer over per-node parent choices: none, one, or two earlier
        // nodes.
        let choices_of = |v: usize| -> Vec<Vec<Node>> {
            let mut c: Vec<Vec<Node>> = vec![vec![]];
            for u in 1..v as Node {
                c.push(vec![u]);
            }
            for u in 1..v as Node {
                for w in u + 1..v as Node {
                    c.push(vec![u, w]);
                }
            }
            c
        };
        let all_choices: Vec<Vec<Vec<Node>>> = (1..=n).map(choices_of).collect();
        let mut idx = vec![0usize; n];
        loop {
            let mut edges = Vec::new();
            for v in 1..=n {
                for &u in &all_choices[v - 1][idx[v - 1]] {
                    edges.push((u, v as Node));
                }
            }
            let g = Dag::from_edges(n, &edges).unwrap();
            if g.sources().len() == sources {
                candidates += 1;
                consider(g, &mut best)?;
            }
            // Advance the odometer.
            let mut pos = 0;
            loop {
                if pos == n {
                    break;
                }
                idx[pos] += 1;
                if idx[pos] < all_choices[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == n {
                break;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tries = 0u64;
        while candidates < CERTIFIED_SMALL_SAMPLES && tries < CERTIFIED_SMALL_SAMPLES * 200 {
            tries += 1;
            let g = crate::testkit::random_dag_indeg(n, 2, &mut rng);
            if g.sources().len() != sources {
                continue;
            }
            candidates += 1;
            consider(g, &mut best)?;
        }
    }

    let (space_bound, dag) = best.ok_or_else(|| ComposeError::UnavailableBaseSize {
        n,
        reason: format!("no indegree-2 DAG with {sources} sources found"),
    })?;
    let dag = dag.with_recipe(Recipe::CertifiedSmall {
        n: n as u32,
        sources: sources as u32,
        seed,
        candidates,
        exhaustive,
        space_bound,
    });
    BaseGraph::new(dag, BaseProvenance::CertifiedSmall { space_bound })
}

use crate::pebbling::Mode;

#[derive(Debug, Clone)]
pub enum BaseKind {
    CertifiedSmall,
    ScStack,
    External(Box<BaseGraph>),
}

/// Build a base of roughly `n_target` nodes of the requested kind and run
/// the overlay on it.
pub fn build_main(
    n_target: usize,
    epsilon: f64,
    seed: u64,
    kind: BaseKind,
) -> Result<OverlayResult, ComposeError> {
    let base = match kind {
        BaseKind::CertifiedSmall => {
            let sources = (n_target / 3).max(1);
            certified_small_base(n_target, sources, seed)?
        }
        BaseKind::ScStack => {
            // Largest m whose 2-layer stack stays within the target size.
            let mut chosen: Option<BaseGraph> = None;
            for m in 1..=n_target {
                let b = sc_stack_base(m, 2, seed)?;
                if b.dag.n() <= n_target {
                    chosen = Some(b);
                } else {
                    break;
                }
            }
            chosen.ok_or_else(|| ComposeError::UnavailableBaseSize {
                n: n_target,
                reason: "smallest stack already exceeds the target".into(),
            })?
        }
        BaseKind::External(b) => *b,
    };
    overlay(base, epsilon, seed)
}
