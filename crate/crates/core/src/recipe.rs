//! Construction recipes.
//!
//! Every generated graph carries the parameters and seed that reproduce it
//! bit-exactly; the recipe is embedded in the graph file so experiments can
//! be replayed and compared.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Recipe {
    LocalExpander(LocalExpanderRecipe),
    ExtremeDr(ExtremeDrRecipe),
    /// Indegree reduction with uniform metanode paths of length `2 * delta`.
    ReducedDr { source: String, delta: u32 },
    /// Indegree reduction with per-node paths of length `max(indeg(v), 1)`.
    ReducedSs { source: String },
    Superconcentrator(ScRecipe),
    ScStack {
        m: u32,
        layers: u32,
        seed: u64,
        /// The stack is post-processed to indegree 2; this is the pre-reduction size.
        raw_nodes: u32,
    },
    CertifiedSmall {
        n: u32,
        sources: u32,
        seed: u64,
        /// Candidates examined by the search (exhaustive below the cutoff).
        candidates: u64,
        exhaustive: bool,
        /// Exact sequential pebbling space of the winner.
        space_bound: u32,
    },
    MainOverlay(Box<OverlayRecipe>),
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalExpanderRecipe {
    pub n: u32,
    pub delta: f64,
    pub seed: u64,
    /// Smallest side size at which sampled bipartite expanders exist for `delta`.
    pub m_delta: u32,
    /// Same threshold for the overlaid `delta/10` expanders.
    pub m_delta_tenth: u32,
    /// Per-node parent samples drawn for each bipartite block.
    pub degree_cap: u32,
    /// Block scales `2^j` for `j in (j_lo, j_hi]`.
    pub j_lo: u32,
    pub j_hi: u32,
    /// Deterministic edges `(u, u+k)` for all `k <= short_edge_span`.
    pub short_edge_span: u32,
    /// Resamples spent certifying small-scale blocks.
    pub resamples: u32,
    /// `10 * degree_cap * scales + short_edge_span`.
    pub indeg_bound: u32,
    /// Realized maximum indegree.
    pub indeg: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeDrRecipe {
    pub n: u32,
    pub epsilon: f64,
    pub seed: u64,
    /// Goodness parameter of the claim: epsilon / 4.
    pub gamma: f64,
    /// Claim target: (e, n - e * claim_coeff)-depth-robust for every e,
    /// where claim_coeff = (1 + gamma) / (1 - gamma).
    pub claim_coeff: f64,
    pub expander: LocalExpanderRecipe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScRecipe {
    pub m: u32,
    pub seed: u64,
    /// Concentrator samples per boundary node.
    pub degree: u32,
    /// Recursion depth of the construction.
    pub levels: u32,
    /// Input nodes are `1..=m`; outputs are the last `m` nodes.
    pub inputs: (u32, u32),
    pub outputs: (u32, u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayRecipe {
    pub epsilon: f64,
    pub seed: u64,
    /// Indegree of the extreme depth-robust graph before reduction.
    pub delta: u32,
    /// Number of base sources the reduced graph was attached to.
    pub base_sources: u32,
    pub base: Recipe,
}
