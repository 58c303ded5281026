//! Graph pebbling toolkit.
//!
//! The crate bundles the pieces needed to build and analyse DAGs whose
//! pebbling cost is dominated by *sustained* space usage:
//!
//! * [`graph`] — immutable topologically numbered DAGs, dense [`nodeset::NodeSet`]s,
//!   the canonical graph file format and DOT export.
//! * [`expander`] — sampled bipartite expanders and local-expander DAGs built
//!   by overlaying them at every scale.
//! * [`depth_robust`] — exact depth-robustness checking, good-node analysis
//!   and the extreme depth-robust builder.
//! * [`reduce`] — the two indegree-to-2 reductions (metanode paths) together
//!   with the pebbling projection and path lifting that transfer results
//!   between the original graph and the reduced one.
//! * [`compose`] — overlay of a reduced extreme depth-robust DAG onto the
//!   sources of a high-space base graph, plus base-graph providers
//!   (brute-force-certified small graphs, a superconcentrator stack, external
//!   files).
//! * [`pebbling`] — pebbling data model, legality validation for the
//!   sequential, parallel and parallel-black sequential-white games, the
//!   sequential transform, and all complexity measures.
//! * [`strategies`] — constructive pebbling strategies (naive topological,
//!   the reducible black/white schedule, depth-reducing sets).
//! * [`oracle`] — exact brute-force optima (space, cumulative cost,
//!   sustained space, black/white cumulative cost) over the configuration
//!   space of small graphs.
//! * [`mhf`] — the graph-labeling function, its naive sequential evaluator
//!   with sustained-memory accounting, and the derived hardness parameters.
//!
//! Everything that samples randomness takes an explicit `u64` seed and is
//! reproducible byte-for-byte; see [`testkit`] for generators used by the
//! test suites.

pub mod combinatorics;
pub mod compose;
pub mod depth_robust;
pub mod expander;
pub mod graph;
pub mod mhf;
pub mod nodeset;
pub mod oracle;
pub mod pebbling;
pub mod recipe;
pub mod reduce;
pub mod strategies;
pub mod testkit;

pub use graph::{Dag, DagView, GraphError, Node};
pub use nodeset::NodeSet;
pub use pebbling::{BwPebbling, MetricsReport, Mode, Pebbling};
