//! Immutable DAGs in topological numbering.
//!
//! Nodes are `1..=n` and every edge `(u, v)` satisfies `u < v`, so acyclicity
//! is a construction invariant rather than something to re-check at use
//! sites. Adjacency is stored in both directions; node sets are dense
//! bitsets.

use crate::nodeset::NodeSet;
use crate::recipe::Recipe;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub type Node = u32;

pub const GRAPH_FORMAT: &str = "pebbleforge-dag/1";

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("node {0} out of range 1..={1}")]
    NodeOutOfRange(Node, usize),
    #[error("edge ({0},{1}) violates topological numbering (need u < v)")]
    EdgeOrder(Node, Node),
    #[error("duplicate edge ({0},{1})")]
    DuplicateEdge(Node, Node),
    #[error("malformed graph file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dag {
    n: usize,
    parents: Vec<Vec<Node>>,  // indexed by node id; slot 0 unused
    children: Vec<Vec<Node>>, // indexed by node id; slot 0 unused
    indeg_cap: usize,
    recipe: Option<Recipe>,
}

impl Dag {
    /// Build from an edge list. Edges may arrive in any order but must each
    /// satisfy `u < v`; duplicates and self-loops are rejected.
    pub fn from_edges(n: usize, edges: &[(Node, Node)]) -> Result<Dag, GraphError> {
        let mut parents = vec![Vec::new(); n + 1];
        let mut children = vec![Vec::new(); n + 1];
        for &(u, v) in edges {
            if u == 0 || u as usize > n {
                return Err(GraphError::NodeOutOfRange(u, n));
            }
            if v == 0 || v as usize > n {
                return Err(GraphError::NodeOutOfRange(v, n));
            }
            if u >= v {
                return Err(GraphError::EdgeOrder(u, v));
            }
            parents[v as usize].push(u);
            children[u as usize].push(v);
        }
        let mut indeg_cap = 0;
        for v in 1..=n {
            parents[v].sort_unstable();
            if parents[v].windows(2).any(|w| w[0] == w[1]) {
                let d = parents[v].windows(2).find(|w| w[0] == w[1]).unwrap()[0];
                return Err(GraphError::DuplicateEdge(d, v as Node));
            }
            children[v].sort_unstable();
            indeg_cap = indeg_cap.max(parents[v].len());
        }
        Ok(Dag {
            n,
            parents,
            children,
            indeg_cap,
            recipe: None,
        })
    }

    pub fn with_recipe(mut self, recipe: Recipe) -> Dag {
        self.recipe = Some(recipe);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn indeg(&self) -> usize {
        self.indeg_cap
    }

    pub fn recipe(&self) -> Option<&Recipe> {
        self.recipe.as_ref()
    }

    pub fn edge_count(&self) -> usize {
        (1..=self.n).map(|v| self.parents[v].len()).sum()
    }

    /// Edges sorted lexicographically by `(u, v)`.
    pub fn edges(&self) -> Vec<(Node, Node)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 1..=self.n {
            for &v in &self.children[u] {
                out.push((u as Node, v));
            }
        }
        out
    }

    pub fn has_edge(&self, u: Node, v: Node) -> bool {
        self.children[u as usize].binary_search(&v).is_ok()
    }

    pub fn parent_list(&self, v: Node) -> &[Node] {
        &self.parents[v as usize]
    }

    pub fn child_list(&self, v: Node) -> &[Node] {
        &self.children[v as usize]
    }

    pub fn parents(&self, v: Node) -> Result<NodeSet, GraphError> {
        if v == 0 || v as usize > self.n {
            return Err(GraphError::NodeOutOfRange(v, self.n));
        }
        Ok(NodeSet::from_nodes(self.n, self.parents[v as usize].iter().copied()))
    }

    pub fn indeg_of(&self, v: Node) -> usize {
        self.parents[v as usize].len()
    }

    /// Strict ancestors: every node with a directed path of length >= 1 into
    /// `t`. Members of `t` appear only if they are ancestors of other members.
    pub fn ancestors(&self, t: &NodeSet) -> NodeSet {
        let mut seen = NodeSet::empty(self.n);
        let mut stack: Vec<Node> = t.iter().collect();
        while let Some(v) = stack.pop() {
            for &u in &self.parents[v as usize] {
                if !seen.contains(u) {
                    seen.insert(u);
                    stack.push(u);
                }
            }
        }
        seen
    }

    /// `ancestors(t) ∪ t`.
    pub fn ancestors_closed(&self, t: &NodeSet) -> NodeSet {
        let mut s = self.ancestors(t);
        s.union_with(t);
        s
    }

    pub fn sources(&self) -> NodeSet {
        NodeSet::from_nodes(
            self.n,
            (1..=self.n as Node).filter(|&v| self.parents[v as usize].is_empty()),
        )
    }

    pub fn sinks(&self) -> NodeSet {
        NodeSet::from_nodes(
            self.n,
            (1..=self.n as Node).filter(|&v| self.children[v as usize].is_empty()),
        )
    }

    /// Length (in nodes) of the longest directed path; 0 for the empty graph.
    pub fn depth(&self) -> usize {
        self.depth_without(&NodeSet::empty(self.n))
    }

    /// Depth of `G - removed`.
    pub fn depth_without(&self, removed: &NodeSet) -> usize {
        let mut len = vec![0usize; self.n + 1];
        let mut best = 0;
        for v in 1..=self.n {
            if removed.contains(v as Node) {
                continue;
            }
            let mut l = 1;
            for &u in &self.parents[v] {
                if !removed.contains(u) && len[u as usize] + 1 > l {
                    l = len[u as usize] + 1;
                }
            }
            len[v] = l;
            best = best.max(l);
        }
        best
    }

    /// Depth of the induced subgraph `G[keep]`.
    pub fn depth_of_subgraph(&self, keep: &NodeSet) -> usize {
        self.depth_without(&keep.complement())
    }

    pub fn remove(&self, s: &NodeSet) -> DagView<'_> {
        DagView {
            base: self,
            keep: s.complement(),
        }
    }

    pub fn induced(&self, s: &NodeSet) -> DagView<'_> {
        DagView {
            base: self,
            keep: s.clone(),
        }
    }

    /// Forward-reachable set from `from` inside `G - removed` (excluding `from`
    /// itself unless re-reached, which cannot happen in a DAG).
    pub fn reachable_from(&self, from: Node, removed: &NodeSet) -> NodeSet {
        let mut seen = NodeSet::empty(self.n);
        if removed.contains(from) {
            return seen;
        }
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            for &w in &self.children[v as usize] {
                if !removed.contains(w) && !seen.contains(w) {
                    seen.insert(w);
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Nodes that reach `to` inside `G - removed` (excluding `to`).
    pub fn reaching_to(&self, to: Node, removed: &NodeSet) -> NodeSet {
        let mut seen = NodeSet::empty(self.n);
        if removed.contains(to) {
            return seen;
        }
        let mut stack = vec![to];
        while let Some(v) = stack.pop() {
            for &u in &self.parents[v as usize] {
                if !removed.contains(u) && !seen.contains(u) {
                    seen.insert(u);
                    stack.push(u);
                }
            }
        }
        seen
    }

    // ---- canonical file format ------------------------------------------

    /// Canonical JSON bytes; deterministic byte-for-byte for equal graphs.
    pub fn to_file_bytes(&self) -> Vec<u8> {
        let file = GraphFile {
            format: GRAPH_FORMAT.to_string(),
            n: self.n as u64,
            edges: self.edges(),
            recipe: self.recipe.clone(),
        };
        serde_json::to_vec(&file).expect("graph serialization cannot fail")
    }

    pub fn from_file_bytes(bytes: &[u8]) -> Result<Dag, GraphError> {
        let file: GraphFile =
            serde_json::from_slice(bytes).map_err(|e| GraphError::Format(e.to_string()))?;
        if file.format != GRAPH_FORMAT {
            return Err(GraphError::Format(format!(
                "unsupported format {:?}, expected {:?}",
                file.format, GRAPH_FORMAT
            )));
        }
        let mut g = Dag::from_edges(file.n as usize, &file.edges)?;
        g.recipe = file.recipe;
        Ok(g)
    }

    /// SHA-256 of the canonical file bytes, hex-encoded. Used to tie
    /// pebbling files and reduction maps to their graph.
    pub fn file_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_file_bytes()))
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph g {\n  rankdir=LR;\n");
        for v in 1..=self.n {
            out.push_str(&format!("  {v};\n"));
        }
        for (u, v) in self.edges() {
            out.push_str(&format!("  {u} -> {v};\n"));
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    format: String,
    n: u64,
    edges: Vec<(Node, Node)>,
    recipe: Option<Recipe>,
}

/// A node-filtered view of a [`Dag`] (`G - S` or `G[S]`). Node identities are
/// preserved; edges incident to filtered-out nodes vanish.
#[derive(Debug, Clone)]
pub struct DagView<'a> {
    base: &'a Dag,
    keep: NodeSet,
}

impl DagView<'_> {
    pub fn contains(&self, v: Node) -> bool {
        self.keep.contains(v)
    }

    pub fn kept(&self) -> &NodeSet {
        &self.keep
    }

    pub fn node_count(&self) -> usize {
        self.keep.len()
    }

    pub fn parents(&self, v: Node) -> Vec<Node> {
        if !self.keep.contains(v) {
            return Vec::new();
        }
        self.base.parents[v as usize]
            .iter()
            .copied()
            .filter(|&u| self.keep.contains(u))
            .collect()
    }

    pub fn edges(&self) -> Vec<(Node, Node)> {
        self.base
            .edges()
            .into_iter()
            .filter(|&(u, v)| self.keep.contains(u) && self.keep.contains(v))
            .collect()
    }

    pub fn depth(&self) -> usize {
        self.base.depth_of_subgraph(&self.keep)
    }

    pub fn sources(&self) -> NodeSet {
        NodeSet::from_nodes(
            self.base.n,
            self.keep.iter().filter(|&v| self.parents(v).is_empty()),
        )
    }

    pub fn sinks(&self) -> NodeSet {
        NodeSet::from_nodes(
            self.base.n,
            self.keep.iter().filter(|&v| {
                self.base.children[v as usize]
                    .iter()
                    .all(|&w| !self.keep.contains(w))
            }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit;

    fn path(n: usize) -> Dag {
        testkit::path(n)
    }

    #[test]
    fn parents_on_chain_and_complete() {
        let p3 = path(3);
        assert_eq!(p3.parents(3).unwrap().to_vec(), vec![2]);
        assert!(p3.parents(1).unwrap().is_empty());

        let k4 = testkit::complete(4);
        assert_eq!(k4.parents(4).unwrap().to_vec(), vec![1, 2, 3]);
        assert!(k4.parents(5).is_err());
    }

    #[test]
    fn ancestors_examples() {
        let p3 = path(3);
        let t = NodeSet::singleton(3, 3);
        assert_eq!(p3.ancestors(&t).to_vec(), vec![1, 2]);
        assert!(p3.ancestors(&p3.sources()).is_empty());

        let diamond = testkit::diamond();
        let t = NodeSet::singleton(4, 4);
        assert_eq!(diamond.ancestors(&t).to_vec(), vec![1, 2, 3]);
        assert_eq!(diamond.ancestors_closed(&t).to_vec(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn depth_examples() {
        assert_eq!(path(7).depth(), 7);
        assert_eq!(testkit::complete(5).depth(), 5);
        let diamond = testkit::diamond();
        assert_eq!(diamond.depth_of_subgraph(&NodeSet::from_nodes(4, [2, 3, 4])), 2);
        assert_eq!(Dag::from_edges(0, &[]).unwrap().depth(), 0);
    }

    #[test]
    fn views() {
        let p3 = path(3);
        let removed = p3.remove(&NodeSet::singleton(3, 2));
        assert_eq!(removed.depth(), 1);
        assert_eq!(removed.node_count(), 2);
        assert!(removed.edges().is_empty());

        let same = p3.remove(&NodeSet::empty(3));
        assert_eq!(same.edges(), p3.edges());
        assert_eq!(same.depth(), p3.depth());

        let k4 = testkit::complete(4);
        let ind = k4.induced(&NodeSet::from_nodes(4, [1, 3, 4]));
        assert_eq!(ind.edges(), vec![(1, 3), (1, 4), (3, 4)]);
        assert_eq!(ind.depth(), 3);
    }

    #[test]
    fn sources_sinks_validate() {
        let p3 = path(3);
        assert_eq!(p3.sources().to_vec(), vec![1]);
        assert_eq!(p3.sinks().to_vec(), vec![3]);
        let k5 = testkit::complete(5);
        assert_eq!(k5.sources().to_vec(), vec![1]);
        assert_eq!(k5.sinks().to_vec(), vec![5]);

        assert_eq!(
            Dag::from_edges(3, &[(3, 2)]),
            Err(GraphError::EdgeOrder(3, 2))
        );
        assert_eq!(
            Dag::from_edges(3, &[(1, 2), (1, 2)]),
            Err(GraphError::DuplicateEdge(1, 2))
        );
        assert_eq!(
            Dag::from_edges(2, &[(1, 3)]),
            Err(GraphError::NodeOutOfRange(3, 2))
        );
    }

    #[test]
    fn file_round_trip_and_hash_stability() {
        let g = testkit::diamond();
        let bytes = g.to_file_bytes();
        let g2 = Dag::from_file_bytes(&bytes).unwrap();
        assert_eq!(g, g2);
        assert_eq!(bytes, g2.to_file_bytes());
        assert_eq!(g.file_hash(), g2.file_hash());

        let err = Dag::from_file_bytes(br#"{"format":"other/1","n":1,"edges":[]}"#);
        assert!(matches!(err, Err(GraphError::Format(_))));
    }

    #[test]
    fn dot_is_deterministic() {
        let g = testkit::diamond();
        assert_eq!(g.to_dot(), g.to_dot());
        assert!(g.to_dot().contains("1 -> 2"));
    }
}
