//! Pebbling data model, legality validation, the sequential transform, and
//! complexity measures.
//!
//! A pebbling is a sequence of node-set configurations starting from the
//! empty one. Placements require all parents pebbled at the end of the
//! previous step; removals are free and are represented simply as absence in
//! the next configuration. Sequential pebblings additionally place at most
//! one pebble per step. The black/white variant models nondeterministic
//! guesses: white pebbles land anywhere (one per step), but can be removed
//! only once their parents are pebbled, and none may survive to the end.

use crate::graph::{Dag, Node};
use crate::nodeset::NodeSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PEBBLING_FORMAT: &str = "pebbleforge-peb/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Sequential,
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pebbling {
    pub mode: Mode,
    /// `steps[0]` is the empty configuration.
    pub steps: Vec<NodeSet>,
    /// Defaults to the sinks of the graph when `None`.
    pub target: Option<NodeSet>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BwPebbling {
    /// Per step: (black, white). `steps[0]` is `(∅, ∅)`.
    pub steps: Vec<(NodeSet, NodeSet)>,
    pub target: Option<NodeSet>,
}

impl Pebbling {
    /// Number of pebbling moves `t` (configurations minus the initial one).
    pub fn time(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }
}

impl BwPebbling {
    pub fn time(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PebblingRule {
    /// Rule 1: every target node is pebbled at some step.
    TargetUnpebbled,
    /// Rule 2: a pebble may be added only if all parents were pebbled at the
    /// end of the previous step.
    ParentsMissing,
    /// Rule 3 (sequential only): at most one pebble is placed per step.
    MultiplePlacements,
}

impl PebblingRule {
    pub fn number(self) -> u8 {
        match self {
            PebblingRule::TargetUnpebbled => 1,
            PebblingRule::ParentsMissing => 2,
            PebblingRule::MultiplePlacements => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("step {step}: rule {} violated at node {node}", rule.number())]
pub struct Violation {
    pub step: usize,
    pub rule: PebblingRule,
    pub node: Node,
}

/// First step at which each target node was covered.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub covered_at: Vec<(Node, usize)>,
}

fn check_range(n: usize, steps: &[&NodeSet]) -> Result<(), Violation> {
    for (i, s) in steps.iter().enumerate() {
        if s.universe() != n {
            return Err(Violation {
                step: i,
                rule: PebblingRule::ParentsMissing,
                node: 0,
            });
        }
    }
    Ok(())
}

/// Validate a black pebbling. Within a step, the one-placement rule
/// (sequential mode) is checked before the parent rule; removals are always
/// legal.
pub fn validate(g: &Dag, p: &Pebbling) -> Result<ValidationReport, Violation> {
    let n = g.n();
    let refs: Vec<&NodeSet> = p.steps.iter().collect();
    check_range(n, &refs)?;
    if p.steps.is_empty() || !p.steps[0].is_empty() {
        return Err(Violation {
            step: 0,
            rule: PebblingRule::ParentsMissing,
            node: p.steps.first().and_then(|s| s.iter().next()).unwrap_or(0),
        });
    }
    let target = p.target.clone().unwrap_or_else(|| g.sinks());
    let mut covered_at: Vec<(Node, usize)> = Vec::new();
    let mut covered = NodeSet::empty(n);

    for i in 1..p.steps.len() {
        let new = p.steps[i].difference(&p.steps[i - 1]);
        if p.mode == Mode::Sequential && new.len() > 1 {
            let offender = new.iter().nth(1).unwrap();
            return Err(Violation {
                step: i,
                rule: PebblingRule::MultiplePlacements,
                node: offender,
            });
        }
        for v in new.iter() {
            for &u in g.parent_list(v) {
                if !p.steps[i - 1].contains(u) {
                    return Err(Violation {
                        step: i,
                        rule: PebblingRule::ParentsMissing,
                        node: v,
                    });
                }
            }
        }
        for v in p.steps[i].iter() {
            if target.contains(v) && !covered.contains(v) {
                covered.insert(v);
                covered_at.push((v, i));
            }
        }
    }

    if let Some(missing) = target.difference(&covered).iter().next() {
        return Err(Violation {
            step: p.steps.len() - 1,
            rule: PebblingRule::TargetUnpebbled,
            node: missing,
        });
    }
    covered_at.sort_unstable();
    Ok(ValidationReport { covered_at })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BwRule {
    /// Rule 1: the final configuration holds no white pebbles.
    WhiteAtEnd,
    /// Rule 2: at most one white pebble is placed per step.
    MultipleWhites,
    /// Rule 3: a white pebble is removed only when all parents were pebbled
    /// at the end of the previous step.
    WhiteRemovalParents,
    /// Rule 4: a black pebble is added only when all parents were pebbled at
    /// the end of the previous step.
    BlackParents,
    /// Rule 5: every target node is pebbled at some step.
    TargetUnpebbled,
}

impl BwRule {
    pub fn number(self) -> u8 {
        match self {
            BwRule::WhiteAtEnd => 1,
            BwRule::MultipleWhites => 2,
            BwRule::WhiteRemovalParents => 3,
            BwRule::BlackParents => 4,
            BwRule::TargetUnpebbled => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("step {step}: black/white rule {} violated at node {node}", rule.number())]
pub struct BwViolation {
    pub step: usize,
    pub rule: BwRule,
    pub node: Node,
}

pub fn validate_bw(g: &Dag, p: &BwPebbling) -> Result<(), BwViolation> {
    let n = g.n();
    if p.steps.is_empty() || !p.steps[0].0.is_empty() || !p.steps[0].1.is_empty() {
        return Err(BwViolation {
            step: 0,
            rule: BwRule::BlackParents,
            node: 0,
        });
    }
    let target = p.target.clone().unwrap_or_else(|| g.sinks());
    let mut covered = NodeSet::empty(n);

    for i in 1..p.steps.len() {
        let (ref black, ref white) = p.steps[i];
        let (ref prev_black, ref prev_white) = p.steps[i - 1];
        let prev_all = prev_black.union(prev_white);

        let new_white = white.difference(prev_white);
        if new_white.len() > 1 {
            return Err(BwViolation {
                step: i,
                rule: BwRule::MultipleWhites,
                node: new_white.iter().nth(1).unwrap(),
            });
        }
        for v in prev_white.difference(white).iter() {
            for &u in g.parent_list(v) {
                if !prev_all.contains(u) {
                    return Err(BwViolation {
                        step: i,
                        rule: BwRule::WhiteRemovalParents,
                        node: v,
                    });
                }
            }
        }
        for v in black.difference(prev_black).iter() {
            for &u in g.parent_list(v) {
                if !prev_all.contains(u) {
                    return Err(BwViolation {
                        step: i,
                        rule: BwRule::BlackParents,
                        node: v,
                    });
                }
            }
        }
        covered.union_with(&black.union(white));
    }

    let last_white = &p.steps[p.steps.len() - 1].1;
    if let Some(v) = last_white.iter().next() {
        return Err(BwViolation {
            step: p.steps.len() - 1,
            rule: BwRule::WhiteAtEnd,
            node: v,
        });
    }
    if let Some(missing) = target.difference(&covered).iter().next() {
        return Err(BwViolation {
            step: p.steps.len() - 1,
            rule: BwRule::TargetUnpebbled,
            node: missing,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Sequential transform

#[derive(Debug, Clone)]
pub struct SeqTransformed {
    pub pebbling: Pebbling,
    /// `anchors[i]` is the index in the output steps holding configuration
    /// `P_i` of the input.
    pub anchors: Vec<usize>,
}

/// Expand a legal parallel pebbling into a sequential one: the new pebbles of
/// each parallel step are inserted one at a time in ascending node order,
/// with that step's removals applied together with the last placement. A
/// parallel step that only removes pebbles becomes a single removal-only
/// sequential step, so every input configuration appears as an anchor.
pub fn seq_transform(g: &Dag, p: &Pebbling) -> Result<SeqTransformed, Violation> {
    validate(g, p)?;
    let mut out = vec![p.steps[0].clone()];
    let mut anchors = vec![0usize];
    for i in 1..p.steps.len() {
        let new: Vec<Node> = p.steps[i].difference(&p.steps[i - 1]).to_vec();
        if new.is_empty() {
            out.push(p.steps[i].clone());
        } else {
            for (k, &x) in new.iter().enumerate() {
                if k + 1 == new.len() {
                    out.push(p.steps[i].clone());
                } else {
                    let mut next = out.last().unwrap().clone();
                    next.insert(x);
                    out.push(next);
                }
            }
        }
        anchors.push(out.len() - 1);
    }
    let pebbling = Pebbling {
        mode: Mode::Sequential,
        steps: out,
        target: p.target.clone(),
    };
    debug_assert!(validate(g, &pebbling).is_ok());
    Ok(SeqTransformed { pebbling, anchors })
}

// ---------------------------------------------------------------------------
// Metrics

/// All complexity measures of one pebbling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub time: u64,
    pub space: u64,
    pub spacetime: u64,
    pub cc: u64,
    /// `ss_profile[s-1]` = number of steps `i >= 1` with `|P_i| >= s`,
    /// for `s` in `1..=space`. Zero beyond `space`.
    pub ss_profile: Vec<u64>,
    /// `am_ss_profile[s-1]` = sum over steps of `floor(|P_i| / s)`.
    pub am_ss_profile: Vec<u64>,
    /// Black/white cumulative cost (sum of `|B_i ∪ W_i|`); only for
    /// black/white pebblings.
    pub bw_cc: Option<u64>,
}

impl MetricsReport {
    fn from_sizes(sizes: &[u64], bw: bool) -> MetricsReport {
        let time = sizes.len() as u64;
        let space = sizes.iter().copied().max().unwrap_or(0);
        let cc: u64 = sizes.iter().sum();
        let mut ss_profile = vec![0u64; space as usize];
        let mut am_ss_profile = vec![0u64; space as usize];
        for s in 1..=space {
            let idx = (s - 1) as usize;
            ss_profile[idx] = sizes.iter().filter(|&&z| z >= s).count() as u64;
            am_ss_profile[idx] = sizes.iter().map(|&z| z / s).sum();
        }
        MetricsReport {
            time,
            space,
            spacetime: time * space,
            cc,
            ss_profile,
            am_ss_profile,
            bw_cc: if bw { Some(cc) } else { None },
        }
    }

    /// Steps holding at least `s` pebbles. `ss(0)` counts every step.
    pub fn ss(&self, s: u64) -> u64 {
        if s == 0 {
            self.time
        } else if s <= self.space {
            self.ss_profile[(s - 1) as usize]
        } else {
            0
        }
    }

    pub fn am_ss(&self, s: u64) -> u64 {
        if s == 0 {
            u64::MAX
        } else if s <= self.space {
            self.am_ss_profile[(s - 1) as usize]
        } else {
            0
        }
    }

    /// JSON with run-length-encoded profiles, for file output on large
    /// graphs where the dense profiles would dominate the report.
    pub fn to_sparse_json(&self) -> serde_json::Value {
        serde_json::json!({
            "time": self.time,
            "space": self.space,
            "spacetime": self.spacetime,
            "cc": self.cc,
            "bw_cc": self.bw_cc,
            "ss_profile_rle": Self::rle(&self.ss_profile),
            "am_ss_profile_rle": Self::rle(&self.am_ss_profile),
        })
    }

    /// Sparse run-length encoding of a profile, as `(s_from, s_to, value)`
    /// triples; used for file output on large graphs.
    pub fn rle(profile: &[u64]) -> Vec<(u64, u64, u64)> {
        let mut runs = Vec::new();
        let mut i = 0usize;
        while i < profile.len() {
            let mut j = i;
            while j + 1 < profile.len() && profile[j + 1] == profile[i] {
                j += 1;
            }
            runs.push((i as u64 + 1, j as u64 + 1, profile[i]));
            i = j + 1;
        }
        runs
    }
}

pub fn metrics(g: &Dag, p: &Pebbling) -> Result<MetricsReport, Violation> {
    validate(g, p)?;
    Ok(metrics_unchecked(p))
}

pub fn metrics_unchecked(p: &Pebbling) -> MetricsReport {
    let sizes: Vec<u64> = p.steps.iter().skip(1).map(|s| s.len() as u64).collect();
    MetricsReport::from_sizes(&sizes, false)
}

pub fn metrics_bw(g: &Dag, p: &BwPebbling) -> Result<MetricsReport, BwViolation> {
    validate_bw(g, p)?;
    Ok(metrics_bw_unchecked(p))
}

pub fn metrics_bw_unchecked(p: &BwPebbling) -> MetricsReport {
    let sizes: Vec<u64> = p
        .steps
        .iter()
        .skip(1)
        .map(|(b, w)| b.union(w).len() as u64)
        .collect();
    MetricsReport::from_sizes(&sizes, true)
}

/// Per-step CSV: `step,pebbles,blocks_at_s` with `blocks_at_s = floor(|P_i|/s)`.
pub fn metrics_csv(p: &Pebbling, s: u64) -> String {
    let mut out = String::from("step,pebbles,blocks_at_s\n");
    for (i, cfg) in p.steps.iter().enumerate().skip(1) {
        let z = cfg.len() as u64;
        out.push_str(&format!("{},{},{}\n", i, z, z.checked_div(s).unwrap_or(0)));
    }
    out
}

// ---------------------------------------------------------------------------
// File format

#[derive(Serialize, Deserialize)]
struct PebFile {
    format: String,
    graph_hash: String,
    mode: String,
    steps: serde_json::Value,
}

#[derive(Debug, Error)]
pub enum PebFileError {
    #[error("malformed pebbling file: {0}")]
    Format(String),
    #[error("pebbling file was produced for graph {file_hash}, not {graph_hash}")]
    GraphMismatch { file_hash: String, graph_hash: String },
}

const MODE_BW: &str = "parallel-black-sequential-white";

fn mode_str(m: Mode) -> &'static str {
    match m {
        Mode::Sequential => "sequential",
        Mode::Parallel => "parallel",
    }
}

pub fn pebbling_to_bytes(g: &Dag, p: &Pebbling) -> Vec<u8> {
    let steps: Vec<Vec<Node>> = p.steps.iter().map(|s| s.to_vec()).collect();
    let file = PebFile {
        format: PEBBLING_FORMAT.to_string(),
        graph_hash: g.file_hash(),
        mode: mode_str(p.mode).to_string(),
        steps: serde_json::to_value(steps).unwrap(),
    };
    serde_json::to_vec(&file).unwrap()
}

pub fn bw_pebbling_to_bytes(g: &Dag, p: &BwPebbling) -> Vec<u8> {
    let steps: Vec<(Vec<Node>, Vec<Node>)> = p
        .steps
        .iter()
        .map(|(b, w)| (b.to_vec(), w.to_vec()))
        .collect();
    let file = PebFile {
        format: PEBBLING_FORMAT.to_string(),
        graph_hash: g.file_hash(),
        mode: MODE_BW.to_string(),
        steps: serde_json::to_value(steps).unwrap(),
    };
    serde_json::to_vec(&file).unwrap()
}

pub enum LoadedPebbling {
    Black(Pebbling),
    Bw(BwPebbling),
}

pub fn pebbling_from_bytes(g: &Dag, bytes: &[u8]) -> Result<LoadedPebbling, PebFileError> {
    let file: PebFile =
        serde_json::from_slice(bytes).map_err(|e| PebFileError::Format(e.to_string()))?;
    if file.format != PEBBLING_FORMAT {
        return Err(PebFileError::Format(format!(
            "unsupported format {:?}",
            file.format
        )));
    }
    let hash = g.file_hash();
    if file.graph_hash != hash {
        return Err(PebFileError::GraphMismatch {
            file_hash: file.graph_hash,
            graph_hash: hash,
        });
    }
    let n = g.n();
    let to_set = |nodes: Vec<Node>| -> Result<NodeSet, PebFileError> {
        for &v in &nodes {
            if v == 0 || v as usize > n {
                return Err(PebFileError::Format(format!("node {v} out of range")));
            }
        }
        Ok(NodeSet::from_nodes(n, nodes))
    };
    match file.mode.as_str() {
        "sequential" | "parallel" => {
            let raw: Vec<Vec<Node>> = serde_json::from_value(file.steps)
                .map_err(|e| PebFileError::Format(e.to_string()))?;
            let mut steps = Vec::with_capacity(raw.len());
            for s in raw {
                steps.push(to_set(s)?);
            }
            Ok(LoadedPebbling::Black(Pebbling {
                mode: if file.mode == "sequential" {
                    Mode::Sequential
                } else {
                    Mode::Parallel
                },
                steps,
                target: None,
            }))
        }
        MODE_BW => {
            let raw: Vec<(Vec<Node>, Vec<Node>)> = serde_json::from_value(file.steps)
                .map_err(|e| PebFileError::Format(e.to_string()))?;
            let mut steps = Vec::with_capacity(raw.len());
            for (b, w) in raw {
                steps.push((to_set(b)?, to_set(w)?));
            }
            Ok(LoadedPebbling::Bw(BwPebbling { steps, target: None }))
        }
        other => Err(PebFileError::Format(format!("unknown mode {other:?}"))),
    }
}
