//! Graph-labeling function and sustained-memory accounting.
//!
//! Each node's label is the oracle applied to the whole input tuple, the
//! node id, and either the node's own input (sources) or its parents' labels
//! in ascending order. The naive evaluator computes one label per step in
//! topological order, appending to its state, and records both
//! sustained-memory accountings: the block-sum (`Σ floor(state/block)`) and
//! the threshold count (`#steps with state >= block`); the two notions
//! disagree in the source material, so both are reported.
//!
//! Oracle inputs use a canonical prefix-free encoding: a 4-octet big-endian
//! field count, then per field an 8-octet big-endian byte length and the
//! bytes; node ids are 8-octet big-endian fields.

use crate::graph::{Dag, Node};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MhfError {
    #[error("input tuple has {got} entries, graph has {expected} sources")]
    ArityMismatch { expected: usize, got: usize },
    #[error("label width must be at least 1 bit")]
    ZeroWidth,
    #[error("width {w} does not satisfy w > log2 q for q = {q}")]
    WTooSmall { w: u32, q: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleBackend {
    /// SHA-256, truncated to the leftmost `w` bits (counter-expanded first
    /// when `w` exceeds 256).
    RealHash,
    /// Seeded splitmix-based stub for reproducible test vectors.
    TestStub { seed: u64 },
}

/// Prefix-free input encoding.
pub fn encode_fields(fields: &[&[u8]]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&(fields.len() as u32).to_be_bytes());
    for f in fields {
        out.extend_from_slice(&(f.len() as u64).to_be_bytes());
        out.extend_from_slice(f);
    }
    out
}

fn splitmix_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct LabelOracle {
    pub w_bits: u32,
    pub backend: OracleBackend,
    /// Ordered (input encoding, output) log of every call.
    pub call_log: Vec<(Vec<u8>, Vec<u8>)>,
}

impl LabelOracle {
    pub fn new(w_bits: u32, backend: OracleBackend) -> Result<LabelOracle, MhfError> {
        if w_bits == 0 {
            return Err(MhfError::ZeroWidth);
        }
        Ok(LabelOracle {
            w_bits,
            backend,
            call_log: Vec::new(),
        })
    }

    pub fn call(&mut self, fields: &[&[u8]]) -> Vec<u8> {
        let input = encode_fields(fields);
        let out = self.raw(&input);
        self.call_log.push((input, out.clone()));
        out
    }

    fn raw(&self, input: &[u8]) -> Vec<u8> {
        let nbytes = (self.w_bits as usize).div_ceil(8);
        let mut out = Vec::with_capacity(nbytes);
        match &self.backend {
            OracleBackend::RealHash => {
                let mut counter = 0u32;
                while out.len() < nbytes {
                    let mut h = Sha256::new();
                    h.update(counter.to_be_bytes());
                    h.update(input);
                    out.extend_from_slice(&h.finalize());
                    counter += 1;
                }
            }
            OracleBackend::TestStub { seed } => {
                let mut state = *seed ^ 0xA076_1D64_78BD_642F;
                for chunk in input.chunks(8) {
                    let mut word = [0u8; 8];
                    word[..chunk.len()].copy_from_slice(chunk);
                    state ^= u64::from_be_bytes(word);
                    splitmix_next(&mut state);
                }
                while out.len() < nbytes {
                    out.extend_from_slice(&splitmix_next(&mut state).to_be_bytes());
                }
            }
        }
        out.truncate(nbytes);
        let tail = self.w_bits % 8;
        if tail != 0 {
            let last = out.last_mut().unwrap();
            *last &= 0xFFu8 << (8 - tail);
        }
        out
    }
}

fn label_fields<'a>(
    x: &'a [Vec<u8>],
    vid: &'a [u8; 8],
    tail: &'a [&'a [u8]],
) -> Vec<&'a [u8]> {
    let mut fields: Vec<&[u8]> = x.iter().map(|f| f.as_slice()).collect();
    fields.push(vid);
    fields.extend_from_slice(tail);
    fields
}

fn compute_labels(
    g: &Dag,
    x: &[Vec<u8>],
    oracle: &mut LabelOracle,
    mut on_step: impl FnMut(usize),
) -> Result<Vec<Vec<u8>>, MhfError> {
    let sources: Vec<Node> = g.sources().to_vec();
    if sources.len() != x.len() {
        return Err(MhfError::ArityMismatch {
            expected: sources.len(),
            got: x.len(),
        });
    }
    let mut source_index = vec![usize::MAX; g.n() + 1];
    for (j, &s) in sources.iter().enumerate() {
        source_index[s as usize] = j;
    }
    let mut labels: Vec<Vec<u8>> = Vec::with_capacity(g.n() + 1);
    labels.push(Vec::new()); // slot 0 unused
    for v in 1..=g.n() as Node {
        let vid = (v as u64).to_be_bytes();
        let label = if source_index[v as usize] != usize::MAX {
            let xj = &x[source_index[v as usize]];
            oracle.call(&label_fields(x, &vid, &[xj.as_slice()]))
        } else {
            let parent_labels: Vec<&[u8]> = g
                .parent_list(v)
                .iter()
                .map(|&u| labels[u as usize].as_slice())
                .collect();
            oracle.call(&label_fields(x, &vid, &parent_labels))
        };
        labels.push(label);
        on_step(v as usize);
    }
    Ok(labels)
}

/// Labels of the sinks in ascending sink order.
pub fn graph_function(
    g: &Dag,
    x: &[Vec<u8>],
    oracle: &mut LabelOracle,
) -> Result<Vec<Vec<u8>>, MhfError> {
    let labels = compute_labels(g, x, oracle, |_| {})?;
    Ok(g.sinks().iter().map(|v| labels[v as usize].clone()).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    pub state_bits: u64,
    pub oracle_calls: u32,
}

/// Per-step state sizes and oracle-call counts of one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelingTrace {
    pub w_bits: u32,
    pub steps: Vec<StepTrace>,
}

impl LabelingTrace {
    pub fn total_calls(&self) -> u64 {
        self.steps.iter().map(|s| s.oracle_calls as u64).sum()
    }

    /// Number of steps whose state holds at least `block_bits` bits.
    pub fn smc_threshold_count(&self, block_bits: u64) -> u64 {
        if block_bits == 0 {
            return self.steps.len() as u64;
        }
        self.steps.iter().filter(|s| s.state_bits >= block_bits).count() as u64
    }

    /// Sum over steps of `floor(state_bits / block_bits)`.
    pub fn smc_block_sum(&self, block_bits: u64) -> u64 {
        assert!(block_bits > 0, "block size must be positive");
        self.steps.iter().map(|s| s.state_bits / block_bits).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,state_bits,calls\n");
        for (i, s) in self.steps.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", i + 1, s.state_bits, s.oracle_calls));
        }
        out
    }
}

/// The sequential evaluator: one label per step in topological order,
/// appending each result to the state (`i` labels after step `i`).
pub fn naive_evaluate(
    g: &Dag,
    x: &[Vec<u8>],
    oracle: &mut LabelOracle,
) -> Result<(Vec<Vec<u8>>, LabelingTrace), MhfError> {
    let w = oracle.w_bits as u64;
    let mut steps = Vec::with_capacity(g.n());
    let labels = compute_labels(g, x, oracle, |i| {
        steps.push(StepTrace {
            state_bits: i as u64 * w,
            oracle_calls: 1,
        });
    })?;
    let outputs = g.sinks().iter().map(|v| labels[v as usize].clone()).collect();
    Ok((
        outputs,
        LabelingTrace {
            w_bits: oracle.w_bits,
            steps,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlphaBound {
    pub value: u64,
    /// Set when `floor(s/w) >= n` and the throughput term was dropped.
    pub degenerate: bool,
}

/// Guaranteed number of evaluations by the sequential algorithm under
/// resource bounds `(q, s, t)`: zero below `n` queries, otherwise the lesser
/// of the query and sustained-memory throughput terms.
pub fn alpha_bound(q: u64, s: u64, t: u64, n: u64, w: u64) -> AlphaBound {
    assert!(n >= 1 && w >= 1);
    if q < n {
        return AlphaBound {
            value: 0,
            degenerate: false,
        };
    }
    let per_query = q / n;
    let blocks = s / w;
    if blocks >= n {
        return AlphaBound {
            value: per_query,
            degenerate: true,
        };
    }
    AlphaBound {
        value: per_query.min(t / (n - blocks)),
        degenerate: false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmhfParams {
    /// `ss_value * (w - log2 q) / (1 + lambda)`.
    pub beta: f64,
    /// Exact value when `log2 q` is integral (q a power of two).
    pub beta_exact: Option<BigRational>,
    /// Upper bound `q / 2^w + 2^-lambda`.
    pub epsilon: f64,
    pub epsilon_exact: BigRational,
}

/// Hardness parameters derived from a sustained-space value of the
/// underlying graph. Logarithms are base 2.
pub fn smhf_parameters(
    ss_value: u64,
    w: u32,
    q: u64,
    lambda: u32,
) -> Result<SmhfParams, MhfError> {
    if q == 0 {
        return Err(MhfError::WTooSmall { w, q });
    }
    let pow2_w = BigInt::one() << w;
    if BigInt::from(q) >= pow2_w {
        return Err(MhfError::WTooSmall { w, q });
    }
    let log2q = (q as f64).log2();
    let beta = ss_value as f64 * (w as f64 - log2q) / (1.0 + lambda as f64);
    let beta_exact = if q.is_power_of_two() {
        let log2q_int = q.trailing_zeros();
        Some(BigRational::new(
            BigInt::from(ss_value) * BigInt::from(w as i64 - log2q_int as i64),
            BigInt::from(lambda as u64 + 1),
        ))
    } else {
        None
    };
    let pow2_w = BigInt::one() << w;
    let pow2_l = BigInt::one() << lambda;
    let epsilon_exact = BigRational::new(BigInt::from(q), pow2_w.clone())
        + BigRational::new(BigInt::one(), pow2_l);
    let epsilon = epsilon_exact.to_f64().unwrap_or(f64::NAN);
    Ok(SmhfParams {
        beta,
        beta_exact,
        epsilon,
        epsilon_exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit;
    use num_traits::Zero;
    use rand::Rng;
    use std::collections::HashMap;

    fn stub(w: u32, seed: u64) -> LabelOracle {
        LabelOracle::new(w, OracleBackend::TestStub { seed }).unwrap()
    }

    /// Independent memoized recursive reference evaluator.
    fn reference_label(
        g: &Dag,
        x: &[Vec<u8>],
        oracle: &mut LabelOracle,
        v: Node,
        memo: &mut HashMap<Node, Vec<u8>>,
    ) -> Vec<u8> {
        if let Some(l) = memo.get(&v) {
            return l.clone();
        }
        let sources: Vec<Node> = g.sources().to_vec();
        let vid = (v as u64).to_be_bytes();
        let label = if let Some(j) = sources.iter().position(|&s| s == v) {
            let mut fields: Vec<&[u8]> = x.iter().map(|f| f.as_slice()).collect();
            fields.push(&vid);
            fields.push(x[j].as_slice());
            oracle.call(&fields)
        } else {
            let parent_labels: Vec<Vec<u8>> = g
                .parent_list(v)
                .to_vec()
                .into_iter()
                .map(|u| reference_label(g, x, oracle, u, memo))
                .collect();
            let mut fields: Vec<&[u8]> = x.iter().map(|f| f.as_slice()).collect();
            fields.push(&vid);
            for l in &parent_labels {
                fields.push(l.as_slice());
            }
            oracle.call(&fields)
        };
        memo.insert(v, label.clone());
        label
    }

    fn reference_outputs(g: &Dag, x: &[Vec<u8>], w: u32, seed: u64) -> Vec<Vec<u8>> {
        let mut oracle = stub(w, seed);
        let mut memo = HashMap::new();
        g.sinks()
            .iter()
            .map(|v| reference_label(g, x, &mut oracle, v, &mut memo))
            .collect()
    }

    #[test]
    fn single_node_is_one_call() {
        let g = testkit::path(1);
        let mut oracle = stub(64, 5);
        let x = vec![vec![0xAB, 0xCD]];
        let out = graph_function(&g, &x, &mut oracle).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(oracle.call_log.len(), 1);
        // Equals the direct call h(x, 1, x_1).
        let mut direct = stub(64, 5);
        let vid = 1u64.to_be_bytes();
        let expect = direct.call(&[&[0xAB, 0xCD], &vid, &[0xAB, 0xCD]]);
        assert_eq!(out[0], expect);
    }

    #[test]
    fn chain_matches_reference_recursion() {
        let g = testkit::path(2);
        let x = vec![vec![7u8]];
        let mut oracle = stub(32, 9);
        let out = graph_function(&g, &x, &mut oracle).unwrap();
        assert_eq!(out, reference_outputs(&g, &x, 32, 9));
    }

    #[test]
    fn random_graphs_match_reference() {
        let mut rng = testkit::rng(14);
        for _ in 0..60 {
            let n = rng.gen_range(1..=16);
            let g = testkit::random_dag(n, 0.4, &mut rng);
            let a = g.sources().len();
            let x: Vec<Vec<u8>> = (0..a)
                .map(|_| (0..rng.gen_range(0..6)).map(|_| rng.gen()).collect())
                .collect();
            let seed = rng.gen();
            let mut oracle = stub(40, seed);
            let fast = graph_function(&g, &x, &mut oracle).unwrap();
            assert_eq!(fast, reference_outputs(&g, &x, 40, seed));
        }
    }

    #[test]
    fn determinism_and_arity() {
        let g = testkit::diamond();
        let x = vec![vec![1, 2, 3]];
        let a = graph_function(&g, &x, &mut stub(128, 3)).unwrap();
        let b = graph_function(&g, &x, &mut stub(128, 3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            graph_function(&g, &[], &mut stub(128, 3)),
            Err(MhfError::ArityMismatch {
                expected: 1,
                got: 0
            })
        );
    }

    #[test]
    fn naive_trace_profile() {
        let n = 16;
        let g = testkit::path(n);
        let w = 64u64;
        let mut oracle = stub(w as u32, 2);
        let (_, trace) = naive_evaluate(&g, &[vec![1]], &mut oracle).unwrap();
        assert_eq!(trace.total_calls(), n as u64);
        assert_eq!(oracle.call_log.len(), n);
        // State grows by one label per step.
        for (i, s) in trace.steps.iter().enumerate() {
            assert_eq!(s.state_bits, (i as u64 + 1) * w);
            assert_eq!(s.oracle_calls, 1);
        }
        for s in 1..=n as u64 {
            assert_eq!(trace.smc_threshold_count(s * w), n as u64 - s + 1);
            let expect: u64 = (1..=n as u64).map(|i| i / s).sum();
            assert_eq!(trace.smc_block_sum(s * w), expect);
        }
    }

    #[test]
    fn naive_trace_shadows_naive_pebbling() {
        let g = testkit::diamond();
        let w = 32u64;
        let (_, trace) = naive_evaluate(&g, &[vec![9]], &mut stub(w as u32, 4)).unwrap();
        let p = crate::strategies::naive_pebble(&g);
        let m = crate::pebbling::metrics(&g, &p).unwrap();
        for s in 1..=g.n() as u64 {
            assert_eq!(trace.smc_threshold_count(s * w), m.ss(s));
        }
    }

    #[test]
    fn encoding_is_injective_over_call_log() {
        let g = testkit::complete(6);
        let mut oracle = stub(48, 8);
        let _ = graph_function(&g, &[vec![5, 5]], &mut oracle).unwrap();
        let mut seen = std::collections::HashSet::new();
        for (input, _) in &oracle.call_log {
            assert!(seen.insert(input.clone()), "duplicate oracle input");
        }
    }

    #[test]
    fn encoding_field_boundaries_matter() {
        assert_ne!(
            encode_fields(&[b"ab", b"c"]),
            encode_fields(&[b"a", b"bc"])
        );
        assert_ne!(encode_fields(&[b"ab"]), encode_fields(&[b"ab", b""]));
    }

    #[test]
    fn real_hash_avalanche_smoke() {
        let g = testkit::binary_tree(3);
        let mut oracle = LabelOracle::new(256, OracleBackend::RealHash).unwrap();
        let x: Vec<Vec<u8>> = (0..4).map(|i| vec![i as u8; 4]).collect();
        let base = graph_function(&g, &x, &mut oracle).unwrap();
        let mut x2 = x.clone();
        x2[0][0] ^= 1;
        let mut oracle2 = LabelOracle::new(256, OracleBackend::RealHash).unwrap();
        let flipped = graph_function(&g, &x2, &mut oracle2).unwrap();
        for (a, b) in base.iter().zip(&flipped) {
            assert_ne!(a, b);
        }
    }

    #[test]
    fn odd_width_masks_tail_bits() {
        let mut oracle = stub(12, 6);
        let out = oracle.call(&[b"z"]);
        assert_eq!(out.len(), 2);
        assert_eq!(out[1] & 0x0F, 0, "low bits beyond 12 must be zero");
    }

    #[test]
    fn alpha_examples() {
        let n = 10;
        let w = 8;
        assert_eq!(alpha_bound(n - 1, 0, 100, n, w).value, 0);
        let a = alpha_bound(2 * n, 0, 2 * n, n, w);
        assert_eq!(a.value, 2);
        assert!(!a.degenerate);
        assert_eq!(alpha_bound(n, w, n - 1, n, w).value, 1);
        // Degenerate branch: floor(s/w) >= n.
        let a = alpha_bound(3 * n, n * w, 1, n, w);
        assert_eq!(a.value, 3);
        assert!(a.degenerate);
    }

    #[test]
    fn smhf_examples() {
        let p = smhf_parameters(0, 8, 2, 0).unwrap();
        assert_eq!(p.beta, 0.0);
        assert!(p.beta_exact.unwrap().is_zero());

        let p = smhf_parameters(4, 2, 2, 0).unwrap();
        assert_eq!(p.beta, 4.0);
        assert_eq!(
            p.beta_exact.unwrap(),
            BigRational::new(BigInt::from(4), BigInt::one())
        );
        assert_eq!(
            p.epsilon_exact,
            BigRational::new(BigInt::from(3), BigInt::from(2))
        );
        assert!((p.epsilon - 1.5).abs() < 1e-12);

        // Monotone: epsilon decreases in w and in lambda.
        let e1 = smhf_parameters(1, 4, 3, 0).unwrap().epsilon;
        let e2 = smhf_parameters(1, 8, 3, 0).unwrap().epsilon;
        let e3 = smhf_parameters(1, 8, 3, 2).unwrap().epsilon;
        assert!(e2 < e1 && e3 < e2);

        // Non-power-of-two q: no exact beta, float still defined.
        let p = smhf_parameters(5, 16, 3, 1).unwrap();
        assert!(p.beta_exact.is_none());
        assert!(p.beta > 0.0);

        assert_eq!(
            smhf_parameters(1, 2, 4, 0),
            Err(MhfError::WTooSmall { w: 2, q: 4 })
        );
    }
}
