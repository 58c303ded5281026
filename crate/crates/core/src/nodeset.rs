//! Dense sets of graph nodes.
//!
//! Nodes are identified with `1..=n`; a [`NodeSet`] is a fixed-universe
//! bitset over that range. Set algebra on these is the hot loop of pebbling
//! legality checks and of every exhaustive verifier, hence the word-level
//! representation.

use crate::graph::Node;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NodeSet {
    n: usize,
    words: Vec<u64>,
}

impl NodeSet {
    pub fn empty(n: usize) -> Self {
        NodeSet {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for w in s.words.iter_mut() {
            *w = u64::MAX;
        }
        s.clear_tail();
        s
    }

    pub fn singleton(n: usize, v: Node) -> Self {
        let mut s = Self::empty(n);
        s.insert(v);
        s
    }

    pub fn from_nodes<I: IntoIterator<Item = Node>>(n: usize, nodes: I) -> Self {
        let mut s = Self::empty(n);
        for v in nodes {
            s.insert(v);
        }
        s
    }

    /// Universe size `n`.
    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, v: Node) {
        debug_assert!(v >= 1 && v as usize <= self.n, "node {v} outside [1,{}]", self.n);
        let i = (v - 1) as usize;
        self.words[i / 64] |= 1u64 << (i % 64);
    }

    pub fn remove(&mut self, v: Node) {
        debug_assert!(v >= 1 && v as usize <= self.n);
        let i = (v - 1) as usize;
        self.words[i / 64] &= !(1u64 << (i % 64));
    }

    pub fn contains(&self, v: Node) -> bool {
        if v == 0 || v as usize > self.n {
            return false;
        }
        let i = (v - 1) as usize;
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &NodeSet) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &NodeSet) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn subtract(&mut self, other: &NodeSet) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        let mut s = self.clone();
        s.subtract(other);
        s
    }

    pub fn complement(&self) -> NodeSet {
        let mut s = NodeSet::full(self.n);
        s.subtract(self);
        s
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        debug_assert_eq!(self.n, other.n);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        debug_assert_eq!(self.n, other.n);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn intersection_len(&self, other: &NodeSet) -> usize {
        debug_assert_eq!(self.n, other.n);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Iterate members in ascending node order.
    pub fn iter(&self) -> Iter<'_> {
        Iter {
            set: self,
            word_idx: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<Node> {
        self.iter().collect()
    }

    fn clear_tail(&mut self) {
        let tail = self.n % 64;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }
}

pub struct Iter<'a> {
    set: &'a NodeSet,
    word_idx: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = Node;

    fn next(&mut self) -> Option<Node> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros();
                self.current &= self.current - 1;
                return Some((self.word_idx * 64) as Node + bit + 1);
            }
            self.word_idx += 1;
            if self.word_idx >= self.set.words.len() {
                return None;
            }
            self.current = self.set.words[self.word_idx];
        }
    }
}

impl<'a> IntoIterator for &'a NodeSet {
    type Item = Node;
    type IntoIter = Iter<'a>;
    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

impl std::fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
