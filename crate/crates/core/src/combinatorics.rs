//! Subset enumeration used by the exhaustive verifiers.

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
        if acc == u128::MAX {
            return acc;
        }
    }
    acc
}

/// Streaming enumerator of the `k`-subsets of `{1, ..., n}` in colexicographic
/// order (ordered by largest element, then recursively). Elements of each
/// yielded slice are ascending.
pub struct Combinations {
    n: u32,
    k: u32,
    state: Vec<u32>,
    started: bool,
    done: bool,
}

impl Combinations {
    pub fn new(n: u32, k: u32) -> Self {
        Combinations {
            n,
            k,
            state: (1..=k).collect(),
            started: false,
            done: k > n,
        }
    }

    pub fn next_subset(&mut self) -> Option<&[u32]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.state);
        }
        if self.k == 0 {
            self.done = true;
            return None;
        }
        // Colex successor: bump the lowest position that has headroom
        // before the next chosen element, resetting everything below it.
        let k = self.k as usize;
        let mut i = 0;
        while i < k {
            let cap = if i + 1 < k { self.state[i + 1] - 1 } else { self.n };
            if self.state[i] < cap {
                self.state[i] += 1;
                for (j, slot) in self.state.iter_mut().enumerate().take(i) {
                    *slot = j as u32 + 1;
                }
                return Some(&self.state);
            }
            i += 1;
        }
        self.done = true;
        None
    }
}
