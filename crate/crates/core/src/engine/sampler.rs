//! Append-only binary indexed tree over vertex weights.

use crate::error::{Error, Result};

const INITIAL_CAPACITY: usize = 1 << 10;

#[derive(Clone, Debug)]
pub struct FenwickSampler {
    /// 1-based; `tree.len() - 1` is the capacity, always a power of two.
    tree: Vec<f64>,
    len: usize,
    /// Bitset of indices holding zero weight.
    zeros: Vec<u64>,
    any_zero: bool,
}

impl Default for FenwickSampler {
    fn default() -> Self {
        Self::new()
    }
}

impl FenwickSampler {
    pub fn new() -> Self {
        FenwickSampler { tree: vec![0.0; INITIAL_CAPACITY + 1], len: 0, zeros: Vec::new(), any_zero: false }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.tree.len() - 1
    }

    /// Bytes held by the structure.
    pub fn memory_bytes(&self) -> usize {
        self.tree.capacity() * 8 + self.zeros.capacity() * 8
    }

    fn grow(&mut self) {
        let cap = self.capacity();
        let total = self.tree[cap];
        self.tree.resize(2 * cap + 1, 0.0);
        self.tree[2 * cap] = total;
    }

    pub fn add_weight(&mut self, w: f64) {
        debug_assert!(w >= 0.0 && w.is_finite());
        self.len += 1;
        if self.len > self.capacity() {
            self.grow();
        }
        if w == 0.0 {
            self.mark_zero(self.len);
        }
        let cap = self.capacity();
        let mut i = self.len;
        while i <= cap {
            self.tree[i] += w;
            i += i & i.wrapping_neg();
        }
    }

    fn mark_zero(&mut self, i: usize) {
        let word = i >> 6;
        if self.zeros.len() <= word {
            self.zeros.resize(word + 1, 0);
        }
        self.zeros[word] |= 1 << (i & 63);
        self.any_zero = true;
    }

    #[inline]
    fn is_zero(&self, i: usize) -> bool {
        self.any_zero && self.zeros.get(i >> 6).is_some_and(|w| w & (1 << (i & 63)) != 0)
    }

    /// Sum of all stored weights.
    #[inline]
    pub fn total(&self) -> f64 {
        self.tree[self.capacity()]
    }

    pub fn prefix_sum(&self, mut i: usize) -> f64 {
        let mut s = 0.0;
        while i > 0 {
            s += self.tree[i];
            i &= i - 1;
        }
        s
    }

    /// Smallest 1-based index whose prefix sum exceeds `u · total`, or
    /// `None` when rounding lands on an index that cannot be returned.
    #[inline]
    pub fn locate(&self, u: f64) -> Option<usize> {
        let mut target = u * self.total();
        let cap = self.capacity();
        let mut pos = 0usize;
        let mut step = cap;
        while step > 0 {
            let next = pos + step;
            if next <= cap {
                let t = self.tree[next];
                if t <= target {
                    target -= t;
                    pos = next;
                }
            }
            step >>= 1;
        }
        let idx = pos + 1;
        (idx <= self.len && !self.is_zero(idx)).then_some(idx)
    }

    /// Draw an index with probability proportional to its weight, using
    /// uniforms from `draw` until one lands on a valid index.
    pub fn sample_index<F: FnMut() -> f64>(&self, mut draw: F) -> Result<usize> {
        if self.len == 0 || !(self.total() > 0.0) {
            return Err(Error::InvalidParameter("sampling from an empty or zero-mass sampler".into()));
        }
        for _ in 0..64 {
            if let Some(i) = self.locate(draw()) {
                return Ok(i);
            }
        }
        Err(Error::InvalidParameter("sampler rejected 64 consecutive draws".into()))
    }

    /// Recompute every node from the raw weights.
    pub fn rebuild<I: IntoIterator<Item = f64>>(&mut self, weights: I) {
        let cap = self.capacity();
        self.tree.iter_mut().for_each(|x| *x = 0.0);
        let mut count = 0;
        for (k, w) in weights.into_iter().take(self.len).enumerate() {
            self.tree[k + 1] = w;
            count += 1;
        }
        debug_assert_eq!(count, self.len);
        for i in 1..=cap {
            let j = i + (i & i.wrapping_neg());
            if j <= cap {
                let v = self.tree[i];
                self.tree[j] += v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    fn frequencies(weights: &[f64], draws: u64) -> Vec<f64> {
        let mut s = FenwickSampler::new();
        for &w in weights {
            s.add_weight(w);
        }
        let rng = CounterRng::new(11);
        let mut c = 0u64;
        let mut counts = vec![0u64; weights.len() + 1];
        for _ in 0..draws {
            let i = s
                .sample_index(|| {
                    c += 1;
                    rng.uniform(c)
                })
                .unwrap();
            counts[i] += 1;
        }
        counts.iter().map(|&k| k as f64 / draws as f64).collect()
    }

    #[test]
    fn uniform_weights() {
        let n = 100_000;
        let f = frequencies(&[1.0, 1.0, 1.0], n);
        let sd = ((1.0 / 3.0) * (2.0 / 3.0) / n as f64).sqrt();
        for k in 1..=3 {
            assert!((f[k] - 1.0 / 3.0).abs() < 3.0 * sd, "{f:?}");
        }
    }

    #[test]
    fn zero_weight_never_sampled() {
        let f = frequencies(&[2.0, 0.0, 1.0], 100_000);
        assert_eq!(f[2], 0.0);
        assert!((f[1] - 2.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn growth_past_initial_capacity_keeps_prefix_sums() {
        let mut s = FenwickSampler::new();
        let n = 5000;
        for i in 1..=n {
            s.add_weight(1.0 / i as f64);
        }
        assert!(s.capacity() >= n);
        let exact: f64 = (1..=n).map(|i| 1.0 / i as f64).sum();
        assert!((s.total() - exact).abs() < 1e-12 * exact);
        let h100: f64 = (1..=100).map(|i| 1.0 / i as f64).sum();
        assert!((s.prefix_sum(100) - h100).abs() < 1e-13);
    }

    #[test]
    fn rebuild_matches_recomputed_total() {
        let mut s = FenwickSampler::new();
        let w = |i: usize| (i as f64).powf(-2.0);
        for i in 1..=3000 {
            s.add_weight(w(i));
        }
        s.rebuild((1..=3000).map(w));
        let exact = crate::sum::compensated_sum((1..=3000).map(w));
        assert!(((s.total() - exact) / exact).abs() < 1e-12);
        assert!((s.prefix_sum(2) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn empty_sampler_errors() {
        assert!(FenwickSampler::new().sample_index(|| 0.5).is_err());
    }
}
