//! Exact law of the tree on at most nine vertices.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::weights::WeightSequence;

pub const MAX_ENUMERATED: u64 = 9;

/// `parents[v]` is the parent label of `v` for `v >= 2`; entries 0 and 1 are 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallTree {
    pub parents: Vec<u8>,
}

impl SmallTree {
    pub fn n(&self) -> u64 {
        self.parents.len() as u64 - 1
    }

    pub fn height(&self, mut v: usize) -> u32 {
        let mut h = 0;
        while v > 1 {
            v = self.parents[v] as usize;
            h += 1;
        }
        h
    }

    /// Bit `k` is set iff `k >= 2` is an ancestor of `v` or `v` itself.
    pub fn ancestor_mask(&self, mut v: usize) -> u32 {
        let mut m = 0;
        while v > 1 {
            m |= 1 << v;
            v = self.parents[v] as usize;
        }
        m
    }

    /// Most recent common ancestor of `u` and `v`.
    pub fn mrca(&self, u: usize, v: usize) -> usize {
        let (mu, mv) = (self.ancestor_mask(u) | 2, self.ancestor_mask(v) | 2);
        31 - (mu & mv).leading_zeros() as usize
    }
}

#[derive(Clone, Debug)]
pub struct EnumeratedLaw {
    pub n: u64,
    pub trees: Vec<SmallTree>,
    pub probs: Vec<f64>,
    /// `w_1..w_n` at positions `1..=n`.
    pub weights: Vec<f64>,
    pub weight_sum: f64,
}

/// All recursive trees on `n` vertices with positive probability.
pub fn enumerate_small(seq: &WeightSequence, n: u64) -> Result<EnumeratedLaw> {
    if n == 0 || n > MAX_ENUMERATED {
        return Err(Error::TooLarge { what: "enumerated tree size", n, cap: MAX_ENUMERATED });
    }
    let mut weights = vec![0.0];
    for i in 1..=n {
        weights.push(seq.weight_at(i)?);
    }
    let mut prefix = vec![0.0; n as usize + 1];
    for i in 1..=n as usize {
        prefix[i] = prefix[i - 1] + weights[i];
    }
    let mut trees = Vec::new();
    let mut probs = Vec::new();
    let mut parents = vec![0u8; n as usize + 1];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        v: usize,
        n: usize,
        p: f64,
        weights: &[f64],
        prefix: &[f64],
        parents: &mut Vec<u8>,
        trees: &mut Vec<SmallTree>,
        probs: &mut Vec<f64>,
    ) {
        if v > n {
            trees.push(SmallTree { parents: parents.clone() });
            probs.push(p);
            return;
        }
        for u in 1..v {
            if weights[u] > 0.0 {
                parents[v] = u as u8;
                rec(v + 1, n, p * weights[u] / prefix[v - 1], weights, prefix, parents, trees, probs);
            }
        }
    }
    rec(2, n as usize, 1.0, &weights, &prefix, &mut parents, &mut trees, &mut probs);
    Ok(EnumeratedLaw { n, trees, probs, weight_sum: prefix[n as usize], weights })
}

impl EnumeratedLaw {
    pub fn total_probability(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `E[f(T)]`
    pub fn expect<F: Fn(&SmallTree) -> f64>(&self, f: F) -> f64 {
        self.trees.iter().zip(&self.probs).map(|(t, p)| p * f(t)).sum()
    }

    /// Law of the ancestral mask of a vertex drawn with probability `w_i/W_n`.
    pub fn weighted_path_law(&self) -> BTreeMap<u32, f64> {
        let mut law = BTreeMap::new();
        for (t, p) in self.trees.iter().zip(&self.probs) {
            for i in 1..=self.n as usize {
                let w = self.weights[i] / self.weight_sum;
                if w > 0.0 {
                    *law.entry(t.ancestor_mask(i)).or_insert(0.0) += p * w;
                }
            }
        }
        law
    }

    /// `E[Σ_i (w_i/W_n) h(u_i)]`
    pub fn weighted_depth_mean(&self) -> f64 {
        self.expect(|t| {
            (1..=self.n as usize).map(|i| self.weights[i] / self.weight_sum * t.height(i) as f64).sum()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_count_and_mass() {
        let law = enumerate_small(&WeightSequence::constant(1.0), 6).unwrap();
        assert_eq!(law.trees.len(), 120);
        assert!((law.total_probability() - 1.0).abs() < 1e-14);
        for p in &law.probs {
            assert!((p - 1.0 / 120.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_weights_prune_trees() {
        let seq = WeightSequence::table(vec![1.0, 0.0, 1.0, 1.0]).unwrap();
        let law = enumerate_small(&seq, 4).unwrap();
        assert!(law.trees.iter().all(|t| t.parents[3] != 2 && t.parents[4] != 2));
        assert!((law.total_probability() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mrca_and_masks() {
        // 1 <- 2 <- 3, 1 <- 4, 2 <- 5
        let t = SmallTree { parents: vec![0, 0, 1, 2, 1, 2] };
        assert_eq!(t.mrca(3, 5), 2);
        assert_eq!(t.mrca(3, 4), 1);
        assert_eq!(t.mrca(3, 3), 3);
        assert_eq!(t.ancestor_mask(3), 0b1100);
        assert_eq!(t.height(3), 2);
    }

    #[test]
    fn weighted_depth_mean_is_depth_statistic_minus_one() {
        let seq = WeightSequence::harmonic();
        let law = enumerate_small(&seq, 7).unwrap();
        let a = seq.prefix_at(7).unwrap().depth_mean;
        assert!((law.weighted_depth_mean() - (a - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn rejects_large_sizes() {
        assert!(enumerate_small(&WeightSequence::harmonic(), 10).is_err());
    }
}
