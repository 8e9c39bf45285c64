//! Weighted recursive tree growth.

use serde::{Deserialize, Serialize};

use super::sampler::FenwickSampler;
use crate::error::{invalid, Error, Result};
use crate::rng::CounterRng;
use crate::sum::Compensated;
use crate::weights::WeightSequence;

/// Rebuild the sampler after this many insertions.
pub const REBUILD_INTERVAL: u64 = 1 << 26;
/// Retry draws available per vertex.
const DRAWS_PER_VERTEX: u64 = 64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    HeightOnly,
    Full,
}

#[derive(Clone, Debug)]
pub struct WrtState {
    seq: WeightSequence,
    seed: u64,
    rng: CounterRng,
    mode: Mode,
    heights: Vec<u32>,
    parents: Option<Vec<u32>>,
    sampler: FenwickSampler,
    weight_sum: Compensated,
    weighted_height: Compensated,
    max_height: u32,
    greedy: Vec<u64>,
    non_increasing: bool,
    last_weight: f64,
    since_rebuild: u64,
}

/// Grow a tree on `n` vertices.
pub fn grow(seq: &WeightSequence, n: u64, seed: u64, mode: Mode) -> Result<WrtState> {
    let mut st = WrtState::new(seq, seed, mode)?;
    st.extend_to(n)?;
    Ok(st)
}

impl WrtState {
    /// A tree with only the root.
    pub fn new(seq: &WeightSequence, seed: u64, mode: Mode) -> Result<Self> {
        seq.validate()?;
        let mut st = WrtState {
            seq: seq.clone(),
            seed,
            rng: CounterRng::new(seed),
            mode,
            heights: Vec::new(),
            parents: (mode == Mode::Full).then(Vec::new),
            sampler: FenwickSampler::new(),
            weight_sum: Compensated::new(),
            weighted_height: Compensated::new(),
            max_height: 0,
            greedy: vec![1],
            non_increasing: true,
            last_weight: f64::INFINITY,
            since_rebuild: 0,
        };
        st.push_vertex(0, 0)?;
        Ok(st)
    }

    fn push_vertex(&mut self, parent: u32, height: u32) -> Result<()> {
        let i = self.heights.len() as u64 + 1;
        let w = self.seq.eval(i);
        if !(w >= 0.0 && w.is_finite()) {
            return invalid(format!("weight w_{i} = {w} is not a nonnegative real"));
        }
        if w > self.last_weight {
            self.non_increasing = false;
        }
        self.last_weight = w;
        self.heights.push(height);
        if let Some(p) = self.parents.as_mut() {
            p.push(parent);
        }
        self.sampler.add_weight(w);
        self.weight_sum.add(w);
        self.weighted_height.add(w * height as f64);
        self.max_height = self.max_height.max(height);
        self.since_rebuild += 1;
        if self.since_rebuild >= REBUILD_INTERVAL {
            self.rebuild_sampler();
        }
        Ok(())
    }

    /// Recompute the sampler's internal sums from the weight sequence.
    pub fn rebuild_sampler(&mut self) {
        let n = self.heights.len();
        self.sampler.rebuild(self.seq.iter().take(n));
        self.since_rebuild = 0;
    }

    /// Add vertices until the tree has `m` of them.
    pub fn extend_to(&mut self, m: u64) -> Result<()> {
        if m == 0 {
            return invalid("a tree has at least one vertex");
        }
        if m > u32::MAX as u64 {
            return Err(Error::TooLarge { what: "vertex count", n: m, cap: u32::MAX as u64 });
        }
        if let Some(len) = self.seq.len() {
            if m > len {
                return Err(Error::IndexOutOfRange { index: m, len });
            }
        }
        self.heights.reserve((m as usize).saturating_sub(self.heights.len()));
        while (self.heights.len() as u64) < m {
            let v = self.heights.len() as u64 + 1;
            let rng = self.rng;
            let mut attempt = 0u64;
            let parent = self.sampler.sample_index(|| {
                attempt += 1;
                rng.uniform(v * DRAWS_PER_VERTEX + attempt - 1)
            })?;
            let h = self.heights[parent - 1] + 1;
            if parent as u64 == *self.greedy.last().expect("path starts at the root") {
                self.greedy.push(v);
            }
            self.push_vertex(parent as u32, h)?;
        }
        Ok(())
    }

    pub fn n(&self) -> u64 {
        self.heights.len() as u64
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sequence(&self) -> &WeightSequence {
        &self.seq
    }

    /// Heights indexed by `label − 1`.
    pub fn heights(&self) -> &[u32] {
        &self.heights
    }

    pub fn height(&self, label: u64) -> u32 {
        self.heights[(label - 1) as usize]
    }

    /// Parent labels indexed by `label − 1` (root has parent 0).
    pub fn parents(&self) -> Option<&[u32]> {
        self.parents.as_deref()
    }

    pub fn sampler(&self) -> &FenwickSampler {
        &self.sampler
    }

    pub fn weight_sum(&self) -> f64 {
        self.weight_sum.value()
    }

    pub fn max_height(&self) -> u32 {
        self.max_height
    }

    /// Bytes held by heights, parents and the sampler.
    pub fn memory_bytes(&self) -> usize {
        self.heights.capacity() * 4
            + self.parents.as_ref().map_or(0, |p| p.capacity() * 4)
            + self.sampler.memory_bytes()
    }

    pub fn height_stats(&self) -> HeightStats {
        let mut histogram = vec![0u64; self.max_height as usize + 1];
        for &h in &self.heights {
            histogram[h as usize] += 1;
        }
        HeightStats {
            n: self.n(),
            max_height: self.max_height,
            histogram,
            weighted_depth_mean: self.weighted_height.value() / self.weight_sum.value(),
        }
    }

    /// Exact diameter from subtree depths.
    pub fn diameter(&self) -> Result<u32> {
        let parents = self.parents.as_ref().ok_or_else(|| {
            Error::NotApplicable("diameter needs the parent array (full mode)".into())
        })?;
        let n = parents.len();
        let mut best = vec![0u32; n];
        let mut second = vec![0u32; n];
        for i in (1..n).rev() {
            let p = parents[i] as usize - 1;
            let d = best[i] + 1;
            if d > best[p] {
                second[p] = best[p];
                best[p] = d;
            } else if d > second[p] {
                second[p] = d;
            }
        }
        Ok((0..n).map(|v| best[v] + second[v]).max().unwrap_or(0))
    }

    /// Labels `I_0 = 1 < I_1 < ...` of the greedy first-child path.
    pub fn greedy_first_child_path(&self) -> GreedyPath {
        GreedyPath { labels: self.greedy.clone(), non_increasing_weights: self.non_increasing }
    }

    /// First-child labels recomputed from the parent array.
    pub fn greedy_path_from_parents(&self) -> Result<Vec<u64>> {
        let parents = self.parents.as_ref().ok_or_else(|| {
            Error::NotApplicable("recomputing the path needs the parent array (full mode)".into())
        })?;
        let mut first_child = vec![0u64; parents.len() + 1];
        for (k, &p) in parents.iter().enumerate().skip(1) {
            let slot = &mut first_child[p as usize];
            if *slot == 0 {
                *slot = k as u64 + 1;
            }
        }
        let mut path = vec![1u64];
        while let Some(&c) = path.last().map(|&v| &first_child[v as usize]) {
            if c == 0 {
                break;
            }
            path.push(c);
        }
        Ok(path)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeightStats {
    pub n: u64,
    pub max_height: u32,
    /// Vertex count per height.
    pub histogram: Vec<u64>,
    /// `Σ w_i height(i) / W_n`
    pub weighted_depth_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreedyPath {
    pub labels: Vec<u64>,
    /// The path lower-bound argument assumes non-increasing weights.
    pub non_increasing_weights: bool,
}

impl GreedyPath {
    /// Number of edges on the path; a lower bound on the height.
    pub fn length(&self) -> usize {
        self.labels.len() - 1
    }

    /// True if some `r` with `thresholds[r] <= n` has `I_r > thresholds[r]`
    /// (a missing `I_r` counts as exceeding).
    pub fn violates(&self, thresholds: &[u64], n: u64) -> bool {
        thresholds
            .iter()
            .enumerate()
            .take_while(|(_, &i)| i <= n)
            .any(|(r, &i)| self.labels.get(r).is_none_or(|&label| label > i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_vertices() {
        for seed in 0..20 {
            let t = grow(&WeightSequence::harmonic(), 2, seed, Mode::Full).unwrap();
            assert_eq!(t.parents().unwrap()[1], 1);
            assert_eq!(t.height(2), 1);
            assert_eq!(t.max_height(), 1);
            assert_eq!(t.diameter().unwrap(), 1);
        }
        let t = grow(&WeightSequence::harmonic(), 1, 0, Mode::HeightOnly).unwrap();
        assert_eq!(t.max_height(), 0);
    }

    #[test]
    fn third_vertex_is_uniform_for_constant_weights() {
        let n = 100_000u64;
        let ones = (0..n)
            .filter(|&s| grow(&WeightSequence::constant(1.0), 3, s, Mode::Full).unwrap().parents().unwrap()[2] == 1)
            .count();
        let sd = (0.25 / n as f64).sqrt();
        assert!((ones as f64 / n as f64 - 0.5).abs() < 3.0 * sd);
    }

    #[test]
    fn full_mode_heights_follow_parents() {
        let t = grow(&WeightSequence::power_law(1.5), 5000, 3, Mode::Full).unwrap();
        let p = t.parents().unwrap();
        for (i, &parent) in p.iter().enumerate().skip(1) {
            assert!((parent as usize) <= i);
            assert_eq!(t.heights()[i], t.heights()[parent as usize - 1] + 1);
        }
        assert!(t.diameter().unwrap() >= t.max_height());
        assert_eq!(t.greedy_first_child_path().labels, t.greedy_path_from_parents().unwrap());
    }

    #[test]
    fn height_only_has_no_diameter() {
        let t = grow(&WeightSequence::harmonic(), 10, 0, Mode::HeightOnly).unwrap();
        assert!(matches!(t.diameter(), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn replay_and_extension_are_bit_identical() {
        let s = WeightSequence::harmonic();
        let a = grow(&s, 20_000, 42, Mode::HeightOnly).unwrap();
        let b = grow(&s, 20_000, 42, Mode::HeightOnly).unwrap();
        assert_eq!(a.heights(), b.heights());
        let mut c = grow(&s, 700, 42, Mode::HeightOnly).unwrap();
        c.extend_to(20_000).unwrap();
        assert_eq!(a.heights(), c.heights());
        let d = grow(&s, 20_000, 43, Mode::HeightOnly).unwrap();
        assert_ne!(a.heights(), d.heights());
    }

    #[test]
    fn star_when_root_dominates() {
        let s = WeightSequence::constant(1.0).with_first(1e12).unwrap();
        let t = grow(&s, 50, 1, Mode::Full).unwrap();
        assert_eq!(t.diameter().unwrap(), 2);
        assert_eq!(t.max_height(), 1);
    }

    #[test]
    fn greedy_path_starts_at_root_then_two() {
        for seed in 0..50 {
            let t = grow(&WeightSequence::constant(1.0), 30, seed, Mode::HeightOnly).unwrap();
            let p = t.greedy_first_child_path();
            assert_eq!(p.labels[0], 1);
            assert_eq!(p.labels[1], 2);
            assert!(p.length() as u32 <= t.max_height());
        }
    }

    #[test]
    fn greedy_violation_counts_missing_steps() {
        let p = GreedyPath { labels: vec![1, 2, 9], non_increasing_weights: true };
        assert!(!p.violates(&[1, 2, 10], 20));
        assert!(p.violates(&[1, 2, 5], 20));
        assert!(!p.violates(&[1, 2, 5], 4));
        assert!(p.violates(&[1, 2, 10, 15], 20));
    }

    #[test]
    fn weighted_depth_mean_and_histogram() {
        let t = grow(&WeightSequence::table(vec![1.0, 1.0]).unwrap(), 2, 0, Mode::HeightOnly).unwrap();
        let st = t.height_stats();
        assert_eq!(st.histogram, vec![1, 1]);
        assert_eq!(st.weighted_depth_mean, 0.5);
    }

    #[test]
    fn table_too_short_is_an_error() {
        let s = WeightSequence::table(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(grow(&s, 4, 0, Mode::HeightOnly).is_err());
    }
}
