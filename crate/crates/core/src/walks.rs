//! Exact dynamic programs for inhomogeneous Bernoulli walks `H_n = Σ_{i=2}^n B_i`,
//! `B_i ~ Bernoulli(w_i/W_i)`, and the barrier, tilted and coupled variants.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::engine::enumerate_small;
use crate::error::{invalid, Error, Result};
use crate::schedules::{epoch_sums, Schedule};
use crate::sum::Compensated;
use crate::weights::WeightSequence;

/// Mass below which support entries at either end are dropped.
pub const TRUNCATION_MASS: f64 = 1e-15;
/// Cap on `n · support` cells for single-walk DPs.
pub const DP_BUDGET: u64 = 4_000_000_000;
/// Largest `n` for the exact second moment.
pub const SECOND_MOMENT_MAX_N: u64 = 2_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WalkPmf {
    pub n: u64,
    /// Walk value of `probs[0]`.
    pub offset: u64,
    pub probs: Vec<f64>,
    /// Mass dropped by support truncation.
    pub truncated: f64,
    pub constraint: String,
}

impl WalkPmf {
    pub fn prob(&self, h: u64) -> f64 {
        h.checked_sub(self.offset).and_then(|k| self.probs.get(k as usize)).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().copied().collect::<Compensated>().value()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| p * (k as u64 + self.offset) as f64).sum()
    }

    pub fn max_value(&self) -> u64 {
        self.offset + self.probs.len() as u64 - 1
    }

    /// Upper bound on `P(H >= x)`, counting all truncated mass.
    pub fn tail_upper(&self, x: u64) -> f64 {
        let start = x.saturating_sub(self.offset) as usize;
        let tail: f64 = self.probs.iter().skip(start).sum();
        (tail + self.truncated).min(1.0)
    }
}

fn step_probabilities(seq: &WeightSequence, n: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return invalid("n must be >= 1");
    }
    seq.increments(n)
}

/// Exact law of `H_n` by sequential convolution with support truncation.
pub fn bernoulli_walk_pmf(seq: &WeightSequence, n: u64) -> Result<WalkPmf> {
    let q = step_probabilities(seq, n)?;
    let mut probs = vec![1.0];
    let mut offset = 0u64;
    let mut truncated = 0.0;
    for &p in q.iter().skip(2) {
        probs.push(0.0);
        for k in (1..probs.len()).rev() {
            probs[k] = probs[k] * (1.0 - p) + probs[k - 1] * p;
        }
        probs[0] *= 1.0 - p;
        while probs.len() > 1 {
            let last = *probs.last().expect("non-empty");
            if truncated + last > TRUNCATION_MASS {
                break;
            }
            truncated += last;
            probs.pop();
        }
        while probs.len() > 1 && truncated + probs[0] <= TRUNCATION_MASS {
            truncated += probs[0];
            probs.remove(0);
            offset += 1;
        }
    }
    Ok(WalkPmf { n, offset, probs, truncated, constraint: "none".into() })
}

/// `e^θ q / (1 + (e^θ − 1) q)`
pub fn tilted_probability(q: f64, theta: f64) -> f64 {
    let e = theta.exp();
    e * q / (1.0 + (e - 1.0) * q)
}

struct EpochEnd {
    index: u64,
    bound: usize,
    slope: f64,
}

/// Walk from 0 before step `start`; at each epoch end the value must not exceed
/// `bound` and the mass is multiplied by `exp(slope·(value − bound))`.
fn constrained_final(probs: &[f64], start: u64, n: u64, ends: &[EpochEnd], target: usize) -> f64 {
    let mut v = vec![0.0; target + 1];
    v[0] = 1.0;
    let mut next = 0usize;
    let mut hi = 0usize;
    for i in start..=n {
        let p = probs[i as usize];
        let top = (hi + 1).min(target);
        for h in (1..=top).rev() {
            v[h] = v[h] * (1.0 - p) + v[h - 1] * p;
        }
        v[0] *= 1.0 - p;
        hi = top;
        while next < ends.len() && ends[next].index == i {
            let e = &ends[next];
            for x in v.iter_mut().skip(e.bound + 1) {
                *x = 0.0;
            }
            hi = hi.min(e.bound);
            if e.slope != 0.0 {
                for (h, x) in v.iter_mut().enumerate().take(hi + 1) {
                    *x *= (e.slope * (h as f64 - e.bound as f64)).exp();
                }
            }
            next += 1;
        }
    }
    v[target]
}

fn check_budget(n: u64, support: u64) -> Result<()> {
    let cells = n.saturating_mul(support + 1);
    if cells > DP_BUDGET {
        return Err(Error::TooLarge { what: "DP cells (n·support)", n: cells, cap: DP_BUDGET });
    }
    Ok(())
}

fn barrier_ends(schedule: &Schedule, t_n: u64, slopes: Option<&[f64]>) -> Result<Vec<EpochEnd>> {
    (1..t_n)
        .map(|r| {
            Ok(EpochEnd {
                index: schedule.index(r)?,
                bound: r as usize,
                slope: slopes.map_or(0.0, |th| th[r as usize + 1] - th[r as usize]),
            })
        })
        .collect()
}

/// `E[Q_n] = P(H_n = t_n, H_{i_r} <= r for all r < t_n)`.
pub fn barrier_probability(seq: &WeightSequence, schedule: &Schedule, n: u64) -> Result<f64> {
    let t_n = schedule.t_of(n)?;
    if n < 2 {
        return Ok(if t_n == 0 { 1.0 } else { 0.0 });
    }
    check_budget(n, t_n)?;
    let q = step_probabilities(seq, n)?;
    let ends = barrier_ends(schedule, t_n, None)?;
    Ok(constrained_final(&q, 2, n, &ends, t_n as usize))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TiltedParams {
    /// `θ_r` with `θ_r = 0` for `r < r0`; position 0 unused.
    pub thetas: Vec<f64>,
    /// `p_i` for `i = 2..=n`; positions 0 and 1 unused.
    pub p: Vec<f64>,
    pub r0: u64,
}

fn epoch_of_each(schedule: &Schedule, n: u64) -> Result<Vec<u64>> {
    let mut out = vec![0u64; n as usize + 1];
    let mut t = 1u64;
    for (i, slot) in out.iter_mut().enumerate().skip(2) {
        while schedule.index(t)? < i as u64 {
            t += 1;
        }
        *slot = t;
    }
    Ok(out)
}

/// Tilted step probabilities; `thetas[r]` is `θ_r`, zeroed below `r0`.
pub fn tilted_params(seq: &WeightSequence, schedule: &Schedule, thetas: &[f64], r0: u64, n: u64) -> Result<TiltedParams> {
    let t_n = schedule.t_of(n)?;
    if thetas.len() <= t_n as usize {
        return invalid(format!("need θ_1..θ_{t_n}, got {} entries", thetas.len()));
    }
    let mut th = thetas[..=t_n as usize].to_vec();
    th[0] = 0.0;
    for x in th.iter_mut().take(r0 as usize).skip(1) {
        *x = 0.0;
    }
    let q = step_probabilities(seq, n)?;
    let epochs = epoch_of_each(schedule, n)?;
    let mut p = vec![0.0; n as usize + 1];
    for i in 2..=n as usize {
        p[i] = tilted_probability(q[i], th[epochs[i] as usize]);
    }
    Ok(TiltedParams { thetas: th, p, r0 })
}

fn is_monotone_nonnegative(th: &[f64]) -> bool {
    th.iter().skip(1).all(|x| *x >= 0.0) && th.windows(2).skip(1).all(|w| w[1] >= w[0])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TiltedIdentity {
    /// Product formula times the tilted expectation.
    pub lhs: f64,
    /// `exp(Σ(e^θ−1)w_i/W_i − Σθ_r)`
    pub upper: f64,
    /// Lower bound with the `e^{2θ}(w_i/W_i)²/2` correction.
    pub lower: f64,
    /// Tilted expectation alone.
    pub expectation: f64,
    /// `θ` non-decreasing and nonnegative over the used epochs.
    pub monotone: bool,
}

/// Change of measure to the tilted law with `θ_r = 0` for `r < r0`.
pub fn tilted_identity_eval(
    seq: &WeightSequence,
    schedule: &Schedule,
    thetas: &[f64],
    r0: u64,
    n: u64,
) -> Result<TiltedIdentity> {
    let t_n = schedule.t_of(n)?;
    check_budget(n, t_n)?;
    let tp = tilted_params(seq, schedule, thetas, r0, n)?;
    let q = step_probabilities(seq, n)?;
    let epochs = epoch_of_each(schedule, n)?;
    let th = &tp.thetas;
    let mut th_ext = th.clone();
    th_ext.push(*th.last().expect("non-empty"));
    let ends = barrier_ends(schedule, t_n, Some(&th_ext))?;
    let expectation = if n < 2 { if t_n == 0 { 1.0 } else { 0.0 } } else { constrained_final(&tp.p, 2, n, &ends, t_n as usize) };
    let mut log1p_sum = Compensated::new();
    let mut lin_sum = Compensated::new();
    let mut sq_sum = Compensated::new();
    for i in 2..=n as usize {
        let theta = th[epochs[i] as usize];
        log1p_sum.add((theta.exp_m1() * q[i]).ln_1p());
        lin_sum.add(theta.exp_m1() * q[i]);
        sq_sum.add((2.0 * theta).exp() * q[i] * q[i] / 2.0);
    }
    let theta_sum: f64 = th[1..=t_n as usize].iter().sum();
    Ok(TiltedIdentity {
        lhs: (log1p_sum.value() - theta_sum).exp() * expectation,
        upper: (lin_sum.value() - theta_sum).exp(),
        lower: (lin_sum.value() - sq_sum.value() - theta_sum).exp() * expectation,
        expectation,
        monotone: is_monotone_nonnegative(th),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManyToOne {
    pub n: u64,
    /// Law of the ancestral jump set from enumeration (bit `k` set iff the walk jumps at `k`).
    pub enumerated: BTreeMap<u32, f64>,
    pub walk: BTreeMap<u32, f64>,
    pub total_variation: f64,
}

/// Weight-biased ancestral path law from enumeration against the Bernoulli walk path law.
pub fn many_to_one_check(seq: &WeightSequence, n: u64) -> Result<ManyToOne> {
    let law = enumerate_small(seq, n)?;
    let enumerated = law.weighted_path_law();
    let q = step_probabilities(seq, n)?;
    let mut walk = BTreeMap::new();
    for bits in 0u32..(1 << (n - 1)) {
        let mask = bits << 2;
        let mut p = 1.0;
        for (k, &qk) in q.iter().enumerate().skip(2) {
            p *= if mask & (1 << k) != 0 { qk } else { 1.0 - qk };
        }
        if p > 0.0 {
            walk.insert(mask, p);
        }
    }
    let mut tv = 0.0;
    for key in enumerated.keys().chain(walk.keys()).collect::<std::collections::BTreeSet<_>>() {
        tv += (enumerated.get(key).unwrap_or(&0.0) - walk.get(key).unwrap_or(&0.0)).abs();
    }
    Ok(ManyToOne { n, enumerated, walk, total_variation: tv / 2.0 })
}

/// Label functional `f` for pair identities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum LabelFn {
    One,
    Indicator(u64),
    Label,
}

impl LabelFn {
    pub fn eval(&self, label: u64) -> f64 {
        match self {
            LabelFn::One => 1.0,
            LabelFn::Indicator(l) => f64::from(u8::from(*l == label)),
            LabelFn::Label => label as f64,
        }
    }
}

/// `H_index ∈ [lo, hi]`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HeightWindow {
    pub index: u64,
    pub lo: u32,
    pub hi: u32,
}

/// Height-path indicator `F`, as a conjunction of windows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum PathIndicator {
    Always,
    FinalHeightAtMost(u32),
    FinalHeightEquals(u32),
    Windows(Vec<HeightWindow>),
}

impl PathIndicator {
    /// Barrier event of `Q_n`.
    pub fn barrier(schedule: &Schedule, n: u64) -> Result<Self> {
        let t_n = schedule.t_of(n)?;
        let mut w = Vec::new();
        for r in 1..t_n {
            w.push(HeightWindow { index: schedule.index(r)?, lo: 0, hi: r as u32 });
        }
        w.push(HeightWindow { index: n, lo: t_n as u32, hi: t_n as u32 });
        Ok(PathIndicator::Windows(w))
    }

    fn windows(&self, n: u64) -> Vec<HeightWindow> {
        match self {
            PathIndicator::Always => Vec::new(),
            PathIndicator::FinalHeightAtMost(h) => vec![HeightWindow { index: n, lo: 0, hi: *h }],
            PathIndicator::FinalHeightEquals(h) => vec![HeightWindow { index: n, lo: *h, hi: *h }],
            PathIndicator::Windows(w) => w.clone(),
        }
    }

    /// Evaluate on an ancestral jump mask.
    pub fn accepts_mask(&self, mask: u32, n: u64) -> bool {
        self.windows(n).iter().all(|w| {
            let below = if w.index >= 31 { mask } else { mask & ((2u32 << w.index) - 1) };
            let h = below.count_ones();
            w.lo <= h && h <= w.hi
        })
    }
}

/// Per-index `(lo, hi)` with a support cap.
fn window_table(ind: &PathIndicator, n: u64) -> Result<(Vec<(usize, usize)>, usize)> {
    let mut table = vec![(0usize, usize::MAX); n as usize + 1];
    for w in ind.windows(n) {
        if w.index == 0 || w.index > n {
            return invalid(format!("window index {} outside 1..={n}", w.index));
        }
        let e = &mut table[w.index as usize];
        e.0 = e.0.max(w.lo as usize);
        e.1 = e.1.min(w.hi as usize);
    }
    let cap = (n as usize - 1).min(table[n as usize].1);
    Ok((table, cap))
}

/// `Σ_ℓ (w_ℓ/W_ℓ)² Π_{i>ℓ}(1−(w_i/W_i)²) f(ℓ) E[F(H^ℓ)F(H̄^ℓ)]` by a joint DP over all split labels.
fn coupled_pair_sum(q: &[f64], n: u64, table: &[(usize, usize)], cap: usize, f: LabelFn) -> f64 {
    let side = cap + 1;
    let mut u = vec![0.0; side];
    let mut v = vec![0.0; side * side];
    u[0] = 1.0;
    v[0] = f.eval(1);
    let apply = |u: &mut [f64], v: &mut [f64], (lo, hi): (usize, usize)| {
        for h in 0..side {
            if h < lo || h > hi {
                u[h] = 0.0;
                for g in 0..side {
                    v[h * side + g] = 0.0;
                    v[g * side + h] = 0.0;
                }
            }
        }
    };
    apply(&mut u, &mut v, table[1]);
    let mut next_v = vec![0.0; side * side];
    for i in 2..=n as usize {
        let p = q[i];
        let (stay, cross) = ((1.0 - p) * (1.0 - p), p * (1.0 - p));
        for h in 0..side {
            for g in 0..side {
                let mut x = v[h * side + g] * stay;
                if h > 0 {
                    x += v[(h - 1) * side + g] * cross;
                }
                if g > 0 {
                    x += v[h * side + g - 1] * cross;
                }
                next_v[h * side + g] = x;
            }
        }
        let fi = f.eval(i as u64) * p * p;
        for h in 0..cap {
            next_v[(h + 1) * side + h + 1] += fi * u[h];
        }
        std::mem::swap(&mut v, &mut next_v);
        for h in (1..side).rev() {
            u[h] = u[h] * (1.0 - p) + u[h - 1] * p;
        }
        u[0] *= 1.0 - p;
        apply(&mut u, &mut v, table[i]);
    }
    v.iter().copied().collect::<Compensated>().value()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ManyToTwo {
    pub lhs: f64,
    pub rhs: f64,
}

pub const MANY_TO_TWO_MAX_N: u64 = 6;

/// Pair identity: enumeration with exact common-ancestor labels against the coupled walk DP.
pub fn many_to_two_check(seq: &WeightSequence, n: u64, f: LabelFn, ind: &PathIndicator) -> Result<ManyToTwo> {
    if n == 0 || n > MANY_TO_TWO_MAX_N {
        return Err(Error::TooLarge { what: "pair identity size", n, cap: MANY_TO_TWO_MAX_N });
    }
    let law = enumerate_small(seq, n)?;
    let mut lhs = Compensated::new();
    for (tree, prob) in law.trees.iter().zip(&law.probs) {
        let masks: Vec<u32> = (0..=n as usize).map(|i| tree.ancestor_mask(i)).collect();
        for (i, &mask_i) in masks.iter().enumerate().skip(1) {
            if !ind.accepts_mask(mask_i, n) {
                continue;
            }
            for (j, &mask_j) in masks.iter().enumerate().skip(1) {
                if !ind.accepts_mask(mask_j, n) {
                    continue;
                }
                let wgt = law.weights[i] * law.weights[j] / (law.weight_sum * law.weight_sum);
                lhs.add(prob * wgt * f.eval(tree.mrca(i, j) as u64));
            }
        }
    }
    let q = step_probabilities(seq, n)?;
    let (table, cap) = window_table(ind, n)?;
    Ok(ManyToTwo { lhs: lhs.value(), rhs: coupled_pair_sum(&q, n, &table, cap, f) })
}

/// Exact `E[Q_n²]` through the coupled walk.
pub fn exact_second_moment(seq: &WeightSequence, schedule: &Schedule, n: u64) -> Result<f64> {
    if n > SECOND_MOMENT_MAX_N {
        return Err(Error::TooLarge { what: "exact second moment size", n, cap: SECOND_MOMENT_MAX_N });
    }
    let ind = PathIndicator::barrier(schedule, n)?;
    let q = step_probabilities(seq, n)?;
    let (table, cap) = window_table(&ind, n)?;
    Ok(coupled_pair_sum(&q, n, &table, cap, LabelFn::One))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub n: u64,
    pub t_n: u64,
    pub window: u64,
    pub first_moment: f64,
    pub first_moment_upper: f64,
    pub first_moment_lower: f64,
    /// `None` beyond the exact size limit.
    pub second_moment: Option<f64>,
    pub second_moment_bound: f64,
    /// Diagonal part of the second-moment bound (squared first moment times the product factor).
    pub second_moment_main: f64,
    /// Split-label part of the second-moment bound.
    pub second_moment_cross: f64,
    /// `Σ_{i_T < i <= n} e^{2θ_{t_i}} (w_i/W_i)²`
    pub delta1: f64,
    /// Certified bound on the rest of the series, available when `θ` is constant.
    pub delta1_tail: Option<f64>,
    /// Split-label series over `(i_T, n]`.
    pub delta2: f64,
    pub e_n: f64,
    /// `Π_r P(X_{T+r} = 1)` over the window.
    pub e_n_product_bound: f64,
}

fn epoch_hit_one(p: &[f64], lo: u64, hi: u64) -> f64 {
    // P(exactly one success among indices lo..=hi)
    let mut none = 1.0;
    let mut one = 0.0;
    for &pi in &p[lo as usize..=hi as usize] {
        one = one * (1.0 - pi) + none * pi;
        none *= 1.0 - pi;
    }
    one
}

/// First and second moment quantities of `Q_n` under tilt `θ` (zeroed below `r0`),
/// with the post-window expectation `E(n)` for window `T`.
pub fn moment_report(
    seq: &WeightSequence,
    schedule: &Schedule,
    thetas: &[f64],
    r0: u64,
    n: u64,
    window: u64,
) -> Result<MomentReport> {
    let t_n = schedule.t_of(n)?;
    if window >= t_n {
        return invalid(format!("window T = {window} must be below t_n = {t_n}"));
    }
    if schedule.index(t_n)? != n {
        return invalid(format!("n = {n} is not an epoch end (i_{t_n} = {})", schedule.index(t_n)?));
    }
    let ident = tilted_identity_eval(seq, schedule, thetas, r0, n)?;
    let first_moment = barrier_probability(seq, schedule, n)?;
    let tp = tilted_params(seq, schedule, thetas, r0, n)?;
    let th = &tp.thetas;
    let q = step_probabilities(seq, n)?;
    let epochs = epoch_of_each(schedule, n)?;
    let nu = n as usize;

    // suffix sums of (e^θ − 1) q and prefix sums of θ_r
    let mut lin_suffix = vec![0.0; nu + 2];
    for i in (2..=nu).rev() {
        lin_suffix[i] = lin_suffix[i + 1] + th[epochs[i] as usize].exp_m1() * q[i];
    }
    let mut theta_prefix = vec![0.0; t_n as usize + 1];
    for r in 1..=t_n as usize {
        theta_prefix[r] = theta_prefix[r - 1] + th[r];
    }
    let theta_total = theta_prefix[t_n as usize];

    let mut log_prod = Compensated::new();
    let mut sq = Compensated::new();
    for i in 2..=nu {
        log_prod.add(-(-(tp.p[i] * tp.p[i])).ln_1p());
        sq.add((2.0 * th[epochs[i] as usize]).exp() * q[i] * q[i]);
    }
    let main = (log_prod.value() + sq.value()).exp() * first_moment * first_moment;
    let mut cross = Compensated::new();
    for l in 2..=nu {
        let tl = epochs[l] as usize;
        let expo = th[tl] + lin_suffix[l + 1] - (theta_total - theta_prefix[tl]);
        cross.add(q[l] * q[l] * expo.exp());
    }
    let cross = (lin_suffix[2] - theta_total).exp() * cross.value();
    let second_moment = if n <= SECOND_MOMENT_MAX_N { Some(exact_second_moment(seq, schedule, n)?) } else { None };

    // window series over (i_T, n]
    let i_t = schedule.index(window)?;
    let mut d1 = Compensated::new();
    let mut d2 = Compensated::new();
    for l in (i_t + 1) as usize..=nu {
        let tl = epochs[l] as usize;
        let sq_l = (2.0 * th[tl]).exp() * q[l] * q[l];
        d1.add(sq_l);
        let theta_part = theta_prefix[tl - 1] - theta_prefix[(window as usize).min(tl - 1)];
        let lin_end = schedule.index(tl as u64 - 1)?.max(i_t) as usize;
        let lin_part = lin_suffix[i_t as usize + 1] - lin_suffix[lin_end + 1];
        d2.add(sq_l * (theta_part - lin_part).exp());
    }
    let constant_theta = th[1..].windows(2).all(|w| w[0] == w[1]);
    let delta1_tail = if constant_theta {
        let c = th.get(1).copied().unwrap_or(0.0);
        Some((2.0 * c).exp() * seq.square_tail_bound(n, seq.prefix_at(n)?.weight_sum)?)
    } else {
        None
    };

    let (e_n, e_n_product_bound) = window_expectation(&tp, schedule, n, t_n, window)?;
    Ok(MomentReport {
        n,
        t_n,
        window,
        first_moment,
        first_moment_upper: ident.upper,
        first_moment_lower: ident.lower,
        second_moment,
        second_moment_bound: main + cross,
        second_moment_main: main,
        second_moment_cross: cross,
        delta1: d1.value(),
        delta1_tail,
        delta2: d2.value(),
        e_n,
        e_n_product_bound,
    })
}

/// `E(n)` by DP on the tilted walk after `i_T`, and the product of single-jump epoch probabilities.
fn window_expectation(tp: &TiltedParams, schedule: &Schedule, n: u64, t_n: u64, window: u64) -> Result<(f64, f64)> {
    let th = &tp.thetas;
    let span = t_n - window;
    let mut ends = Vec::new();
    for r in 1..span {
        ends.push(EpochEnd {
            index: schedule.index(window + r)?,
            bound: r as usize,
            slope: th[(window + r + 1) as usize] - th[(window + r) as usize],
        });
    }
    let start = schedule.index(window)? + 1;
    let e_n = constrained_final(&tp.p, start, n, &ends, span as usize);
    let mut prod = 1.0;
    for r in 1..=span {
        let lo = schedule.index(window + r - 1)? + 1;
        let hi = schedule.index(window + r)?.min(n);
        prod *= epoch_hit_one(&tp.p, lo, hi);
    }
    Ok((e_n, prod))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnLowerRow {
    pub n: u64,
    pub t_n: u64,
    pub window: u64,
    pub log_e_n: f64,
    /// `log E(n) / (t_n − T)`
    pub ratio: f64,
    /// Log of the product of single-jump epoch probabilities.
    pub log_product_bound: f64,
    /// `−(θ_{t_n} − θ_T)(t_n − T)^{1/2}`, reported without its unknown constant.
    pub log_sqrt_comparison: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnLowerReport {
    pub rows: Vec<EnLowerRow>,
    /// Every row satisfies `log E(n) >= log Π P(X=1)`.
    pub bounded_below: bool,
}

/// Calibration tolerance for the tilt `e^{θ_t}(a_{i_t} − a_{i_{t−1}}) = 1`.
pub const CALIBRATION_TOLERANCE: f64 = 1e-12;

/// `log E(n)/(t_n − T(n))` over epoch-end grid points; `window(n, t_n)` gives `T(n)`.
pub fn en_lower_check(
    seq: &WeightSequence,
    schedule: &Schedule,
    n_grid: &[u64],
    window: &dyn Fn(u64, u64) -> u64,
) -> Result<EnLowerReport> {
    let (incs, _) = epoch_sums(seq, schedule.indices())?;
    for t in (schedule.s0.max(schedule.r0.saturating_sub(1)) + 1)..=schedule.t_max() {
        let c = schedule.theta(t)?.exp() * incs[t as usize];
        if (c - 1.0).abs() > CALIBRATION_TOLERANCE {
            return Err(Error::Calibration(format!("epoch {t}: e^θ·Δa = {c}")));
        }
    }
    let mut rows = Vec::new();
    for &n in n_grid {
        let t_n = schedule.t_of(n)?;
        let w = window(n, t_n).min(t_n.saturating_sub(1));
        let tp = tilted_params(seq, schedule, schedule.thetas(), schedule.r0, n)?;
        let (e_n, prod) = window_expectation(&tp, schedule, n, t_n, w)?;
        let span = (t_n - w) as f64;
        let (log_e, log_prod) = (e_n.ln(), prod.ln());
        rows.push(EnLowerRow {
            n,
            t_n,
            window: w,
            log_e_n: log_e,
            ratio: log_e / span,
            log_product_bound: log_prod,
            log_sqrt_comparison: -(tp.thetas[t_n as usize] - tp.thetas[w as usize]) * span.sqrt(),
            holds: log_e >= log_prod - 1e-12 * log_prod.abs(),
        });
    }
    let bounded_below = rows.iter().all(|r| r.holds);
    Ok(EnLowerReport { rows, bounded_below })
}
