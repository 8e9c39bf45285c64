//! Derived values checked against independent computations written here.

use rand::{Rng, SeedableRng};
use rand::rngs::StdRng;

use wrt_core::engine::enumerate_small;
use wrt_core::schedules::{
    assumption_residual, key_quantity, make_schedule, theta_expansion_residual, Regime, Schedule,
};
use wrt_core::svfun::SvDescriptor;
use wrt_core::theory::{height_expansion_powers_of_log, height_first_order_quick, iid_max_expansion, IidCase};
use wrt_core::walks::{
    barrier_probability, bernoulli_walk_pmf, en_lower_check, moment_report, tilted_identity_eval,
};
use wrt_core::weights::WeightSequence;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[derive(Clone, Copy)]
struct DoubleDouble(f64, f64);

impl DoubleDouble {
    fn add(self, x: f64) -> Self {
        let (s, e) = two_sum(self.0, x);
        let (hi, lo) = two_sum(s, e + self.1);
        DoubleDouble(hi, lo)
    }

    fn value(self) -> f64 {
        self.0 + self.1
    }
}

#[test]
fn harmonic_depth_mean_matches_double_double_sum() {
    let n = 1_000_000u64;
    let mut big_w = DoubleDouble(1.0, 0.0);
    let mut a = DoubleDouble(1.0, 0.0);
    for i in 2..=n {
        let w = 1.0 / i as f64;
        big_w = big_w.add(w);
        // w / W with W carried in two parts
        let q = w / big_w.0 * (1.0 - big_w.1 / big_w.0);
        a = a.add(q);
    }
    let got = WeightSequence::harmonic().prefix_at(n).unwrap();
    assert!((got.depth_mean - a.value()).abs() < 1e-9, "{} vs {}", got.depth_mean, a.value());
    assert!((got.weight_sum - big_w.value()).abs() < 1e-12);
}

#[test]
fn constant_weight_pmf_matches_enumerated_height_law() {
    let seq = WeightSequence::constant(1.0);
    let n = 7u64;
    let law = enumerate_small(&seq, n).unwrap();
    let pmf = bernoulli_walk_pmf(&seq, n).unwrap();
    let mut tv = 0.0;
    for h in 0..n as u32 {
        let p = law.expect(|tree| (1..=n as usize).filter(|&v| tree.height(v) == h).count() as f64 / n as f64);
        tv += (p - pmf.prob(h as u64)).abs();
    }
    assert!(tv / 2.0 <= 1e-12, "{tv}");
}

fn step_probabilities(seq: &WeightSequence, n: u64) -> Vec<f64> {
    let mut q = vec![0.0; n as usize + 1];
    let mut total = 0.0;
    for i in 1..=n {
        let w = seq.weight_at(i).unwrap();
        total += w;
        q[i as usize] = w / total;
    }
    q
}

/// Walk law with heights above `r` removed at each `i_r`, `r < t_n`.
fn naive_barrier(seq: &WeightSequence, indices: &[u64], n: u64) -> f64 {
    let q = step_probabilities(seq, n);
    let t_n = indices.iter().position(|&i| i >= n).unwrap();
    let mut law = vec![1.0];
    let mut next_end = 1;
    for (i, &qi) in q.iter().enumerate().take(n as usize + 1).skip(2) {
        let mut nl = vec![0.0; law.len() + 1];
        for (h, &m) in law.iter().enumerate() {
            nl[h] += m * (1.0 - qi);
            nl[h + 1] += m * qi;
        }
        law = nl;
        while next_end < t_n && indices[next_end] == i as u64 {
            law.truncate(next_end + 1);
            next_end += 1;
        }
    }
    law.get(t_n).copied().unwrap_or(0.0)
}

fn harmonic_regime(eta: f64) -> Regime {
    Regime::PowersOfLog { alpha: 1.0, eta, l: SvDescriptor::one_minus_over_x(EULER_GAMMA) }
}

#[test]
fn barrier_on_harmonic_schedule_matches_naive_dp() {
    let seq = WeightSequence::harmonic();
    let s = make_schedule(&harmonic_regime(0.0), &seq, 1000).unwrap();
    assert!(s.t_max() >= 3);
    for t in 1..=s.t_max() {
        let n = s.index(t).unwrap();
        let exact = naive_barrier(&seq, s.indices(), n);
        let b = barrier_probability(&seq, &s, n).unwrap();
        let tilt = tilted_identity_eval(&seq, &s, s.thetas(), s.r0, n).unwrap();
        assert!((b - exact).abs() <= 1e-10 * exact, "t={t}: {b} vs {exact}");
        assert!((tilt.lhs - exact).abs() <= 1e-10 * exact, "t={t}: {} vs {exact}", tilt.lhs);
    }
}

fn power_law_beta_one() -> (WeightSequence, Schedule) {
    let seq = WeightSequence::power_law(2.0);
    let j = SvDescriptor::constant(6.0 / std::f64::consts::PI.powi(2));
    let s = make_schedule(&Regime::QuickBetaEq1 { alpha: 2.0, kappa: 2.0, j }, &seq, 10_000_000).unwrap();
    (seq, s)
}

/// Tilted step probabilities computed from scratch.
fn tilted(seq: &WeightSequence, s: &Schedule, n: u64) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let q = step_probabilities(seq, n);
    let th: Vec<f64> = (0..s.thetas().len()).map(|r| if (r as u64) < s.r0 { 0.0 } else { s.thetas()[r] }).collect();
    let mut epoch = vec![0usize; n as usize + 1];
    let mut t = 1;
    for (i, e) in epoch.iter_mut().enumerate().skip(2) {
        while s.index(t as u64).unwrap() < i as u64 {
            t += 1;
        }
        *e = t;
    }
    let p = (0..=n as usize)
        .map(|i| if i < 2 { 0.0 } else { th[epoch[i]].exp() * q[i] / (1.0 + th[epoch[i]].exp_m1() * q[i]) })
        .collect();
    (q, p, epoch)
}

#[test]
fn window_quantities_match_direct_sums_and_monte_carlo() {
    let (seq, s) = power_law_beta_one();
    let n = s.index(4).unwrap();
    assert_eq!(n, 8_886_110);
    let (q, p, epoch) = tilted(&seq, &s, n);
    let th: Vec<f64> = (0..=4).map(|r| if (r as u64) < s.r0 { 0.0 } else { s.thetas()[r] }).collect();

    // cumulative hazard for skip sampling of successes
    let mut hazard = vec![0.0f64; n as usize + 1];
    for i in 2..=n as usize {
        hazard[i] = hazard[i - 1] - (-p[i]).ln_1p();
    }

    for window in [1u64, 2] {
        let rep = moment_report(&seq, &s, s.thetas(), s.r0, n, window).unwrap();
        let i_w = s.index(window).unwrap() as usize;

        // linear term of the exponent, summed up to the end of each epoch
        let mut lin_to_end = [0.0f64; 5];
        for t in (window as usize + 1)..=4 {
            let (lo, hi) = (s.index(t as u64 - 1).unwrap() as usize + 1, s.index(t as u64).unwrap() as usize);
            lin_to_end[t] = lin_to_end[t - 1] + (lo..=hi).map(|i| th[t].exp_m1() * q[i]).sum::<f64>();
        }
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for l in (i_w + 1)..=n as usize {
            let tl = epoch[l];
            let sq = (2.0 * th[tl]).exp() * q[l] * q[l];
            d1 += sq;
            let theta_sum: f64 = ((window as usize + 1)..tl).map(|r| th[r]).sum();
            d2 += sq * (theta_sum - lin_to_end[tl - 1]).exp();
        }
        assert!((rep.delta1 - d1).abs() <= 1e-9 * d1, "{} vs {d1}", rep.delta1);
        assert!((rep.delta2 - d2).abs() <= 1e-9 * d2, "{} vs {d2}", rep.delta2);

        // E(n) by sampling the tilted walk after i_T
        let span = (4 - window) as usize;
        let ends: Vec<usize> = (1..span).map(|r| s.index(window + r as u64).unwrap() as usize).collect();
        let mut rng = StdRng::seed_from_u64(0x5eed + window);
        let paths = 1_000_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..paths {
            let mut successes = Vec::new();
            let mut at = i_w;
            loop {
                let target = hazard[at] - (1.0 - rng.random::<f64>()).ln();
                let next = hazard.partition_point(|&h| h < target);
                if next > n as usize {
                    break;
                }
                successes.push(next);
                at = next;
                if successes.len() > span {
                    break;
                }
            }
            if successes.len() != span {
                continue;
            }
            let mut ok = true;
            let mut log_w = 0.0;
            for (r, &end) in ends.iter().enumerate() {
                let h = successes.iter().filter(|&&i| i <= end).count() as f64;
                let r1 = r + 1;
                if h > r1 as f64 {
                    ok = false;
                    break;
                }
                log_w += (th[window as usize + r1 + 1] - th[window as usize + r1]) * (h - r1 as f64);
            }
            if ok {
                let v = log_w.exp();
                sum += v;
                sum_sq += v * v;
            }
        }
        let mean = sum / paths as f64;
        let se = ((sum_sq / paths as f64 - mean * mean) / paths as f64).sqrt();
        assert!((rep.e_n - mean).abs() <= 3.0 * se, "T={window}: DP {} vs MC {mean} ± {se}", rep.e_n);
    }
}

#[test]
fn en_ratio_on_harmonic_schedule_is_stable() {
    let seq = WeightSequence::harmonic();
    let s = make_schedule(&harmonic_regime(0.0), &seq, 10_000_000).unwrap();
    let n = s.index(s.t_max()).unwrap();
    let t_n = s.t_max();
    let mut ratios = Vec::new();
    for span in 2..=6u64 {
        let rep = en_lower_check(&seq, &s, &[n], &|_, t| t - span).unwrap();
        assert!(rep.bounded_below);
        ratios.push(rep.rows[0].ratio);
    }
    let (lo, hi) = ratios.iter().fold((f64::MAX, f64::MIN), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo <= 2.0 && lo < 0.0, "{ratios:?}");

    // one-epoch window: the ratio is log P(exactly one success in the last epoch)
    let (_, p, _) = tilted(&seq, &s, n);
    let lo_i = s.index(t_n - 1).unwrap() as usize + 1;
    let (mut none, mut one) = (1.0, 0.0);
    for &pi in &p[lo_i..=n as usize] {
        one = one * (1.0 - pi) + none * pi;
        none *= 1.0 - pi;
    }
    let rep = en_lower_check(&seq, &s, &[n], &|_, t| t - 1).unwrap();
    assert!((rep.rows[0].ratio - one.ln()).abs() < 1e-12, "{} vs {}", rep.rows[0].ratio, one.ln());
}

#[test]
fn synthetic_powers_of_log_sequence() {
    // a_n = ln ln n exactly for n >= 3, so the density is 1/x with L ≡ 1
    let n = 200_000u64;
    let mut incs = vec![0.05, (3f64).ln().ln() + 0.2];
    incs.extend((4..=n).map(|i| (i as f64).ln().ln() - ((i - 1) as f64).ln().ln()));
    let seq = WeightSequence::table_from_increments(1.0, incs).unwrap();
    let regime = Regime::PowersOfLog { alpha: 1.0, eta: 0.0, l: SvDescriptor::constant(1.0) };
    let res = assumption_residual(&seq, &regime, &[10, 100, 1000, 10_000, 100_000]).unwrap();
    for row in &res.rows {
        assert!(row.3 < 1e-9, "{:?}", res.rows);
    }
    let s = make_schedule(&regime, &seq, n).unwrap();
    let theta = theta_expansion_residual(&s);
    assert!(theta.decreasing_tail, "{:?}", theta.rows);
}

#[test]
fn exp_log_power_residual_follows_the_stated_order() {
    let (lambda, alpha) = (1.0, 0.5);
    let seq = WeightSequence::exp_log_power(lambda, alpha);
    let regime = Regime::PowersOfLog { alpha, eta: 0.0, l: SvDescriptor::constant(lambda * (1.0 - alpha)) };
    let grid: Vec<u64> = (1..=8).map(|k| 10u64.pow(k)).collect();
    let res = assumption_residual(&seq, &regime, &grid).unwrap();
    // the increment error scaled by (log n)^{1+α} stays bounded
    let scaled: Vec<f64> = res
        .rows
        .iter()
        .zip(&grid)
        .map(|(row, &lo)| (row.1 - row.2).abs() * (lo as f64).ln().powf(1.0 + alpha))
        .collect();
    let first = scaled[0];
    assert!(scaled.iter().all(|&v| v <= 2.0 * first.max(1e-3)), "{scaled:?}");
}

#[test]
fn harmonic_assumption_residual_decreases() {
    // L(x) = 1 − γ/x is only accurate for large x, so the grid starts at 10²
    let grid: Vec<u64> = (2..=8).map(|k| 10u64.pow(k)).collect();
    let res = assumption_residual(&WeightSequence::harmonic(), &harmonic_regime(0.0), &grid).unwrap();
    assert!(res.decreasing, "{:?}", res.rows);
}

#[test]
fn key_quantity_trends() {
    let seq = WeightSequence::harmonic();
    let eta = 1.0;
    let s = make_schedule(&harmonic_regime(eta), &seq, 400_000_000).unwrap();
    // per-epoch slope of the log value, which should approach −η
    let slopes: Vec<f64> = ((s.s0 + 2)..=s.t_max())
        .map(|t| {
            key_quantity(&s, &seq, t, None).unwrap().log_value - key_quantity(&s, &seq, t - 1, None).unwrap().log_value
        })
        .collect();
    assert!(slopes.len() >= 8);
    assert!(strictly_decreasing(&slopes), "{slopes:?}");
    assert!((slopes.last().unwrap() + eta).abs() < (slopes[0] + eta).abs() / 1.5, "{slopes:?}");

    let seq = WeightSequence::power_law(2.0);
    let j = SvDescriptor::constant(6.0 / std::f64::consts::PI.powi(2));
    let s = make_schedule(&Regime::QuickBetaEq1 { alpha: 2.0, kappa: 1.5, j }, &seq, 100_000_000).unwrap();
    let values: Vec<f64> =
        ((s.s0 + 1)..=s.t_max()).map(|t| key_quantity(&s, &seq, t, None).unwrap().log_value).collect();
    assert!(values.len() >= 3);
    // the leading −κ^t term takes over after the first post-s₀ epoch
    assert!(values[1..].iter().all(|v| *v < 0.0), "{values:?}");
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

#[test]
fn powers_of_log_index_asymptotics() {
    for (alpha, eta) in [(1.0, 0.0), (0.5, 0.2), (2.0, 0.0)] {
        let regime = Regime::PowersOfLog { alpha, eta, l: SvDescriptor::one_minus_over_x(EULER_GAMMA) };
        let ell = |t: u64| regime.log_index(t);
        let grid: Vec<u64> = (0..10).map(|k| 1000 * 2u64.pow(k)).collect();
        let mut r = [vec![], vec![], vec![], vec![]];
        for &t in &grid {
            let (x, lt) = (t as f64, (t as f64).ln());
            r[0].push((ell(t) / (alpha * x * lt) - 1.0).abs());
            r[1].push(((ell(t) - ell(t - 1)) / (alpha * lt) - 1.0).abs());
            r[2].push((x * (ell(t).ln() - ell(t - 1).ln()) - 1.0).abs());
            r[3].push((x * ((ell(t + 1) - ell(t)).ln() - (ell(t) - ell(t - 1)).ln())).abs());
        }
        for (k, res) in r.iter().enumerate() {
            // for α > 1 the first ratio peaks near log t = e^{2.3}, beyond reach
            if k == 0 && alpha > 1.0 {
                continue;
            }
            assert!(strictly_decreasing(res), "alpha={alpha} residual {k}: {res:?}");
        }
    }
}

#[test]
fn quick_below_one_index_increments_are_bounded() {
    for (beta, kappa) in [(0.3, 1.0), (0.5, 2.0), (0.7, 0.5)] {
        let regime = Regime::QuickBetaLt1 { alpha: 2.0, beta, kappa, j: SvDescriptor::constant(1.0) };
        let log_ell = |t: u64| regime.log_index(t).powf(beta);
        let e = (2.0 * beta - 1.0) / (1.0 - beta);
        let c = kappa * beta / (1.0 - beta);
        let res: Vec<f64> = (2..=5000u64)
            .map(|t| {
                let x = t as f64;
                x * (log_ell(t) - log_ell(t - 1) - c * x.powf(e)).abs() / x.powf(e)
            })
            .collect();
        let max = res.iter().cloned().fold(0.0, f64::max);
        assert!(max.is_finite() && max < 10.0 * c.max(1.0) / (1.0 - beta), "beta={beta}: {max}");
        assert!((log_ell(3) - kappa * 3f64.powf(beta / (1.0 - beta))).abs() < 1e-9);
    }
}

#[test]
fn height_expansions_sit_below_the_independent_maximum() {
    for log_n in [1e3, 1e4, 1e5, 1e6] {
        let ll: f64 = f64::ln(log_n);
        let h = height_expansion_powers_of_log(log_n, 2.0, 0.0).unwrap();
        let m = iid_max_expansion(&IidCase::PowersOfLogAboveOne, log_n).unwrap();
        assert!(h.value <= m.value, "α=2 at log n = {log_n}");
        let h = height_expansion_powers_of_log(log_n, 1.0, 0.0).unwrap();
        let m = iid_max_expansion(&IidCase::PowersOfLogDivergent { log_j: ll.ln(), log_scale_negligible: true }, log_n)
            .unwrap();
        assert!(h.value <= m.value, "α=1 at log n = {log_n}");
        for (alpha, beta, case) in [
            (2.0, 0.5, IidCase::QuickBelowOne),
            (2.0, 1.0, IidCase::QuickOne { alpha: 2.0 }),
            (2.0, 2.0, IidCase::QuickAboveOne { alpha: 2.0, beta: 2.0 }),
        ] {
            let h = height_first_order_quick(log_n, alpha, beta).unwrap();
            let m = iid_max_expansion(&case, log_n).unwrap();
            assert!(h.value <= m.value, "β={beta} at log n = {log_n}: {} vs {}", h.value, m.value);
        }
    }
}

#[test]
fn greedy_path_bound_on_power_law_thresholds() {
    use wrt_core::engine::{grow, Mode};
    use wrt_core::theory::crude_lower_criterion;
    let seq = WeightSequence::power_law(2.0);
    // ⌊0.1·e^{3^r}⌋ for r = 0, 1, 2 is 0, 2, 810; the first threshold is raised to 1
    let th: Vec<u64> = (0..3).map(|r| ((0.1 * 3f64.powi(r).exp()).floor() as u64).max(1)).collect();
    assert_eq!(th, vec![1, 2, 810]);
    let big_w = |n: u64| (1..=n).map(|i| (i as f64).powi(-2)).sum::<f64>();
    let oracle: f64 = th
        .windows(2)
        .map(|p| (-(p[0] as f64).powi(-2) * ((p[0] + 1)..=p[1]).map(|i| 1.0 / big_w(i)).sum::<f64>()).exp())
        .sum();
    let bound = crude_lower_criterion(&seq, &th).unwrap();
    assert!((bound - oracle).abs() < 1e-12 && (bound - (-0.8f64).exp()).abs() < 1e-6, "{bound}");

    let seeds = 10_000u64;
    let n = *th.last().unwrap();
    let violations = (0..seeds)
        .filter(|&s| grow(&seq, n, s, Mode::HeightOnly).unwrap().greedy_first_child_path().violates(&th, n))
        .count() as f64;
    let freq = violations / seeds as f64;
    let sigma = (bound * (1.0 - bound) / seeds as f64).sqrt();
    assert!(freq <= bound + 3.0 * sigma, "{freq} vs {bound}");
}
