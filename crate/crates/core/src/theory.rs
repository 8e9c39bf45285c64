//! Closed-form height expansions and rigorous finite-n height bounds.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::sum::Compensated;
use crate::walks::bernoulli_walk_pmf;
use crate::weights::WeightSequence;

/// Relative size below which series terms are dropped.
pub const SERIES_TOLERANCE: f64 = 1e-14;

/// An evaluated expansion with its omitted error order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expansion {
    pub value: f64,
    pub first_order: f64,
    /// Bracket multiplying `log n/(α log log n)²`, when the expansion has one.
    pub bracket: Option<f64>,
    /// Numerical slack from series truncation.
    pub slack: f64,
    pub dropped: &'static str,
}

/// `Σ_k ρ^k (log L + (k+1) log log log n)` summed term by term, with the tail bound.
fn bracket_series(ratio: f64, log_l: f64, lll: f64) -> (f64, f64, usize) {
    let mut acc = Compensated::new();
    let mut pow = 1.0;
    let mut k = 0usize;
    loop {
        let term = pow * (log_l + (k as f64 + 1.0) * lll);
        acc.add(term);
        if term.abs() < SERIES_TOLERANCE * acc.value().abs().max(f64::MIN_POSITIVE) || pow == 0.0 {
            break;
        }
        pow *= ratio;
        k += 1;
    }
    let r = ratio.abs();
    let next = r.powi(k as i32 + 1);
    let kf = k as f64;
    let tail = next / (1.0 - r) * log_l.abs() + lll.abs() * next * ((kf + 2.0) - (kf + 1.0) * r) / ((1.0 - r) * (1.0 - r));
    (acc.value(), tail, k)
}

/// Height expansion when `a_n` grows like a power of `log log n`; takes `log n` and `log L(log n)`.
pub fn height_expansion_powers_of_log(log_n: f64, alpha: f64, log_l: f64) -> Result<Expansion> {
    if !(alpha > 0.0) {
        return invalid("α must be positive");
    }
    if !(log_n > std::f64::consts::E) {
        return invalid("need n > e^e");
    }
    let ll = log_n.ln();
    let lll = ll.ln();
    let ratio = log_l / (alpha * ll);
    if ratio.abs() >= 1.0 {
        return Err(Error::NotApplicable(format!("series ratio {ratio} is not below 1 in absolute value")));
    }
    let (series, tail, _) = bracket_series(ratio, log_l, lll);
    let bracket = series + 1.0 + alpha + alpha.ln();
    let scale = log_n / (alpha * ll).powi(2);
    let first = log_n / (alpha * ll);
    Ok(Expansion {
        value: first + scale * bracket,
        first_order: first,
        bracket: Some(bracket),
        slack: scale * tail,
        dropped: "o(log n/(log log n)^2)",
    })
}

/// Closed form of the same series: `log L/(1−ρ) + log log log n/(1−ρ)²`.
pub fn bracket_series_closed_form(log_n: f64, alpha: f64, log_l: f64) -> f64 {
    let ll = log_n.ln();
    let ratio = log_l / (alpha * ll);
    log_l / (1.0 - ratio) + ll.ln() / ((1.0 - ratio) * (1.0 - ratio))
}

/// First-order height when `a_∞ − a_n` decays like `exp(−(α−1) log^β n)`.
pub fn height_first_order_quick(log_n: f64, alpha: f64, beta: f64) -> Result<Expansion> {
    if !(alpha > 1.0) || !(beta > 0.0) {
        return invalid("need α > 1 and β > 0");
    }
    let value = if beta < 1.0 {
        log_n.powf(1.0 - beta) / ((alpha - 1.0) * (1.0 - beta))
    } else if beta == 1.0 {
        log_n.ln() / alpha.ln()
    } else {
        if !(log_n > 1.0 && log_n.ln() > 0.0) {
            return invalid("need log log n > 0");
        }
        log_n.ln().ln() / beta.ln()
    };
    Ok(Expansion { value, first_order: value, bracket: None, slack: 0.0, dropped: "o(first order)" })
}

/// Cases where the maximum of `n` independent walk copies has a known expansion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum IidCase {
    /// Powers of log with `α < 1`; `log L(log n)`.
    PowersOfLogBelowOne { alpha: f64, log_l: f64 },
    /// `α = 1`, divergent `a_n`; `log J(log n)` with `J(x) = ∫_1^x L(u)/u du`.
    /// The expansion needs `a_{log n} = o(a_n)`.
    PowersOfLogDivergent { log_j: f64, log_scale_negligible: bool },
    /// `α = 1`, convergent `a_n`; `log I(log log n)` with `I(x) = ∫_x^∞ L(u)/u du`.
    /// The expansion needs `a_∞ − a_n = o(a_∞ − a_{log n})`.
    PowersOfLogConvergent { log_i: f64, log_scale_negligible: bool },
    PowersOfLogAboveOne,
    QuickBelowOne,
    QuickOne { alpha: f64 },
    QuickAboveOne { alpha: f64, beta: f64 },
}

/// Expansion of the maximum `M_n` of `n` independent copies of `H_n`.
pub fn iid_max_expansion(case: &IidCase, log_n: f64) -> Result<Expansion> {
    if !(log_n > std::f64::consts::E) {
        return invalid("need n > e^e");
    }
    let ll = log_n.ln();
    let lll = ll.ln();
    let first = log_n / ll;
    let scale = log_n / (ll * ll);
    let leading_only = |v: f64| Expansion { value: v, first_order: v, bracket: None, slack: 0.0, dropped: "o(first order)" };
    match case {
        IidCase::PowersOfLogBelowOne { alpha, log_l } => {
            if !(*alpha > 0.0 && *alpha < 1.0) {
                return invalid("need α in (0, 1)");
            }
            let ratio = log_l / (alpha * ll);
            if ratio.abs() >= 1.0 {
                return Err(Error::NotApplicable(format!("series ratio {ratio} is not below 1")));
            }
            let (series, tail, _) = bracket_series(ratio, *log_l, lll);
            let bracket = series + 1.0 + alpha.ln() - (1.0 - alpha).ln();
            let scale = log_n / (alpha * ll).powi(2);
            Ok(Expansion {
                value: log_n / (alpha * ll) + scale * bracket,
                first_order: log_n / (alpha * ll),
                bracket: Some(bracket),
                slack: scale * tail,
                dropped: "o(log n/(log log n)^2)",
            })
        }
        IidCase::PowersOfLogDivergent { log_j, log_scale_negligible } => {
            if !log_scale_negligible {
                return Err(Error::NotApplicable("expansion unsupported unless a_{log n} = o(a_n)".into()));
            }
            let ratio = log_j / ll;
            if ratio.abs() >= 1.0 {
                return Err(Error::NotApplicable(format!("series ratio {ratio} is not below 1")));
            }
            let (series, tail, _) = bracket_series(ratio, *log_j, lll);
            let bracket = series + 1.0;
            Ok(Expansion {
                value: first + scale * bracket,
                first_order: first,
                bracket: Some(bracket),
                slack: scale * tail,
                dropped: "o(log n/(log log n)^2)",
            })
        }
        IidCase::PowersOfLogConvergent { log_i, log_scale_negligible } => {
            if !log_scale_negligible {
                return Err(Error::NotApplicable("expansion unsupported unless a_∞ − a_n = o(a_∞ − a_{log n})".into()));
            }
            let bracket = log_i + lll + 1.0;
            Ok(Expansion {
                value: first + scale * bracket,
                first_order: first,
                bracket: Some(bracket),
                slack: 0.0,
                dropped: "o(log n/(log log n)^2)",
            })
        }
        IidCase::PowersOfLogAboveOne | IidCase::QuickBelowOne => Ok(leading_only(first)),
        IidCase::QuickOne { alpha } => {
            if !(*alpha > 1.0) {
                return invalid("need α > 1");
            }
            Ok(leading_only(log_n / (alpha * ll)))
        }
        IidCase::QuickAboveOne { alpha, beta } => {
            if !(*alpha > 1.0 && *beta > 1.0) {
                return invalid("need α > 1 and β > 1");
            }
            Ok(leading_only(log_n / ((alpha - 1.0) * ll.powf(*beta))))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrudeUpper {
    /// Smallest `x` with `n·P(H_n + 1 >= x) <= δ`.
    pub threshold: u64,
    /// `n·P(H_n + 1 >= threshold)`, truncated mass included.
    pub union_bound: f64,
}

/// Union-bound height threshold: `P(height(T_n) >= threshold) <= δ`.
pub fn crude_upper_threshold(seq: &WeightSequence, n: u64, delta: f64) -> Result<CrudeUpper> {
    if !(delta > 0.0) {
        return invalid("δ must be positive");
    }
    let pmf = bernoulli_walk_pmf(seq, n)?;
    let nf = n as f64;
    let mut x = 1u64;
    loop {
        // P(H_n + 1 >= x) = P(H_n >= x − 1)
        let bound = nf * pmf.tail_upper(x - 1);
        if bound <= delta {
            return Ok(CrudeUpper { threshold: x, union_bound: bound });
        }
        x += 1;
    }
}

fn weights_and_sums(seq: &WeightSequence, last: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut w = vec![0.0; last as usize + 1];
    let mut big_w = vec![0.0; last as usize + 1];
    for st in seq.prefix_stream(last) {
        let st = st?;
        w[st.n as usize] = st.weight;
        big_w[st.n as usize] = st.weight_sum;
    }
    Ok((w, big_w))
}

fn require_non_increasing(seq: &WeightSequence, last: u64) -> Result<()> {
    if !seq.is_non_increasing(last) {
        return Err(Error::NotApplicable("greedy-path criterion needs non-increasing weights".into()));
    }
    Ok(())
}

/// `Σ_r exp(−Σ_{i_r < i <= i_{r+1}} w_{i_r}/W_i)`: a bound on the probability that the
/// first-child path ever has `I_r > i_r`.
pub fn crude_lower_criterion(seq: &WeightSequence, thresholds: &[u64]) -> Result<f64> {
    if thresholds.len() < 2 || thresholds[0] == 0 {
        return invalid("need at least two thresholds, all >= 1");
    }
    if thresholds.windows(2).any(|w| w[1] < w[0]) {
        return invalid("thresholds must be non-decreasing");
    }
    let last = *thresholds.last().expect("checked");
    require_non_increasing(seq, last)?;
    let (w, big_w) = weights_and_sums(seq, last)?;
    let mut total = Compensated::new();
    for pair in thresholds.windows(2) {
        let mut inner = Compensated::new();
        for i in (pair[0] + 1)..=pair[1] {
            inner.add(1.0 / big_w[i as usize]);
        }
        total.add((-w[pair[0] as usize] * inner.value()).exp());
    }
    Ok(total.value())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreedyThresholds {
    /// `i_0 = 1 < i_1 < ... <= n`
    pub thresholds: Vec<u64>,
    pub bound: f64,
}

impl GreedyThresholds {
    /// Height guaranteed by the first-child path with probability at least `1 − bound`.
    pub fn guaranteed_height(&self) -> u64 {
        self.thresholds.len() as u64 - 1
    }
}

/// Thresholds chosen greedily so that the `r`-th term of the criterion is at most `ε·2^{−r}`.
pub fn calibrated_greedy_thresholds(seq: &WeightSequence, n: u64, eps: f64) -> Result<GreedyThresholds> {
    if !(eps > 0.0 && eps < 1.0) {
        return invalid("ε must lie in (0, 1)");
    }
    require_non_increasing(seq, n)?;
    let (w, big_w) = weights_and_sums(seq, n)?;
    let mut thresholds = vec![1u64];
    let mut bound = Compensated::new();
    'outer: loop {
        let r = thresholds.len() as i32;
        let cur = *thresholds.last().expect("non-empty");
        let target = -(eps * 0.5f64.powi(r)).ln();
        let mut inner = Compensated::new();
        for j in (cur + 1)..=n {
            inner.add(1.0 / big_w[j as usize]);
            let expo = w[cur as usize] * inner.value();
            if expo >= target {
                thresholds.push(j);
                bound.add((-expo).exp());
                continue 'outer;
            }
        }
        break;
    }
    Ok(GreedyThresholds { thresholds, bound: bound.value() })
}
