//! Weight sequences and their streamed prefix quantities.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::CounterRng;
use crate::sum::Compensated;
use crate::svfun::SvDescriptor;

const IID_WEIGHT_STREAM: u64 = 0x5745_4947_4854; // "WEIGHT"

/// Distribution of the i.i.d. multipliers of an [`Family::IidScaled`] sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Multiplier {
    Exponential { mean: f64 },
    Uniform { low: f64, high: f64 },
    TwoPoint { p_high: f64, low: f64, high: f64 },
}

impl Multiplier {
    fn validate(&self) -> Result<()> {
        match *self {
            Multiplier::Exponential { mean } if mean > 0.0 && mean.is_finite() => Ok(()),
            Multiplier::Uniform { low, high } if low >= 0.0 && high > low && high.is_finite() => Ok(()),
            Multiplier::TwoPoint { p_high, low, high }
                if (0.0..=1.0).contains(&p_high) && low >= 0.0 && high >= 0.0 && high.is_finite() =>
            {
                Ok(())
            }
            _ => invalid(format!("bad multiplier {self:?}")),
        }
    }

    /// Map a uniform draw in `(0, 1]` to a multiplier value.
    #[inline]
    fn sample(&self, u: f64) -> f64 {
        match *self {
            Multiplier::Exponential { mean } => -mean * u.ln(),
            Multiplier::Uniform { low, high } => low + (high - low) * u,
            Multiplier::TwoPoint { p_high, low, high } => {
                if u <= p_high {
                    high
                } else {
                    low
                }
            }
        }
    }

    fn upper(&self) -> Option<f64> {
        match *self {
            Multiplier::Exponential { .. } => None,
            Multiplier::Uniform { high, .. } => Some(high),
            Multiplier::TwoPoint { low, high, .. } => Some(low.max(high)),
        }
    }
}

/// Closed-form formulas for user-defined sequences (index `i >= 2`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "formula", rename_all = "snake_case")]
pub enum Formula {
    /// `(α−1)β (log i)^(β−1) / i · exp(−(α−1) (log i)^β)`; its remaining
    /// mass after `n` is `exp(−(α−1) log^β n)`.
    QuickDecay { alpha: f64, beta: f64 },
    /// `scale · i^(−power) · (log i)^(−log_power)`.
    Product { scale: f64, power: f64, log_power: f64 },
}

impl Formula {
    fn validate(&self) -> Result<()> {
        match *self {
            Formula::QuickDecay { alpha, beta } if alpha > 1.0 && beta > 0.0 => Ok(()),
            Formula::Product { scale, power, log_power }
                if scale > 0.0 && power.is_finite() && log_power.is_finite() =>
            {
                Ok(())
            }
            _ => invalid(format!("bad formula {self:?}")),
        }
    }

    #[inline]
    fn eval(&self, i: u64) -> f64 {
        let x = i as f64;
        let lx = x.ln();
        match *self {
            Formula::QuickDecay { alpha, beta } => {
                (alpha - 1.0) * beta * lx.powf(beta - 1.0) / x * (-(alpha - 1.0) * lx.powf(beta)).exp()
            }
            Formula::Product { scale, power, log_power } => scale * x.powf(-power) * lx.powf(-log_power),
        }
    }

    /// Bound on `Σ_{i>n} w_i²`, when the formula is decreasing beyond `n`.
    fn square_weight_tail(&self, n: u64) -> Option<f64> {
        let x = n as f64;
        let lx = x.ln();
        match *self {
            Formula::QuickDecay { alpha, beta } => {
                if n < 2 || lx < beta - 1.0 {
                    return None;
                }
                Some(self.eval(n) * (-(alpha - 1.0) * lx.powf(beta)).exp())
            }
            Formula::Product { scale, power, log_power } => {
                if n < 2 || power <= 0.5 || log_power < 0.0 {
                    return None;
                }
                Some(scale * scale * lx.powf(-2.0 * log_power) * x.powf(1.0 - 2.0 * power) / (2.0 * power - 1.0))
            }
        }
    }
}

/// User-certified tail: `Σ_{i>n} (w_i/W_i)² ≤ coefficient · n^(−exponent)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareTail {
    pub coefficient: f64,
    pub exponent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Constant { c: f64 },
    /// `w_i = 1/i`.
    Harmonic,
    /// `w_i = 1/(i log^α i)` for `i >= 2`.
    LogPower { alpha: f64 },
    /// `w_i = λ(1−α)/(i log^α i) · exp(λ log^(1−α) i)` for `i >= 2`.
    ExpLogPower { lambda: f64, alpha: f64 },
    /// `w_i = i^(−α)`.
    PowerLaw { alpha: f64 },
    /// `w_i = X_i · base_i` with i.i.d. `X_i` keyed by `(seed, i)`.
    IidScaled { base: Box<WeightSequence>, multiplier: Multiplier, seed: u64 },
    Table { weights: Vec<f64> },
    Custom {
        #[serde(flatten)]
        formula: Formula,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        square_tail: Option<SquareTail>,
    },
    /// All weight up to `at` merged onto the root: `mass = W_at` at index 1,
    /// zeros on `2..=at`, the base sequence afterwards.
    Collapsed { base: Box<WeightSequence>, at: u64, mass: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSequence {
    #[serde(flatten)]
    pub family: Family,
    /// Override for `w_1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first: Option<f64>,
}

impl From<Family> for WeightSequence {
    fn from(family: Family) -> Self {
        WeightSequence { family, first: None }
    }
}

impl WeightSequence {
    pub fn new(family: Family) -> Result<Self> {
        let seq = WeightSequence { family, first: None };
        seq.validate()?;
        Ok(seq)
    }

    pub fn with_first(mut self, w1: f64) -> Result<Self> {
        self.first = Some(w1);
        self.validate()?;
        Ok(self)
    }

    pub fn constant(c: f64) -> Self {
        Family::Constant { c }.into()
    }

    pub fn harmonic() -> Self {
        Family::Harmonic.into()
    }

    pub fn power_law(alpha: f64) -> Self {
        Family::PowerLaw { alpha }.into()
    }

    pub fn log_power(alpha: f64) -> Self {
        Family::LogPower { alpha }.into()
    }

    pub fn exp_log_power(lambda: f64, alpha: f64) -> Self {
        Family::ExpLogPower { lambda, alpha }.into()
    }

    pub fn table(weights: Vec<f64>) -> Result<Self> {
        Self::new(Family::Table { weights })
    }

    /// Table whose increments `w_i/W_i` are the given values (for `i >= 2`),
    /// starting from `w_1`. Each increment must lie in `[0, 1)`.
    pub fn table_from_increments<I: IntoIterator<Item = f64>>(w1: f64, increments: I) -> Result<Self> {
        let mut weights = vec![w1];
        let mut total = w1;
        for q in increments {
            if !(0.0..1.0).contains(&q) {
                return invalid(format!("increment {q} outside [0, 1)"));
            }
            let next_total = total / (1.0 - q);
            weights.push(next_total - total);
            total = next_total;
        }
        Self::table(weights)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(w1) = self.first {
            if !(w1 > 0.0 && w1.is_finite()) {
                return invalid(format!("w_1 override must be positive, got {w1}"));
            }
        }
        match &self.family {
            Family::Constant { c } if *c > 0.0 && c.is_finite() => {}
            Family::Constant { c } => return invalid(format!("constant weight must be positive, got {c}")),
            Family::Harmonic => {}
            Family::LogPower { alpha } if *alpha > 1.0 => {}
            Family::LogPower { alpha } => return invalid(format!("log-power needs α > 1, got {alpha}")),
            Family::ExpLogPower { lambda, alpha } if *lambda > 0.0 && *alpha > 0.0 && *alpha < 1.0 => {}
            Family::ExpLogPower { lambda, alpha } => {
                return invalid(format!("exp-log-power needs λ > 0 and α in (0,1), got λ={lambda}, α={alpha}"))
            }
            Family::PowerLaw { alpha } if *alpha > 1.0 => {}
            Family::PowerLaw { alpha } => return invalid(format!("power law needs α > 1, got {alpha}")),
            Family::IidScaled { base, multiplier, .. } => {
                base.validate()?;
                multiplier.validate()?;
            }
            Family::Table { weights } => {
                if weights.is_empty() {
                    return invalid("empty weight table");
                }
                if let Some(bad) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
                    return invalid(format!("table weight {bad} is not a nonnegative real"));
                }
            }
            Family::Custom { formula, .. } => formula.validate()?,
            Family::Collapsed { base, at, mass } => {
                base.validate()?;
                if *at < 1 || !(*mass > 0.0) {
                    return invalid("collapse point must be >= 1 with positive mass");
                }
            }
        }
        if self.first.is_none() {
            let w1 = self.eval(1);
            if !(w1 > 0.0 && w1.is_finite()) {
                return invalid(format!("w_1 = {w1} must be positive"));
            }
        }
        Ok(())
    }

    /// Number of defined weights, `None` for infinite sequences.
    pub fn len(&self) -> Option<u64> {
        match &self.family {
            Family::Table { weights } => Some(weights.len() as u64),
            Family::IidScaled { base, .. } | Family::Collapsed { base, .. } => base.len(),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn weight_at(&self, i: u64) -> Result<f64> {
        if i == 0 {
            return Err(Error::IndexOutOfRange { index: 0, len: self.len().unwrap_or(u64::MAX) });
        }
        if let Some(len) = self.len() {
            if i > len {
                return Err(Error::IndexOutOfRange { index: i, len });
            }
        }
        Ok(self.eval(i))
    }

    /// Weight at a valid index; no range checks.
    #[inline]
    pub(crate) fn eval(&self, i: u64) -> f64 {
        if i == 1 {
            if let Some(w1) = self.first {
                return w1;
            }
        }
        let x = i as f64;
        match &self.family {
            Family::Constant { c } => *c,
            Family::Harmonic => 1.0 / x,
            Family::LogPower { alpha } => {
                if i == 1 {
                    1.0
                } else {
                    1.0 / (x * x.ln().powf(*alpha))
                }
            }
            Family::ExpLogPower { lambda, alpha } => {
                if i == 1 {
                    1.0
                } else {
                    let lx = x.ln();
                    lambda * (1.0 - alpha) / (x * lx.powf(*alpha)) * (lambda * lx.powf(1.0 - alpha)).exp()
                }
            }
            Family::PowerLaw { alpha } => x.powf(-alpha),
            Family::IidScaled { base, multiplier, seed } => {
                let u = CounterRng::new(*seed).stream(IID_WEIGHT_STREAM).uniform_open0(i);
                base.eval(i) * multiplier.sample(u)
            }
            Family::Table { weights } => weights[(i - 1) as usize],
            Family::Custom { formula, .. } => {
                if i == 1 {
                    1.0
                } else {
                    formula.eval(i)
                }
            }
            Family::Collapsed { base, at, mass } => {
                if i == 1 {
                    *mass
                } else if i <= *at {
                    0.0
                } else {
                    base.eval(i)
                }
            }
        }
    }

    /// Iterator over `w_1, w_2, ...` (finite for tables).
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        let len = self.len().unwrap_or(u64::MAX);
        (1..=len).map(move |i| self.eval(i))
    }

    pub fn prefix_stream(&self, n_max: u64) -> PrefixStream<'_> {
        PrefixStream::new(self, n_max)
    }

    /// Prefix statistics at a single index.
    pub fn prefix_at(&self, n: u64) -> Result<PrefixStats> {
        if n == 0 {
            return invalid("prefix index must be >= 1");
        }
        let mut last = None;
        for st in self.prefix_stream(n) {
            last = Some(st?);
        }
        match last {
            Some(st) if st.n == n => Ok(st),
            _ => Err(Error::IndexOutOfRange { index: n, len: self.len().unwrap_or(0) }),
        }
    }

    /// Increments `q_i = w_i/W_i` for `i = 1..=n`, index 0 unused.
    pub fn increments(&self, n: u64) -> Result<Vec<f64>> {
        let mut q = Vec::with_capacity(n as usize + 1);
        q.push(0.0);
        for st in self.prefix_stream(n) {
            q.push(st?.increment);
        }
        if (q.len() as u64) < n + 1 {
            return Err(Error::IndexOutOfRange { index: n, len: q.len() as u64 - 1 });
        }
        Ok(q)
    }

    /// True if the weights are non-increasing on `1..=n`.
    pub fn is_non_increasing(&self, n: u64) -> bool {
        let mut prev = f64::INFINITY;
        for w in self.iter().take(n as usize) {
            if w > prev {
                return false;
            }
            prev = w;
        }
        true
    }

    /// Bound on `Σ_{i>n} w_i²`, where the family admits an explicit integral comparison.
    fn square_weight_tail(&self, n: u64) -> Option<f64> {
        let x = n as f64;
        let lx = x.ln();
        match &self.family {
            Family::Harmonic => Some(1.0 / x),
            Family::PowerLaw { alpha } => Some(x.powf(1.0 - 2.0 * alpha) / (2.0 * alpha - 1.0)),
            Family::LogPower { alpha } if n >= 2 => Some(lx.powf(-2.0 * alpha) / x),
            Family::ExpLogPower { lambda, alpha } if n >= 2 => {
                let c = lambda * (1.0 - alpha);
                let kappa = 2.0 * c * lx.powf(-alpha);
                if kappa >= 1.0 {
                    return None;
                }
                let env = (2.0 * lambda * lx.powf(1.0 - alpha)).exp();
                Some(c * c * lx.powf(-2.0 * alpha) * env / (x * (1.0 - kappa)))
            }
            Family::Custom { formula, .. } => formula.square_weight_tail(n),
            Family::IidScaled { base, multiplier, .. } => {
                let m = multiplier.upper()?;
                base.square_weight_tail(n).map(|t| m * m * t)
            }
            Family::Collapsed { base, at, .. } if n >= *at => base.square_weight_tail(n),
            _ => None,
        }
    }

    /// Certified bound on `Σ_{i>n} (w_i/W_i)²` given `W_n`.
    pub fn square_tail_bound(&self, n: u64, weight_sum: f64) -> Result<f64> {
        let bound = match &self.family {
            Family::Constant { c } => Some(c / weight_sum),
            Family::Custom { square_tail: Some(t), .. } => Some(t.coefficient * (n as f64).powf(-t.exponent)),
            Family::Collapsed { base, at, .. } if n >= *at => {
                return base.square_tail_bound(n, weight_sum);
            }
            _ => self.square_weight_tail(n).map(|t| t / (weight_sum * weight_sum)),
        };
        bound.filter(|b| b.is_finite()).ok_or_else(|| {
            Error::TailNotCertified(format!("no explicit square-tail bound for {} beyond n = {n}", self.label()))
        })
    }

    /// Short human-readable name.
    pub fn label(&self) -> String {
        let base = match &self.family {
            Family::Constant { c } => format!("constant(c={c})"),
            Family::Harmonic => "harmonic".to_string(),
            Family::LogPower { alpha } => format!("log_power(alpha={alpha})"),
            Family::ExpLogPower { lambda, alpha } => format!("exp_log_power(lambda={lambda},alpha={alpha})"),
            Family::PowerLaw { alpha } => format!("power_law(alpha={alpha})"),
            Family::IidScaled { base, seed, .. } => format!("iid_scaled({},seed={seed})", base.label()),
            Family::Table { weights } => format!("table(len={})", weights.len()),
            Family::Custom { formula, .. } => format!("custom({formula:?})"),
            Family::Collapsed { base, at, .. } => format!("collapsed({},at={at})", base.label()),
        };
        match self.first {
            Some(w1) => format!("{base}[w1={w1}]"),
            None => base,
        }
    }
}

/// Merge the first `at` weights onto the root.
pub fn collapse_weights(seq: &WeightSequence, at: u64) -> Result<WeightSequence> {
    if at == 0 {
        return invalid("collapse point must be >= 1");
    }
    if at == 1 {
        return Ok(seq.clone());
    }
    let mass = seq.prefix_at(at)?.weight_sum;
    if let Family::Table { weights } = &seq.family {
        let mut w = weights.clone();
        w[0] = mass;
        for x in w.iter_mut().take(at as usize).skip(1) {
            *x = 0.0;
        }
        return WeightSequence::table(w);
    }
    Ok(WeightSequence { family: Family::Collapsed { base: Box::new(seq.clone()), at, mass }, first: None })
}

/// Prefix quantities at index `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrefixStats {
    pub n: u64,
    pub weight: f64,
    /// `W_n`
    pub weight_sum: f64,
    /// `w_n / W_n`
    pub increment: f64,
    /// `a_n = Σ w_i/W_i`
    pub depth_mean: f64,
    /// `Σ (w_i/W_i)²`
    pub square_sum: f64,
}

impl PrefixStats {
    /// `a_n − log W_n`
    pub fn transfer(&self) -> f64 {
        self.depth_mean - self.weight_sum.ln()
    }

    /// `Var(H_n) = Σ q_i (1 − q_i)`
    pub fn depth_variance(&self) -> f64 {
        self.depth_mean - self.square_sum
    }
}

pub struct PrefixStream<'a> {
    seq: &'a WeightSequence,
    n: u64,
    n_max: u64,
    weight_sum: Compensated,
    depth_mean: Compensated,
    square_sum: Compensated,
    failed: bool,
}

impl<'a> PrefixStream<'a> {
    fn new(seq: &'a WeightSequence, n_max: u64) -> Self {
        let n_max = seq.len().map_or(n_max, |len| len.min(n_max));
        PrefixStream {
            seq,
            n: 0,
            n_max,
            weight_sum: Compensated::new(),
            depth_mean: Compensated::new(),
            square_sum: Compensated::new(),
            failed: false,
        }
    }
}

impl Iterator for PrefixStream<'_> {
    type Item = Result<PrefixStats>;

    #[inline]
    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.n >= self.n_max {
            return None;
        }
        self.n += 1;
        let w = self.seq.eval(self.n);
        self.weight_sum.add(w);
        let total = self.weight_sum.value();
        if !total.is_finite() || !(w >= 0.0) || total <= 0.0 {
            self.failed = true;
            return Some(Err(Error::Overflow(self.n)));
        }
        let q = if self.n == 1 { 1.0 } else { w / total };
        self.depth_mean.add(q);
        self.square_sum.add(q * q);
        Some(Ok(PrefixStats {
            n: self.n,
            weight: w,
            weight_sum: total,
            increment: q,
            depth_mean: self.depth_mean.value(),
            square_sum: self.square_sum.value(),
        }))
    }
}

/// Collect prefix statistics at the (sorted) grid points.
pub fn prefix_on_grid(seq: &WeightSequence, grid: &[u64]) -> Result<Vec<PrefixStats>> {
    let mut sorted = grid.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let Some(&last) = sorted.last() else { return Ok(Vec::new()) };
    let mut out = Vec::with_capacity(sorted.len());
    let mut next = sorted.iter().peekable();
    for st in seq.prefix_stream(last) {
        let st = st?;
        while next.peek().is_some_and(|&&g| g == st.n) {
            out.push(st);
            next.next();
        }
    }
    if out.len() != sorted.len() {
        return Err(Error::IndexOutOfRange { index: last, len: seq.len().unwrap_or(0) });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferReport {
    /// `(n, a_n − log W_n)`
    pub estimates: Vec<(u64, f64)>,
    /// Max pairwise gap over the top half of the grid.
    pub gap: f64,
    /// Square-sum increments between consecutive grid points.
    pub square_increments: Vec<f64>,
}

impl TransferReport {
    pub fn last(&self) -> f64 {
        self.estimates.last().map_or(f64::NAN, |e| e.1)
    }
}

/// Estimate the constant `K` in `a_n = log W_n + K + o(1)`.
pub fn transfer_constant(seq: &WeightSequence, grid: &[u64]) -> Result<TransferReport> {
    let stats = prefix_on_grid(seq, grid)?;
    if stats.is_empty() {
        return invalid("empty grid");
    }
    let estimates: Vec<(u64, f64)> = stats.iter().map(|s| (s.n, s.transfer())).collect();
    let square_increments: Vec<f64> = stats.windows(2).map(|w| w[1].square_sum - w[0].square_sum).collect();
    if square_increments.len() >= 2 {
        let k = square_increments.len();
        let (head, tail) = (square_increments[0], square_increments[k - 1]);
        // a convergent square series has vanishing increments over the grid
        if tail > head && tail > 1e-12 {
            return Err(Error::NotApplicable(format!(
                "transfer not applicable: square-sum increments grow ({head:e} -> {tail:e})"
            )));
        }
    }
    let top = &estimates[estimates.len() / 2..];
    let mut gap: f64 = 0.0;
    for x in top {
        for y in top {
            gap = gap.max((x.1 - y.1).abs());
        }
    }
    Ok(TransferReport { estimates, gap, square_increments })
}

/// Which square-tail assumption to measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "assumption", rename_all = "snake_case")]
pub enum TailAssumption {
    /// `O(1/n)`
    InverseLinear,
    /// `O(n^(−(2α−1−ε)))`
    Power { alpha: f64, eps: f64 },
    /// `O(n^(−ε) exp(−2(α−1) log^β n) J²(exp(log^β n)))`
    Stretched { alpha: f64, beta: f64, eps: f64, j: SvDescriptor },
}

impl TailAssumption {
    pub fn envelope(&self, n: u64) -> Result<f64> {
        let x = n as f64;
        Ok(match self {
            TailAssumption::InverseLinear => 1.0 / x,
            TailAssumption::Power { alpha, eps } => x.powf(-(2.0 * alpha - 1.0 - eps)),
            TailAssumption::Stretched { alpha, beta, eps, j } => {
                let lb = x.ln().powf(*beta);
                let jv = j.value(lb.exp());
                x.powf(-eps) * (-2.0 * (alpha - 1.0) * lb).exp() * jv * jv
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailRow {
    pub n: u64,
    /// `Σ_{n<=i<=N} (w_i/W_i)²`
    pub partial: f64,
    /// `partial` plus the certified bound beyond the truncation point.
    pub upper: f64,
    pub envelope: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailProfile {
    pub rows: Vec<TailRow>,
    pub truncation: u64,
    pub sup_ratio: f64,
}

/// Measure `Σ_{i>=n} (w_i/W_i)²` against an assumption's envelope.
pub fn tail_square_profile(
    seq: &WeightSequence,
    assumption: &TailAssumption,
    grid: &[u64],
    truncation: u64,
) -> Result<TailProfile> {
    let max_grid = grid.iter().copied().max().unwrap_or(1);
    if truncation < max_grid {
        return invalid("truncation point must be at least the largest grid index");
    }
    let mut points: Vec<u64> = grid.iter().map(|&n| n.saturating_sub(1).max(1)).collect();
    points.push(truncation);
    let stats = prefix_on_grid(seq, &points)?;
    let at = |n: u64| stats.iter().find(|s| s.n == n).copied();
    let end = at(truncation).expect("truncation point in grid");
    let tail = seq.square_tail_bound(truncation, end.weight_sum)?;
    let mut rows = Vec::with_capacity(grid.len());
    for &n in grid {
        let before = if n <= 1 { 0.0 } else { at(n - 1).expect("grid point").square_sum };
        let partial = end.square_sum - before;
        let upper = partial + tail;
        let envelope = assumption.envelope(n)?;
        rows.push(TailRow { n, partial, upper, envelope, ratio: upper / envelope });
    }
    let sup_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(TailProfile { rows, truncation, sup_ratio })
}
