//! Epoch schedules `i_t`, their inverse `t_n`, and calibrated tilts `θ_t`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::integrate;
use crate::sum::Compensated;
use crate::svfun::SvDescriptor;
use crate::weights::WeightSequence;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    /// `a_n ≈ ∫_1^{log n} x^(−α) L(x) dx`
    PowersOfLog { alpha: f64, eta: f64, l: SvDescriptor },
    /// `a_∞ − a_n ≈ exp(−(α−1) log^β n) J(exp(log^β n))`, `β < 1`
    QuickBetaLt1 { alpha: f64, beta: f64, kappa: f64, j: SvDescriptor },
    /// Same with `β = 1`.
    QuickBetaEq1 { alpha: f64, kappa: f64, j: SvDescriptor },
    /// Same with `β > 1`.
    QuickBetaGt1 { alpha: f64, beta: f64, kappa: f64, j: SvDescriptor },
}

impl Regime {
    pub fn validate(&self) -> Result<()> {
        match self {
            Regime::PowersOfLog { alpha, eta, .. } if *alpha > 0.0 && eta.is_finite() => Ok(()),
            Regime::QuickBetaLt1 { alpha, beta, kappa, .. } if *alpha > 1.0 && *beta > 0.0 && *beta < 1.0 && *kappa > 0.0 => {
                Ok(())
            }
            Regime::QuickBetaEq1 { alpha, kappa, .. } if *alpha > 1.0 && *kappa > 1.0 => Ok(()),
            Regime::QuickBetaGt1 { alpha, beta, kappa, .. } if *alpha > 1.0 && *beta > 1.0 && *kappa > 1.0 => Ok(()),
            _ => invalid(format!("regime parameters out of range: {self:?}")),
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            Regime::PowersOfLog { alpha, .. }
            | Regime::QuickBetaLt1 { alpha, .. }
            | Regime::QuickBetaEq1 { alpha, .. }
            | Regime::QuickBetaGt1 { alpha, .. } => *alpha,
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self {
            Regime::PowersOfLog { .. } => None,
            Regime::QuickBetaLt1 { beta, .. } | Regime::QuickBetaGt1 { beta, .. } => Some(*beta),
            Regime::QuickBetaEq1 { .. } => Some(1.0),
        }
    }

    /// `η = κ^(1/β) − (α−1)(1−β)κ` for `β < 1`.
    pub fn sign_quantity(&self) -> Option<f64> {
        match self {
            Regime::QuickBetaLt1 { alpha, beta, kappa, .. } => {
                Some(kappa.powf(1.0 / beta) - (alpha - 1.0) * (1.0 - beta) * kappa)
            }
            _ => None,
        }
    }

    /// `log i_t` before flooring; NaN where the formula is undefined.
    pub fn log_index(&self, t: u64) -> f64 {
        let x = t as f64;
        match self {
            Regime::PowersOfLog { alpha, eta, l } => {
                if t < 2 {
                    return f64::NAN;
                }
                let lt = x.ln();
                let lv = l.value(alpha * x * lt);
                if !(lv > 0.0) {
                    return f64::NAN;
                }
                alpha * x * lt - (1.0 - alpha) * x * lt.ln() - x * lv.ln()
                    - x * (1.0 + alpha + (1.0 - alpha) * alpha.ln() + eta)
            }
            Regime::QuickBetaLt1 { beta, kappa, .. } => kappa.powf(1.0 / beta) * x.powf(1.0 / (1.0 - beta)),
            Regime::QuickBetaEq1 { kappa, .. } => kappa.powf(x),
            Regime::QuickBetaGt1 { kappa, .. } => kappa.powf(x).exp(),
        }
    }

    /// Default window `T(n)` used by the lower-bound argument.
    pub fn default_window(&self, n: u64) -> u64 {
        let ln = (n as f64).ln();
        let v = match self {
            Regime::PowersOfLog { .. } => ln.powf(0.8),
            Regime::QuickBetaLt1 { beta, .. } => ln.powf((1.0 - beta).powf(1.5)),
            Regime::QuickBetaEq1 { .. } => ln.ln().sqrt(),
            Regime::QuickBetaGt1 { .. } => ln.ln().ln().ln(),
        };
        if v.is_finite() && v > 0.0 {
            v.floor() as u64
        } else {
            0
        }
    }
}

/// Epochs `i_0 = 1 < i_1 < ...` with tilts `θ_1, θ_2, ...`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Schedule {
    pub regime: Option<Regime>,
    /// `i_t` for `t = 0..=t_max`.
    indices: Vec<u64>,
    /// `θ_t` at position `t`; position 0 holds 0.
    thetas: Vec<f64>,
    /// `a_{i_t} − a_{i_{t−1}}` at position `t` (NaN at 0 or when unknown).
    increments: Vec<f64>,
    /// `a_{i_t}` (NaN when unknown).
    depth_means: Vec<f64>,
    pub s0: u64,
    pub r0: u64,
    pub n_max: u64,
}

/// Compensated sums `a_{i_t} − a_{i_{t−1}}` and the values `a_{i_t}`.
pub fn epoch_sums(seq: &WeightSequence, indices: &[u64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let last = *indices.last().expect("non-empty epoch list");
    let mut sums = vec![f64::NAN; indices.len()];
    let mut levels = vec![f64::NAN; indices.len()];
    levels[0] = 1.0;
    let mut next = 1usize;
    let mut seg = Compensated::new();
    for st in seq.prefix_stream(last) {
        let st = st?;
        if st.n == 1 {
            continue;
        }
        seg.add(st.increment);
        while next < indices.len() && indices[next] == st.n {
            sums[next] = seg.value();
            levels[next] = st.depth_mean;
            seg = Compensated::new();
            next += 1;
        }
    }
    if next < indices.len() {
        return Err(Error::Schedule(format!("prefix evaluation stopped before i_t = {last}")));
    }
    Ok((sums, levels))
}

fn first_monotone_from(thetas: &[f64]) -> u64 {
    let t_max = thetas.len() - 1;
    let mut r0 = t_max.max(1);
    while r0 > 1 && thetas[r0 - 1] >= 0.0 && thetas[r0 - 1] <= thetas[r0] {
        r0 -= 1;
    }
    if t_max >= 1 && thetas[t_max] < 0.0 {
        r0 = t_max + 1;
    }
    r0 as u64
}

fn check_indices(indices: &[u64]) -> Result<()> {
    if indices.first() != Some(&1) {
        return Err(Error::Schedule("i_0 must be 1".into()));
    }
    if let Some(w) = indices.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Schedule(format!("epochs not strictly increasing: {} then {}", w[0], w[1])));
    }
    Ok(())
}

impl Schedule {
    /// Explicit epochs and tilts; `thetas[t]` is `θ_t` (entry 0 ignored).
    pub fn manual(indices: Vec<u64>, thetas: Vec<f64>) -> Result<Self> {
        check_indices(&indices)?;
        if thetas.len() != indices.len() {
            return Err(Error::Schedule("need one θ per epoch (θ_0 placeholder included)".into()));
        }
        let mut thetas = thetas;
        thetas[0] = 0.0;
        let r0 = first_monotone_from(&thetas);
        let n_max = *indices.last().expect("checked non-empty");
        let len = indices.len();
        Ok(Schedule {
            regime: None,
            indices,
            thetas,
            increments: vec![f64::NAN; len],
            depth_means: vec![f64::NAN; len],
            s0: 0,
            r0,
            n_max,
        })
    }

    /// Epochs with `θ_t = 0` for `t <= s0` and `θ_t = −log(a_{i_t} − a_{i_{t−1}})` after.
    pub fn calibrated(seq: &WeightSequence, indices: Vec<u64>, s0: u64) -> Result<Self> {
        check_indices(&indices)?;
        let (increments, depth_means) = epoch_sums(seq, &indices)?;
        Self::from_increments(indices, increments, depth_means, s0)
    }

    fn from_increments(indices: Vec<u64>, increments: Vec<f64>, depth_means: Vec<f64>, s0: u64) -> Result<Self> {
        let mut thetas = vec![0.0; indices.len()];
        for t in (s0 as usize + 1)..indices.len() {
            if !(increments[t] > 0.0) {
                return Err(Error::Calibration(format!("epoch {t} carries no increment")));
            }
            thetas[t] = -increments[t].ln();
        }
        let r0 = first_monotone_from(&thetas);
        let n_max = *indices.last().expect("checked non-empty");
        Ok(Schedule { regime: None, indices, thetas, increments, depth_means, s0, r0, n_max })
    }

    pub fn t_max(&self) -> u64 {
        self.indices.len() as u64 - 1
    }

    /// `i_t`
    pub fn index(&self, t: u64) -> Result<u64> {
        self.indices.get(t as usize).copied().ok_or_else(|| {
            Error::Schedule(format!("epoch {t} lies beyond the materialized range (t_max = {})", self.t_max()))
        })
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    /// `θ_t` for `t >= 1` (0 at `t = 0`).
    pub fn theta(&self, t: u64) -> Result<f64> {
        self.thetas.get(t as usize).copied().ok_or_else(|| Error::Schedule(format!("no θ for epoch {t}")))
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn depth_means(&self) -> &[f64] {
        &self.depth_means
    }

    /// `t_n`: the epoch with `i_{t−1} < n <= i_t`.
    pub fn t_of(&self, n: u64) -> Result<u64> {
        if n == 0 {
            return invalid("n must be >= 1");
        }
        match self.indices.binary_search(&n) {
            Ok(t) => Ok(t as u64),
            Err(t) if t < self.indices.len() => Ok(t as u64),
            Err(_) => Err(Error::Schedule(format!("n = {n} exceeds the last epoch {}", self.indices.last().copied().unwrap_or(0)))),
        }
    }

    /// Same schedule with `θ_r` replaced by 0 for `r < r0`.
    pub fn with_zero_prefix(&self, r0: u64) -> Schedule {
        let mut s = self.clone();
        for r in 1..(r0 as usize).min(s.thetas.len()) {
            s.thetas[r] = 0.0;
        }
        s.r0 = first_monotone_from(&s.thetas);
        s
    }
}

/// `T(n)` for the schedule's regime, clamped to `[0, t_n − 1]`; `t_n − 1` without a regime.
pub fn default_window_for(schedule: &Schedule, n: u64) -> u64 {
    let t_n = schedule.t_of(n).unwrap_or(schedule.t_max());
    let cap = t_n.saturating_sub(1);
    schedule.regime.as_ref().map_or(cap, |r| r.default_window(n).min(cap))
}

/// Build the regime's schedule on `seq` with epochs up to `n_max`.
pub fn make_schedule(regime: &Regime, seq: &WeightSequence, n_max: u64) -> Result<Schedule> {
    regime.validate()?;
    if n_max < 3 {
        return invalid("n_max must be at least 3");
    }
    let cap = (n_max as f64).ln();
    // formula values for t = 1..=t_top with exp(ℓ_t) <= n_max
    let mut formula: Vec<Option<u64>> = vec![None];
    let mut t = 1u64;
    loop {
        let l = regime.log_index(t);
        if l.is_finite() && l > cap + 1e-12 {
            break;
        }
        let v = if l.is_finite() && l >= 0.0 { Some(l.exp().floor() as u64).filter(|&i| i <= n_max) } else { None };
        formula.push(v);
        t += 1;
        if t > 100_000 {
            return Err(Error::Schedule("formula never exceeds n_max".into()));
        }
    }
    let t_top = formula.len() as u64 - 1;
    // candidate s0 values, from the largest down
    let valid_from = |s: u64| -> bool {
        let Some(first) = formula[s as usize] else { return false };
        if first <= s {
            return false;
        }
        let mut prev = first;
        for t in (s + 1)..=t_top {
            match formula[t as usize] {
                Some(i) if i > prev => prev = i,
                _ => return false,
            }
        }
        true
    };
    let candidates: Vec<u64> = (1..=t_top).filter(|&s| valid_from(s)).collect();
    let Some(&first) = candidates.first() else {
        return Err(Error::Schedule(format!("no valid s0 with epochs up to n_max = {n_max}")));
    };
    // one prefix pass over every index any candidate could use
    let mut checkpoints: Vec<u64> = (1..=t_top + 1).collect();
    checkpoints.extend((first..=t_top).filter_map(|t| formula[t as usize]));
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let (segments, levels) = epoch_sums(seq, &checkpoints)?;
    let pos = |i: u64| checkpoints.binary_search(&i).expect("index is a checkpoint");
    for s0 in candidates {
        let mut indices: Vec<u64> = (0..s0).map(|t| t + 1).collect();
        indices.extend((s0..=t_top).map(|t| formula[t as usize].expect("validated")));
        let mut increments = vec![f64::NAN; indices.len()];
        let mut depth_means = vec![1.0; indices.len()];
        for t in 1..indices.len() {
            let (a, b) = (pos(indices[t - 1]), pos(indices[t]));
            increments[t] = segments[a + 1..=b].iter().copied().collect::<Compensated>().value();
            depth_means[t] = levels[b];
        }
        if increments[s0 as usize..].iter().all(|d| *d > 0.0) {
            let mut sched = Schedule::from_increments(indices, increments, depth_means, s0)?;
            sched.regime = Some(regime.clone());
            sched.n_max = n_max;
            return Ok(sched);
        }
    }
    Err(Error::Schedule(format!("no valid s0 with epochs up to n_max = {n_max}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualForm {
    Difference,
    Ratio,
    /// No regime: the residual is `|θ_t|`.
    Unflagged,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaResidual {
    pub form: ResidualForm,
    /// `(t, θ_t, prediction, residual)`
    pub rows: Vec<(u64, f64, f64, f64)>,
    /// At least four usable epochs.
    pub conclusive: bool,
    /// Residuals strictly decrease over the last half of the rows.
    pub decreasing_tail: bool,
}

fn sv_at_exp(j: &SvDescriptor, y: f64) -> f64 {
    j.value(y.exp())
}

/// Compare `θ_t` with the regime's expansion for `t > s0`.
pub fn theta_expansion_residual(schedule: &Schedule) -> ThetaResidual {
    let mut rows = Vec::new();
    let form = match &schedule.regime {
        None => ResidualForm::Unflagged,
        Some(Regime::PowersOfLog { .. }) => ResidualForm::Difference,
        Some(_) => ResidualForm::Ratio,
    };
    for t in (schedule.s0 + 1)..=schedule.t_max() {
        let theta = schedule.thetas[t as usize];
        let x = t as f64;
        let (pred, res) = match &schedule.regime {
            None => (0.0, theta.abs()),
            Some(Regime::PowersOfLog { alpha, l, .. }) => {
                let p = alpha * x.ln() - (1.0 - alpha) * x.ln().ln() - (1.0 - alpha) * alpha.ln()
                    - l.value(alpha * x * x.ln()).ln();
                (p, (theta - p).abs())
            }
            Some(Regime::QuickBetaLt1 { alpha, beta, kappa, .. }) => {
                let p = (alpha - 1.0) * kappa * x.powf(beta / (1.0 - beta));
                (p, (theta / p - 1.0).abs())
            }
            Some(Regime::QuickBetaEq1 { alpha, kappa, j }) => {
                let lead = kappa.powf(x - 1.0);
                let p = (alpha - 1.0) * lead - sv_at_exp(j, lead).ln();
                (p, ((theta + sv_at_exp(j, lead).ln()) / ((alpha - 1.0) * lead) - 1.0).abs())
            }
            Some(Regime::QuickBetaGt1 { alpha, beta, kappa, j }) => {
                let log_level = (beta * kappa.powf(x - 1.0)).exp();
                let p = (alpha - 1.0) * log_level - sv_at_exp(j, log_level).ln();
                (p, ((theta + sv_at_exp(j, log_level).ln()) / ((alpha - 1.0) * log_level) - 1.0).abs())
            }
        };
        rows.push((t, theta, pred, res));
    }
    let conclusive = rows.len() >= 4;
    let half = &rows[rows.len() / 2..];
    let decreasing_tail = half.len() >= 2 && half.windows(2).all(|w| w[1].3 < w[0].3);
    ThetaResidual { form, rows, conclusive, decreasing_tail }
}

/// Log-scale key quantity `log i_t + Σ_{r<=t} (e^{θ_r} − 1)Δa_r − Σ_{r<=t} θ_r`,
/// or its partial version over `(from, t]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KeyQuantity {
    pub t: u64,
    pub from: u64,
    pub log_value: f64,
    /// The regime's leading term for the full version (NaN for manual schedules).
    pub predicted: f64,
}

pub fn key_quantity(schedule: &Schedule, seq: &WeightSequence, t: u64, from: Option<u64>) -> Result<KeyQuantity> {
    let s = from.unwrap_or(0);
    if s > t {
        return invalid("the partial range needs from <= t");
    }
    if t > schedule.t_max() {
        return Err(Error::Schedule(format!("epoch {t} beyond the prefix range (t_max = {})", schedule.t_max())));
    }
    let increments = if schedule.increments[1..].iter().all(|d| d.is_finite()) {
        schedule.increments.clone()
    } else {
        epoch_sums(seq, &schedule.indices)?.0
    };
    let mut acc = Compensated::from_value(((schedule.indices[t as usize] as f64) / schedule.indices[s as usize] as f64).ln());
    for r in (s + 1)..=t {
        let th = schedule.thetas[r as usize];
        acc.add(th.exp_m1() * increments[r as usize]);
        acc.add(-th);
    }
    let x = t as f64;
    let predicted = match &schedule.regime {
        None => f64::NAN,
        Some(Regime::PowersOfLog { eta, .. }) => -eta * x,
        Some(r @ Regime::QuickBetaLt1 { beta, .. }) => r.sign_quantity().expect("β < 1") * x.powf(1.0 / (1.0 - beta)),
        Some(Regime::QuickBetaEq1 { alpha, kappa, .. }) => (kappa - alpha) / (kappa - 1.0) * kappa.powf(x),
        Some(Regime::QuickBetaGt1 { alpha, beta, kappa, .. }) => {
            kappa.powf(x).exp() - (alpha - 1.0) * (beta * kappa.powf(x - 1.0)).exp()
        }
    };
    Ok(KeyQuantity { t, from: s, log_value: acc.value(), predicted })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionResidual {
    /// `(n, observed increment, predicted increment, residual)` between consecutive grid points.
    pub rows: Vec<(u64, f64, f64, f64)>,
    pub decreasing: bool,
}

fn integral_of_density(alpha: f64, l: &SvDescriptor, lo: f64, hi: f64) -> Result<f64> {
    Ok(integrate(|x| x.powf(-alpha) * l.value(x), lo, hi, 0.0, 1e-14)?.value)
}

/// Measure the regime's assumption on `a_n` through increments between
/// consecutive grid points, so that additive constants cancel.
pub fn assumption_residual(seq: &WeightSequence, regime: &Regime, grid: &[u64]) -> Result<AssumptionResidual> {
    regime.validate()?;
    let mut g = grid.to_vec();
    g.sort_unstable();
    g.dedup();
    if g.len() < 2 || g[0] < 3 {
        return invalid("need at least two grid points, all >= 3");
    }
    let mut indices = vec![1u64];
    indices.extend(g.iter().copied());
    let (incs, _) = epoch_sums(seq, &indices)?;
    let mut rows = Vec::new();
    for k in 1..g.len() {
        let (lo, hi) = (g[k - 1], g[k]);
        let observed = incs[k + 1];
        let (ylo, yhi) = ((lo as f64).ln(), (hi as f64).ln());
        let (predicted, residual) = match regime {
            Regime::PowersOfLog { alpha, l, .. } => {
                let p = integral_of_density(*alpha, l, ylo, yhi)?;
                let env = ylo.powf(-1.0 - alpha) * ylo.ln().powi(2) * l.value(ylo);
                (p, (observed - p).abs() / env)
            }
            Regime::QuickBetaLt1 { alpha, beta, j, .. } | Regime::QuickBetaGt1 { alpha, beta, j, .. } => {
                let tail = |y: f64| (-(alpha - 1.0) * y.powf(*beta)).exp() * sv_at_exp(j, y.powf(*beta));
                let p = tail(ylo) - tail(yhi);
                (p, (observed / p - 1.0).abs())
            }
            Regime::QuickBetaEq1 { alpha, j, .. } => {
                let tail = |y: f64| (-(alpha - 1.0) * y).exp() * sv_at_exp(j, y);
                let p = tail(ylo) - tail(yhi);
                (p, (observed / p - 1.0).abs())
            }
        };
        rows.push((hi, observed, predicted, residual));
    }
    let decreasing = rows.windows(2).all(|w| w[1].3 <= w[0].3 * (1.0 + 1e-9) + 1e-14);
    Ok(AssumptionResidual { rows, decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic_regime(eta: f64) -> Regime {
        Regime::PowersOfLog { alpha: 1.0, eta, l: SvDescriptor::one_minus_over_x(0.577_215_664_901_532_9) }
    }

    #[test]
    fn inverse_relation_holds() {
        let s = make_schedule(&harmonic_regime(0.0), &WeightSequence::harmonic(), 1_000_000).unwrap();
        for (r, &i) in s.indices().iter().enumerate() {
            assert_eq!(s.t_of(i).unwrap(), r as u64);
        }
        for n in 2..=s.index(s.t_max()).unwrap() {
            let t = s.t_of(n).unwrap();
            assert!(s.index(t - 1).unwrap() < n && n <= s.index(t).unwrap());
        }
        assert!(s.t_of(s.n_max + 1).is_err() || s.index(s.t_max()).unwrap() >= s.n_max);
    }

    #[test]
    fn theta_vanishes_up_to_s0_and_calibrates_after() {
        let s = make_schedule(&harmonic_regime(0.0), &WeightSequence::harmonic(), 1_000_000).unwrap();
        for t in 1..=s.s0 {
            assert_eq!(s.theta(t).unwrap(), 0.0);
            assert_eq!(s.index(t - 1).unwrap(), t);
        }
        for t in (s.s0 + 1)..=s.t_max() {
            let v = s.theta(t).unwrap().exp() * s.increments()[t as usize];
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn beta_one_formula_value() {
        let r = Regime::QuickBetaEq1 { alpha: 2.0, kappa: 2.0, j: SvDescriptor::constant(1.0) };
        assert_eq!(r.log_index(2).exp().floor() as u64, 54);
        let s = make_schedule(&r, &WeightSequence::power_law(2.0), 10_000).unwrap();
        assert!(s.s0 <= 2);
        assert_eq!(s.index(2).unwrap(), 54);
    }

    #[test]
    fn partial_key_quantity_is_zero_on_empty_range() {
        let seq = WeightSequence::harmonic();
        let s = make_schedule(&harmonic_regime(0.5), &seq, 1_000_000).unwrap();
        let k = key_quantity(&s, &seq, 5, Some(5)).unwrap();
        assert_eq!(k.log_value, 0.0);
    }

    #[test]
    fn manual_schedule_residual_is_unflagged() {
        let s = Schedule::manual(vec![1, 3, 9, 27], vec![0.0, 0.5, 0.5, 0.5]).unwrap();
        let r = theta_expansion_residual(&s);
        assert_eq!(r.form, ResidualForm::Unflagged);
        assert_eq!(r.rows.len(), 3);
        assert!(!r.conclusive);
        assert_eq!(s.r0, 1);
    }

    #[test]
    fn manual_schedule_validation() {
        assert!(Schedule::manual(vec![2, 3], vec![0.0, 0.0]).is_err());
        assert!(Schedule::manual(vec![1, 3, 3], vec![0.0; 3]).is_err());
        assert!(Schedule::manual(vec![1, 3], vec![0.0]).is_err());
    }

    #[test]
    fn r0_detects_late_monotonicity() {
        let s = Schedule::manual(vec![1, 2, 3, 4, 5], vec![0.0, 1.0, 0.2, 0.3, 0.3]).unwrap();
        assert_eq!(s.r0, 2);
        assert_eq!(s.with_zero_prefix(2).r0, 1);
    }

    #[test]
    fn default_windows() {
        let n = 1_000_000u64;
        let r = harmonic_regime(0.0);
        assert_eq!(r.default_window(n), (n as f64).ln().powf(0.8).floor() as u64);
        let q = Regime::QuickBetaGt1 { alpha: 2.0, beta: 2.0, kappa: 1.2, j: SvDescriptor::constant(1.0) };
        assert_eq!(q.default_window(100), 0);
    }
}
