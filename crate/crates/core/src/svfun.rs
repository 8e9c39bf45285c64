//! Slowly varying functions: regularity residuals, the integral asymptotic
//! `∫ x^(−α) L`, and conversion from a tail profile `J` to its density `L`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::integrate;

/// User formula with optional analytic derivatives.
pub trait SvFormula: Send + Sync {
    fn name(&self) -> &str;
    fn value(&self, x: f64) -> f64;
    /// Analytic derivative of the given order (1..=3), if known.
    fn derivative(&self, _order: usize, _x: f64) -> Option<f64> {
        None
    }
}

#[derive(Clone)]
pub struct CustomSv(pub Arc<dyn SvFormula>);

impl fmt::Debug for CustomSv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomSv({})", self.0.name())
    }
}

impl PartialEq for CustomSv {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SvKind {
    Constant { c: f64 },
    /// `1 − γ/x`
    OneMinusOverX { gamma: f64 },
    /// `Σ_i c_i x^(i(1−α))`
    PowerSum { alpha: f64, coefficients: Vec<f64> },
    /// `log x`
    LogX,
    /// `x^p`; not slowly varying unless `p = 0`.
    Power { p: f64 },
    /// `sign · ((1−α) J(x) + x J'(x))`
    FromTail { j: Box<SvDescriptor>, alpha: f64, sign: f64 },
    #[serde(skip)]
    Custom(CustomSv),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvDescriptor {
    #[serde(flatten)]
    pub kind: SvKind,
    /// Start of the domain.
    #[serde(default = "one")]
    pub x0: f64,
}

fn one() -> f64 {
    1.0
}

/// A derivative value with its numerical error estimate (0 when analytic).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derivative {
    pub value: f64,
    pub error: f64,
}

fn falling(p: f64, k: usize) -> f64 {
    (0..k).map(|j| p - j as f64).product()
}

impl SvDescriptor {
    pub fn new(kind: SvKind) -> Self {
        SvDescriptor { kind, x0: 1.0 }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(SvKind::Constant { c })
    }

    pub fn one_minus_over_x(gamma: f64) -> Self {
        Self::new(SvKind::OneMinusOverX { gamma })
    }

    pub fn log_x() -> Self {
        Self::new(SvKind::LogX)
    }

    pub fn power(p: f64) -> Self {
        Self::new(SvKind::Power { p })
    }

    pub fn power_sum(alpha: f64, coefficients: Vec<f64>) -> Self {
        Self::new(SvKind::PowerSum { alpha, coefficients })
    }

    pub fn custom(f: Arc<dyn SvFormula>) -> Self {
        Self::new(SvKind::Custom(CustomSv(f)))
    }

    pub fn with_domain_start(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn value(&self, x: f64) -> f64 {
        match &self.kind {
            SvKind::Constant { c } => *c,
            SvKind::OneMinusOverX { gamma } => 1.0 - gamma / x,
            SvKind::PowerSum { alpha, coefficients } => coefficients
                .iter()
                .enumerate()
                .map(|(i, c)| c * x.powf(i as f64 * (1.0 - alpha)))
                .sum(),
            SvKind::LogX => x.ln(),
            SvKind::Power { p } => x.powf(*p),
            SvKind::FromTail { j, alpha, sign } => {
                let d = j.derivative(1, x).map(|d| d.value).unwrap_or(f64::NAN);
                sign * ((1.0 - alpha) * j.value(x) + x * d)
            }
            SvKind::Custom(f) => f.0.value(x),
        }
    }

    fn analytic(&self, k: usize, x: f64) -> Option<f64> {
        if k == 0 {
            return Some(self.value(x));
        }
        match &self.kind {
            SvKind::Constant { .. } => Some(0.0),
            SvKind::OneMinusOverX { gamma } => {
                // d^k/dx^k (−γ x^(−1)) = −γ (−1)(−2)...(−k) x^(−1−k)
                Some(-gamma * falling(-1.0, k) * x.powi(-1 - k as i32))
            }
            SvKind::PowerSum { alpha, coefficients } => Some(
                coefficients
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let p = i as f64 * (1.0 - alpha);
                        c * falling(p, k) * x.powf(p - k as f64)
                    })
                    .sum(),
            ),
            SvKind::LogX => Some(falling(-1.0, k - 1) * x.powi(-(k as i32))),
            SvKind::Power { p } => Some(falling(*p, k) * x.powf(p - k as f64)),
            SvKind::FromTail { j, alpha, sign } => {
                let jk = j.analytic(k, x)?;
                let jk1 = j.analytic(k + 1, x)?;
                Some(sign * ((k as f64 + 1.0 - alpha) * jk + x * jk1))
            }
            SvKind::Custom(f) => f.0.derivative(k, x),
        }
    }

    /// Derivative of order `k <= 3`; falls back to central differences with
    /// step `x·ε^(1/3)` and a step-halving error estimate.
    pub fn derivative(&self, k: usize, x: f64) -> Result<Derivative> {
        if k > 4 {
            return Err(Error::DerivativeUnavailable { order: k, what: format!("{:?}", self.kind) });
        }
        if let Some(v) = self.analytic(k, x) {
            return Ok(Derivative { value: v, error: 0.0 });
        }
        if k > 3 {
            return Err(Error::DerivativeUnavailable { order: k, what: format!("{:?}", self.kind) });
        }
        let h = x * f64::EPSILON.cbrt() * (1 << (k - 1)) as f64;
        let coarse = self.central_difference(k, x, h)?;
        let fine = self.central_difference(k, x, 0.5 * h)?;
        Ok(Derivative { value: fine, error: (coarse - fine).abs() })
    }

    fn central_difference(&self, k: usize, x: f64, h: f64) -> Result<f64> {
        let d = |k: usize, y: f64| -> Result<f64> {
            if k == 0 {
                Ok(self.value(y))
            } else {
                Ok(self.analytic(k, y).unwrap_or(f64::NAN))
            }
        };
        // use the highest analytic order available below k
        let base = (0..k).rev().find(|&j| self.analytic(j, x).is_some()).unwrap_or(0);
        let m = k - base;
        let v = match m {
            1 => (d(base, x + h)? - d(base, x - h)?) / (2.0 * h),
            2 => (d(base, x + h)? - 2.0 * d(base, x)? + d(base, x - h)?) / (h * h),
            _ => {
                (d(base, x + 2.0 * h)? - 2.0 * d(base, x + h)? + 2.0 * d(base, x - h)? - d(base, x - 2.0 * h)?)
                    / (2.0 * h * h * h)
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::DerivativeUnavailable { order: k, what: format!("{:?}", self.kind) })
        }
    }

    /// `x^k L^(k)(x) / L(x)`
    pub fn regularity(&self, k: usize, x: f64) -> Result<f64> {
        Ok(x.powi(k as i32) * self.derivative(k, x)?.value / self.value(x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SvResidual {
    /// `(x, max_{1<=i<=k} |x^i L^(i)(x)/L(x)|)`
    pub profile: Vec<(f64, f64)>,
    pub passes: bool,
}

/// Tolerance for "tends to 0" on the final decade of a grid.
pub const TREND_TOLERANCE: f64 = 1e-2;

/// Whether a residual profile over increasing `x` trends to 0: below
/// [`TREND_TOLERANCE`] on the last decade and non-increasing on the last three.
pub fn trends_to_zero(profile: &[(f64, f64)]) -> bool {
    let Some(&(x_last, _)) = profile.last() else { return false };
    let last3: Vec<f64> = profile.iter().filter(|p| p.0 >= x_last / 1e3).map(|p| p.1).collect();
    let decreasing = last3.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-300);
    let small = profile.iter().filter(|p| p.0 >= x_last / 10.0).all(|p| p.1 < TREND_TOLERANCE);
    decreasing && small
}

pub fn sv_residual(l: &SvDescriptor, order: usize, grid: &[f64]) -> Result<SvResidual> {
    if order > 3 {
        return invalid("regularity is checked up to order 3");
    }
    let mut profile = Vec::with_capacity(grid.len());
    for &x in grid {
        let mut worst: f64 = 0.0;
        for i in 1..=order {
            worst = worst.max(l.regularity(i, x)?.abs());
        }
        profile.push((x, worst));
    }
    let passes = trends_to_zero(&profile);
    Ok(SvResidual { profile, passes })
}

/// Geometric grid `x0, x0·r, ...` up to `x_max`.
pub fn geometric_grid(x0: f64, ratio: f64, x_max: f64) -> Vec<f64> {
    let mut g = Vec::new();
    let mut x = x0;
    while x <= x_max * (1.0 + 1e-12) {
        g.push(x);
        x *= ratio;
    }
    g
}

/// `|log L(2x) − log L(x)| / log 2`
pub fn doubling_log_ratio(l: &SvDescriptor, x: f64) -> f64 {
    (l.value(2.0 * x).ln() - l.value(x).ln()).abs() / std::f64::consts::LN_2
}

/// Second-order remainder `|log L(y) − log L(x) − (y L'(y)/L(y)) log(y/x)| / log²(y/x)` at `y = 2x`.
pub fn doubling_remainder(l: &SvDescriptor, x: f64) -> Result<f64> {
    let y = 2.0 * x;
    let lr = std::f64::consts::LN_2;
    let tilde = l.regularity(1, y)?;
    Ok((l.value(y).ln() - l.value(x).ln() - tilde * lr).abs() / (lr * lr))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegralGap {
    pub integral: f64,
    pub approximation: f64,
    pub relative_gap: f64,
}

/// Compare `∫_{prev}^{cur} x^(−α) L(x) dx` with
/// `cur^(−α) (cur − prev) L(cur) (1 + (α/2)(cur − prev)/cur)`.
pub fn integral_asymptotic_gap(l: &SvDescriptor, alpha: f64, prev: f64, cur: f64) -> Result<IntegralGap> {
    if !(alpha > 0.0) {
        return invalid("α must be positive");
    }
    if prev > cur || prev < l.x0 {
        return invalid(format!("need x0 <= prev <= cur, got {prev}, {cur}"));
    }
    if prev == cur {
        return Ok(IntegralGap { integral: 0.0, approximation: 0.0, relative_gap: 0.0 });
    }
    let integral = integrate(|x| x.powf(-alpha) * l.value(x), prev, cur, 0.0, 1e-14)?.value;
    let d = cur - prev;
    let approximation = cur.powf(-alpha) * d * l.value(cur) * (1.0 + 0.5 * alpha * d / cur);
    Ok(IntegralGap { integral, approximation, relative_gap: ((integral - approximation) / integral).abs() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityFromTail {
    pub l: SvDescriptor,
    /// Point past which `l` is positive.
    pub crossover: f64,
}

/// Convert a tail profile `J` into the density `L` with
/// `L = (1−α)J + xJ'` for `α < 1` and `L = −((1−α)J + xJ')` for `α > 1`.
pub fn j_to_l(j: &SvDescriptor, alpha: f64) -> Result<DensityFromTail> {
    if alpha == 1.0 || !alpha.is_finite() {
        return invalid("α must differ from 1");
    }
    let sign = if alpha < 1.0 { 1.0 } else { -1.0 };
    let mut l = SvDescriptor::new(SvKind::FromTail { j: Box::new(j.clone()), alpha, sign });
    l.x0 = j.x0;
    // the density needs J' everywhere on the search range
    j.derivative(1, j.x0.max(1.0))?;
    let grid = geometric_grid(j.x0.max(1.0), 2f64.powf(0.25), 1e12);
    let last_bad = grid.iter().rposition(|&x| !(l.value(x) > 0.0));
    let crossover = match last_bad {
        None => j.x0,
        Some(k) if k + 1 == grid.len() => {
            return Err(Error::NotApplicable("no positive tail found for the density".into()))
        }
        Some(k) => {
            let (mut lo, mut hi) = (grid[k], grid[k + 1]);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if l.value(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= 1e-15 * hi {
                    break;
                }
            }
            hi
        }
    };
    l.x0 = crossover;
    Ok(DensityFromTail { l, crossover })
}

/// Both sides of the tail identity at `x`:
/// `α > 1`: `(x^(1−α) J(x), ∫_x^∞ y^(−α) L(y) dy)`;
/// `α < 1`: `(x^(1−α) J(x) − c^(1−α) J(c), ∫_c^x y^(−α) L(y) dy)` with `c` the crossover.
pub fn tail_identity(j: &SvDescriptor, density: &DensityFromTail, alpha: f64, x: f64) -> Result<(f64, f64)> {
    let l = &density.l;
    if alpha > 1.0 {
        let lhs = x.powf(1.0 - alpha) * j.value(x);
        // y = x e^s
        let decay = alpha - 1.0;
        let s_max = (40.0 / decay).min(700.0 - x.ln());
        if decay * s_max < 36.0 {
            return Err(Error::Quadrature(format!("tail cutoff too short for α = {alpha} at x = {x}")));
        }
        let body = integrate(
            |s| x.powf(1.0 - alpha) * (-(decay) * s).exp() * l.value(x * s.exp()),
            0.0,
            s_max,
            0.0,
            1e-12,
        )?;
        let tail = x.powf(1.0 - alpha) * (-(decay) * s_max).exp() * l.value(x * s_max.exp()) / decay;
        Ok((lhs, body.value + tail))
    } else {
        let c = density.crossover;
        let lhs = x.powf(1.0 - alpha) * j.value(x) - c.powf(1.0 - alpha) * j.value(c);
        let rhs = integrate(|y| y.powf(-alpha) * l.value(y), c, x, 0.0, 1e-12)?.value;
        Ok((lhs, rhs))
    }
}
