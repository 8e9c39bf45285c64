//! Exact identity suite: enumeration and walk DPs checked against each other.

use serde::Serialize;

use crate::error::Result;
use crate::rng::CounterRng;
use crate::schedules::{make_schedule, Regime, Schedule};
use crate::svfun::SvDescriptor;
use crate::walks::{
    barrier_probability, many_to_one_check, many_to_two_check, moment_report, tilted_identity_eval, LabelFn,
    PathIndicator,
};
use crate::weights::WeightSequence;

/// Tolerance for every exact identity.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Fast,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    /// Worst observed error or violation.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, cases: usize, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), cases, value, tolerance, passed: value <= tolerance }
    }
}

/// The four example families of the growth regimes.
pub fn example_families() -> Vec<WeightSequence> {
    vec![
        WeightSequence::harmonic(),
        WeightSequence::exp_log_power(1.0, 0.5),
        WeightSequence::log_power(2.0),
        WeightSequence::power_law(2.0),
    ]
}

/// Positive weights in `[0.05, 1]`, drawn from stream `index`.
pub fn random_table(seed: u64, index: u64, n: u64) -> WeightSequence {
    let rng = CounterRng::new(seed).stream(index);
    let w = (0..n).map(|i| 0.05 + 0.95 * rng.uniform(i)).collect();
    WeightSequence::table(w).expect("positive weights")
}

/// First `n` weights of `seq` as a table.
pub fn truncate_to_table(seq: &WeightSequence, n: u64) -> Result<WeightSequence> {
    let w = (1..=n).map(|i| seq.weight_at(i)).collect::<Result<Vec<_>>>()?;
    WeightSequence::table(w)
}

pub fn many_to_one_suite(tables: u64, seed: u64) -> Result<Check> {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 1..=7 {
        let mut seqs = example_families().iter().map(|s| truncate_to_table(s, n)).collect::<Result<Vec<_>>>()?;
        seqs.extend((0..tables).map(|k| random_table(seed, k, n)));
        for s in &seqs {
            worst = worst.max(many_to_one_check(s, n)?.total_variation);
            cases += 1;
        }
    }
    Ok(Check::new("many-to-one total variation", cases, worst, IDENTITY_TOLERANCE))
}

pub fn many_to_two_suite(tables: u64, max_n: u64, seed: u64) -> Result<Check> {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 1..=max_n {
        let mut seqs: Vec<WeightSequence> = example_families().iter().map(|s| truncate_to_table(s, n)).collect::<Result<_>>()?;
        seqs.extend((0..tables).map(|k| random_table(seed ^ 0x55, k, n)));
        let mut fs = vec![LabelFn::One, LabelFn::Label];
        fs.extend((1..=n).map(LabelFn::Indicator));
        let mut inds = vec![PathIndicator::Always];
        inds.extend((0..n as u32).map(PathIndicator::FinalHeightEquals));
        inds.extend((0..n as u32).map(PathIndicator::FinalHeightAtMost));
        for s in &seqs {
            for f in &fs {
                for ind in &inds {
                    let r = many_to_two_check(s, n, *f, ind)?;
                    worst = worst.max((r.lhs - r.rhs).abs());
                    cases += 1;
                }
            }
        }
    }
    Ok(Check::new("many-to-two |lhs - rhs|", cases, worst, IDENTITY_TOLERANCE))
}

/// A tilt configuration for the change-of-measure checks.
#[derive(Clone, Debug)]
pub struct TiltCase {
    pub label: String,
    pub seq: WeightSequence,
    pub schedule: Schedule,
    pub thetas: Vec<f64>,
    pub r0: u64,
    pub n: u64,
}

fn harmonic_regime(eta: f64) -> Regime {
    Regime::PowersOfLog { alpha: 1.0, eta, l: SvDescriptor::one_minus_over_x(0.577_215_664_901_532_9) }
}

/// At least twenty (sequence, schedule, θ) combinations with `n <= 1000`.
pub fn tilt_cases() -> Result<Vec<TiltCase>> {
    let mut out = Vec::new();
    let manual = [vec![1, 3, 10, 40, 200, 1000], vec![1, 2, 5, 17, 80, 400, 1000], vec![1, 4, 30, 300]];
    let seqs = [
        WeightSequence::harmonic(),
        WeightSequence::power_law(2.0),
        WeightSequence::log_power(2.0),
        WeightSequence::constant(1.0),
    ];
    for seq in &seqs {
        for idx in &manual {
            let len = idx.len();
            let zero = Schedule::manual(idx.clone(), vec![0.0; len])?;
            let thetas: [(&str, Vec<f64>); 3] = [
                ("zero", vec![0.0; len]),
                ("linear", (0..len).map(|r| 0.3 * r as f64).collect()),
                ("constant", vec![0.8; len]),
            ];
            for (name, th) in thetas {
                let n = *idx.last().expect("non-empty");
                out.push(TiltCase {
                    label: format!("{} epochs={:?} θ={name}", seq.label(), idx),
                    seq: seq.clone(),
                    schedule: zero.clone(),
                    thetas: th,
                    r0: 1,
                    n,
                });
            }
        }
    }
    // calibrated schedules with their own θ, with and without a zero prefix
    let seq = WeightSequence::harmonic();
    let sched = make_schedule(&harmonic_regime(0.0), &seq, 1000)?;
    for r0 in [1, sched.r0, sched.r0 + 1] {
        for t in 2..=sched.t_max() {
            out.push(TiltCase {
                label: format!("harmonic calibrated r0={r0} t={t}"),
                seq: seq.clone(),
                schedule: sched.clone(),
                thetas: sched.thetas().to_vec(),
                r0,
                n: sched.index(t)?,
            });
        }
    }
    let quick = Regime::QuickBetaEq1 { alpha: 2.0, kappa: 2.0, j: SvDescriptor::constant(1.0) };
    let pl = WeightSequence::power_law(2.0);
    let sched = make_schedule(&quick, &pl, 1000)?;
    for t in 1..=sched.t_max() {
        out.push(TiltCase {
            label: format!("power_law calibrated t={t}"),
            seq: pl.clone(),
            schedule: sched.clone(),
            thetas: sched.thetas().to_vec(),
            r0: sched.r0,
            n: sched.index(t)?,
        });
    }
    Ok(out)
}

/// Worst relative identity gap and worst bound violation over the tilt cases.
pub fn tilt_identity_suite() -> Result<(Check, Check)> {
    let cases = tilt_cases()?;
    let mut gap: f64 = 0.0;
    let mut violation: f64 = 0.0;
    for c in &cases {
        let exact = barrier_probability(&c.seq, &c.schedule, c.n)?;
        let t = tilted_identity_eval(&c.seq, &c.schedule, &c.thetas, c.r0, c.n)?;
        gap = gap.max((exact - t.lhs).abs() / exact.abs().max(f64::MIN_POSITIVE));
        if t.monotone {
            violation = violation.max((exact - t.upper) / t.upper);
        }
    }
    Ok((
        Check::new("barrier DP vs tilted product (relative)", cases.len(), gap, IDENTITY_TOLERANCE),
        Check::new("barrier DP above closed-form bound (relative excess)", cases.len(), violation.max(0.0), 1e-12),
    ))
}

/// Lower/upper first-moment sandwich and the second-moment bound on epoch-end sizes.
pub fn moment_suite() -> Result<(Check, Check)> {
    let mut first: f64 = 0.0;
    let mut second: f64 = 0.0;
    let mut cases = 0;
    for c in tilt_cases()? {
        let monotone = c.thetas.iter().skip(c.r0 as usize).all(|x| *x >= 0.0)
            && c.thetas.windows(2).skip(c.r0 as usize).all(|w| w[1] >= w[0]);
        let t_n = c.schedule.t_of(c.n)?;
        if !monotone || c.schedule.index(t_n)? != c.n || t_n < 2 || c.n > 2_000 {
            continue;
        }
        let rep = moment_report(&c.seq, &c.schedule, &c.thetas, c.r0, c.n, t_n - 1)?;
        let lo = (rep.first_moment_lower - rep.first_moment) / rep.first_moment;
        let hi = (rep.first_moment - rep.first_moment_upper) / rep.first_moment_upper;
        first = first.max(lo).max(hi);
        if let Some(m2) = rep.second_moment {
            second = second.max((m2 - rep.second_moment_bound) / rep.second_moment_bound);
        }
        cases += 1;
    }
    Ok((
        Check::new("first-moment sandwich (relative excess)", cases, first.max(0.0), 1e-12),
        Check::new("second moment above bound (relative excess)", cases, second.max(0.0), 1e-12),
    ))
}

/// Run the suite; `Full` uses 50 random tables and pair checks up to `n = 6`.
pub fn run_verify(level: Level, seed: u64) -> Result<Vec<Check>> {
    let (tables, pair_n) = match level {
        Level::Fast => (10, 4),
        Level::Full => (50, 6),
    };
    let mut out = vec![many_to_one_suite(tables, seed)?, many_to_two_suite(tables, pair_n, seed)?];
    let (a, b) = tilt_identity_suite()?;
    out.push(a);
    out.push(b);
    let (c, d) = moment_suite()?;
    out.push(c);
    out.push(d);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enough_tilt_cases() {
        let cases = tilt_cases().unwrap();
        assert!(cases.len() >= 20);
        assert!(cases.iter().all(|c| c.n <= 1000));
    }

    #[test]
    fn fast_suite_passes() {
        for c in run_verify(Level::Fast, 1).unwrap() {
            assert!(c.passed, "{c:?}");
            assert!(c.cases > 0, "{c:?}");
        }
    }
}
