//! Synthetic injection of TP / FP / FN entries into baseline bags, for
//! studying how each metric responds to growing proportions of one kind of
//! prediction.
//!
//! An injection at fraction `f` adds `round(f · N)` entries, where `N` is the
//! baseline `|TP| + |FP| + |FN|`. Every fraction draws its own sample from a
//! ChaCha stream keyed by `(seed, fraction index)`, so fractions are
//! independent and reproducible in isolation.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{evaluate_bags, MetricReport};
use crate::model::{ConfidenceBags, EvalConfig, ReportingMode};

/// Which bag receives the synthetic entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InjectionKind {
    Fp,
    Tp,
    Fn,
}

impl fmt::Display for InjectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InjectionKind::Fp => "fp",
            InjectionKind::Tp => "tp",
            InjectionKind::Fn => "fn",
        })
    }
}

impl FromStr for InjectionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fp" => Ok(InjectionKind::Fp),
            "tp" => Ok(InjectionKind::Tp),
            "fn" => Ok(InjectionKind::Fn),
            other => Err(Error::InvalidPlan(format!("unknown injection kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationPlan {
    pub kind: InjectionKind,
    /// Injected confidences are drawn from `Uniform[conf_low, conf_high]`.
    /// Ignored for [`InjectionKind::Fn`].
    pub conf_low: f64,
    pub conf_high: f64,
    pub start_fraction: f64,
    pub end_fraction: f64,
    pub step: f64,
    pub seed: u64,
}

impl PerturbationPlan {
    /// Plan stepping 5% → 100% in 5% increments.
    pub fn new(kind: InjectionKind, conf_low: f64, conf_high: f64, seed: u64) -> Self {
        Self {
            kind,
            conf_low,
            conf_high,
            start_fraction: 0.05,
            end_fraction: 1.0,
            step: 0.05,
            seed,
        }
    }

    pub fn false_negatives(seed: u64) -> Self {
        Self::new(InjectionKind::Fn, 0.0, 0.0, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind != InjectionKind::Fn {
            let in_unit = |v: f64| (0.0..=1.0).contains(&v);
            if !in_unit(self.conf_low) || !in_unit(self.conf_high) {
                return Err(Error::InvalidPlan(format!(
                    "confidence range [{}, {}] is outside [0, 1]",
                    self.conf_low, self.conf_high
                )));
            }
            if self.conf_low > self.conf_high {
                return Err(Error::InvalidPlan(format!(
                    "confidence range low {} exceeds high {}",
                    self.conf_low, self.conf_high
                )));
            }
        }
        if !self.step.is_finite() || self.step <= 0.0 {
            return Err(Error::InvalidPlan(format!("step {} must be positive", self.step)));
        }
        let ordered = self.start_fraction.is_finite()
            && self.end_fraction.is_finite()
            && self.start_fraction >= 0.0
            && self.start_fraction <= self.end_fraction;
        if !ordered {
            return Err(Error::InvalidPlan(format!(
                "fractions must satisfy 0 <= start ({}) <= end ({})",
                self.start_fraction, self.end_fraction
            )));
        }
        Ok(())
    }

    /// Fractions from start to end (inclusive, with a small tolerance for
    /// accumulated step error), in ascending order.
    pub fn fractions(&self) -> Vec<f64> {
        let span = (self.end_fraction - self.start_fraction) / self.step;
        let steps = (span + 1e-9).floor() as usize;
        (0..=steps)
            .map(|i| self.start_fraction + i as f64 * self.step)
            .collect()
    }
}

/// `round(fraction · N)`, halves rounded away from zero.
pub fn injection_count(fraction: f64, population: u64) -> u64 {
    (fraction * population as f64).round() as u64
}

fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn inject_with<R: Rng>(bags: &ConfidenceBags, plan: &PerturbationPlan, fraction: f64, rng: &mut R) -> Result<ConfidenceBags> {
    if fraction.is_nan() || fraction < 0.0 {
        return Err(Error::NegativeFraction(fraction));
    }
    plan.validate()?;
    let count = injection_count(fraction, bags.population());
    let mut out = bags.clone();
    match plan.kind {
        InjectionKind::Fn => out.add_false_negatives(count),
        InjectionKind::Fp | InjectionKind::Tp => {
            for _ in 0..count {
                let p = rng.gen_range(plan.conf_low..=plan.conf_high);
                if plan.kind == InjectionKind::Fp {
                    out.push_fp(p)?;
                } else {
                    out.push_tp(p)?;
                }
            }
        }
    }
    Ok(out)
}

/// Returns `bags` with `round(fraction · N)` synthetic entries added per `plan`.
///
/// The draw uses the plan's seed with stream 0; [`run_series`] uses one
/// stream per fraction index instead.
pub fn inject(bags: &ConfidenceBags, plan: &PerturbationPlan, fraction: f64) -> Result<ConfidenceBags> {
    inject_with(bags, plan, fraction, &mut substream(plan.seed, 0))
}

/// Averaged reports for a baseline and each injection fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSeries {
    pub plan: PerturbationPlan,
    /// `(fraction, report)` pairs; the first entry is the baseline at fraction 0.
    pub points: Vec<(f64, MetricReport)>,
}

impl PerturbationSeries {
    pub fn baseline(&self) -> &MetricReport {
        &self.points[0].1
    }

    /// Points after the baseline.
    pub fn injected(&self) -> &[(f64, MetricReport)] {
        &self.points[1..]
    }
}

/// Evaluates the baseline and every fraction of `plan`, in averaged mode.
pub fn run_series(bags: &ConfidenceBags, plan: &PerturbationPlan, config: &EvalConfig) -> Result<PerturbationSeries> {
    plan.validate()?;
    if bags.is_empty() {
        return Err(Error::EmptyBaseline);
    }
    let config = EvalConfig {
        reporting_mode: ReportingMode::Averaged,
        ..*config
    };
    let mut points = vec![(0.0, evaluate_bags(bags, &config)?)];
    for (i, fraction) in plan.fractions().into_iter().enumerate() {
        let mut rng = substream(plan.seed, i as u64 + 1);
        let perturbed = inject_with(bags, plan, fraction, &mut rng)?;
        points.push((fraction, evaluate_bags(&perturbed, &config)?));
    }
    Ok(PerturbationSeries { plan: *plan, points })
}

/// Seeded synthetic baseline: `tp` confidences from `Uniform[0.5, 1]`, `fp`
/// from `Uniform[0, 0.6]`, plus `fn_count` false negatives.
pub fn synthetic_baseline(tp: usize, fp: usize, fn_count: u64, seed: u64) -> ConfidenceBags {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tp = (0..tp).map(|_| rng.gen_range(0.5..=1.0)).collect();
    let fp = (0..fp).map(|_| rng.gen_range(0.0..=0.6)).collect();
    ConfidenceBags::new(tp, fp, fn_count).expect("uniform draws lie in [0, 1]")
}
