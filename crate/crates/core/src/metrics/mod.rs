//! Calibration metrics and report assembly.
//!
//! QGC and SGC are computed on the full bags. D-ECE and EGCE only see TP/FP
//! entries at or above the configured confidence filter; EGCE additionally
//! reads the (unfiltered) false-negative count.

mod ap;
mod binning;
mod scoring;
mod sum;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use ap::{average_precision, mean_average_precision};
pub use binning::{bin_bounds, bin_index, build_bins, d_ece, egce, Bin, BinSet};
pub use scoring::{qgc, sgc, spherical_norm};
pub use sum::CompensatedSum;

use crate::error::Result;
use crate::matching::MatchOutcome;
use crate::model::{ConfidenceBags, EvalConfig, ReportingMode};

/// The metrics a report carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Qgc,
    Sgc,
    Egce,
    Dece,
    Map,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Map, Metric::Qgc, Metric::Sgc, Metric::Egce, Metric::Dece];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Qgc => "QGC",
            Metric::Sgc => "SGC",
            Metric::Egce => "EGCE",
            Metric::Dece => "D-ECE",
            Metric::Map => "mAP",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The four calibration metrics, in one reporting mode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationValues {
    pub qgc: f64,
    pub sgc: f64,
    pub egce: f64,
    pub dece: f64,
}

/// Population sizes behind a report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopulationCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_count: u64,
    /// `tp + fp + fn`.
    pub n: u64,
    /// TP entries that passed the confidence filter.
    pub binned_tp: u64,
    /// FP entries that passed the confidence filter.
    pub binned_fp: u64,
}

/// Metric values in both reporting modes, with counts and the config used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub config: EvalConfig,
    pub counts: PopulationCounts,
    pub absolute: CalibrationValues,
    pub averaged: CalibrationValues,
    /// `None` when no class has ground truth, or when the report was built from bags alone.
    pub map: Option<f64>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl MetricReport {
    /// Values in the config's reporting mode.
    pub fn selected(&self) -> &CalibrationValues {
        match self.config.reporting_mode {
            ReportingMode::Absolute => &self.absolute,
            ReportingMode::Averaged => &self.averaged,
        }
    }

    /// Value of `metric` in the config's reporting mode. mAP may be undefined.
    pub fn value(&self, metric: Metric) -> Option<f64> {
        let v = self.selected();
        match metric {
            Metric::Qgc => Some(v.qgc),
            Metric::Sgc => Some(v.sgc),
            Metric::Egce => Some(v.egce),
            Metric::Dece => Some(v.dece),
            Metric::Map => self.map,
        }
    }
}

fn per_item(total: f64, count: u64) -> f64 {
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}

/// Computes every calibration metric from bags; mAP is left undefined.
pub fn evaluate_bags(bags: &ConfidenceBags, config: &EvalConfig) -> Result<MetricReport> {
    config.validate()?;
    let set = build_bins(bags, config.bin_count, config.conf_filter);
    let counts = PopulationCounts {
        tp: bags.tp().len() as u64,
        fp: bags.fp().len() as u64,
        fn_count: bags.fn_count(),
        n: bags.population(),
        binned_tp: set.tp_total() as u64,
        binned_fp: set.fp_total() as u64,
    };
    let absolute = CalibrationValues {
        qgc: qgc(bags),
        sgc: sgc(bags),
        egce: set.egce_sum(bags.fn_count()),
        dece: set.dece_sum(),
    };
    let binned = set.total() as u64;
    let averaged = CalibrationValues {
        qgc: per_item(absolute.qgc, counts.n),
        sgc: per_item(absolute.sgc, counts.n),
        egce: per_item(absolute.egce, binned),
        dece: per_item(absolute.dece, binned),
    };

    let mut warnings = Vec::new();
    if set.egce_ignores_false_negatives(bags.fn_count()) {
        let msg = format!(
            "EGCE: {} false negatives not reflected because the last confidence bin is empty",
            bags.fn_count()
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }

    Ok(MetricReport {
        config: *config,
        counts,
        absolute,
        averaged,
        map: None,
        warnings,
    })
}

/// Computes the full report (calibration metrics and mAP) for a match outcome.
pub fn evaluate(outcome: &MatchOutcome, config: &EvalConfig) -> Result<MetricReport> {
    let mut report = evaluate_bags(&outcome.bags, config)?;
    report.map = mean_average_precision(outcome);
    Ok(report)
}
