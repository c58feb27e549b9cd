//! Confidence binning and the bin-wise calibration errors D-ECE and EGCE.
//!
//! Bin `i` (1-based) of `M` holds the confidences in `((i-1)/M, i/M]`. A value
//! sitting exactly on an edge `k/M` lands in bin `k`; zero lands in bin 1.
//! Only TP and FP entries with confidence `>= conf_filter` are binned. False
//! negatives are never binned: EGCE folds their count into the last bin's
//! precision term instead.

use super::sum::{compensated_sum, CompensatedSum};
use crate::model::{ConfidenceBags, ReportingMode};

/// One confidence bin, split by outcome.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bin {
    pub tp: Vec<f64>,
    pub fp: Vec<f64>,
}

impl Bin {
    pub fn len(&self) -> usize {
        self.tp.len() + self.fp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mean confidence, undefined for an empty bin.
    pub fn confidence(&self) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        Some(compensated_sum(self.tp.iter().chain(&self.fp).copied()) / self.len() as f64)
    }

    /// `|TP| / (|TP| + |FP|)`, undefined for an empty bin.
    pub fn precision(&self) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        Some(self.tp.len() as f64 / self.len() as f64)
    }
}

/// `M` bins partitioning `(0, 1]` (with zero folded into the first bin).
#[derive(Debug, Clone, PartialEq)]
pub struct BinSet {
    bins: Vec<Bin>,
}

impl BinSet {
    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn bins(&self) -> &[Bin] {
        &self.bins
    }

    /// Bin by 1-based index.
    pub fn bin(&self, index: usize) -> &Bin {
        &self.bins[index - 1]
    }

    /// `((index-1)/M, index/M)` for a 1-based index.
    pub fn bounds(&self, index: usize) -> (f64, f64) {
        bin_bounds(index, self.bins.len())
    }

    /// Number of binned TP entries.
    pub fn tp_total(&self) -> usize {
        self.bins.iter().map(|b| b.tp.len()).sum()
    }

    /// Number of binned FP entries.
    pub fn fp_total(&self) -> usize {
        self.bins.iter().map(|b| b.fp.len()).sum()
    }

    /// Number of binned entries, i.e. the filtered `|TP ∪ FP|`.
    pub fn total(&self) -> usize {
        self.bins.iter().map(Bin::len).sum()
    }

    fn gap_terms(&self) -> impl Iterator<Item = (usize, &Bin)> {
        self.bins.iter().enumerate().filter(|(_, b)| !b.is_empty())
    }

    /// Absolute D-ECE: `Σ_i |B_i|·|prec(B_i) - conf(B_i)|`.
    pub fn dece_sum(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for (_, bin) in self.gap_terms() {
            acc.add(weighted_gap(bin, bin.precision().unwrap_or(0.0)));
        }
        acc.value()
    }

    /// Absolute EGCE. The last bin compares its confidence against
    /// `|B_M^TP| / (|B_M^TP| + |B_M^FP| + fn_count)` instead of plain precision.
    pub fn egce_sum(&self, fn_count: u64) -> f64 {
        let last = self.bins.len() - 1;
        let mut acc = CompensatedSum::new();
        for (i, bin) in self.gap_terms() {
            let target = if i == last {
                bin.tp.len() as f64 / (bin.len() as f64 + fn_count as f64)
            } else {
                bin.precision().unwrap_or(0.0)
            };
            acc.add(weighted_gap(bin, target));
        }
        acc.value()
    }

    /// True when false negatives exist but the last bin is empty, so EGCE
    /// cannot account for them (its last term carries weight `|B_M| = 0`).
    pub fn egce_ignores_false_negatives(&self, fn_count: u64) -> bool {
        fn_count > 0 && self.bins.last().is_none_or(Bin::is_empty)
    }
}

fn weighted_gap(bin: &Bin, target: f64) -> f64 {
    let conf = bin.confidence().unwrap_or(0.0);
    bin.len() as f64 * (target - conf).abs()
}

/// `((index-1)/M, index/M)` for a 1-based bin index.
pub fn bin_bounds(index: usize, bin_count: usize) -> (f64, f64) {
    let m = bin_count as f64;
    ((index - 1) as f64 / m, index as f64 / m)
}

/// 1-based bin index of confidence `p` among `bin_count` bins.
pub fn bin_index(p: f64, bin_count: usize) -> usize {
    let m = bin_count as f64;
    let mut k = ((p * m).ceil() as usize).clamp(1, bin_count);
    // Settle against the canonical edges k/M so products that round across
    // an edge still honour the half-open interval.
    while k > 1 && p <= (k - 1) as f64 / m {
        k -= 1;
    }
    while k < bin_count && p > k as f64 / m {
        k += 1;
    }
    k
}

/// Bins the TP and FP confidences at or above `conf_filter` into `bin_count` bins.
///
/// # Panics
///
/// If `bin_count` is zero.
pub fn build_bins(bags: &ConfidenceBags, bin_count: usize, conf_filter: f64) -> BinSet {
    assert!(bin_count >= 1, "bin count must be at least 1");
    let mut bins = vec![Bin::default(); bin_count];
    for &p in bags.tp().iter().filter(|&&p| p >= conf_filter) {
        bins[bin_index(p, bin_count) - 1].tp.push(p);
    }
    for &p in bags.fp().iter().filter(|&&p| p >= conf_filter) {
        bins[bin_index(p, bin_count) - 1].fp.push(p);
    }
    BinSet { bins }
}

fn per_item(total: f64, count: usize) -> f64 {
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}

/// Detection expected calibration error. Blind to false negatives.
///
/// Averaged mode divides by the number of binned entries.
pub fn d_ece(bags: &ConfidenceBags, bin_count: usize, conf_filter: f64, mode: ReportingMode) -> f64 {
    let set = build_bins(bags, bin_count, conf_filter);
    let total = set.dece_sum();
    match mode {
        ReportingMode::Absolute => total,
        ReportingMode::Averaged => per_item(total, set.total()),
    }
}

/// Expected global calibration error.
///
/// Averaged mode divides by the number of binned entries, as D-ECE does.
pub fn egce(bags: &ConfidenceBags, bin_count: usize, conf_filter: f64, mode: ReportingMode) -> f64 {
    let set = build_bins(bags, bin_count, conf_filter);
    let total = set.egce_sum(bags.fn_count());
    match mode {
        ReportingMode::Absolute => total,
        ReportingMode::Averaged => per_item(total, set.total()),
    }
}
