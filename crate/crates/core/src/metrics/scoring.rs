//! Proper-scoring-rule metrics over whole bags.
//!
//! Both scores treat each false negative as a miss reported with confidence
//! zero, so every FN adds exactly 1 to either score.

use super::sum::compensated_sum;
use crate::model::ConfidenceBags;

/// Quadratic global calibration score: `Σ_TP (p-1)² + Σ_FP p² + |FN|`.
pub fn qgc(bags: &ConfidenceBags) -> f64 {
    let tp = bags.tp().iter().map(|&p| (p - 1.0) * (p - 1.0));
    let fp = bags.fp().iter().map(|&p| p * p);
    compensated_sum(tp.chain(fp).chain(std::iter::once(bags.fn_count() as f64)))
}

/// Norm of the two-outcome probability vector `(p, 1-p)`.
pub fn spherical_norm(p: f64) -> f64 {
    (p * p + (1.0 - p) * (1.0 - p)).sqrt()
}

/// Spherical global calibration score:
/// `Σ_TP (1 - p/r(p)) + Σ_FP (1 - (1-p)/r(p)) + |FN|`, with `r(p) = √(p² + (1-p)²)`.
pub fn sgc(bags: &ConfidenceBags) -> f64 {
    let tp = bags.tp().iter().map(|&p| 1.0 - p / spherical_norm(p));
    let fp = bags.fp().iter().map(|&p| 1.0 - (1.0 - p) / spherical_norm(p));
    compensated_sum(tp.chain(fp).chain(std::iter::once(bags.fn_count() as f64)))
}
