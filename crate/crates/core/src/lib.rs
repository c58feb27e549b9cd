//! Uncertainty-calibration evaluation for object detectors.
//!
//! Detections are matched to ground truth at an IoU threshold, producing bags
//! of true-positive, false-positive and false-negative confidences. From
//! those bags the crate computes:
//!
//! - **QGC**, a quadratic (Brier-style) global calibration score,
//! - **SGC**, a spherical-score counterpart,
//! - **EGCE**, a bin-wise expected global calibration error that folds false
//!   negatives into the last confidence bin,
//! - **D-ECE**, the bin-wise detection calibration error over emitted boxes
//!   only (blind to false negatives),
//! - **mAP** at the same IoU threshold.
//!
//! The global metrics penalise missed objects; D-ECE does not. The
//! [`perturbation`] module injects synthetic entries into a baseline to show
//! how each metric reacts.
//!
//! ```
//! use odcal_core::{metrics, ConfidenceBags, EvalConfig};
//!
//! let bags = ConfidenceBags::new(vec![0.9, 1.0], vec![0.3], 1).unwrap();
//! let report = metrics::evaluate_bags(&bags, &EvalConfig::default()).unwrap();
//! assert!(report.absolute.qgc > 1.0);
//! ```

pub mod error;
pub mod io;
pub mod matching;
pub mod metrics;
pub mod model;
pub mod perturbation;

pub use error::{Error, Result};
pub use matching::{iou, match_detections, ClassRecords, MatchOutcome};
pub use metrics::{evaluate, evaluate_bags, Metric, MetricReport};
pub use model::{
    merge_bags, BoundingBox, ClassId, ConfidenceBags, Detection, EvalConfig, GroundTruth, ImageId, ReportingMode,
};
pub use perturbation::{inject, run_series, InjectionKind, PerturbationPlan, PerturbationSeries};
