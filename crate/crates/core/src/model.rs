//! Domain types shared by matching, metrics, perturbation and io.
//!
//! Global calibration asks that a detector's confidence for a (box, class)
//! pair equals the probability that a matching ground truth exists, over *all*
//! locations including the ones it never reports. Everything downstream works
//! on three bags of confidences derived from that idea: true positives, false
//! positives, and false negatives (the latter with confidence zero, so only
//! their count is kept).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of an image within an evaluation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ImageId(pub u64);

/// Object category identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub u32);

impl fmt::Display for ImageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Axis-aligned box in pixel coordinates, anchored at the top-left corner.
///
/// Coordinates are real-valued because annotation files carry fractional
/// pixel positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

impl BoundingBox {
    /// Builds a box from `(x, y, width, height)`. Zero or negative extents are rejected.
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        let finite = x.is_finite() && y.is_finite() && w.is_finite() && h.is_finite();
        if !finite || w <= 0.0 || h <= 0.0 {
            return Err(Error::InvalidBox { x, y, w, h });
        }
        Ok(Self { x, y, w, h })
    }

    /// Builds a box from corner coordinates `(x1, y1, x2, y2)`.
    pub fn from_corners(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        Self::new(x1, y1, x2 - x1, y2 - y1)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn width(&self) -> f64 {
        self.w
    }

    pub fn height(&self) -> f64 {
        self.h
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

/// A box emitted by a detector, with its class and confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub image_id: ImageId,
    pub class_id: ClassId,
    pub bbox: BoundingBox,
    confidence: f64,
}

impl Detection {
    pub fn new(image_id: ImageId, class_id: ClassId, bbox: BoundingBox, confidence: f64) -> Result<Self> {
        check_confidence(confidence)?;
        Ok(Self {
            image_id,
            class_id,
            bbox,
            confidence,
        })
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }
}

/// An annotated object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub image_id: ImageId,
    pub class_id: ClassId,
    pub bbox: BoundingBox,
}

impl GroundTruth {
    pub fn new(image_id: ImageId, class_id: ClassId, bbox: BoundingBox) -> Self {
        Self {
            image_id,
            class_id,
            bbox,
        }
    }
}

fn check_confidence(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidConfidence(p))
    }
}

/// The TP / FP / FN confidence bags every calibration metric consumes.
///
/// Both `tp` and `fp` are multisets: element order carries no meaning and
/// every metric is invariant to it. False negatives all carry confidence 0,
/// so only their count is stored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBags {
    tp: Vec<f64>,
    fp: Vec<f64>,
    fn_count: u64,
}

impl ConfidenceBags {
    pub fn new(tp: Vec<f64>, fp: Vec<f64>, fn_count: u64) -> Result<Self> {
        tp.iter().chain(fp.iter()).try_for_each(|&p| check_confidence(p))?;
        Ok(Self { tp, fp, fn_count })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn tp(&self) -> &[f64] {
        &self.tp
    }

    pub fn fp(&self) -> &[f64] {
        &self.fp
    }

    pub fn fn_count(&self) -> u64 {
        self.fn_count
    }

    /// `N = |TP| + |FP| + |FN|`.
    pub fn population(&self) -> u64 {
        self.tp.len() as u64 + self.fp.len() as u64 + self.fn_count
    }

    pub fn is_empty(&self) -> bool {
        self.population() == 0
    }

    pub fn push_tp(&mut self, p: f64) -> Result<()> {
        check_confidence(p)?;
        self.tp.push(p);
        Ok(())
    }

    pub fn push_fp(&mut self, p: f64) -> Result<()> {
        check_confidence(p)?;
        self.fp.push(p);
        Ok(())
    }

    pub fn add_false_negatives(&mut self, count: u64) {
        self.fn_count += count;
    }

    /// Multiset union of two bag triples.
    pub fn merge(mut self, other: &ConfidenceBags) -> ConfidenceBags {
        self.tp.extend_from_slice(&other.tp);
        self.fp.extend_from_slice(&other.fp);
        self.fn_count += other.fn_count;
        self
    }

    /// Returns the bags with `tp` and `fp` in ascending order, a canonical
    /// representative of the multiset triple.
    pub fn canonical(&self) -> ConfidenceBags {
        let mut out = self.clone();
        out.tp.sort_by(f64::total_cmp);
        out.fp.sort_by(f64::total_cmp);
        out
    }

    /// Multiset equality (ignores element order).
    pub fn same_multiset(&self, other: &ConfidenceBags) -> bool {
        self.canonical() == other.canonical()
    }
}

/// Multiset union of `a` and `b`.
pub fn merge_bags(a: &ConfidenceBags, b: &ConfidenceBags) -> ConfidenceBags {
    a.clone().merge(b)
}

/// Whether metrics are reported as raw sums or divided by a population size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportingMode {
    #[default]
    Absolute,
    Averaged,
}

impl fmt::Display for ReportingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportingMode::Absolute => f.write_str("absolute"),
            ReportingMode::Averaged => f.write_str("averaged"),
        }
    }
}

impl std::str::FromStr for ReportingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" => Ok(ReportingMode::Absolute),
            "averaged" => Ok(ReportingMode::Averaged),
            other => Err(Error::InvalidConfig(format!("unknown reporting mode `{other}`"))),
        }
    }
}

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;
pub const DEFAULT_BIN_COUNT: usize = 15;
pub const DEFAULT_CONF_FILTER: f64 = 0.1;

/// Evaluation parameters. Defaults: IoU 0.5, 15 bins, bin-wise confidence filter 0.1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub iou_threshold: f64,
    pub bin_count: usize,
    /// Minimum confidence for TP/FP entries to enter the bin-wise metrics.
    pub conf_filter: f64,
    pub reporting_mode: ReportingMode,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_threshold: DEFAULT_IOU_THRESHOLD,
            bin_count: DEFAULT_BIN_COUNT,
            conf_filter: DEFAULT_CONF_FILTER,
            reporting_mode: ReportingMode::Absolute,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.iou_threshold) {
            return Err(Error::InvalidIouThreshold(self.iou_threshold));
        }
        if self.bin_count == 0 {
            return Err(Error::InvalidConfig("bin count must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.conf_filter) {
            return Err(Error::InvalidConfig(format!(
                "confidence filter {} is outside [0, 1)",
                self.conf_filter
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_rejects_degenerate_extents() {
        assert!(BoundingBox::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(BoundingBox::new(0.0, 0.0, 1.0, -2.0).is_err());
        assert!(BoundingBox::new(0.0, 0.0, f64::NAN, 1.0).is_err());
        let b = BoundingBox::new(1.5, 2.0, 3.0, 4.0).unwrap();
        assert_eq!(b.area(), 12.0);
        assert_eq!(b.right(), 4.5);
    }

    #[test]
    fn detection_rejects_out_of_range_confidence() {
        let b = BoundingBox::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(Detection::new(ImageId(1), ClassId(1), b, 1.01).is_err());
        assert!(Detection::new(ImageId(1), ClassId(1), b, -0.01).is_err());
        assert!(Detection::new(ImageId(1), ClassId(1), b, f64::NAN).is_err());
        assert!(Detection::new(ImageId(1), ClassId(1), b, 0.0).is_ok());
        assert!(Detection::new(ImageId(1), ClassId(1), b, 1.0).is_ok());
    }

    #[test]
    fn merge_of_empties_is_empty() {
        let m = merge_bags(&ConfidenceBags::empty(), &ConfidenceBags::empty());
        assert!(m.is_empty());
    }

    #[test]
    fn merge_is_disjoint_union() {
        let a = ConfidenceBags::new(vec![0.9], vec![], 1).unwrap();
        let b = ConfidenceBags::new(vec![], vec![0.2], 2).unwrap();
        let m = merge_bags(&a, &b);
        assert_eq!(m, ConfidenceBags::new(vec![0.9], vec![0.2], 3).unwrap());
        assert_eq!(m.population(), 5);
    }

    #[test]
    fn config_validation() {
        assert!(EvalConfig::default().validate().is_ok());
        let bad_iou = EvalConfig { iou_threshold: 1.5, ..Default::default() };
        assert!(matches!(bad_iou.validate(), Err(Error::InvalidIouThreshold(_))));
        let no_bins = EvalConfig { bin_count: 0, ..Default::default() };
        assert!(no_bins.validate().is_err());
        let bad_filter = EvalConfig { conf_filter: 1.0, ..Default::default() };
        assert!(bad_filter.validate().is_err());
    }

    #[test]
    fn bags_reject_out_of_range() {
        assert!(ConfidenceBags::new(vec![1.2], vec![], 0).is_err());
        let mut b = ConfidenceBags::empty();
        assert!(b.push_fp(-0.5).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn bags() -> impl Strategy<Value = ConfidenceBags> {
            (
                prop::collection::vec(0.0f64..=1.0, 0..20),
                prop::collection::vec(0.0f64..=1.0, 0..20),
                0u64..50,
            )
                .prop_map(|(tp, fp, fn_count)| ConfidenceBags::new(tp, fp, fn_count).unwrap())
        }

        proptest! {
            #[test]
            fn merge_commutes(a in bags(), b in bags()) {
                prop_assert!(merge_bags(&a, &b).same_multiset(&merge_bags(&b, &a)));
            }

            #[test]
            fn merge_associates(a in bags(), b in bags(), c in bags()) {
                let left = merge_bags(&merge_bags(&a, &b), &c);
                let right = merge_bags(&a, &merge_bags(&b, &c));
                prop_assert!(left.same_multiset(&right));
            }

            #[test]
            fn empty_is_identity(a in bags()) {
                prop_assert_eq!(merge_bags(&a, &ConfidenceBags::empty()), a.clone());
                prop_assert_eq!(merge_bags(&ConfidenceBags::empty(), &a), a);
            }
        }
    }
}
