//! IoU and greedy one-to-one assignment of detections to ground truths.
//!
//! Within each (image, class) group detections are visited in descending
//! confidence, ties kept in input order. Each one takes the unmatched ground
//! truth with the highest IoU, provided `IoU >= threshold`; equal IoUs resolve
//! to the earliest ground truth in input order. Detections never match a
//! ground truth of another class.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{BoundingBox, ClassId, ConfidenceBags, Detection, GroundTruth, ImageId};

/// Intersection over union of two boxes, in `[0, 1]`.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    // (y + h) - y need not round back to h.
    if a == b {
        return 1.0;
    }
    let iw = (a.right().min(b.right()) - a.x().max(b.x())).max(0.0);
    let ih = (a.bottom().min(b.bottom()) - a.y().max(b.y())).max(0.0);
    let inter = iw * ih;
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Ranked detections of one class, used for average precision.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassRecords {
    /// `(confidence, is_tp)`, sorted by descending confidence (stable).
    pub detections: Vec<(f64, bool)>,
    pub gt_count: usize,
}

/// Result of matching an evaluation set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchOutcome {
    pub bags: ConfidenceBags,
    pub per_class: BTreeMap<ClassId, ClassRecords>,
}

impl MatchOutcome {
    /// Builds an outcome that carries bags only (no per-class ranking).
    pub fn from_bags(bags: ConfidenceBags) -> Self {
        Self {
            bags,
            per_class: BTreeMap::new(),
        }
    }
}

type GroupKey = (ImageId, ClassId);

/// Partitions detections and ground truths into TP/FP/FN bags at IoU threshold `iou_threshold`.
pub fn match_detections(
    detections: &[Detection],
    ground_truths: &[GroundTruth],
    iou_threshold: f64,
) -> Result<MatchOutcome> {
    if !(0.0..=1.0).contains(&iou_threshold) {
        return Err(Error::InvalidIouThreshold(iou_threshold));
    }

    let mut groups: BTreeMap<GroupKey, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, d) in detections.iter().enumerate() {
        groups.entry((d.image_id, d.class_id)).or_default().0.push(i);
    }
    for (j, g) in ground_truths.iter().enumerate() {
        groups.entry((g.image_id, g.class_id)).or_default().1.push(j);
    }

    // is_tp per detection index, filled group by group.
    let mut is_tp = vec![false; detections.len()];
    let mut fn_count = 0u64;

    for (det_idx, gt_idx) in groups.values_mut() {
        det_idx.sort_by(|&a, &b| detections[b].confidence().total_cmp(&detections[a].confidence()));
        let mut taken = vec![false; gt_idx.len()];
        for &di in det_idx.iter() {
            let dbox = &detections[di].bbox;
            let mut best: Option<(usize, f64)> = None;
            for (slot, &gj) in gt_idx.iter().enumerate() {
                if taken[slot] {
                    continue;
                }
                let overlap = iou(dbox, &ground_truths[gj].bbox);
                if overlap < iou_threshold {
                    continue;
                }
                if best.is_none_or(|(_, b)| overlap > b) {
                    best = Some((slot, overlap));
                }
            }
            if let Some((slot, _)) = best {
                taken[slot] = true;
                is_tp[di] = true;
            }
        }
        fn_count += taken.iter().filter(|t| !**t).count() as u64;
    }

    let mut tp = Vec::new();
    let mut fp = Vec::new();
    let mut per_class: BTreeMap<ClassId, ClassRecords> = BTreeMap::new();
    for (d, &hit) in detections.iter().zip(&is_tp) {
        if hit {
            tp.push(d.confidence());
        } else {
            fp.push(d.confidence());
        }
        per_class
            .entry(d.class_id)
            .or_default()
            .detections
            .push((d.confidence(), hit));
    }
    for g in ground_truths {
        per_class.entry(g.class_id).or_default().gt_count += 1;
    }
    for records in per_class.values_mut() {
        records.detections.sort_by(|a, b| b.0.total_cmp(&a.0));
    }

    Ok(MatchOutcome {
        bags: ConfidenceBags::new(tp, fp, fn_count)?,
        per_class,
    })
}
