//! Average precision with all-points interpolation at a single IoU threshold.

use crate::matching::{ClassRecords, MatchOutcome};

/// Area under the monotone precision envelope of one class's ranked detections.
///
/// `None` when the class has no ground truth.
pub fn average_precision(records: &ClassRecords) -> Option<f64> {
    if records.gt_count == 0 {
        return None;
    }
    let gt = records.gt_count as f64;
    let mut tp = 0usize;
    let mut points = Vec::with_capacity(records.detections.len());
    for (rank, &(_, hit)) in records.detections.iter().enumerate() {
        if hit {
            tp += 1;
        }
        let recall = tp as f64 / gt;
        let precision = tp as f64 / (rank + 1) as f64;
        points.push((recall, precision));
    }
    // Envelope: precision at rank i becomes the best precision at any rank >= i.
    for i in (0..points.len().saturating_sub(1)).rev() {
        points[i].1 = points[i].1.max(points[i + 1].1);
    }
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for (recall, precision) in points {
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Some(area.clamp(0.0, 1.0))
}

/// Unweighted mean AP over classes that have ground truth; `None` if there are none.
pub fn mean_average_precision(outcome: &MatchOutcome) -> Option<f64> {
    let aps: Vec<f64> = outcome.per_class.values().filter_map(average_precision).collect();
    if aps.is_empty() {
        None
    } else {
        Some(aps.iter().sum::<f64>() / aps.len() as f64)
    }
}
