//! Straight-line reference implementations used as test oracles.
//!
//! Written independently of the library: plain loops, plain summation, no
//! shared helpers. Only the public domain types are borrowed.

#![allow(dead_code)]

use odcal_core::{BoundingBox, ConfidenceBags, Detection, GroundTruth};

/// `Σ_TP (p-1)² + Σ_FP p² + |FN|`.
pub fn qgc(bags: &ConfidenceBags) -> f64 {
    let mut total = 0.0;
    for &p in bags.tp() {
        total += (p - 1.0) * (p - 1.0);
    }
    for &p in bags.fp() {
        total += p * p;
    }
    total + bags.fn_count() as f64
}

/// `N - Σ_TP p/r(p) - Σ_FP (1-p)/r(p)`.
pub fn sgc(bags: &ConfidenceBags) -> f64 {
    let r = |p: f64| (p.powi(2) + (1.0 - p).powi(2)).sqrt();
    let n = (bags.tp().len() + bags.fp().len()) as f64 + bags.fn_count() as f64;
    let mut reward = 0.0;
    for &p in bags.tp() {
        reward += p / r(p);
    }
    for &p in bags.fp() {
        reward += (1.0 - p) / r(p);
    }
    n - reward
}

fn in_bin(p: f64, i: usize, m: usize) -> bool {
    let lower = (i - 1) as f64 / m as f64;
    let upper = i as f64 / m as f64;
    (lower < p && p <= upper) || (i == 1 && p == 0.0)
}

/// Scans every bin against every entry and returns `(|B^TP|, |B^FP|, Σp)` per bin.
fn scan_bins(bags: &ConfidenceBags, m: usize, filter: f64) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for i in 1..=m {
        let (mut ntp, mut nfp, mut sum) = (0usize, 0usize, 0.0);
        for &p in bags.tp() {
            if p >= filter && in_bin(p, i, m) {
                ntp += 1;
                sum += p;
            }
        }
        for &p in bags.fp() {
            if p >= filter && in_bin(p, i, m) {
                nfp += 1;
                sum += p;
            }
        }
        out.push((ntp, nfp, sum));
    }
    out
}

/// Absolute D-ECE.
pub fn d_ece(bags: &ConfidenceBags, m: usize, filter: f64) -> f64 {
    let mut total = 0.0;
    for (ntp, nfp, sum) in scan_bins(bags, m, filter) {
        let size = (ntp + nfp) as f64;
        if size == 0.0 {
            continue;
        }
        total += size * (ntp as f64 / size - sum / size).abs();
    }
    total
}

/// Absolute EGCE.
pub fn egce(bags: &ConfidenceBags, m: usize, filter: f64) -> f64 {
    let bins = scan_bins(bags, m, filter);
    let mut total = 0.0;
    for (idx, (ntp, nfp, sum)) in bins.into_iter().enumerate() {
        let size = (ntp + nfp) as f64;
        if size == 0.0 {
            continue;
        }
        let target = if idx + 1 == m {
            ntp as f64 / (size + bags.fn_count() as f64)
        } else {
            ntp as f64 / size
        };
        total += size * (target - sum / size).abs();
    }
    total
}

fn corner_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let (ax2, ay2) = (a.x() + a.width(), a.y() + a.height());
    let (bx2, by2) = (b.x() + b.width(), b.y() + b.height());
    let w = ax2.min(bx2) - a.x().max(b.x());
    let h = ay2.min(by2) - a.y().max(b.y());
    if w <= 0.0 || h <= 0.0 {
        return 0.0;
    }
    let inter = w * h;
    inter / (a.width() * a.height() + b.width() * b.height() - inter)
}

/// Literal greedy matcher: repeatedly take the highest-confidence unvisited
/// detection (earliest on ties) and give it the best unmatched same-image,
/// same-class ground truth (earliest on ties) with IoU >= threshold.
pub fn greedy_bags(dets: &[Detection], gts: &[GroundTruth], threshold: f64) -> ConfidenceBags {
    let mut visited = vec![false; dets.len()];
    let mut gt_used = vec![false; gts.len()];
    let mut tp = Vec::new();
    let mut fp = Vec::new();
    for _ in 0..dets.len() {
        let mut pick: Option<usize> = None;
        for (i, d) in dets.iter().enumerate() {
            if visited[i] {
                continue;
            }
            match pick {
                None => pick = Some(i),
                Some(j) if d.confidence() > dets[j].confidence() => pick = Some(i),
                _ => {}
            }
        }
        let i = pick.unwrap();
        visited[i] = true;
        let d = &dets[i];
        let mut best: Option<(usize, f64)> = None;
        for (j, g) in gts.iter().enumerate() {
            if gt_used[j] || g.image_id != d.image_id || g.class_id != d.class_id {
                continue;
            }
            let v = corner_iou(&d.bbox, &g.bbox);
            if v >= threshold && best.is_none_or(|(_, bv)| v > bv) {
                best = Some((j, v));
            }
        }
        match best {
            Some((j, _)) => {
                gt_used[j] = true;
                tp.push(d.confidence());
            }
            None => fp.push(d.confidence()),
        }
    }
    let fn_count = gt_used.iter().filter(|u| !**u).count() as u64;
    ConfidenceBags::new(tp, fp, fn_count).unwrap()
}

/// Relative agreement `|a - b| <= tol · max(|a|, |b|)`.
pub fn close_rel(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}
