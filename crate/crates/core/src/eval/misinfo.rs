use crate::error::{CsaError, Result};

use super::roc::trapezoid_area;

/// A caption is flagged when both its image score and its caption-caption
/// score fall below their thresholds.
pub fn misinfo_decision(img_caption_score: f64, caption_caption_score: f64, t1: f64, t2: f64) -> bool {
    img_caption_score < t1 && caption_caption_score < t2
}

/// Upper envelope of the operating points reachable by the two-threshold rule.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoThresholdRoc {
    /// (false positive rate, true positive rate), from (0, 0) to (1, 1).
    pub points: Vec<(f64, f64)>,
    /// (t1, t2) attaining each point.
    pub thresholds: Vec<(f64, f64)>,
    pub auc: f64,
}

fn distinct_thresholds(values: &[f64]) -> Vec<f64> {
    let mut t: Vec<f64> = values.to_vec();
    t.sort_by(f64::total_cmp);
    t.dedup();
    t.push(f64::INFINITY);
    t
}

/// Sweeps `(t1, t2)` over every observed value (plus +∞) and keeps the
/// non-dominated (FPR, TPR) points. `positive[i]` marks a misinformative pair.
pub fn two_threshold_roc(img_caption: &[f64], caption_caption: &[f64], positive: &[bool]) -> Result<TwoThresholdRoc> {
    let n = positive.len();
    if img_caption.len() != n || caption_caption.len() != n {
        return Err(CsaError::shape("two-threshold inputs", n, format!("{} and {}", img_caption.len(), caption_caption.len())));
    }
    if img_caption.iter().chain(caption_caption).any(|v| !v.is_finite()) {
        return Err(CsaError::NonFinite("two-threshold scores"));
    }
    let pos = positive.iter().filter(|&&p| p).count();
    if pos == 0 || pos == n {
        return Err(CsaError::OneClass);
    }
    let neg = n - pos;

    let t1s = distinct_thresholds(img_caption);
    let t2s = distinct_thresholds(caption_caption);
    let mut by_first: Vec<usize> = (0..n).collect();
    by_first.sort_by(|&a, &b| img_caption[a].total_cmp(&img_caption[b]));

    // Items admitted by the current t1, kept sorted by the second score.
    let mut admitted: Vec<usize> = Vec::with_capacity(n);
    let mut next = 0;
    // (fp, tp, t1, t2) for every grid point.
    let mut grid: Vec<(usize, usize, f64, f64)> = Vec::with_capacity(t1s.len() * t2s.len());
    for &t1 in &t1s {
        while next < n && img_caption[by_first[next]] < t1 {
            let item = by_first[next];
            let at = admitted.partition_point(|&j| caption_caption[j] <= caption_caption[item]);
            admitted.insert(at, item);
            next += 1;
        }
        let (mut fp, mut tp, mut cursor) = (0, 0, 0);
        for &t2 in &t2s {
            while cursor < admitted.len() && caption_caption[admitted[cursor]] < t2 {
                if positive[admitted[cursor]] {
                    tp += 1;
                } else {
                    fp += 1;
                }
                cursor += 1;
            }
            grid.push((fp, tp, t1, t2));
        }
    }

    grid.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = vec![(t1s[0], t2s[0])];
    let mut best: Option<usize> = None;
    for &(fp, tp, t1, t2) in &grid {
        if best.is_none_or(|b| tp > b) {
            best = Some(tp);
            if fp == 0 && tp == 0 {
                continue;
            }
            points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
            thresholds.push((t1, t2));
        }
    }
    if points.last() != Some(&(1.0, 1.0)) {
        points.push((1.0, 1.0));
        thresholds.push((f64::INFINITY, f64::INFINITY));
    }
    let auc = trapezoid_area(&points);
    Ok(TwoThresholdRoc { points, thresholds, auc })
}
