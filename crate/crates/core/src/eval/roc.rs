use crate::error::{CsaError, Result};

/// Scores with binary ground truth (`true` = positive).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScores {
    pub scores: Vec<f64>,
    pub labels: Vec<bool>,
}

impl LabeledScores {
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(CsaError::shape("labeled scores", scores.len(), labels.len()));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(CsaError::NonFinite("labeled scores"));
        }
        let positives = labels.iter().filter(|&&l| l).count();
        if positives == 0 || positives == labels.len() {
            return Err(CsaError::OneClass);
        }
        Ok(LabeledScores { scores, labels })
    }

    fn counts(&self) -> (f64, f64) {
        let p = self.labels.iter().filter(|&&l| l).count();
        (p as f64, (self.labels.len() - p) as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// (false positive rate, true positive rate), from (0, 0) to (1, 1).
    pub points: Vec<(f64, f64)>,
    /// Threshold of each point; a score counts as positive when `score >= threshold`.
    pub thresholds: Vec<f64>,
    /// Trapezoidal area under `points`.
    pub auc: f64,
    /// P(positive > negative) + P(tie)/2.
    pub auc_mann_whitney: f64,
}

pub fn trapezoid_area(points: &[(f64, f64)]) -> f64 {
    points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum()
}

/// Positive and negative counts per distinct score, highest score first.
fn tie_groups(data: &LabeledScores) -> Vec<(f64, usize, usize)> {
    let mut order: Vec<usize> = (0..data.scores.len()).collect();
    order.sort_by(|&a, &b| data.scores[b].total_cmp(&data.scores[a]));
    let mut groups: Vec<(f64, usize, usize)> = Vec::new();
    for i in order {
        let s = data.scores[i];
        match groups.last_mut() {
            Some(g) if g.0 == s => {}
            _ => groups.push((s, 0, 0)),
        }
        let g = groups.last_mut().expect("group pushed above");
        if data.labels[i] {
            g.1 += 1;
        } else {
            g.2 += 1;
        }
    }
    groups
}

pub fn roc_curve(data: &LabeledScores) -> Result<RocCurve> {
    let data = LabeledScores::new(data.scores.clone(), data.labels.clone())?;
    let (pos, neg) = data.counts();
    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = vec![f64::INFINITY];
    // Twice the area in count units; exact for integer counts.
    let mut area2 = 0.0;
    let (mut tp, mut fp) = (0usize, 0usize);
    for (score, p, n) in tie_groups(&data) {
        area2 += n as f64 * (2 * tp + p) as f64;
        tp += p;
        fp += n;
        points.push((fp as f64 / neg, tp as f64 / pos));
        thresholds.push(score);
    }
    points.push((1.0, 1.0));
    thresholds.push(f64::NEG_INFINITY);
    let auc = area2 / (2.0 * pos * neg);
    let auc_mann_whitney = mann_whitney_auc(&data)?;
    debug_assert!((auc - trapezoid_area(&points)).abs() < 1e-12);
    Ok(RocCurve { points, thresholds, auc, auc_mann_whitney })
}

/// Area under the ROC curve through the rank statistic, O(n log n).
pub fn mann_whitney_auc(data: &LabeledScores) -> Result<f64> {
    let data = LabeledScores::new(data.scores.clone(), data.labels.clone())?;
    let (pos, neg) = data.counts();
    let groups = tie_groups(&data);
    // Walk from the lowest score so `below` counts negatives strictly under the group.
    let mut below = 0usize;
    let mut wins2 = 0.0;
    for &(_, p, n) in groups.iter().rev() {
        wins2 += (p * (2 * below + n)) as f64;
        below += n;
    }
    Ok(wins2 / (2.0 * pos * neg))
}
