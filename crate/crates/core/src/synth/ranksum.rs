use statrs::function::erf::erfc;

use crate::error::{CsaError, Result};

/// Two-sample Wilcoxon rank-sum statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSum {
    /// Mann–Whitney U of the first sample.
    pub u: f64,
    pub z: f64,
    /// Two-sided normal-approximation p-value, in [0, 1].
    pub p_value: f64,
}

/// Rank-sum test with average ranks for ties and the tie-corrected variance.
/// No continuity correction is applied.
pub fn rank_sum(a: &[f64], b: &[f64]) -> Result<RankSum> {
    let (n1, n2) = (a.len(), b.len());
    if n1 < 2 || n2 < 2 {
        return Err(CsaError::InsufficientData { needed: 2, found: n1.min(n2) });
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(CsaError::NonFinite("rank-sum sample"));
    }
    let mut pooled: Vec<(f64, bool)> = a.iter().map(|&v| (v, true)).chain(b.iter().map(|&v| (v, false))).collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));

    let n = pooled.len();
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        // Ranks i+1 ..= j share their average.
        let avg = (i + 1 + j) as f64 / 2.0;
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        rank_sum_a += avg * pooled[i..j].iter().filter(|p| p.1).count() as f64;
        i = j;
    }

    let (n1f, n2f, nf) = (n1 as f64, n2 as f64, n as f64);
    let u = rank_sum_a - n1f * (n1f + 1.0) / 2.0;
    let mean = n1f * n2f / 2.0;
    let var = n1f * n2f / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    if var <= 0.0 {
        return Ok(RankSum { u, z: 0.0, p_value: 1.0 });
    }
    let z = (u - mean) / var.sqrt();
    let p_value = erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0);
    Ok(RankSum { u, z, p_value })
}

pub fn rank_sum_pvalue(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(rank_sum(a, b)?.p_value)
}
