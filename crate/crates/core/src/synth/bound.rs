use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LinearPipeline;
use crate::cca::Side;
use crate::error::{CsaError, Result};
use crate::linalg::{norm2, singular_values, svd};

/// Absolute slack tolerated before a pair counts as a violation.
pub const SLACK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ModalityBound {
    /// Smallest of the `s` singular values of the truncated composed map.
    pub sigma_min_nominal: f64,
    /// Smallest gain of the truncated composed map on the span of the mixing
    /// map, i.e. on noise-free observations. Zero when `s` is below the latent dim.
    pub sigma_min_effective: f64,
    /// `min ‖P(z_a − z_b)‖ − σ_eff ‖x_a − x_b‖` over the sampled pairs.
    pub min_slack: f64,
    /// Pairs where the nominal constant would overstate the gain.
    pub nominal_violations: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub s: usize,
    pub n_pairs: usize,
    pub first: ModalityBound,
    pub second: ModalityBound,
}

impl BoundReport {
    pub fn pass(&self) -> bool {
        self.first.pass && self.second.pass
    }
}

fn check_modality(pipeline: &LinearPipeline, side: Side, s: usize, pairs: &[(usize, usize)]) -> Result<ModalityBound> {
    let (g, modality) = match side {
        Side::First => (&pipeline.dataset.g1, 1),
        Side::Second => (&pipeline.dataset.g2, 2),
    };
    let composed = pipeline.composed(side, s);
    let nominal = singular_values(&composed)?;
    let sigma_min_nominal = nominal[nominal.len() - 1];

    let q = g.cols();
    let sigma_min_effective = if s >= q {
        let basis = svd(g)?.u;
        let gains = singular_values(&composed.mul_unchecked(&basis))?;
        gains[gains.len() - 1]
    } else {
        0.0
    };

    let clean = pipeline.dataset.signal(modality);
    let mut min_slack = f64::INFINITY;
    let mut nominal_violations = 0;
    for &(a, b) in pairs {
        let dx: Vec<f64> = clean.column(a).iter().zip(clean.column(b)).map(|(x, y)| x - y).collect();
        let lhs = norm2(&dx);
        let rhs = norm2(&composed.mul_vec(&dx));
        min_slack = min_slack.min(rhs - sigma_min_effective * lhs);
        if sigma_min_nominal * lhs > rhs + SLACK_TOLERANCE {
            nominal_violations += 1;
        }
    }
    Ok(ModalityBound {
        sigma_min_nominal,
        sigma_min_effective,
        min_slack,
        nominal_violations,
        pass: min_slack >= -SLACK_TOLERANCE,
    })
}

/// Checks `σ·‖x_a − x_b‖ ≤ ‖P·E·(x_a − x_b)‖` on noise-free observation pairs
/// for both modalities, where `P` is the first `s` rows of the alignment map
/// and `E` the encoder.
pub fn distance_bound_check(pipeline: &LinearPipeline, s: usize, n_pairs: usize, seed: u64) -> Result<BoundReport> {
    let r = pipeline.model.r();
    if s == 0 || s > r {
        return Err(CsaError::InvalidParameter(format!("s = {s} outside 1..={r}")));
    }
    if n_pairs == 0 {
        return Err(CsaError::InvalidParameter("n_pairs must be positive".into()));
    }
    let n = pipeline.dataset.config.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(usize, usize)> = (0..n_pairs).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect();
    Ok(BoundReport {
        s,
        n_pairs,
        first: check_modality(pipeline, Side::First, s, &pairs)?,
        second: check_modality(pipeline, Side::Second, s, &pairs)?,
    })
}

#[cfg(test)]
fn pair_slack(composed: &crate::linalg::Matrix, sigma: f64, dx: &[f64]) -> f64 {
    norm2(&composed.mul_vec(dx)) - sigma * norm2(dx)
}
