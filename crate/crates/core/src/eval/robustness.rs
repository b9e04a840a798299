use super::shuffle_indices;
use crate::cca::{fit_matrices, CsaModel, SRule};
use crate::error::Result;
use crate::features::FeatureMatrix;
use crate::synth::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessPoint {
    pub fraction: f64,
    pub mean: f64,
    /// Standard error of the mean across repetitions; 0 for a single run.
    pub std_err: f64,
    pub runs: Vec<f64>,
}

/// Column `j` of `train1` is paired with column `j` of `train2`. Refits the
/// alignment after shuffling each fraction of that pairing and evaluates
/// `metric` on the result. Every (fraction, repetition) gets its own derived
/// seed; fraction 0 is deterministic and runs once.
#[allow(clippy::too_many_arguments)]
pub fn robustness_sweep(
    train1: &FeatureMatrix,
    train2: &FeatureMatrix,
    eps: f64,
    rule: SRule,
    fractions: &[f64],
    repetitions: usize,
    seed: u64,
    metric: impl Fn(&CsaModel) -> Result<f64>,
) -> Result<Vec<RobustnessPoint>> {
    let reps = repetitions.max(1);
    let mut out = Vec::with_capacity(fractions.len());
    for (fi, &fraction) in fractions.iter().enumerate() {
        let runs_here = if fraction == 0.0 { 1 } else { reps };
        let mut runs = Vec::with_capacity(runs_here);
        for rep in 0..runs_here {
            let stream = (fi as u64) << 32 | rep as u64;
            let idx = shuffle_indices(train2.n_items(), fraction, derive_seed(seed, stream))?;
            let model = fit_matrices(train1.values(), &train2.values().select_columns(&idx), eps, rule)?;
            runs.push(metric(&model)?);
        }
        let n = runs.len() as f64;
        let mean = runs.iter().sum::<f64>() / n;
        let std_err = if runs.len() > 1 {
            let var = runs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        out.push(RobustnessPoint { fraction, mean, std_err, runs });
    }
    Ok(out)
}
