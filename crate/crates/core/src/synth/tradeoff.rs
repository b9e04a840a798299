use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{derive_seed, generate, optimal_linear_encoder, rank_sum_pvalue, SyntheticConfig, SyntheticDataset};
use crate::cca::{fit_matrices, project_matrix, CsaModel, SRule, Side};
use crate::error::{CsaError, Result};
use crate::linalg::{singular_values, Matrix};
use crate::similarity::similarity;

pub(crate) const DEFAULT_NOISE_SIGMA: f64 = 17.0;
pub(crate) const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffRow {
    pub s: usize,
    pub snr_db: f64,
    pub lambda_min_db: f64,
    pub p_value: f64,
}

/// Generated data, both closed-form encoders and the alignment fitted on the
/// encoded training features.
#[derive(Debug, Clone)]
pub struct LinearPipeline {
    pub dataset: SyntheticDataset,
    /// q × p1
    pub enc1: Matrix,
    /// q × p2
    pub enc2: Matrix,
    pub model: CsaModel,
}

impl LinearPipeline {
    pub fn build(cfg: &SyntheticConfig) -> Result<Self> {
        let dataset = generate(cfg)?;
        let enc1 = optimal_linear_encoder(&dataset.x1, cfg.q)?;
        let enc2 = optimal_linear_encoder(&dataset.x2, cfg.q)?;
        let z1 = enc1.mul_unchecked(&dataset.x1);
        let z2 = enc2.mul_unchecked(&dataset.x2);
        let model = fit_matrices(&z1, &z2, 0.0, SRule::Fixed(cfg.q))?;
        Ok(LinearPipeline { dataset, enc1, enc2, model })
    }

    pub fn encoder(&self, side: Side) -> &Matrix {
        match side {
            Side::First => &self.enc1,
            Side::Second => &self.enc2,
        }
    }

    /// First `s` rows of the alignment map composed with the encoder (s × p).
    pub fn composed(&self, side: Side, s: usize) -> Matrix {
        self.model.map(side).top_rows(s).mul_unchecked(self.encoder(side))
    }

    /// Raw observations (p × n) to canonical coordinates (r × n).
    pub fn embed(&self, side: Side, x: &Matrix) -> Result<Matrix> {
        project_matrix(&self.model, side, &self.encoder(side).matmul(x)?)
    }
}

fn mean_sq_column_norm(m: &Matrix) -> f64 {
    m.as_slice().iter().map(|v| v * v).sum::<f64>() / m.cols() as f64
}

/// Uniform random cyclic permutation, so no item keeps its partner.
fn derangement(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..i);
        perm.swap(i, j);
    }
    perm
}

/// SNR, smallest singular value of the truncated composed map, and the
/// rank-sum p-value between paired and shuffled scores, for every `s` in the
/// grid. SNR is measured on the training draw; scores come from a fresh draw
/// of `n` pairs through the same mixing maps.
pub fn tradeoff_curves(cfg: &SyntheticConfig, s_grid: &[usize]) -> Result<Vec<TradeoffRow>> {
    let pipeline = LinearPipeline::build(cfg)?;
    let r = pipeline.model.r();
    if let Some(&bad) = s_grid.iter().find(|&&s| s == 0 || s > r) {
        return Err(CsaError::InvalidParameter(format!("s = {bad} outside 1..={r}")));
    }

    let data = &pipeline.dataset;
    let signal = data.signal(1);
    let held_out = data.resample(cfg.n, derive_seed(cfg.seed, 1))?;
    let u = pipeline.embed(Side::First, &held_out.x1)?;
    let v = pipeline.embed(Side::Second, &held_out.x2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 2));
    let v_shuffled = v.select_columns(&derangement(cfg.n, &mut rng));
    let rho = &pipeline.model.rho;

    s_grid
        .iter()
        .map(|&s| {
            let p = pipeline.composed(Side::First, s);
            let snr = mean_sq_column_norm(&p.mul_unchecked(&signal)) / mean_sq_column_norm(&p.mul_unchecked(&data.noise1));
            let sv = singular_values(&p)?;
            let sigma_min = sv[sv.len() - 1];
            let paired = paired_scores(&u, &v, rho, s)?;
            let shuffled = paired_scores(&u, &v_shuffled, rho, s)?;
            Ok(TradeoffRow {
                s,
                snr_db: 10.0 * snr.log10(),
                lambda_min_db: 20.0 * sigma_min.log10(),
                p_value: rank_sum_pvalue(&paired, &shuffled)?,
            })
        })
        .collect()
}

/// Similarity of column i of `u` with column i of `v`.
fn paired_scores(u: &Matrix, v: &Matrix, rho: &[f64], s: usize) -> Result<Vec<f64>> {
    (0..u.cols()).map(|i| similarity(&u.column(i), &v.column(i), rho, s)).collect()
}
