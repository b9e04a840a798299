//! Closed-form canonical correlation fit and the shared-space projection.
//!
//! With centered features `Z¹ (d1×N)`, `Z² (d2×N)` and second moments
//! `Σ₁ = Z¹Z¹ᵀ`, `Σ₂ = Z²Z²ᵀ`, the whitened cross moment
//! `Σ₁^{-1/2} Z¹Z²ᵀ Σ₂^{-1/2} = U·P·Vᵀ` gives `A = U_rᵀ Σ₁^{-1/2}`,
//! `B = V_rᵀ Σ₂^{-1/2}` and the canonical correlations `diag(P)`, where
//! `r = min(d1, d2)`. The second moments are unnormalized so that
//! `(AZ¹)(AZ¹)ᵀ = I_r` holds as written.

use crate::error::{CsaError, Result};
use crate::features::FeatureMatrix;
use crate::linalg::{inv_sqrt_spd, svd, Matrix};

/// Relative ridge used when none is given: the absolute ridge is `eps·trace(Σ)/d`.
pub const DEFAULT_EPS: f64 = 1e-6;
/// Default correlation threshold for choosing the retained dimension.
pub const DEFAULT_THRESHOLD: f64 = 0.05;

const RHO_TOLERANCE: f64 = 1e-6;

/// How the retained dimension `s` is chosen from the canonical correlations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SRule {
    /// Keep every dimension whose correlation is at least the constant.
    Threshold(f64),
    /// Keep exactly this many dimensions.
    Fixed(usize),
}

impl Default for SRule {
    fn default() -> Self {
        SRule::Threshold(DEFAULT_THRESHOLD)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

/// A fitted alignment. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CsaModel {
    /// r × d1
    pub map_a: Matrix,
    /// r × d2
    pub map_b: Matrix,
    /// Canonical correlations, descending, clamped to [0, 1].
    pub rho: Vec<f64>,
    pub mean_a: Vec<f64>,
    pub mean_b: Vec<f64>,
    pub eps: f64,
    pub s: usize,
}

impl CsaModel {
    /// Assembles a model from raw parts, checking every shape and range invariant.
    pub fn from_parts(
        map_a: Matrix,
        map_b: Matrix,
        rho: Vec<f64>,
        mean_a: Vec<f64>,
        mean_b: Vec<f64>,
        eps: f64,
        s: usize,
    ) -> Result<Self> {
        let r = rho.len();
        if map_a.rows() != r || map_b.rows() != r {
            return Err(CsaError::shape("model maps", format!("{r} rows"), format!("{} and {}", map_a.rows(), map_b.rows())));
        }
        if r != map_a.cols().min(map_b.cols()) {
            return Err(CsaError::shape("model rank", map_a.cols().min(map_b.cols()), r));
        }
        if mean_a.len() != map_a.cols() || mean_b.len() != map_b.cols() {
            return Err(CsaError::shape("model means", format!("{} and {}", map_a.cols(), map_b.cols()), format!("{} and {}", mean_a.len(), mean_b.len())));
        }
        if rho.iter().any(|p| !(0.0..=1.0).contains(p)) || rho.windows(2).any(|w| w[0] < w[1]) {
            return Err(CsaError::InvalidParameter("correlations must be descending within [0, 1]".into()));
        }
        if s == 0 || s > r {
            return Err(CsaError::InvalidParameter(format!("retained dimension {s} outside 1..={r}")));
        }
        if eps.is_nan() || eps < 0.0 || mean_a.iter().chain(&mean_b).any(|v| !v.is_finite()) {
            return Err(CsaError::NonFinite("model parameters"));
        }
        Ok(CsaModel { map_a, map_b, rho, mean_a, mean_b, eps, s })
    }

    pub fn d1(&self) -> usize {
        self.map_a.cols()
    }

    pub fn d2(&self) -> usize {
        self.map_b.cols()
    }

    pub fn r(&self) -> usize {
        self.rho.len()
    }

    /// Copy of the model with a different retained dimension.
    pub fn with_s(&self, s: usize) -> Result<Self> {
        if s == 0 || s > self.r() {
            return Err(CsaError::InvalidParameter(format!("retained dimension {s} outside 1..={}", self.r())));
        }
        Ok(CsaModel { s, ..self.clone() })
    }

    pub fn with_rule(&self, rule: SRule) -> Result<Self> {
        self.with_s(select_s(&self.rho, rule)?)
    }

    pub fn map(&self, side: Side) -> &Matrix {
        match side {
            Side::First => &self.map_a,
            Side::Second => &self.map_b,
        }
    }

    pub fn mean(&self, side: Side) -> &[f64] {
        match side {
            Side::First => &self.mean_a,
            Side::Second => &self.mean_b,
        }
    }
}

/// Subtracts the per-feature (row) mean.
pub fn center(features: &FeatureMatrix) -> Result<(FeatureMatrix, Vec<f64>)> {
    let (centered, mean) = center_matrix(features.values())?;
    Ok((FeatureMatrix::new(centered, features.ids().to_vec())?, mean))
}

pub(crate) fn center_matrix(values: &Matrix) -> Result<(Matrix, Vec<f64>)> {
    let n = values.cols();
    if n < 2 {
        return Err(CsaError::InsufficientItems { needed: 2, found: n });
    }
    let mut centered = values.clone();
    let mut mean = Vec::with_capacity(values.rows());
    for i in 0..values.rows() {
        let row = centered.row_mut(i);
        let mu = row.iter().sum::<f64>() / n as f64;
        for v in row.iter_mut() {
            *v -= mu;
        }
        mean.push(mu);
    }
    Ok((centered, mean))
}

/// Fits the alignment on paired features. Column `j` of `z1` must be paired
/// with column `j` of `z2`, and their ids must agree.
pub fn fit(z1: &FeatureMatrix, z2: &FeatureMatrix, eps: f64, rule: SRule) -> Result<CsaModel> {
    if z1.n_items() != z2.n_items() {
        return Err(CsaError::ItemCountMismatch { left: z1.n_items(), right: z2.n_items() });
    }
    if let Some((position, (a, b))) = z1.ids().iter().zip(z2.ids()).enumerate().find(|(_, (a, b))| a != b) {
        return Err(CsaError::IdOrderMismatch { position, left: a.clone(), right: b.clone() });
    }
    fit_matrices(z1.values(), z2.values(), eps, rule)
}

/// Fit on column-aligned matrices whose pairing has been established elsewhere
/// (e.g. by a dataset manifest).
pub fn fit_matrices(z1: &Matrix, z2: &Matrix, eps: f64, rule: SRule) -> Result<CsaModel> {
    if z1.cols() != z2.cols() {
        return Err(CsaError::ItemCountMismatch { left: z1.cols(), right: z2.cols() });
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(CsaError::InvalidParameter(format!("eps must be finite and >= 0, got {eps}")));
    }
    let (c1, mean_a) = center_matrix(z1)?;
    let (c2, mean_b) = center_matrix(z2)?;
    let (d1, d2) = (c1.rows(), c2.rows());
    let r = d1.min(d2);

    let sigma1 = c1.gram();
    let sigma2 = c2.gram();
    let r1 = inv_sqrt_spd(&sigma1, eps * sigma1.trace() / d1 as f64)?;
    let r2 = inv_sqrt_spd(&sigma2, eps * sigma2.trace() / d2 as f64)?;

    let cross = c1.mul_transpose(&c2);
    let whitened = r1.mul_unchecked(&cross).mul_unchecked(&r2);
    let dec = svd(&whitened)?;

    // dec.u is d1×r and dec.vt is r×d2 since r = min(d1, d2).
    let map_a = dec.u.transpose().mul_unchecked(&r1);
    let map_b = dec.vt.mul_unchecked(&r2);
    let rho = clamp_correlations(&dec.s);
    debug_assert_eq!(rho.len(), r);
    let s = select_s(&rho, rule)?;
    Ok(CsaModel { map_a, map_b, rho, mean_a, mean_b, eps, s })
}

fn clamp_correlations(raw: &[f64]) -> Vec<f64> {
    if let Some(bad) = raw.iter().find(|p| **p < -RHO_TOLERANCE || **p > 1.0 + RHO_TOLERANCE) {
        log::warn!("canonical correlation {bad} outside [0, 1] beyond tolerance; whitening is ill-conditioned");
    }
    raw.iter().map(|p| p.clamp(0.0, 1.0)).collect()
}

/// Projects items into the shared space: column `j` is `M·(f_j − mean)` with the
/// training mean of the chosen side. Output is r × m.
pub fn project(model: &CsaModel, side: Side, features: &FeatureMatrix) -> Result<Matrix> {
    project_matrix(model, side, features.values())
}

pub fn project_matrix(model: &CsaModel, side: Side, values: &Matrix) -> Result<Matrix> {
    let map = model.map(side);
    let mean = model.mean(side);
    if values.rows() != map.cols() {
        return Err(CsaError::shape("projection input dim", map.cols(), values.rows()));
    }
    let mut centered = values.clone();
    for (i, mu) in mean.iter().enumerate() {
        for v in centered.row_mut(i) {
            *v -= mu;
        }
    }
    map.matmul(&centered)
}

/// Retained dimension for the given rule.
pub fn select_s(rho: &[f64], rule: SRule) -> Result<usize> {
    if rho.is_empty() {
        return Err(CsaError::Empty("canonical correlations"));
    }
    match rule {
        SRule::Fixed(k) => {
            if k == 0 || k > rho.len() {
                return Err(CsaError::InvalidParameter(format!("fixed s = {k} outside 1..={}", rho.len())));
            }
            Ok(k)
        }
        SRule::Threshold(c) => {
            if !(c > 0.0 && c < 1.0) {
                return Err(CsaError::InvalidParameter(format!("threshold {c} outside (0, 1)")));
            }
            if rho[0] < c {
                return Err(CsaError::NoDimensionQualifies { threshold: c, rho1: rho[0] });
            }
            Ok(rho.iter().take_while(|&&p| p >= c).count())
        }
    }
}
