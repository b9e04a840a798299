//! Correlation-weighted cosine over the first `s` canonical dimensions:
//!
//! `sim(u, v; s) = Σ_{i<s} ρ_i u_i v_i / (‖u_{1:s}‖ ‖v_{1:s}‖)`
//!
//! Each truncated vector is normalized before the weighted dot product, so
//! at `s = 1` scores are exactly `±ρ₁` and ties stay ties. Sums run in
//! ascending index order everywhere so batch and scalar results agree bit for bit.

use rayon::prelude::*;

use crate::cca::{project, CsaModel, Side};
use crate::error::{CsaError, Result};
use crate::features::FeatureMatrix;
use crate::linalg::Matrix;

/// What to do with a vector whose truncation to `s` dimensions has zero norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegeneratePolicy {
    #[default]
    Error,
    /// Score such pairs as 0 and count them.
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    /// m1 × m2
    pub scores: Matrix,
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
    /// Rows and columns scored as zero under [`DegeneratePolicy::Zero`].
    pub degenerate: usize,
}

impl ScoreMatrix {
    pub fn rows(&self) -> usize {
        self.scores.rows()
    }

    pub fn cols(&self) -> usize {
        self.scores.cols()
    }

    /// Swaps the roles of the two modalities.
    pub fn transposed(&self) -> ScoreMatrix {
        ScoreMatrix {
            scores: self.scores.transpose(),
            row_ids: self.col_ids.clone(),
            col_ids: self.row_ids.clone(),
            degenerate: self.degenerate,
        }
    }

    /// Entry (i, i) for a square matrix of paired items.
    pub fn diagonal(&self) -> Vec<f64> {
        self.scores.diag()
    }
}

fn check_s(s: usize, r: usize) -> Result<()> {
    if s == 0 || s > r {
        return Err(CsaError::InvalidParameter(format!("retained dimension {s} outside 1..={r}")));
    }
    Ok(())
}

#[inline]
fn truncated_norm(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |acc, x| acc + x * x).sqrt()
}

fn normalized(u: &[f64], norm: f64) -> Vec<f64> {
    u.iter().map(|x| x / norm).collect()
}

/// Weighted dot product of unit vectors, clamped to `[-ρ₁, ρ₁]` so rounding in
/// the normalization can never push a score past the bound.
#[inline]
fn weighted_dot(u: &[f64], v: &[f64], rho: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..rho.len() {
        acc += rho[i] * u[i] * v[i];
    }
    acc.clamp(-rho[0], rho[0])
}

/// Canonical similarity of two projected vectors.
pub fn similarity(u: &[f64], v: &[f64], rho: &[f64], s: usize) -> Result<f64> {
    if u.len() != v.len() || rho.len() != u.len() {
        return Err(CsaError::shape("similarity operands", u.len(), format!("{} and {}", v.len(), rho.len())));
    }
    check_s(s, rho.len())?;
    let nu = truncated_norm(&u[..s]);
    let nv = truncated_norm(&v[..s]);
    if nu == 0.0 {
        return Err(CsaError::DegenerateVector("u".into()));
    }
    if nv == 0.0 {
        return Err(CsaError::DegenerateVector("v".into()));
    }
    Ok(weighted_dot(&normalized(&u[..s], nu), &normalized(&v[..s], nv), &rho[..s]))
}

/// All pairwise similarities between the columns of two projections (r × m1, r × m2).
pub fn score_matrix(
    proj1: &Matrix,
    proj2: &Matrix,
    rho: &[f64],
    s: usize,
    policy: DegeneratePolicy,
) -> Result<ScoreMatrix> {
    let row_ids = (0..proj1.cols()).map(|i| i.to_string()).collect();
    let col_ids = (0..proj2.cols()).map(|i| i.to_string()).collect();
    score_matrix_with_ids(proj1, proj2, rho, s, policy, row_ids, col_ids)
}

pub fn score_matrix_with_ids(
    proj1: &Matrix,
    proj2: &Matrix,
    rho: &[f64],
    s: usize,
    policy: DegeneratePolicy,
    row_ids: Vec<String>,
    col_ids: Vec<String>,
) -> Result<ScoreMatrix> {
    if proj1.rows() != proj2.rows() || proj1.rows() != rho.len() {
        return Err(CsaError::shape(
            "score matrix projections",
            format!("{} rows", rho.len()),
            format!("{} and {}", proj1.rows(), proj2.rows()),
        ));
    }
    if row_ids.len() != proj1.cols() || col_ids.len() != proj2.cols() {
        return Err(CsaError::shape("score matrix ids", proj1.cols(), row_ids.len()));
    }
    check_s(s, rho.len())?;

    // Truncated, normalized columns, contiguous. Degenerate ones stay unnormalized.
    let unit = |m: &Matrix, j: usize| {
        let col = m.column(j);
        let norm = truncated_norm(&col[..s]);
        let v = if norm == 0.0 { col[..s].to_vec() } else { normalized(&col[..s], norm) };
        (v, norm)
    };
    let (left, left_norm): (Vec<Vec<f64>>, Vec<f64>) = (0..proj1.cols()).map(|j| unit(proj1, j)).unzip();
    let (right, right_norm): (Vec<Vec<f64>>, Vec<f64>) = (0..proj2.cols()).map(|j| unit(proj2, j)).unzip();

    let degenerate_rows = left_norm.iter().filter(|n| **n == 0.0).count();
    let degenerate_cols = right_norm.iter().filter(|n| **n == 0.0).count();
    if policy == DegeneratePolicy::Error {
        if let Some(i) = left_norm.iter().position(|n| *n == 0.0) {
            return Err(CsaError::DegenerateVector(row_ids[i].clone()));
        }
        if let Some(j) = right_norm.iter().position(|n| *n == 0.0) {
            return Err(CsaError::DegenerateVector(col_ids[j].clone()));
        }
    }
    if degenerate_rows + degenerate_cols > 0 {
        log::warn!("{degenerate_rows} rows and {degenerate_cols} columns are degenerate; scored as 0");
    }

    let rho = &rho[..s];
    let m2 = right.len();
    let mut out = Matrix::zeros(left.len(), m2);
    let fill = |(i, row): (usize, &mut [f64])| {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = if left_norm[i] == 0.0 || right_norm[j] == 0.0 {
                0.0
            } else {
                weighted_dot(&left[i], &right[j], rho)
            };
        }
    };
    if left.len() * m2 * s >= 1 << 15 {
        out.data_mut().par_chunks_mut(m2).enumerate().for_each(fill);
    } else {
        out.data_mut().chunks_mut(m2).enumerate().for_each(fill);
    }
    Ok(ScoreMatrix {
        scores: out,
        row_ids,
        col_ids,
        degenerate: degenerate_rows + degenerate_cols,
    })
}

/// Projects both feature sets with the model and scores every cross pair at the model's `s`.
pub fn score_features(
    model: &CsaModel,
    first: &FeatureMatrix,
    second: &FeatureMatrix,
    policy: DegeneratePolicy,
) -> Result<ScoreMatrix> {
    let p1 = project(model, Side::First, first)?;
    let p2 = project(model, Side::Second, second)?;
    score_matrix_with_ids(&p1, &p2, &model.rho, model.s, policy, first.ids().to_vec(), second.ids().to_vec())
}
