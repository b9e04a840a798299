use crate::error::{CsaError, Result};
use crate::linalg::{sym_eig, Matrix};

/// `OffDiag(XXᵀ) − X(𝟙 − I)Xᵀ / (N − 1)` for a `p × N` sample matrix, symmetrized.
///
/// The first term is the cross moment between complementary masked views
/// (the diagonal is lost because a coordinate never appears in both views),
/// the second is the mean moment between non-matching items.
pub fn offdiag_moment(x: &Matrix) -> Result<Matrix> {
    let (p, n) = x.shape();
    if n < 2 {
        return Err(CsaError::InsufficientItems { needed: 2, found: n });
    }
    let xxt = x.mul_transpose(x);
    let sums: Vec<f64> = (0..p).map(|i| x.row(i).iter().sum()).collect();
    let inv = 1.0 / (n as f64 - 1.0);
    let m = Matrix::from_fn(p, p, |i, j| {
        let offdiag = if i == j { 0.0 } else { xxt[(i, j)] };
        let negatives = sums[i] * sums[j] - xxt[(i, j)];
        offdiag - inv * negatives
    });
    Ok(m.symmetrized())
}

/// Closed-form linear contrastive encoder: rows are the top-`q` unit
/// eigenvectors of [`offdiag_moment`]. Returns `q × p`.
pub fn optimal_linear_encoder(x: &Matrix, q: usize) -> Result<Matrix> {
    let p = x.rows();
    if q == 0 || q > p {
        return Err(CsaError::shape("encoder output dim", format!("1..={p}"), q));
    }
    let eig = sym_eig(&offdiag_moment(x)?)?;
    Ok(eig.vectors.transpose().top_rows(q))
}
