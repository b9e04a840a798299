use crate::error::{CsaError, Result};
use crate::linalg::Matrix;
use crate::similarity::ScoreMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub accuracy: f64,
    pub predictions: Vec<usize>,
}

/// Column of the largest entry in every row; the lowest index wins ties.
pub fn argmax_rows(scores: &Matrix) -> Vec<usize> {
    (0..scores.rows())
        .map(|i| {
            let row = scores.row(i);
            let mut best = 0;
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Predicts the best-scoring column for each row and compares with `truth`.
pub fn classify(scores: &ScoreMatrix, truth: &[usize]) -> Result<Classification> {
    let (rows, cols) = scores.scores.shape();
    if truth.is_empty() {
        return Err(CsaError::Empty("classification truth"));
    }
    if truth.len() != rows {
        return Err(CsaError::shape("classification truth", rows, truth.len()));
    }
    if let Some(&bad) = truth.iter().find(|&&t| t >= cols) {
        return Err(CsaError::InvalidParameter(format!("class index {bad} out of range for {cols} classes")));
    }
    let predictions = argmax_rows(&scores.scores);
    let correct = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(Classification { accuracy: correct as f64 / rows as f64, predictions })
}
