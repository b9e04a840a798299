use std::collections::HashSet;

use crate::error::{CsaError, Result};
use crate::linalg::Matrix;

/// One modality's embeddings: a `dim × n_items` matrix whose columns are items.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Matrix,
    ids: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(values: Matrix, ids: Vec<String>) -> Result<Self> {
        if ids.len() != values.cols() {
            return Err(CsaError::shape("feature ids", values.cols(), ids.len()));
        }
        if !values.is_finite() {
            return Err(CsaError::NonFinite("feature matrix"));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(CsaError::DuplicateId(id.clone()));
            }
        }
        Ok(FeatureMatrix { values, ids })
    }

    /// Items get ids `"0"`, `"1"`, ...
    pub fn with_index_ids(values: Matrix) -> Self {
        let ids = (0..values.cols()).map(|i| i.to_string()).collect();
        FeatureMatrix { values, ids }
    }

    /// Builds from per-item vectors.
    pub fn from_items(items: &[Vec<f64>], ids: Vec<String>) -> Result<Self> {
        FeatureMatrix::new(Matrix::from_columns(items)?, ids)
    }

    pub fn dim(&self) -> usize {
        self.values.rows()
    }

    pub fn n_items(&self) -> usize {
        self.values.cols()
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn item(&self, j: usize) -> Vec<f64> {
        self.values.column(j)
    }

    /// Items at the given positions, in that order.
    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        FeatureMatrix::new(
            self.values.select_columns(idx),
            idx.iter().map(|&i| self.ids[i].clone()).collect(),
        )
    }

    /// Same ids with the item vectors taken from other positions. Used to
    /// corrupt a pairing while keeping the modality-1 order intact.
    pub fn with_values_from(&self, idx: &[usize]) -> Self {
        assert_eq!(idx.len(), self.n_items());
        FeatureMatrix {
            values: self.values.select_columns(idx),
            ids: self.ids.clone(),
        }
    }

    pub fn into_parts(self) -> (Matrix, Vec<String>) {
        (self.values, self.ids)
    }
}
