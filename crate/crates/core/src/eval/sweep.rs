use rayon::prelude::*;

use crate::cca::CsaModel;
use crate::error::{CsaError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub s: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub metric: String,
    pub rows: Vec<SweepRow>,
    /// Retained dimension with the largest metric; the smallest such `s` on ties.
    pub best_s: usize,
}

/// Evaluates `metric` on copies of `model` truncated to each `s`.
pub fn sweep_s(
    model: &CsaModel,
    s_values: &[usize],
    metric: &str,
    eval: impl Fn(&CsaModel) -> Result<f64> + Sync,
) -> Result<SweepReport> {
    if s_values.is_empty() {
        return Err(CsaError::Empty("s sweep values"));
    }
    let rows: Vec<SweepRow> = s_values
        .par_iter()
        .map(|&s| Ok(SweepRow { s, value: eval(&model.with_s(s)?)? }))
        .collect::<Result<_>>()?;
    let mut best = &rows[0];
    for row in &rows[1..] {
        if row.value > best.value || (row.value == best.value && row.s < best.s) {
            best = row;
        }
    }
    Ok(SweepReport { metric: metric.to_string(), best_s: best.s, rows })
}
