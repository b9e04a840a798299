use rayon::prelude::*;

use crate::error::{CsaError, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub query: usize,
    pub relevant: usize,
    pub precision_at_1: f64,
    pub precision_at_k: f64,
    pub average_precision: f64,
    /// Relevant columns among the top k.
    pub hits_at_k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalReport {
    /// Cutoff actually used: the requested k capped at the number of columns.
    pub k: usize,
    pub precision_at_1: f64,
    pub precision_at_k: f64,
    pub map_at_k: f64,
    /// Queries without any relevant column, left out of the averages.
    pub skipped: usize,
    pub per_query: Vec<QueryResult>,
}

/// Columns by descending score, lower index first among equal scores.
fn ranking(row: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    order
}

fn evaluate_query(query: usize, row: &[f64], k: usize, relevant: &(impl Fn(usize, usize) -> bool + Sync)) -> Option<QueryResult> {
    let total = (0..row.len()).filter(|&j| relevant(query, j)).count();
    if total == 0 {
        return None;
    }
    let order = ranking(row);
    let mut hits = 0usize;
    let mut ap = 0.0;
    for (rank, &j) in order.iter().take(k).enumerate() {
        if relevant(query, j) {
            hits += 1;
            ap += hits as f64 / (rank + 1) as f64;
        }
    }
    Some(QueryResult {
        query,
        relevant: total,
        precision_at_1: if relevant(query, order[0]) { 1.0 } else { 0.0 },
        precision_at_k: hits as f64 / k as f64,
        average_precision: ap / total.min(k) as f64,
        hits_at_k: hits,
    })
}

/// Precision@1, precision@k and mAP@k with rows as queries. `relevant(i, j)`
/// tells whether column `j` is a correct answer for row `i`. Pass the
/// transposed matrix to retrieve in the other direction.
pub fn retrieval_metrics(
    scores: &Matrix,
    relevant: impl Fn(usize, usize) -> bool + Sync,
    k: usize,
    strict: bool,
) -> Result<RetrievalReport> {
    if k == 0 {
        return Err(CsaError::InvalidParameter("k must be at least 1".into()));
    }
    let k = k.min(scores.cols());
    let eval = |i: usize| evaluate_query(i, scores.row(i), k, &relevant);
    let results: Vec<Option<QueryResult>> = if scores.rows() * scores.cols() >= 1 << 16 {
        (0..scores.rows()).into_par_iter().map(eval).collect()
    } else {
        (0..scores.rows()).map(eval).collect()
    };

    let skipped = results.iter().filter(|r| r.is_none()).count();
    if skipped > 0 {
        if strict {
            let first = results.iter().position(|r| r.is_none()).unwrap_or(0);
            return Err(CsaError::NoRelevant(format!("query {first}")));
        }
        log::warn!("{skipped} queries have no relevant item and were skipped");
    }
    let per_query: Vec<QueryResult> = results.into_iter().flatten().collect();
    if per_query.is_empty() {
        return Err(CsaError::NoRelevant("every query".into()));
    }
    let n = per_query.len() as f64;
    let mean = |f: fn(&QueryResult) -> f64| per_query.iter().map(f).sum::<f64>() / n;
    Ok(RetrievalReport {
        k,
        precision_at_1: mean(|q| q.precision_at_1),
        // From integer counts, so the average is the correctly rounded ratio.
        precision_at_k: per_query.iter().map(|q| q.hits_at_k).sum::<usize>() as f64 / (k * per_query.len()) as f64,
        map_at_k: mean(|q| q.average_precision),
        skipped,
        per_query,
    })
}
