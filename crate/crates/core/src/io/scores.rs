use std::fmt::Write as _;
use std::io::Write;

use super::feature_file::{encode_features, Dtype};
use crate::error::{CsaError, Result};
use crate::features::FeatureMatrix;
use crate::similarity::ScoreMatrix;

/// Tab-separated scores: a header row of column ids, then one row per row id.
/// Values use the shortest representation that parses back to the same f64.
pub fn write_scores_tsv<W: Write + ?Sized>(out: &mut W, scores: &ScoreMatrix) -> std::io::Result<()> {
    let mut line = String::from("id");
    for c in &scores.col_ids {
        line.push('\t');
        line.push_str(c);
    }
    writeln!(out, "{line}")?;
    for (i, rid) in scores.row_ids.iter().enumerate() {
        line.clear();
        line.push_str(rid);
        for v in scores.scores.row(i) {
            let _ = write!(line, "\t{v:?}");
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Scores in the binary feature container: one item per row (ids = row ids),
/// `dim` = number of columns, double precision.
pub fn write_scores_binary<W: Write + ?Sized>(out: &mut W, scores: &ScoreMatrix) -> Result<()> {
    let as_features = FeatureMatrix::new(scores.scores.transpose(), scores.row_ids.clone())?;
    out.write_all(&encode_features(&as_features, Dtype::F64)?)
        .map_err(|e| CsaError::io("<scores>", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::decode_features;
    use crate::linalg::Matrix;

    fn sample() -> ScoreMatrix {
        ScoreMatrix {
            scores: Matrix::from_rows(&[vec![0.1, -1.0], vec![1.0 / 3.0, 0.0]]).unwrap(),
            row_ids: vec!["r0".into(), "r1".into()],
            col_ids: vec!["c0".into(), "c1".into()],
            degenerate: 0,
        }
    }

    #[test]
    fn tsv_layout_and_round_trip() {
        let mut buf = Vec::new();
        write_scores_tsv(&mut buf, &sample()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "id\tc0\tc1\nr0\t0.1\t-1.0\nr1\t0.3333333333333333\t0.0\n");
        let parsed: f64 = text.lines().nth(2).unwrap().split('\t').nth(1).unwrap().parse().unwrap();
        assert_eq!(parsed, 1.0 / 3.0);
    }

    #[test]
    fn binary_round_trip() {
        let mut buf = Vec::new();
        write_scores_binary(&mut buf, &sample()).unwrap();
        let back = decode_features(&buf).unwrap();
        assert_eq!(back.values().transpose(), sample().scores);
        assert_eq!(back.ids(), &["r0", "r1"]);
    }
}
