use std::collections::HashSet;
use std::fs;
use std::path::Path;

use super::bytes::{put_u32, to_u32, Reader};
use crate::error::{CsaError, Result};
use crate::features::FeatureMatrix;
use crate::linalg::Matrix;

pub const FEATURE_MAGIC: [u8; 4] = *b"CSAF";
pub const FEATURE_VERSION: u32 = 1;
/// magic, version, dtype, n_items, dim.
pub const HEADER_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32 = 1,
    F64 = 2,
}

impl Dtype {
    pub fn code(self) -> u32 {
        self as u32
    }

    pub fn width(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }

    pub fn from_code(code: u32) -> Result<Self> {
        match code {
            1 => Ok(Dtype::F32),
            2 => Ok(Dtype::F64),
            other => Err(CsaError::UnknownDtype(other)),
        }
    }
}

/// Serializes items in order: header, item-major payload, then the id table
/// (u32 byte length + UTF-8 per id).
pub fn encode_features(features: &FeatureMatrix, dtype: Dtype) -> Result<Vec<u8>> {
    let (dim, n) = (features.dim(), features.n_items());
    let id_bytes: usize = features.ids().iter().map(|id| 4 + id.len()).sum();
    let mut out = Vec::with_capacity(HEADER_LEN + n * dim * dtype.width() + id_bytes);
    out.extend_from_slice(&FEATURE_MAGIC);
    put_u32(&mut out, FEATURE_VERSION);
    put_u32(&mut out, dtype.code());
    put_u32(&mut out, to_u32(n, "n_items")?);
    put_u32(&mut out, to_u32(dim, "dim")?);
    let values = features.values();
    for j in 0..n {
        for i in 0..dim {
            let v = values[(i, j)];
            match dtype {
                Dtype::F32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
                Dtype::F64 => out.extend_from_slice(&v.to_le_bytes()),
            }
        }
    }
    for id in features.ids() {
        put_u32(&mut out, to_u32(id.len(), "id length")?);
        out.extend_from_slice(id.as_bytes());
    }
    Ok(out)
}

pub fn decode_features(buf: &[u8]) -> Result<FeatureMatrix> {
    let mut r = Reader::new(buf);
    r.magic(FEATURE_MAGIC)?;
    let version = r.u32("version")?;
    if version != FEATURE_VERSION {
        return Err(CsaError::UnsupportedVersion { found: version, supported: FEATURE_VERSION });
    }
    let dtype = Dtype::from_code(r.u32("dtype")?)?;
    let n = r.u32("n_items")? as usize;
    let dim = r.u32("dim")? as usize;
    if n == 0 || dim == 0 {
        return Err(CsaError::Empty("feature file"));
    }
    let count = n.checked_mul(dim).ok_or(CsaError::Truncated("payload"))?;
    let payload = r.take(count.checked_mul(dtype.width()).ok_or(CsaError::Truncated("payload"))?, "payload")?;
    let item_major: Vec<f64> = match dtype {
        Dtype::F32 => payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64).collect(),
        Dtype::F64 => payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect(),
    };

    let mut ids = Vec::with_capacity(n);
    let mut seen = HashSet::with_capacity(n);
    for _ in 0..n {
        let len = r.u32("id length")? as usize;
        let id = std::str::from_utf8(r.take(len, "id table")?).map_err(|_| CsaError::InvalidUtf8)?;
        if !seen.insert(id) {
            return Err(CsaError::DuplicateId(id.to_string()));
        }
        ids.push(id.to_string());
    }
    r.finish()?;
    let values = Matrix::from_vec(n, dim, item_major).map_err(|_| CsaError::NonFinite("feature file payload"))?;
    FeatureMatrix::new(values.transpose(), ids)
}

pub fn write_feature_file(path: impl AsRef<Path>, features: &FeatureMatrix, dtype: Dtype) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_features(features, dtype)?).map_err(|e| CsaError::io(path, e))
}

pub fn read_feature_file(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let buf = fs::read(path).map_err(|e| CsaError::io(path, e))?;
    decode_features(&buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FeatureMatrix {
        FeatureMatrix::new(
            Matrix::from_rows(&[vec![1.0, -2.5], vec![0.1, 3.0], vec![1e-300, 7.0]]).unwrap(),
            vec!["a".into(), "βeta".into()],
        )
        .unwrap()
    }

    #[test]
    fn exact_layout() {
        let f = FeatureMatrix::new(Matrix::from_rows(&[vec![1.5]]).unwrap(), vec!["x".into()]).unwrap();
        let bytes = encode_features(&f, Dtype::F64).unwrap();
        let mut expected = b"CSAF".to_vec();
        expected.extend([1, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0]);
        expected.extend(1.5f64.to_le_bytes());
        expected.extend([1, 0, 0, 0, b'x']);
        assert_eq!(bytes, expected);
    }

    #[test]
    fn round_trip_f64_is_exact() {
        let f = sample();
        assert_eq!(decode_features(&encode_features(&f, Dtype::F64).unwrap()).unwrap(), f);
    }

    #[test]
    fn round_trip_f32_rounds() {
        let f = sample();
        let back = decode_features(&encode_features(&f, Dtype::F32).unwrap()).unwrap();
        assert_eq!(back.ids(), f.ids());
        assert_eq!(back.values()[(1, 0)], 0.1f32 as f64);
        assert_eq!(back.values()[(2, 0)], 0.0);
    }

    #[test]
    fn distinct_errors() {
        let good = encode_features(&sample(), Dtype::F64).unwrap();
        let mut bad = good.clone();
        bad[3] = b'X';
        assert!(matches!(decode_features(&bad), Err(CsaError::BadMagic { .. })));
        let mut bad = good.clone();
        bad[4] = 2;
        assert!(matches!(decode_features(&bad), Err(CsaError::UnsupportedVersion { found: 2, .. })));
        let mut bad = good.clone();
        bad[8] = 9;
        assert!(matches!(decode_features(&bad), Err(CsaError::UnknownDtype(9))));
        assert!(matches!(decode_features(&good[..30]), Err(CsaError::Truncated("payload"))));
        assert!(matches!(decode_features(&good[..good.len() - 1]), Err(CsaError::Truncated(_))));
        let mut bad = good.clone();
        bad.push(0);
        assert!(matches!(decode_features(&bad), Err(CsaError::TrailingBytes(1))));
    }

    #[test]
    fn duplicate_ids_in_file() {
        let f = FeatureMatrix::new(Matrix::zeros(1, 2), vec!["a".into(), "b".into()]).unwrap();
        let mut bytes = encode_features(&f, Dtype::F64).unwrap();
        let n = bytes.len();
        bytes[n - 1] = b'a';
        assert!(matches!(decode_features(&bytes), Err(CsaError::DuplicateId(id)) if id == "a"));
    }
}
