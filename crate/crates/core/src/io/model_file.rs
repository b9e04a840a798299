use std::fs;
use std::path::Path;

use super::bytes::{put_f64s, put_u32, to_u32, Reader};
use crate::cca::CsaModel;
use crate::error::{CsaError, Result};
use crate::linalg::Matrix;

pub const MODEL_MAGIC: [u8; 4] = *b"CSAM";
pub const MODEL_VERSION: u32 = 1;

/// Header (magic, version, d1, d2, r, s as u32, eps as f64) followed by
/// mean_a, mean_b, rho, map_a and map_b (row-major) as f64.
pub fn encode_model(model: &CsaModel) -> Result<Vec<u8>> {
    let (d1, d2, r) = (model.d1(), model.d2(), model.r());
    let mut out = Vec::with_capacity(32 + 8 * (d1 + d2 + r + r * d1 + r * d2));
    out.extend_from_slice(&MODEL_MAGIC);
    put_u32(&mut out, MODEL_VERSION);
    for (v, what) in [(d1, "d1"), (d2, "d2"), (r, "r"), (model.s, "s")] {
        put_u32(&mut out, to_u32(v, what)?);
    }
    out.extend_from_slice(&model.eps.to_le_bytes());
    put_f64s(&mut out, &model.mean_a);
    put_f64s(&mut out, &model.mean_b);
    put_f64s(&mut out, &model.rho);
    put_f64s(&mut out, model.map_a.as_slice());
    put_f64s(&mut out, model.map_b.as_slice());
    Ok(out)
}

pub fn decode_model(buf: &[u8]) -> Result<CsaModel> {
    let mut rd = Reader::new(buf);
    rd.magic(MODEL_MAGIC)?;
    let version = rd.u32("version")?;
    if version != MODEL_VERSION {
        return Err(CsaError::UnsupportedVersion { found: version, supported: MODEL_VERSION });
    }
    let d1 = rd.u32("d1")? as usize;
    let d2 = rd.u32("d2")? as usize;
    let r = rd.u32("r")? as usize;
    let s = rd.u32("s")? as usize;
    if d1 == 0 || d2 == 0 || r == 0 {
        return Err(CsaError::Empty("model dimensions"));
    }
    let eps = rd.f64("eps")?;
    let mean_a = rd.f64_vec(d1, "mean_a")?;
    let mean_b = rd.f64_vec(d2, "mean_b")?;
    let rho = rd.f64_vec(r, "rho")?;
    let map_a = rd.f64_vec(r * d1, "map_a")?;
    let map_b = rd.f64_vec(r * d2, "map_b")?;
    rd.finish()?;
    CsaModel::from_parts(Matrix::from_vec(r, d1, map_a)?, Matrix::from_vec(r, d2, map_b)?, rho, mean_a, mean_b, eps, s)
}

pub fn write_model(path: impl AsRef<Path>, model: &CsaModel) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_model(model)?).map_err(|e| CsaError::io(path, e))
}

pub fn read_model(path: impl AsRef<Path>) -> Result<CsaModel> {
    let path = path.as_ref();
    decode_model(&fs::read(path).map_err(|e| CsaError::io(path, e))?)
}
