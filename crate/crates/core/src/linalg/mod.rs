//! Dense kernels behind the closed-form CCA fit: thin SVD, symmetric
//! eigendecomposition and the ridge-guarded inverse square root of an SPD matrix.
//!
//! Everything runs in double precision. Results are deterministic and do not
//! depend on the rayon thread count.

mod eigen;
mod matrix;
mod svd;

pub use eigen::{inv_sqrt_spd, sym_eig, SymEigen};
pub use matrix::{dot, norm2, Matrix};
pub use svd::{singular_values, svd, SvdResult};
