//! Canonical similarity analysis.
//!
//! Two pretrained unimodal embedding spaces are aligned with a closed-form
//! canonical correlation fit, and pairs are scored with a correlation-weighted
//! cosine over the leading canonical dimensions. The crate also carries the
//! synthetic latent-factor lab used to study the choice of the retained
//! dimension, the downstream evaluation protocols, and the on-disk formats.

pub mod cca;
pub mod error;
pub mod eval;
pub mod features;
pub mod io;
pub mod linalg;
pub mod similarity;
pub mod synth;

pub use cca::{center, fit, project, select_s, CsaModel, SRule, Side};
pub use error::{CsaError, Result};
pub use features::FeatureMatrix;
pub use linalg::Matrix;
pub use similarity::{score_matrix, similarity, DegeneratePolicy, ScoreMatrix};
