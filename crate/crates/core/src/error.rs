use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CsaError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CsaError {
    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    Shape {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("decomposition of a {rows}x{cols} matrix did not converge")]
    DecompositionFailed { rows: usize, cols: usize },

    #[error(
        "matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e}); \
         increase eps to regularize"
    )]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("paired matrices have {left} and {right} items")]
    ItemCountMismatch { left: usize, right: usize },

    #[error("pair {position} is misaligned: '{left}' vs '{right}'")]
    IdOrderMismatch {
        position: usize,
        left: String,
        right: String,
    },

    #[error("duplicate item id '{0}'")]
    DuplicateId(String),

    #[error("need at least {needed} items, found {found}")]
    InsufficientItems { needed: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no canonical dimension reaches threshold {threshold} (largest correlation {rho1})")]
    NoDimensionQualifies { threshold: f64, rho1: f64 },

    #[error("degenerate (zero-norm) projected vector for item '{0}'")]
    DegenerateVector(String),

    #[error("rank-sum test needs at least {needed} observations per sample, found {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("ROC analysis needs both positive and negative labels")]
    OneClass,

    #[error("query '{0}' has no relevant items")]
    NoRelevant(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("unknown dtype code {0}")]
    UnknownDtype(u32),

    #[error("truncated file while reading {0}")]
    Truncated(&'static str),

    #[error("{0} trailing bytes after the last record")]
    TrailingBytes(usize),

    #[error("item id is not valid UTF-8")]
    InvalidUtf8,

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("id '{id}' not found in modality-{modality} features")]
    MissingId { id: String, modality: u8 },

    #[error("referenced file does not exist: {0}")]
    MissingFile(PathBuf),

    #[error("pair ('{id1}', '{id2}') appears in both train and test splits")]
    OverlappingSplit { id1: String, id2: String },
}

impl CsaError {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            CsaError::DecompositionFailed { .. } | CsaError::NotPositiveDefinite { .. }
        )
    }

    pub(crate) fn shape(context: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        CsaError::Shape {
            context,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CsaError::Io {
            path: path.into(),
            source,
        }
    }
}
