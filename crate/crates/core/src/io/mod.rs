//! On-disk formats: binary feature and model containers, score exports and
//! JSON dataset manifests. All binary fields are little-endian.

mod bytes;
mod feature_file;
mod manifest;
mod model_file;
mod scores;

pub use feature_file::{
    decode_features, encode_features, read_feature_file, write_feature_file, Dtype, FEATURE_MAGIC,
    FEATURE_VERSION, HEADER_LEN,
};
pub use manifest::{load_manifest, parse_manifest, save_manifest, Manifest, PairEntry, PairedDataset, PairedSplit, Split};
pub use model_file::{decode_model, encode_model, read_model, write_model, MODEL_MAGIC, MODEL_VERSION};
pub use scores::{write_scores_binary, write_scores_tsv};
