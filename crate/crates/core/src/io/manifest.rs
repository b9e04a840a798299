use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::feature_file::read_feature_file;
use crate::error::{CsaError, Result};
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Class labels may be written as strings or integers; both are kept as text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum RawLabel {
    Int(i64),
    Text(String),
}

fn de_label<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
    Ok(Option::<RawLabel>::deserialize(d)?.map(|l| match l {
        RawLabel::Int(i) => i.to_string(),
        RawLabel::Text(s) => s,
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairEntry {
    pub id1: String,
    pub id2: String,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "de_label")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

/// Paired dataset description. Feature paths are relative to the manifest file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub dataset: String,
    #[serde(default)]
    pub encoder1: String,
    #[serde(default)]
    pub encoder2: String,
    pub features1: PathBuf,
    pub features2: PathBuf,
    pub pairs: Vec<PairEntry>,
}

/// Column-aligned features of one split: column `j` of `first` is paired with
/// column `j` of `second`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSplit {
    pub first: FeatureMatrix,
    pub second: FeatureMatrix,
    pub labels: Option<Vec<String>>,
}

impl PairedSplit {
    pub fn len(&self) -> usize {
        self.first.n_items()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedDataset {
    pub manifest: Manifest,
    /// Pairs without a split assignment belong here.
    pub train: Option<PairedSplit>,
    pub test: Option<PairedSplit>,
}

impl PairedDataset {
    pub fn train(&self) -> Result<&PairedSplit> {
        self.train.as_ref().ok_or_else(|| CsaError::Manifest("no training pairs".into()))
    }

    /// The test split, or the training split when the manifest has none.
    pub fn evaluation(&self) -> &PairedSplit {
        self.test.as_ref().or(self.train.as_ref()).expect("validated: at least one split")
    }
}

fn resolve(base: &Path, p: &Path) -> Result<PathBuf> {
    let full = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    if !full.is_file() {
        return Err(CsaError::MissingFile(full));
    }
    Ok(full)
}

fn validate_pairs(pairs: &[PairEntry]) -> Result<()> {
    if pairs.is_empty() {
        return Err(CsaError::Manifest("no pairs".into()));
    }
    let with_split = pairs.iter().filter(|p| p.split.is_some()).count();
    if with_split != 0 && with_split != pairs.len() {
        return Err(CsaError::Manifest(format!(
            "split assigned to {with_split} of {} pairs; assign every pair or none",
            pairs.len()
        )));
    }
    let labelled = pairs.iter().filter(|p| p.label.is_some()).count();
    if labelled != 0 && labelled != pairs.len() {
        return Err(CsaError::Manifest(format!("label given for {labelled} of {} pairs", pairs.len())));
    }

    let mut split_of: HashMap<(&str, &str), Split> = HashMap::new();
    let mut seen1: HashSet<(Split, &str)> = HashSet::new();
    let mut seen2: HashSet<(Split, &str)> = HashSet::new();
    for p in pairs {
        let split = p.split.unwrap_or(Split::Train);
        match split_of.insert((&p.id1, &p.id2), split) {
            Some(prev) if prev != split => {
                return Err(CsaError::OverlappingSplit { id1: p.id1.clone(), id2: p.id2.clone() })
            }
            _ => {}
        }
        if !seen1.insert((split, &p.id1)) {
            return Err(CsaError::DuplicateId(p.id1.clone()));
        }
        if !seen2.insert((split, &p.id2)) {
            return Err(CsaError::DuplicateId(p.id2.clone()));
        }
    }
    Ok(())
}

fn gather(features: &FeatureMatrix, ids: &[&str], modality: u8) -> Result<FeatureMatrix> {
    let index: HashMap<&str, usize> = features.ids().iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let idx = ids
        .iter()
        .map(|id| index.get(id).copied().ok_or_else(|| CsaError::MissingId { id: id.to_string(), modality }))
        .collect::<Result<Vec<_>>>()?;
    features.select(&idx)
}

fn build_split(f1: &FeatureMatrix, f2: &FeatureMatrix, pairs: &[&PairEntry]) -> Result<Option<PairedSplit>> {
    if pairs.is_empty() {
        return Ok(None);
    }
    let ids1: Vec<&str> = pairs.iter().map(|p| p.id1.as_str()).collect();
    let ids2: Vec<&str> = pairs.iter().map(|p| p.id2.as_str()).collect();
    let labels = pairs.iter().map(|p| p.label.clone()).collect::<Option<Vec<_>>>();
    Ok(Some(PairedSplit { first: gather(f1, &ids1, 1)?, second: gather(f2, &ids2, 2)?, labels }))
}

pub fn parse_manifest(text: &str) -> Result<Manifest> {
    serde_json::from_str(text).map_err(|e| CsaError::Manifest(e.to_string()))
}

/// Reads, validates and materializes a manifest and its feature files.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<PairedDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| CsaError::io(path, e))?;
    let manifest = parse_manifest(&text)?;
    validate_pairs(&manifest.pairs)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let f1 = read_feature_file(resolve(base, &manifest.features1)?)?;
    let f2 = read_feature_file(resolve(base, &manifest.features2)?)?;

    let pick = |s: Split| manifest.pairs.iter().filter(|p| p.split.unwrap_or(Split::Train) == s).collect::<Vec<_>>();
    let train = build_split(&f1, &f2, &pick(Split::Train))?;
    let test = build_split(&f1, &f2, &pick(Split::Test))?;
    Ok(PairedDataset { manifest, train, test })
}

pub fn save_manifest(path: impl AsRef<Path>, manifest: &Manifest) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(manifest).map_err(|e| CsaError::Manifest(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CsaError::io(path, e))
}
