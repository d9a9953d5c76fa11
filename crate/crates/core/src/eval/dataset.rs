//! Seeded train/test assembly of labelled configurations.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EvalError, Label};
use crate::config::ConfigKey;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fraction of each class assigned to the training split.
    pub train_fraction: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub key: ConfigKey,
    pub label: Label,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub entries: Vec<DatasetEntry>,
    pub n_positive: usize,
    pub n_negative: usize,
    /// Class-balance weight for positives: `n_negative / n_positive`.
    pub positive_weight: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssembledDataset {
    pub spec: SplitSpec,
    pub train: DatasetSplit,
    pub test: DatasetSplit,
}

fn split_class(keys: &[ConfigKey], spec: &SplitSpec, salt: u64) -> (Vec<ConfigKey>, Vec<ConfigKey>) {
    // Sorting first makes the result independent of input order.
    let mut keys: Vec<ConfigKey> = keys.to_vec();
    keys.sort();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ salt);
    keys.shuffle(&mut rng);
    let n_train = ((keys.len() as f64) * spec.train_fraction).round() as usize;
    let test = keys.split_off(n_train.min(keys.len()));
    (keys, test)
}

fn make_split(pos: Vec<ConfigKey>, neg: Vec<ConfigKey>) -> DatasetSplit {
    let (n_positive, n_negative) = (pos.len(), neg.len());
    let mut entries: Vec<DatasetEntry> = pos
        .into_iter()
        .map(|key| DatasetEntry { key, label: Label::Positive })
        .chain(neg.into_iter().map(|key| DatasetEntry { key, label: Label::Negative }))
        .collect();
    entries.sort_by(|a, b| a.key.cmp(&b.key));
    DatasetSplit {
        entries,
        n_positive,
        n_negative,
        positive_weight: (n_positive > 0).then(|| n_negative as f64 / n_positive as f64),
    }
}

/// Splits each class separately with a seeded shuffle, so both splits keep
/// the class proportions.
pub fn assemble_dataset(
    positives: &[ConfigKey],
    negatives: &[ConfigKey],
    spec: SplitSpec,
) -> Result<AssembledDataset, EvalError> {
    if !(0.0..=1.0).contains(&spec.train_fraction) {
        return Err(EvalError::Invalid(format!("train fraction {} outside [0, 1]", spec.train_fraction)));
    }
    let pos_set: BTreeSet<&ConfigKey> = positives.iter().collect();
    let neg_set: BTreeSet<&ConfigKey> = negatives.iter().collect();
    if let Some(k) = pos_set.intersection(&neg_set).next() {
        return Err(EvalError::OverlappingKeys(k.id()));
    }
    if pos_set.len() != positives.len() || neg_set.len() != negatives.len() {
        return Err(EvalError::Invalid("duplicate key within a class".into()));
    }
    let (pos_train, pos_test) = split_class(positives, &spec, 0x706f_73);
    let (neg_train, neg_test) = split_class(negatives, &spec, 0x6e65_67);
    Ok(AssembledDataset {
        spec,
        train: make_split(pos_train, neg_train),
        test: make_split(pos_test, neg_test),
    })
}
