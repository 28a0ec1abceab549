//! Train-fitted cleaning of feature matrices: non-finite values become NA,
//! columns that are entirely NA on the training data are dropped, NAs are
//! imputed with column means, and columns left with a single distinct value
//! are dropped. The same column set is applied to test data.

use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::stats::sum;
use crate::tabular::FeatureMatrix;

pub const PREPROCESSOR_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ImputationMode {
    /// Each split is imputed with its own column means.
    #[default]
    PerSplit,
    /// Both splits are imputed with the training means.
    TrainMeans,
}

impl std::str::FromStr for ImputationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "per-split" | "split" => Ok(ImputationMode::PerSplit),
            "train-means" | "train" => Ok(ImputationMode::TrainMeans),
            other => Err(Error::Config(format!("unknown imputation mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// State learned from the training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPreprocessor {
    pub version: u32,
    pub dropped_all_na: Vec<String>,
    pub dropped_constant: Vec<String>,
    /// Surviving columns in training order, with their training means.
    pub train_means: IndexMap<String, f64>,
}

/// Replaces every non-finite cell with NA.
pub fn sanitize(matrix: &FeatureMatrix) -> FeatureMatrix {
    let mut out = matrix.clone();
    for row in &mut out.rows {
        for cell in row.iter_mut() {
            if cell.is_some_and(|v| !v.is_finite()) {
                *cell = None;
            }
        }
    }
    out
}

fn column_mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let present: Vec<f64> = values.flatten().filter(|v| v.is_finite()).collect();
    (!present.is_empty()).then(|| sum(&present) / present.len() as f64)
}

pub fn fit(train: &FeatureMatrix) -> Result<FittedPreprocessor> {
    let train = sanitize(train);
    let mut dropped_all_na = Vec::new();
    let mut dropped_constant = Vec::new();
    let mut train_means = IndexMap::new();
    for (j, name) in train.column_names.iter().enumerate() {
        let Some(mean) = column_mean(train.rows.iter().map(|r| r[j])) else {
            dropped_all_na.push(name.clone());
            continue;
        };
        let distinct: BTreeSet<u64> = train
            .rows
            .iter()
            .map(|r| {
                let v = r[j].unwrap_or(mean);
                // fold -0.0 into 0.0
                (v + 0.0).to_bits()
            })
            .collect();
        if distinct.len() <= 1 {
            dropped_constant.push(name.clone());
        } else {
            train_means.insert(name.clone(), mean);
        }
    }
    if train_means.is_empty() {
        return Err(Error::Preprocess("no informative features".into()));
    }
    Ok(FittedPreprocessor {
        version: PREPROCESSOR_VERSION,
        dropped_all_na,
        dropped_constant,
        train_means,
    })
}

impl FittedPreprocessor {
    pub fn columns(&self) -> Vec<String> {
        self.train_means.keys().cloned().collect()
    }

    pub fn transform(&self, matrix: &FeatureMatrix, split: Split, mode: ImputationMode) -> Result<FeatureMatrix> {
        let matrix = sanitize(matrix);
        let mut rows = vec![Vec::with_capacity(self.train_means.len()); matrix.n_rows()];
        for (name, &train_mean) in &self.train_means {
            let j = matrix
                .column_index(name)
                .ok_or_else(|| Error::Preprocess(format!("column {name} not present in matrix")))?;
            let fill = match (mode, split) {
                (ImputationMode::TrainMeans, _) | (ImputationMode::PerSplit, Split::Train) => train_mean,
                (ImputationMode::PerSplit, Split::Test) => {
                    column_mean(matrix.rows.iter().map(|r| r[j])).unwrap_or(train_mean)
                }
            };
            for (out, row) in rows.iter_mut().zip(&matrix.rows) {
                out.push(row[j].unwrap_or(fill));
            }
        }
        FeatureMatrix::new(
            self.columns(),
            rows.into_iter().map(|r| r.into_iter().map(Some).collect()).collect(),
            matrix.labels.clone(),
            matrix.instance_ids.clone(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: FittedPreprocessor = serde_json::from_str(text)?;
        if p.version != PREPROCESSOR_VERSION {
            return Err(Error::Preprocess(format!(
                "unsupported preprocessor version {}",
                p.version
            )));
        }
        Ok(p)
    }
}

/// Fits on train and transforms both splits.
pub fn fit_transform(
    train: &FeatureMatrix,
    test: &FeatureMatrix,
    mode: ImputationMode,
) -> Result<(FittedPreprocessor, FeatureMatrix, FeatureMatrix)> {
    let pre = fit(train)?;
    let tr = pre.transform(train, Split::Train, mode)?;
    let te = pre.transform(test, Split::Test, mode)?;
    Ok((pre, tr, te))
}
