//! Classifiers over cleaned feature matrices and their JSON model files.

pub mod boost;
pub mod forest;
pub mod knn;
pub mod tree;

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::{format_float, split_column_name, FeatureMatrix};

pub use boost::{BoostParams, BoostedModel};
pub use forest::{ForestModel, ForestParams};
pub use knn::NnModel;
pub use tree::{DecisionTree, TreeNode, TreeParams};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Tree,
    Boosted,
    Forest,
    Nn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Boosted, ModelKind::Forest, ModelKind::Nn, ModelKind::Tree];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Tree => "tree",
            ModelKind::Boosted => "boosted",
            ModelKind::Forest => "rf",
            ModelKind::Nn => "1nn",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tree" | "cart" => Ok(ModelKind::Tree),
            "boosted" | "c50b" | "c5.0b" | "boost" => Ok(ModelKind::Boosted),
            "rf" | "forest" | "random-forest" => Ok(ModelKind::Forest),
            "1nn" | "nn" | "1nn-ed" => Ok(ModelKind::Nn),
            other => Err(Error::Config(format!("unknown model {other:?}"))),
        }
    }
}

/// Hyperparameters for every model family.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModelParams {
    pub tree: TreeParams,
    pub boost: BoostParams,
    pub forest: ForestParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Model {
    Tree {
        hyperparams: TreeParams,
        tree: DecisionTree,
    },
    Boosted(BoostedModel),
    Forest(ForestModel),
    Nn(NnModel),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Tree { .. } => ModelKind::Tree,
            Model::Boosted(_) => ModelKind::Boosted,
            Model::Forest(_) => ModelKind::Forest,
            Model::Nn(_) => ModelKind::Nn,
        }
    }

    fn predict_row(&self, row: &[f64]) -> usize {
        match self {
            Model::Tree { tree, .. } => tree.predict_row(row),
            Model::Boosted(m) => m.predict_row(row),
            Model::Forest(m) => m.predict_row(row),
            Model::Nn(m) => m.predict_row(row),
        }
    }
}

/// A fitted classifier plus everything needed to check its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub version: u32,
    pub dataset: String,
    pub dims: usize,
    pub catalog: Vec<String>,
    pub columns: Vec<String>,
    /// Sorted class labels; predictions index into this list.
    pub classes: Vec<String>,
    pub model: Model,
}

fn encode(labels: &[String]) -> (Vec<String>, Vec<usize>) {
    let mut classes = labels.to_vec();
    classes.sort();
    classes.dedup();
    let y = labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label is in its own alphabet"))
        .collect();
    (classes, y)
}

impl TrainedModel {
    pub fn fit(
        kind: ModelKind,
        train: &FeatureMatrix,
        params: &ModelParams,
        dataset: &str,
        dims: usize,
        catalog: &[String],
    ) -> Result<TrainedModel> {
        if train.n_rows() == 0 {
            return Err(Error::Model("empty training matrix".into()));
        }
        if train.n_cols() == 0 {
            return Err(Error::Model("training matrix has no columns".into()));
        }
        let x = train.to_dense()?;
        let (classes, y) = encode(&train.labels);
        let k = classes.len();
        let model = match kind {
            ModelKind::Tree => Model::Tree {
                hyperparams: params.tree,
                tree: DecisionTree::fit(&x, &y, k, params.tree),
            },
            ModelKind::Boosted => Model::Boosted(BoostedModel::fit(&x, &y, k, params.boost)),
            ModelKind::Forest => Model::Forest(ForestModel::fit(&x, &y, k, params.forest)),
            ModelKind::Nn => Model::Nn(NnModel::fit(&x, &y).expect("non-empty training rows")),
        };
        Ok(TrainedModel {
            version: MODEL_VERSION,
            dataset: dataset.to_string(),
            dims,
            catalog: catalog.to_vec(),
            columns: train.column_names.clone(),
            classes,
            model,
        })
    }

    pub fn predict(&self, matrix: &FeatureMatrix) -> Result<Vec<String>> {
        if matrix.column_names != self.columns {
            let missing: Vec<&String> = self
                .columns
                .iter()
                .filter(|c| matrix.column_index(c).is_none())
                .collect();
            return Err(Error::Model(format!(
                "column mismatch: model expects {} columns, matrix has {} (missing: {:?})",
                self.columns.len(),
                matrix.n_cols(),
                missing
            )));
        }
        let x = matrix.to_dense()?;
        Ok(x.iter()
            .map(|row| self.classes[self.model.predict_row(row)].clone())
            .collect())
    }

    /// Mean Decrease Gini per column; only forests carry importances.
    pub fn importance(&self) -> Option<&[f64]> {
        match &self.model {
            Model::Forest(f) => Some(&f.importance),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<TrainedModel> {
        let m: TrainedModel = serde_json::from_str(text)?;
        if m.version != MODEL_VERSION {
            return Err(Error::Model(format!("unsupported model version {}", m.version)));
        }
        Ok(m)
    }
}

/// Writes `column,name,importance` rows, where `name` is the bare feature.
pub fn write_importance_csv<W: Write>(columns: &[String], importance: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["column", "name", "importance"])?;
    for (c, v) in columns.iter().zip(importance) {
        let name = split_column_name(c).map_or(c.as_str(), |(_, f)| f);
        w.write_record([c.as_str(), name, &format_float(*v)])?;
    }
    w.flush().map_err(|e| Error::io("<importance csv>", e))?;
    Ok(())
}
