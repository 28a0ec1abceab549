//! Random forest with Mean Decrease Gini importance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{argmax_class, DecisionTree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Columns tried per split; `None` means floor(sqrt(p)).
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 500,
            mtry: None,
            min_leaf: 1,
            max_depth: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub hyperparams: ForestParams,
    /// Resolved mtry.
    pub mtry: usize,
    pub trees: Vec<DecisionTree>,
    /// Mean Decrease Gini per column, averaged over trees.
    pub importance: Vec<f64>,
}

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-tree seed derived from the forest seed and the tree index.
pub fn tree_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}

pub fn default_mtry(p: usize) -> usize {
    ((p as f64).sqrt().floor() as usize).max(1)
}

impl ForestModel {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, params: ForestParams) -> ForestModel {
        let n = x.len();
        let p = x.first().map_or(0, Vec::len);
        let mtry = params.mtry.unwrap_or_else(|| default_mtry(p)).clamp(1, p.max(1));
        let weights = vec![1.0; n];
        let tree_params = TreeParams {
            min_leaf: params.min_leaf,
            max_depth: params.max_depth,
            mtry: Some(mtry),
        };
        let trees: Vec<DecisionTree> = (0..params.n_trees)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(params.seed, i));
                let samples: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.gen_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit_weighted(x, y, &weights, samples, n_classes, tree_params, Some(&mut rng))
            })
            .collect();
        let mut importance = vec![0.0; p];
        for t in &trees {
            for (acc, v) in importance.iter_mut().zip(t.importances(p)) {
                *acc += v;
            }
        }
        let k = trees.len().max(1) as f64;
        importance.iter_mut().for_each(|v| *v /= k);
        ForestModel {
            hyperparams: params,
            mtry,
            trees,
            importance,
        }
    }

    /// Majority vote over trees; ties go to the lowest class index.
    pub fn predict_row(&self, row: &[f64]) -> usize {
        let n_classes = self.trees.first().map_or(1, |t| t.n_classes);
        let mut votes = vec![0.0; n_classes];
        for t in &self.trees {
            votes[t.predict_row(row)] += 1.0;
        }
        argmax_class(&votes)
    }
}
